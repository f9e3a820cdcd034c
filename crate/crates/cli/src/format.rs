//! Parsers and canonical printers for the grammar and automaton file formats.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use tsa::automaton::{Transition, Tsa};
use tsa::grammar::{Composition, Item, Pmcfg, Rule, Variable};
use tsa::treestack::{Instruction, Predicate};
use tsa::Sym;

/// A parse failure at a source position (both 1-based).
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

fn err<T>(line: usize, col: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        col,
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Word(String),
    Quoted(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
}

/// Splits a grammar line into tokens. A `#` at the start of a line or after
/// whitespace (and outside quotes) starts a comment; elsewhere it is an
/// ordinary name character, so nonterminals like `⟨2,2,3,3;#,#,#⟩` survive.
/// Words keep embedded commas (nonterminal names may contain them); a lone
/// `,` token acts as a separator.
fn tokenize_grammar_line(line_no: usize, line: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let col = i + 1;
        match chars[i] {
            '#' if i == 0 || chars[i - 1].is_whitespace() => break,
            c if c.is_whitespace() => i += 1,
            '"' => {
                let mut content = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return err(line_no, col, "unterminated string"),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some(&c) => {
                            content.push(c);
                            i += 1;
                        }
                    }
                }
                out.push((Token::Quoted(content), col));
            }
            '[' => {
                out.push((Token::LBracket, col));
                i += 1;
            }
            ']' => {
                out.push((Token::RBracket, col));
                i += 1;
            }
            '(' => {
                out.push((Token::LParen, col));
                i += 1;
            }
            ')' => {
                out.push((Token::RParen, col));
                i += 1;
            }
            _ => {
                let start = i;
                while i < chars.len()
                    && !chars[i].is_whitespace()
                    && !"[]()\"".contains(chars[i])
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push((Token::Word(word), col));
            }
        }
    }
    Ok(out)
}

/// Recognises `x<i>.<j>`; a word that starts like a variable but fails the
/// shape is a syntax error rather than a name.
fn classify_word(line: usize, col: usize, word: &str) -> Result<Option<Variable>, ParseError> {
    let mut chars = word.chars();
    if chars.next() != Some('x') || !chars.next().is_some_and(|c| c.is_ascii_digit()) {
        return Ok(None);
    }
    let rest = &word[1..];
    let Some((arg, comp)) = rest.split_once('.') else {
        return err(line, col, format!("malformed variable token {word}"));
    };
    let (Ok(arg), Ok(comp)) = (arg.parse::<usize>(), comp.parse::<usize>()) else {
        return err(line, col, format!("malformed variable token {word}"));
    };
    if arg == 0 || comp == 0 {
        return err(line, col, format!("variable indices must be positive: {word}"));
    }
    Ok(Some(Variable::new(arg, comp)))
}

struct ParsedRule {
    lhs: Sym,
    components: Vec<Vec<Item>>,
    rhs: Vec<Sym>,
}

/// Parses the grammar format. Sorts are read off the parsed rules: a
/// nonterminal with rules gets the fan-out of its first rule; a rule-less
/// one gets sort 1 if initial, otherwise the largest component index its
/// uses require (1 if never used in a variable position).
pub fn parse_grammar(text: &str) -> Result<Pmcfg, ParseError> {
    let mut initials: Vec<(Sym, usize, usize)> = Vec::new();
    let mut rules: Vec<ParsedRule> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize_grammar_line(line_no, raw_line)?;
        if tokens.is_empty() {
            continue;
        }
        if let (Token::Word(w), col) = &tokens[0] {
            if w == "initial:" {
                for (t, c) in &tokens[1..] {
                    match t {
                        Token::Word(name) => {
                            initials.push((parse_nonterminal(line_no, *c, name)?, line_no, *c))
                        }
                        _ => return err(line_no, *c, "expected nonterminal name"),
                    }
                }
                continue;
            }
            if w.starts_with("initial") {
                return err(line_no, *col, "expected 'initial:'");
            }
        }
        rules.push(parse_rule_line(line_no, &tokens)?);
    }

    // assign sorts
    let mut sorts: BTreeMap<Sym, usize> = BTreeMap::new();
    for rule in &rules {
        sorts.entry(rule.lhs.clone()).or_insert(rule.components.len());
    }
    let mut needed: BTreeMap<Sym, usize> = BTreeMap::new();
    for rule in &rules {
        let mut max_comp: BTreeMap<usize, usize> = BTreeMap::new();
        for item in rule.components.iter().flatten() {
            if let Item::Var(v) = item {
                let slot = max_comp.entry(v.arg_index).or_insert(0);
                *slot = (*slot).max(v.comp_index);
            }
        }
        for (arg, nt) in rule.rhs.iter().enumerate() {
            let used = max_comp.get(&(arg + 1)).copied().unwrap_or(1);
            let slot = needed.entry(nt.clone()).or_insert(1);
            *slot = (*slot).max(used);
        }
    }
    for (init, _, _) in &initials {
        sorts.entry(init.clone()).or_insert(1);
    }
    for rule in &rules {
        for nt in &rule.rhs {
            let minimum = needed.get(nt).copied().unwrap_or(1);
            sorts.entry(nt.clone()).or_insert(minimum);
        }
    }

    let mut terminals = BTreeSet::new();
    for rule in &rules {
        for item in rule.components.iter().flatten() {
            if let Item::Terminal(t) = item {
                terminals.insert(t.clone());
            }
        }
    }

    let rules = rules
        .into_iter()
        .map(|r| {
            let arg_sorts = r.rhs.iter().map(|nt| sorts[nt]).collect();
            Rule {
                lhs: r.lhs,
                comp: Composition {
                    arg_sorts,
                    components: r.components,
                },
                rhs: r.rhs,
            }
        })
        .collect();
    Ok(Pmcfg {
        nonterminals: sorts,
        terminals,
        initials: initials.into_iter().map(|(nt, _, _)| nt).collect(),
        rules,
    })
}

fn parse_nonterminal(line: usize, col: usize, word: &str) -> Result<Sym, ParseError> {
    if classify_word(line, col, word)?.is_some() {
        return err(line, col, format!("{word} is a variable, not a nonterminal"));
    }
    let trimmed = word.strip_suffix(',').unwrap_or(word);
    if trimmed.is_empty() {
        return err(line, col, "empty nonterminal name");
    }
    Ok(Sym::new(trimmed))
}

fn parse_rule_line(line: usize, tokens: &[(Token, usize)]) -> Result<ParsedRule, ParseError> {
    let mut pos = 0;
    let take = |pos: &mut usize| -> Option<&(Token, usize)> {
        let t = tokens.get(*pos);
        *pos += 1;
        t
    };
    let last_col = tokens.last().map(|(_, c)| *c).unwrap_or(1);

    let lhs = match take(&mut pos) {
        Some((Token::Word(w), c)) => parse_nonterminal(line, *c, w)?,
        Some((_, c)) => return err(line, *c, "expected a rule 'LHS -> [ ... ] ( ... )'"),
        None => return err(line, last_col, "expected a rule"),
    };
    match take(&mut pos) {
        Some((Token::Word(w), _)) if w == "->" => {}
        Some((_, c)) => return err(line, *c, "expected '->'"),
        None => return err(line, last_col, "expected '->'"),
    }
    match take(&mut pos) {
        Some((Token::LBracket, _)) => {}
        Some((_, c)) => return err(line, *c, "expected '['"),
        None => return err(line, last_col, "expected '['"),
    }

    let mut components: Vec<Vec<Item>> = vec![Vec::new()];
    loop {
        match take(&mut pos) {
            None => return err(line, last_col, "unterminated component list"),
            Some((Token::RBracket, _)) => break,
            Some((Token::Quoted(s), _)) => {
                let comp = components.last_mut().unwrap();
                for c in s.chars() {
                    comp.push(Item::Terminal(Sym::from(c)));
                }
            }
            Some((Token::Word(w), c)) if w == "," => {
                let _ = c;
                components.push(Vec::new());
            }
            Some((Token::Word(w), c)) => match classify_word(line, *c, w)? {
                Some(var) => components.last_mut().unwrap().push(Item::Var(var)),
                None => {
                    return err(
                        line,
                        *c,
                        format!("expected a quoted terminal string or variable, found {w}"),
                    )
                }
            },
            Some((_, c)) => return err(line, *c, "unexpected token in component"),
        }
    }

    match take(&mut pos) {
        Some((Token::LParen, _)) => {}
        Some((_, c)) => return err(line, *c, "expected '('"),
        None => return err(line, last_col, "expected '('"),
    }
    let mut rhs = Vec::new();
    loop {
        match take(&mut pos) {
            None => return err(line, last_col, "unterminated argument list"),
            Some((Token::RParen, _)) => break,
            Some((Token::Word(w), c)) if w != "," => rhs.push(parse_nonterminal(line, *c, w)?),
            Some((Token::Word(_), _)) => {}
            Some((_, c)) => return err(line, *c, "expected nonterminal name"),
        }
    }
    if let Some((_, c)) = take(&mut pos) {
        return err(line, *c, "unexpected trailing tokens");
    }
    Ok(ParsedRule {
        lhs,
        components,
        rhs,
    })
}

/// Prints a grammar in canonical form. Fails when a terminal is not a
/// single character, since the format spells terminals as characters.
pub fn print_grammar(g: &Pmcfg) -> Result<String, String> {
    let mut out = String::new();
    if !g.initials.is_empty() {
        let names: Vec<&str> = g.initials.iter().map(Sym::as_str).collect();
        out.push_str(&format!("initial: {}\n", names.join(" ")));
    }
    for rule in &g.rules {
        let mut comps = Vec::new();
        for comp in &rule.comp.components {
            let mut parts: Vec<String> = Vec::new();
            let mut run = String::new();
            for item in comp {
                match item {
                    Item::Terminal(t) => {
                        if t.as_str().chars().count() != 1 {
                            return Err(format!(
                                "terminal {t} is not a single character; the grammar format cannot spell it"
                            ));
                        }
                        run.push_str(t.as_str());
                    }
                    Item::Var(v) => {
                        if !run.is_empty() {
                            parts.push(format!("\"{run}\""));
                            run.clear();
                        }
                        parts.push(v.to_string());
                    }
                }
            }
            if !run.is_empty() {
                parts.push(format!("\"{run}\""));
            }
            if parts.is_empty() {
                parts.push("\"\"".to_string());
            }
            comps.push(parts.join(" "));
        }
        let rhs: Vec<&str> = rule.rhs.iter().map(Sym::as_str).collect();
        let rhs = if rhs.is_empty() {
            "( )".to_string()
        } else {
            format!("( {} )", rhs.join(", "))
        };
        out.push_str(&format!(
            "{} -> [ {} ] {}\n",
            rule.lhs,
            comps.join(" , "),
            rhs
        ));
    }
    Ok(out)
}

/// Parses the automaton format; section lines may come in any order, all
/// state and symbol references are checked.
pub fn parse_automaton(text: &str) -> Result<Tsa, ParseError> {
    let mut states: Vec<Sym> = Vec::new();
    let mut stack_alphabet: Vec<Sym> = Vec::new();
    let mut initial: Option<(Sym, usize)> = None;
    let mut finals: Vec<(Sym, usize)> = Vec::new();
    let mut transitions: Vec<(Transition, usize)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((keyword, payload)) = line.split_once(':') else {
            return err(line_no, 1, "expected 'keyword: ...'");
        };
        let fields: Vec<&str> = payload.split_whitespace().collect();
        match keyword {
            "states" => states.extend(fields.iter().map(|s| Sym::new(*s))),
            "stack" => stack_alphabet.extend(fields.iter().map(|s| Sym::new(*s))),
            "initial" => match fields.as_slice() {
                [name] => initial = Some((Sym::new(*name), line_no)),
                _ => return err(line_no, 1, "expected exactly one initial state"),
            },
            "final" => finals.extend(fields.iter().map(|s| (Sym::new(*s), line_no))),
            "trans" => transitions.push((parse_transition(line_no, &fields)?, line_no)),
            other => return err(line_no, 1, format!("unknown section {other}")),
        }
    }

    let state_set: BTreeSet<&Sym> = states.iter().collect();
    let symbol_set: BTreeSet<&Sym> = stack_alphabet.iter().collect();
    let Some((initial_state, init_line)) = initial else {
        return err(text.lines().count().max(1), 1, "missing 'initial:' line");
    };
    if !state_set.contains(&initial_state) {
        return err(init_line, 1, format!("undeclared initial state {initial_state}"));
    }
    for (q, line) in &finals {
        if !state_set.contains(q) {
            return err(*line, 1, format!("undeclared final state {q}"));
        }
    }
    let mut terminals = BTreeSet::new();
    for (t, line) in &transitions {
        for q in [&t.source, &t.target] {
            if !state_set.contains(q) {
                return err(*line, 1, format!("undeclared state {q}"));
            }
        }
        let mentioned = match (&t.predicate, &t.instruction) {
            (Predicate::Equals(s), _) => Some(s),
            _ => None,
        };
        for s in mentioned.into_iter().chain(match &t.instruction {
            Instruction::Push(_, s) | Instruction::Set(s) => Some(s),
            _ => None,
        }) {
            if !symbol_set.contains(s) {
                return err(*line, 1, format!("undeclared stack symbol {s}"));
            }
        }
        if let Some(read) = &t.read {
            terminals.insert(read.clone());
        }
    }

    Ok(Tsa {
        states,
        stack_alphabet,
        terminals,
        initial_state,
        transitions: transitions.into_iter().map(|(t, _)| t).collect(),
        final_states: finals.into_iter().map(|(q, _)| q).collect(),
    })
}

fn parse_transition(line: usize, fields: &[&str]) -> Result<Transition, ParseError> {
    let [source, arrow, target, predicate, instruction] = fields else {
        return err(
            line,
            1,
            "expected 'trans: SRC -READ-> TGT [PREDICATE] INSTRUCTION'",
        );
    };
    let read = arrow
        .strip_prefix('-')
        .and_then(|s| s.strip_suffix("->"))
        .filter(|s| !s.is_empty())
        .ok_or(ParseError {
            line,
            col: 1,
            message: format!("malformed read token {arrow}"),
        })?;
    let read = if read == "eps" { None } else { Some(Sym::new(read)) };

    let predicate = predicate
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or(ParseError {
            line,
            col: 1,
            message: format!("malformed predicate {predicate}"),
        })?;
    let predicate = match predicate {
        "true" => Predicate::True,
        "bottom" => Predicate::Bottom,
        other => match other.strip_prefix("eq(").and_then(|s| s.strip_suffix(')')) {
            Some(sym) if !sym.is_empty() => Predicate::Equals(Sym::new(sym)),
            _ => return err(line, 1, format!("unknown predicate {other}")),
        },
    };

    let instruction = parse_instruction(line, instruction)?;
    Ok(Transition {
        source: Sym::new(*source),
        read,
        predicate,
        instruction,
        target: Sym::new(*target),
    })
}

fn parse_instruction(line: usize, text: &str) -> Result<Instruction, ParseError> {
    match text {
        "id" => return Ok(Instruction::Id),
        "down" => return Ok(Instruction::Down),
        _ => {}
    }
    if let Some(body) = text.strip_prefix("push(").and_then(|s| s.strip_suffix(')')) {
        let Some((n, sym)) = body.split_once(',') else {
            return err(line, 1, format!("malformed instruction {text}"));
        };
        let n: u32 = n
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or(ParseError {
                line,
                col: 1,
                message: format!("bad child index in {text}"),
            })?;
        if sym.is_empty() {
            return err(line, 1, format!("missing symbol in {text}"));
        }
        return Ok(Instruction::Push(n, Sym::new(sym)));
    }
    if let Some(body) = text.strip_prefix("up(").and_then(|s| s.strip_suffix(')')) {
        let n: u32 = body
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or(ParseError {
                line,
                col: 1,
                message: format!("bad child index in {text}"),
            })?;
        return Ok(Instruction::Up(n));
    }
    if let Some(body) = text.strip_prefix("set(").and_then(|s| s.strip_suffix(')')) {
        if body.is_empty() {
            return err(line, 1, format!("missing symbol in {text}"));
        }
        return Ok(Instruction::Set(Sym::new(body)));
    }
    err(line, 1, format!("unknown instruction {text}"))
}

/// Prints an automaton in canonical form.
pub fn print_automaton(m: &Tsa) -> String {
    let mut out = String::new();
    let names = |syms: &[Sym]| -> String {
        syms.iter().map(Sym::as_str).collect::<Vec<_>>().join(" ")
    };
    out.push_str(&format!("states: {}\n", names(&m.states)));
    out.push_str(&format!("initial: {}\n", m.initial_state));
    let finals: Vec<&str> = m.final_states.iter().map(Sym::as_str).collect();
    out.push_str(&format!("final: {}\n", finals.join(" ")));
    out.push_str(&format!("stack: {}\n", names(&m.stack_alphabet)));
    for t in &m.transitions {
        out.push_str(&format!("trans: {t}\n"));
    }
    out
}
