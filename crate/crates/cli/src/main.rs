//! Command-line front end for tree stack automata and PMCFGs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tsa::automaton::{
    enumerate_accepting_runs, enumerate_bounded_automaton_language, recognize, replay,
    check_run_restriction, Configuration, Recognition, SearchBudget, Tsa,
};
use tsa::grammar::{validate_grammar, Pmcfg};
use tsa::normalform::{
    cycle_witness, is_stack_normal_form_bounded, remove_cycles, to_stack_normal_form, SnfStatus,
};
use tsa::{char_word, display_word, Sym};
use tsa_cli::format::{parse_automaton, parse_grammar, print_automaton, print_grammar};
use tsa_cli::harness::cmd_equiv;

const EXIT_OK: u8 = 0;
const EXIT_VIOLATED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tsa",
    about = "Tree stack automata, PMCFGs, and the constructions between them",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BudgetArgs {
    /// Maximum run length explored by the search
    #[arg(long, default_value_t = 200)]
    max_steps: usize,
    /// Maximum consecutive ε-reading steps
    #[arg(long, default_value_t = 100)]
    max_eps: usize,
    /// Cap the stack size during search (narrows the searched language)
    #[arg(long)]
    max_storage: Option<usize>,
}

impl BudgetArgs {
    /// `prune_k`, when set, prunes branches whose stack-entry counters
    /// exceed it; sound only under a matching k-restriction assertion.
    fn budget(&self, prune_k: Option<usize>) -> SearchBudget {
        SearchBudget {
            max_steps: self.max_steps,
            max_eps_between_reads: self.max_eps,
            restriction_k: prune_k,
            max_storage_nodes: self.max_storage,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a grammar or automaton file for well-formedness
    Validate { file: PathBuf },
    /// Compile a grammar into an equivalent tree stack automaton
    G2a {
        grammar: PathBuf,
        /// Write the automaton here instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Compile as-is, without dropping unproductive nonterminals first
        /// (the automaton may then accept more than the grammar generates)
        #[arg(long)]
        raw: bool,
    },
    /// Convert a k-restricted automaton into an equivalent k-MCFG
    A2g {
        automaton: PathBuf,
        /// The restriction bound the automaton is asserted to obey
        #[arg(long)]
        k: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Search for an accepting run on a word
    Recognize {
        automaton: PathBuf,
        /// The input word, one terminal per character (empty for ε)
        word: String,
        /// Prune branches whose stack-entry counters exceed this bound
        /// (sound when the automaton is k-restricted as asserted)
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Emit the run and trace as JSON
        #[arg(long)]
        json: bool,
    },
    /// Replay a run file on a word and show the configuration trace
    Replay {
        automaton: PathBuf,
        word: String,
        /// File with whitespace-separated 1-based transition indices
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate the grammar's words up to a length bound
    EnumGrammar {
        grammar: PathBuf,
        #[arg(long)]
        max_len: usize,
        /// Derivation-size budget (number of rule applications)
        #[arg(long, default_value_t = 12)]
        max_nodes: usize,
    },
    /// Enumerate the automaton's words up to a length bound
    EnumAutomaton {
        automaton: PathBuf,
        #[arg(long)]
        max_len: usize,
        /// Prune branches whose stack-entry counters exceed this bound
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Check automaton properties
    #[command(subcommand)]
    Check(CheckCommand),
    /// Apply a normal-form transformation
    #[command(subcommand)]
    Normalize(NormalizeCommand),
    /// Compare the bounded languages of a grammar and an automaton
    Equiv {
        grammar: PathBuf,
        automaton: PathBuf,
        #[arg(long)]
        max_len: usize,
        #[arg(long, default_value_t = 12)]
        max_nodes: usize,
        /// Prune branches whose stack-entry counters exceed this bound
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum CheckCommand {
    /// No nonempty stay run returns to the same state and symbol
    CycleFree { automaton: PathBuf },
    /// Acceptance happens only at the root (bounded check)
    Snf {
        automaton: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Every accepting run found within bounds keeps entry counters ≤ k
    Restriction {
        automaton: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Subcommand)]
enum NormalizeCommand {
    /// Remove stay loops (preserves the language and k-restriction)
    CycleFree {
        automaton: PathBuf,
        #[arg(long, default_value_t = 100)]
        max_iterations: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Move to stack normal form (accept only at the root)
    Snf {
        automaton: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_VIOLATED)
        }
    }
}

fn read_file(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_grammar(path: &Path) -> Result<Pmcfg, String> {
    let text = read_file(path)?;
    let g = parse_grammar(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let violations = validate_grammar(&g);
    if let Some(v) = violations.first() {
        return Err(format!("{}: {v}", path.display()));
    }
    Ok(g)
}

fn load_automaton(path: &Path) -> Result<Tsa, String> {
    let text = read_file(path)?;
    let m = parse_automaton(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(problem) = m.validate().into_iter().next() {
        return Err(format!("{}: {problem}", path.display()));
    }
    Ok(m)
}

fn write_output(output: Option<&Path>, content: &str) -> Result<(), String> {
    match output {
        Some(path) => fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn looks_like_automaton(text: &str) -> bool {
    text.lines().any(|l| {
        let l = l.trim_start();
        l.starts_with("states:") || l.starts_with("trans:") || l.starts_with("stack:")
    })
}

fn trace_json(m: &Tsa, word: &[Sym], run: &[usize], trace: &[Configuration]) -> serde_json::Value {
    serde_json::json!({
        "word": display_word(word),
        "run": run.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "accepting": trace
            .last()
            .is_some_and(|c| m.final_states.contains(&c.state) && c.remaining.is_empty()),
        "trace": trace.iter().map(|c| serde_json::json!({
            "state": c.state.as_str(),
            "stack": c.storage.render(),
            "pointer": c.storage.pointer().to_string(),
            "remaining": display_word(&c.remaining),
        })).collect::<Vec<_>>(),
    })
}

fn print_run(run: &[usize]) -> String {
    run.iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Validate { file } => {
            let text = read_file(&file)?;
            if looks_like_automaton(&text) {
                let m = parse_automaton(&text).map_err(|e| format!("{}: {e}", file.display()))?;
                let problems = m.validate();
                if problems.is_empty() {
                    println!("ok: automaton with {} states, {} transitions", m.states.len(), m.transitions.len());
                    Ok(EXIT_OK)
                } else {
                    for p in &problems {
                        println!("{p}");
                    }
                    Ok(EXIT_VIOLATED)
                }
            } else {
                let g = parse_grammar(&text).map_err(|e| format!("{}: {e}", file.display()))?;
                let violations = validate_grammar(&g);
                if violations.is_empty() {
                    println!("ok: grammar with {} nonterminals, {} rules", g.nonterminals.len(), g.rules.len());
                    Ok(EXIT_OK)
                } else {
                    for v in &violations {
                        println!("{v}");
                    }
                    Ok(EXIT_VIOLATED)
                }
            }
        }
        Command::G2a {
            grammar,
            output,
            raw,
        } => {
            let g = load_grammar(&grammar)?;
            let g = if raw {
                g
            } else {
                tsa::grammar::restrict_to_productive(&g)
            };
            let compiled = tsa::g2a::grammar_to_automaton(&g).map_err(|e| e.to_string())?;
            if let Some(k) = tsa::g2a::restriction_bound(&g) {
                eprintln!("note: the compiled automaton is {k}-restricted");
            }
            write_output(output.as_deref(), &print_automaton(&compiled.tsa))?;
            Ok(EXIT_OK)
        }
        Command::A2g {
            automaton,
            k,
            output,
        } => {
            let m = load_automaton(&automaton)?;
            let g = tsa::a2g::automaton_to_grammar(&m, k).map_err(|e| e.to_string())?;
            let text = print_grammar(&g)?;
            write_output(output.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Recognize {
            automaton,
            word,
            k,
            budget,
            json,
        } => {
            let m = load_automaton(&automaton)?;
            let word = char_word(&word);
            match recognize(&m, &word, &budget.budget(k)) {
                Recognition::Accepted(run) => {
                    if json {
                        let trace = replay(&m, &word, &run).map_err(|e| e.to_string())?;
                        println!("{}", trace_json(&m, &word, &run, &trace));
                    } else {
                        println!("accepted");
                        println!("run: {}", print_run(&run));
                    }
                    Ok(EXIT_OK)
                }
                Recognition::Rejected => {
                    println!("rejected");
                    Ok(EXIT_VIOLATED)
                }
                Recognition::Truncated => {
                    println!("inconclusive: search truncated by the budget");
                    Ok(EXIT_INCONCLUSIVE)
                }
            }
        }
        Command::Replay {
            automaton,
            word,
            run: run_file,
            json,
        } => {
            let m = load_automaton(&automaton)?;
            let word = char_word(&word);
            let text = read_file(&run_file)?;
            let mut run = Vec::new();
            for token in text.split_whitespace() {
                let index: usize = token
                    .parse()
                    .ok()
                    .filter(|&i| i >= 1)
                    .ok_or(format!("bad transition index {token}"))?;
                run.push(index - 1);
            }
            let trace = replay(&m, &word, &run).map_err(|e| e.to_string())?;
            if json {
                println!("{}", trace_json(&m, &word, &run, &trace));
            } else {
                for c in &trace {
                    println!("{c}");
                }
                let accepting = m.final_states.contains(&trace.last().unwrap().state);
                println!("accepting: {accepting}");
            }
            Ok(EXIT_OK)
        }
        Command::EnumGrammar {
            grammar,
            max_len,
            max_nodes,
        } => {
            let g = load_grammar(&grammar)?;
            for word in tsa::grammar::enumerate_bounded_language(&g, max_len, max_nodes) {
                println!("{}", display_word(&word));
            }
            Ok(EXIT_OK)
        }
        Command::EnumAutomaton {
            automaton,
            max_len,
            k,
            budget,
        } => {
            let m = load_automaton(&automaton)?;
            let result = enumerate_bounded_automaton_language(&m, max_len, &budget.budget(k));
            for word in &result.words {
                println!("{}", display_word(word));
            }
            if result.truncated {
                eprintln!("note: search truncated; the enumeration may be incomplete");
                Ok(EXIT_INCONCLUSIVE)
            } else {
                Ok(EXIT_OK)
            }
        }
        Command::Check(check) => run_check(check),
        Command::Normalize(normalize) => run_normalize(normalize),
        Command::Equiv {
            grammar,
            automaton,
            max_len,
            max_nodes,
            k,
            budget,
            json,
        } => {
            let g = load_grammar(&grammar)?;
            let m = load_automaton(&automaton)?;
            let report = cmd_equiv(&g, &m, max_len, max_nodes, &budget.budget(k));
            if json {
                println!(
                    "{}",
                    serde_json::json!({
                        "max_len": report.max_len,
                        "only_in_grammar": report.only_in_grammar,
                        "only_in_automaton": report.only_in_automaton,
                        "truncated": report.truncated,
                        "equivalent": report.equivalent(),
                    })
                );
            } else if report.equivalent() {
                println!("equivalent up to length {}", report.max_len);
            } else {
                for w in &report.only_in_grammar {
                    println!("only in grammar: {w}");
                }
                for w in &report.only_in_automaton {
                    println!("only in automaton: {w}");
                }
                if report.truncated {
                    println!("search truncated; comparison inconclusive");
                }
            }
            if !report.only_in_grammar.is_empty() || !report.only_in_automaton.is_empty() {
                Ok(EXIT_VIOLATED)
            } else if report.truncated {
                Ok(EXIT_INCONCLUSIVE)
            } else {
                Ok(EXIT_OK)
            }
        }
    }
}

fn run_check(check: CheckCommand) -> Result<u8, String> {
    match check {
        CheckCommand::CycleFree { automaton } => {
            let m = load_automaton(&automaton)?;
            match cycle_witness(&m) {
                None => {
                    println!("cycle-free");
                    Ok(EXIT_OK)
                }
                Some(w) => {
                    println!(
                        "stay loop at state {} with symbol {}: {}",
                        w.state,
                        w.symbol,
                        print_run(&w.run)
                    );
                    Ok(EXIT_VIOLATED)
                }
            }
        }
        CheckCommand::Snf {
            automaton,
            max_len,
            budget,
        } => {
            let m = load_automaton(&automaton)?;
            match is_stack_normal_form_bounded(&m, max_len, &budget.budget(None)) {
                SnfStatus::Holds => {
                    println!("stack normal form holds within bounds");
                    Ok(EXIT_OK)
                }
                SnfStatus::Violated(run) => {
                    println!("violated by run: {}", print_run(&run));
                    Ok(EXIT_VIOLATED)
                }
                SnfStatus::Inconclusive => {
                    println!("inconclusive: search truncated by the budget");
                    Ok(EXIT_INCONCLUSIVE)
                }
            }
        }
        CheckCommand::Restriction {
            automaton,
            k,
            max_len,
            budget,
        } => {
            let m = load_automaton(&automaton)?;
            // deliberately no counter prune: pruning at k would hide the
            // very runs the check is looking for
            let found = enumerate_accepting_runs(&m, max_len, &budget.budget(None));
            for (word, run) in &found.runs {
                if !check_run_restriction(&m, word, run, k).map_err(|e| e.to_string())? {
                    println!(
                        "violated on {} by run: {}",
                        display_word(word),
                        print_run(run)
                    );
                    return Ok(EXIT_VIOLATED);
                }
            }
            if found.truncated {
                println!(
                    "no violation among {} accepting runs (search truncated)",
                    found.runs.len()
                );
                Ok(EXIT_INCONCLUSIVE)
            } else {
                println!(
                    "{k}-restriction holds on all {} accepting runs within bounds",
                    found.runs.len()
                );
                Ok(EXIT_OK)
            }
        }
    }
}

fn run_normalize(normalize: NormalizeCommand) -> Result<u8, String> {
    match normalize {
        NormalizeCommand::CycleFree {
            automaton,
            max_iterations,
            output,
        } => {
            let m = load_automaton(&automaton)?;
            let rewritten = remove_cycles(&m, max_iterations).map_err(|e| e.to_string())?;
            write_output(output.as_deref(), &print_automaton(&rewritten))?;
            Ok(EXIT_OK)
        }
        NormalizeCommand::Snf { automaton, output } => {
            let m = load_automaton(&automaton)?;
            let rewritten = to_stack_normal_form(&m);
            write_output(output.as_deref(), &print_automaton(&rewritten))?;
            Ok(EXIT_OK)
        }
    }
}
