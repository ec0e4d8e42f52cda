//! `rr`: command-line front end.
//!
//! Exit codes: 0 for a positive answer (nonempty, member, success), 1 for a
//! negative one, 2 for any error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rr_core::counter::CounterAutomaton;
use rr_core::engine::{self, IndexMode, MethodChoice};
use rr_core::reductions;
use rr_core::{Cfg, Error, FilterSpec, Nfa};

#[derive(Parser)]
#[command(name = "rr", version, about = "Regular realizability for context-free filters")]
struct Cli {
    /// Emit JSON with sorted keys instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a word against a filter.
    Member {
        #[arg(long)]
        filter: String,
        /// Space-separated symbol names.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// Decide whether the automaton meets the filter.
    Decide(DecideArgs),
    /// Print a shortest word in the intersection.
    Witness(DecideArgs),
    /// Run a construction and print its output file.
    Reduce {
        #[arg(value_enum)]
        kind: ReduceKind,
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[arg(long)]
        nfa: Option<PathBuf>,
        /// Print size counts on stderr.
        #[arg(long)]
        emit_stats: bool,
        /// Keep only productive, reachable triples.
        #[arg(long)]
        productive: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Rational index of a filter over ε-free automata with `--states` states.
    Index {
        #[arg(long)]
        filter: String,
        #[arg(long)]
        states: usize,
        /// Sample this many random automata instead of enumerating all.
        #[arg(long)]
        sample: Option<usize>,
        /// Sampling seed; defaults to $RR_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the divide-and-conquer checker.
    CheckLog2 {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        nfa: PathBuf,
        #[arg(long)]
        stats: bool,
    },
}

#[derive(clap::Args)]
struct DecideArgs {
    #[arg(long)]
    filter: String,
    #[arg(long)]
    nfa: PathBuf,
    #[arg(long, default_value = "auto")]
    method: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceKind {
    BarHillel,
    Cs,
    Mark,
    Ssharpup,
}

/// An error tagged with the file it came from.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: rr_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_nfa(path: &Path) -> Result<Nfa, Failure> {
    in_file(path, Nfa::from_json(&read(path)?))
}

fn load_grammar(path: &Path) -> Result<Cfg, Failure> {
    in_file(path, Cfg::parse(&read(path)?))
}

fn load_filter(name: &str) -> Result<FilterSpec, Failure> {
    if let Some(path) = name.strip_prefix("grammar:") {
        return Ok(FilterSpec::UserGrammar(load_grammar(Path::new(path))?));
    }
    if let Some(path) = name.strip_prefix("counter:") {
        let path = Path::new(path);
        return Ok(FilterSpec::Counter(in_file(
            path,
            CounterAutomaton::from_json(&read(path)?),
        )?));
    }
    Ok(FilterSpec::builtin(name)?)
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON output"));
}

fn show_word(w: &[String]) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        w.join(" ")
    }
}

fn emit(text: &str, output: &Option<PathBuf>) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Member { filter, word } => {
            let f = load_filter(&filter)?;
            let w: Vec<&str> = word.split_whitespace().collect();
            let member = f.member(&w)?;
            if cli.json {
                print_json(&json!({"filter": f.name(), "member": member, "word": w}));
            } else {
                println!("{member}");
            }
            Ok(member)
        }
        Command::Decide(args) => {
            let (f, a, method) = decide_inputs(&args)?;
            let report = in_file(&args.nfa, engine::nrr_decide_with(&a, &f, method))?;
            if cli.json {
                println!("{}", report.to_json());
            } else {
                println!("{}", if report.nonempty { "nonempty" } else { "empty" });
            }
            Ok(report.nonempty)
        }
        Command::Witness(args) => {
            let (f, a, method) = decide_inputs(&args)?;
            let report = in_file(&args.nfa, engine::nrr_decide_with(&a, &f, method))?;
            if cli.json {
                println!("{}", report.to_json());
            } else {
                match &report.witness {
                    Some(w) => println!("{}", show_word(w)),
                    None if report.nonempty => println!("nonempty (no witness for this method)"),
                    None => println!("empty"),
                }
            }
            Ok(report.nonempty)
        }
        Command::Reduce {
            kind,
            grammar,
            nfa,
            emit_stats,
            productive,
            output,
        } => {
            let need_nfa = || {
                nfa.as_deref()
                    .ok_or_else(|| Failure("--nfa is required".into()))
                    .and_then(load_nfa)
            };
            let need_grammar = || {
                grammar
                    .as_deref()
                    .ok_or_else(|| Failure("--grammar is required".into()))
                    .and_then(load_grammar)
            };
            let mut stats: Vec<(&str, usize)> = Vec::new();
            match kind {
                ReduceKind::BarHillel => {
                    let g = need_grammar()?;
                    let a = need_nfa()?;
                    let out = if productive {
                        reductions::bar_hillel_productive(&g.to_cnf(), &a)?
                    } else {
                        reductions::bar_hillel(&g, &a)
                    };
                    stats.push(("nonterminals", out.num_nonterminals()));
                    stats.push(("rules", out.rules().len()));
                    emit(&out.to_text(), &output)?;
                }
                ReduceKind::Cs => {
                    let g = need_grammar()?;
                    let t = reductions::cs_transducer(&g);
                    stats.push(("states", t.num_states()));
                    stats.push(("transitions", t.moves().len()));
                    emit(&t.to_json(), &output)?;
                }
                ReduceKind::Mark => {
                    let a = need_nfa()?;
                    let m = reductions::mark_automaton(&a)?;
                    stats.push(("height_bound", reductions::height_bound(&a)));
                    stats.push(("states", m.nfa.num_states()));
                    stats.push(("transitions", m.nfa.transitions().len()));
                    emit(&m.nfa.to_json(), &output)?;
                }
                ReduceKind::Ssharpup => {
                    let a = need_nfa()?;
                    let b = reductions::reduce_d2_to_ssharpup(&a)?;
                    stats.push(("states", b.num_states()));
                    stats.push(("transitions", b.transitions().len()));
                    emit(&b.to_json(), &output)?;
                }
            }
            if emit_stats {
                for (k, v) in stats {
                    eprintln!("{k}: {v}");
                }
            }
            Ok(true)
        }
        Command::Index {
            filter,
            states,
            sample,
            seed,
        } => {
            let f = load_filter(&filter)?;
            let mode = match sample {
                None => IndexMode::Exhaustive,
                Some(count) => {
                    let seed = match seed {
                        Some(s) => s,
                        None => match std::env::var("RR_SEED") {
                            Ok(s) => s
                                .parse()
                                .map_err(|_| Failure(format!("RR_SEED: not an integer: {s}")))?,
                            Err(_) => 0,
                        },
                    };
                    IndexMode::Sample { count, seed }
                }
            };
            let value = engine::rational_index(&f, states, mode)?;
            if cli.json {
                let mode = match mode {
                    IndexMode::Exhaustive => json!("exhaustive"),
                    IndexMode::Sample { count, seed } => json!({"count": count, "seed": seed}),
                };
                print_json(&json!({"filter": f.name(), "mode": mode, "states": states, "value": value}));
            } else {
                println!("{value}");
            }
            Ok(true)
        }
        Command::CheckLog2 {
            grammar,
            nfa,
            stats,
        } => {
            let g = load_grammar(&grammar)?;
            let a = load_nfa(&nfa)?;
            let g = if g.is_cnf() { g } else { g.to_cnf() };
            let s = engine::log2_check(&g, &a.remove_epsilon())?;
            if cli.json {
                print_json(&serde_json::to_value(s)?);
            } else {
                println!("{}", if s.result { "nonempty" } else { "empty" });
                if stats {
                    println!("max_recursion_depth: {}", s.max_recursion_depth);
                    println!("max_live_triples: {}", s.max_live_triples);
                    if let Some(l) = s.witness_length {
                        println!("witness_length: {l}");
                    }
                }
            }
            Ok(s.result)
        }
    }
}

fn decide_inputs(args: &DecideArgs) -> Result<(FilterSpec, Nfa, MethodChoice), Failure> {
    let f = load_filter(&args.filter)?;
    let a = load_nfa(&args.nfa)?;
    let method: MethodChoice = args
        .method
        .parse()
        .map_err(|_: Error| Failure(format!("unknown method `{}`", args.method)))?;
    Ok((f, a, method))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
