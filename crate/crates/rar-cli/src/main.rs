//! Command-line front end: litmus exploration, axiom checks, candidate
//! enumeration with replay, the canonical-equivalence sweep and DOT/JSON
//! export.
//!
//! Exit codes: 0 clean, 1 violation/failed check, 2 truncated without
//! violation, 3 parse or input error.

use clap::{Parser, Subcommand, ValueEnum};
use rar_core::axioms::{check_validity, check_weak_canonical};
use rar_core::candidates::{enumerate_candidates, linearize, replay, CandidateExecution};
use rar_core::equiv::{check_equivalence, EquivParams};
use rar_core::explore::{explore, ExploreOpts, Mode};
use rar_core::{exec_json, parse, LitmusSpec};
use serde_json::json;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rar",
    about = "Litmus-test model checker for the release/acquire/relaxed fragment of C11",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SearchMode {
    Bfs,
    Dfs,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively explore a litmus test up to the event bound and check
    /// its assertions.
    Explore {
        /// Litmus file path (or bundled test name with --bundled).
        input: String,
        /// Max non-initialising events per execution path (overrides the
        /// file's bound).
        #[arg(long)]
        max_events: Option<u32>,
        #[arg(long, value_enum, default_value_t = SearchMode::Bfs)]
        mode: SearchMode,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Load one of the bundled litmus tests by name.
        #[arg(long)]
        bundled: bool,
    },
    /// Check the validity axioms and weak canonical consistency of an
    /// execution (JSON format).
    CheckAxioms {
        input: String,
        /// Also write the execution's DOT graph to this path.
        #[arg(long)]
        dot: Option<String>,
    },
    /// Enumerate the valid candidate executions of a litmus test.
    Enumerate {
        input: String,
        #[arg(long)]
        max_events: Option<u32>,
        /// Replay every candidate through the operational semantics.
        #[arg(long)]
        replay: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        bundled: bool,
    },
    /// Compare weak canonical consistency against the Coherence axiom over
    /// all candidate executions in a parameter box.
    Equiv {
        #[arg(long, default_value_t = 4)]
        max_events: u32,
        #[arg(long, default_value_t = 2)]
        vars: u16,
        #[arg(long, default_value_t = 2)]
        values: i64,
        #[arg(long, default_value_t = 2)]
        threads: u32,
    },
    /// Render an execution (JSON format) as Graphviz DOT.
    Dot {
        input: String,
        /// Include the derived sw and fr edges.
        #[arg(long)]
        derived: bool,
        #[arg(short, long)]
        out: Option<String>,
    },
}

fn color_enabled() -> bool {
    std::env::var("RAR_COLOR").is_ok_and(|v| v == "1")
}

fn paint(s: &str, code: &str) -> String {
    if color_enabled() {
        format!("\x1b[{code}m{s}\x1b[0m")
    } else {
        s.to_string()
    }
}

fn pass_str(pass: bool) -> String {
    if pass {
        paint("pass", "32")
    } else {
        paint("FAIL", "31")
    }
}

const BUNDLED: &[(&str, &str)] = &[
    ("peterson", include_str!("../../../corpus/peterson.lit")),
    ("mp", include_str!("../../../corpus/mp.lit")),
    ("mp_relaxed", include_str!("../../../corpus/mp_relaxed.lit")),
    ("sb", include_str!("../../../corpus/sb.lit")),
    ("lb", include_str!("../../../corpus/lb.lit")),
    ("reordering", include_str!("../../../corpus/reordering.lit")),
];

fn load_spec(input: &str, bundled: bool) -> Result<LitmusSpec, ExitCode> {
    let text = if bundled {
        match BUNDLED.iter().find(|(name, _)| *name == input) {
            Some((_, text)) => text.to_string(),
            None => {
                eprintln!(
                    "error: no bundled test `{input}` (available: {})",
                    BUNDLED
                        .iter()
                        .map(|(n, _)| *n)
                        .collect::<Vec<_>>()
                        .join(", ")
                );
                return Err(ExitCode::from(3));
            }
        }
    } else {
        match std::fs::read_to_string(input) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {input}: {e}");
                return Err(ExitCode::from(3));
            }
        }
    };
    match parse(&text) {
        Ok(spec) => Ok(spec),
        Err(e) => {
            eprintln!("{input}:{e}");
            Err(ExitCode::from(3))
        }
    }
}

fn load_execution(input: &str) -> Result<(CandidateExecution, rar_core::VarTable), ExitCode> {
    let text = match std::fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {input}: {e}");
            return Err(ExitCode::from(3));
        }
    };
    match exec_json::from_json(&text) {
        Ok(pair) => Ok(pair),
        Err(e) => {
            eprintln!("error: {input}: {e}");
            Err(ExitCode::from(3))
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Explore {
            input,
            max_events,
            mode,
            format,
            bundled,
        } => cmd_explore(&input, max_events, mode, format, bundled),
        Command::CheckAxioms { input, dot } => cmd_check_axioms(&input, dot.as_deref()),
        Command::Enumerate {
            input,
            max_events,
            replay,
            format,
            bundled,
        } => cmd_enumerate(&input, max_events, replay, format, bundled),
        Command::Equiv {
            max_events,
            vars,
            values,
            threads,
        } => cmd_equiv(max_events, vars, values, threads),
        Command::Dot {
            input,
            derived,
            out,
        } => cmd_dot(&input, derived, out.as_deref()),
    }
}

fn cmd_explore(
    input: &str,
    max_events: Option<u32>,
    mode: SearchMode,
    format: Format,
    bundled: bool,
) -> ExitCode {
    let spec = match load_spec(input, bundled) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let mut opts = ExploreOpts::new(max_events.unwrap_or(spec.bound));
    opts.mode = match mode {
        SearchMode::Bfs => Mode::Bfs,
        SearchMode::Dfs => Mode::Dfs,
    };
    let res = explore(&spec, &opts);

    match format {
        Format::Text => {
            println!(
                "{}: {} states, {} transitions, {} final ({} outcomes){}",
                spec.name,
                res.states_visited,
                res.transitions,
                res.final_configurations,
                res.final_outcomes.len(),
                if res.frontier_truncated {
                    " [truncated at bound]"
                } else {
                    ""
                }
            );
            if !res.oracle.clean() {
                println!("{} internal oracle failures:", paint("ERROR", "31"));
                println!("{:?}", res.oracle);
            }
            for w in &res.witnesses {
                println!(
                    "witness   {}  via {} steps:",
                    w.assertion.display(&spec.vars),
                    w.trace.len()
                );
                for label in &w.trace {
                    println!("    {}", label.display(&spec.vars));
                }
            }
            for v in &res.violations {
                println!(
                    "{} {} {}",
                    pass_str(false),
                    v.scope,
                    v.assertion.display(&spec.vars)
                );
                if v.trace.is_empty() && v.scope == rar_core::Scope::Reachable {
                    println!("    (no witness found within bound)");
                } else {
                    for label in &v.trace {
                        println!("    {}", label.display(&spec.vars));
                    }
                }
            }
            if res.violations.is_empty() {
                println!("{}: all assertions hold within bound", pass_str(true));
            }
        }
        Format::Json => {
            let doc = json!({
                "name": spec.name,
                "states": res.states_visited,
                "transitions": res.transitions,
                "final_configurations": res.final_configurations,
                "truncated": res.frontier_truncated,
                "outcomes": res.final_outcomes.iter().map(|o| {
                    spec.vars
                        .iter()
                        .zip(o)
                        .map(|((_, name), v)| (name.to_string(), json!(v)))
                        .collect::<serde_json::Map<String, serde_json::Value>>()
                }).collect::<Vec<_>>(),
                "violations": res.violations.iter().map(|v| json!({
                    "scope": v.scope.to_string(),
                    "assertion": v.assertion.display(&spec.vars).to_string(),
                    "trace": v.trace.iter().map(|l| l.display(&spec.vars)).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "witnesses": res.witnesses.iter().map(|w| json!({
                    "assertion": w.assertion.display(&spec.vars).to_string(),
                    "trace": w.trace.iter().map(|l| l.display(&spec.vars)).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "oracle_clean": res.oracle.clean(),
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
    }

    if !res.oracle.clean() || !res.violations.is_empty() {
        ExitCode::from(1)
    } else if res.frontier_truncated {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_check_axioms(input: &str, dot: Option<&str>) -> ExitCode {
    let (cand, vars) = match load_execution(input) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let validity = check_validity(&cand);
    println!("validity axioms:");
    for c in &validity.checks {
        print!("  {:<12} {}", c.name, pass_str(c.pass));
        if let Some(w) = &c.witness {
            print!("  ({w})");
        }
        println!();
    }
    println!("weak canonical consistency:");
    let weak_pass = match check_weak_canonical(&cand) {
        Ok(report) => {
            for c in &report.checks {
                print!("  {:<12} {}", c.name, pass_str(c.pass));
                if let Some(w) = &c.witness {
                    print!("  ({w})");
                }
                println!();
            }
            report.pass()
        }
        Err(e) => {
            println!("  {e}");
            false
        }
    };
    if let Some(path) = dot {
        let text = rar_core::dot::export_dot(&cand, &vars, true);
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("error: cannot write {path}: {e}");
            return ExitCode::from(3);
        }
    }
    if validity.pass() && weak_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_enumerate(
    input: &str,
    max_events: Option<u32>,
    do_replay: bool,
    format: Format,
    bundled: bool,
) -> ExitCode {
    let spec = match load_spec(input, bundled) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let bound = max_events.unwrap_or(spec.bound);
    let out = enumerate_candidates(&spec, bound);
    let complete = out.candidates.iter().filter(|c| c.complete).count();

    let mut replay_failures = 0usize;
    if do_replay {
        for c in &out.candidates {
            match linearize(&c.execution) {
                Ok(order) => {
                    if let Err(e) = replay(&spec, &c.execution, &order) {
                        replay_failures += 1;
                        eprintln!("replay failure: {e}");
                    }
                }
                Err(e) => {
                    replay_failures += 1;
                    eprintln!("linearize failure: {e}");
                }
            }
        }
    }

    match format {
        Format::Text => {
            println!(
                "{}: {} pre-executions, {} valid candidates ({} complete){}",
                spec.name,
                out.pre_executions,
                out.candidates.len(),
                complete,
                if out.truncated { " [truncated at bound]" } else { "" }
            );
            if do_replay {
                println!(
                    "replay: {}/{} candidates replayed {}",
                    out.candidates.len() - replay_failures,
                    out.candidates.len(),
                    pass_str(replay_failures == 0)
                );
            }
        }
        Format::Json => {
            let doc = json!({
                "name": spec.name,
                "pre_executions": out.pre_executions,
                "truncated": out.truncated,
                "complete": complete,
                "candidates": out.candidates.iter().map(|c| {
                    serde_json::from_str::<serde_json::Value>(
                        &exec_json::to_json(&c.execution, &spec.vars)
                    ).unwrap()
                }).collect::<Vec<_>>(),
                "replayed": do_replay,
                "replay_failures": replay_failures,
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
    }

    if replay_failures > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_equiv(max_events: u32, vars: u16, values: i64, threads: u32) -> ExitCode {
    let report = check_equivalence(&EquivParams {
        max_events,
        vars,
        values,
        threads,
    });
    println!(
        "box: events<={max_events} vars={vars} values={values} threads={threads}"
    );
    println!("candidate executions: {}", report.candidates);
    for ((weak, coherent), n) in &report.verdicts {
        println!(
            "  weak-canonical={} coherence={}: {}",
            if *weak { "pass" } else { "fail" },
            if *coherent { "pass" } else { "fail" },
            n
        );
    }
    println!(
        "disagreements: {} {}",
        report.disagreement_count,
        pass_str(report.disagreement_count == 0)
    );
    if report.disagreement_count == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_dot(input: &str, derived: bool, out: Option<&str>) -> ExitCode {
    let (cand, vars) = match load_execution(input) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let text = rar_core::dot::export_dot(&cand, &vars, derived);
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {path}: {e}");
                return ExitCode::from(3);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
