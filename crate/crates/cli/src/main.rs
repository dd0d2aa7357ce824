//! `ztdn` — one binary over the whole toolkit.
//!
//! Subcommands: `simulate` runs a scenario file through the deterministic
//! network simulator, `verify` checks queries of a timed-automata protocol
//! model, `bench` runs the agent benchmark protocol, and `report`
//! summarizes benchmark CSV output.
//!
//! Exit codes: 0 success (all checked queries hold), 1 a query is
//! violated, 2 usage/configuration/parse error, 3 verification ran out of
//! its state budget before reaching an answer.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ztdn_core::bench::{run_benchmark, summarize_csv, BenchConfig, Corpus, TimingMode};
use ztdn_core::model::Role;
use ztdn_core::netsim;
use ztdn_core::scenario::{validate_scenario, ScenarioConfig};
use ztdn_verify::{builtin, check, describe_witness, CheckOptions, Verdict, BUILTIN_MODELS};

const EXIT_OK: u8 = 0;
const EXIT_VIOLATED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ztdn",
    version,
    about = "Zero-trust distributed network toolkit",
    long_about = "Simulate zero-trust deployments under attack, model-check the access \
                  protocol, and benchmark the policy-decision path."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file through the network simulator
    Simulate {
        /// Scenario TOML file
        scenario: PathBuf,
        /// Override the scenario's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Write the full JSON report to this file
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the full JSON report instead of the one-line summary
        #[arg(long)]
        json: bool,
    },
    /// Check the queries of a timed-automata model
    Verify {
        /// Path to a .ta model file, or `builtin:NAME`
        model: String,
        /// Check only the query with this name
        #[arg(long)]
        query: Option<String>,
        /// Stop exploring after this many states
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
    },
    /// Run the agent benchmark protocol over the document corpus
    Bench {
        /// Runs per task group
        #[arg(long, default_value_t = 3)]
        runs: u32,
        /// Requests per run
        #[arg(long, default_value_t = 50)]
        requests: u32,
        /// Role the agent presents
        #[arg(long, value_enum, default_value_t = RoleArg::Admin)]
        role: RoleArg,
        /// Timing source
        #[arg(long, value_enum, default_value_t = TimingArg::Sim)]
        timing: TimingArg,
        /// Directory of .txt filings replacing the built-in corpus
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Write sample CSV to this file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a benchmark CSV file per task group
    Report {
        /// CSV file produced by `ztdn bench`
        samples: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    /// Administrator (the corpus policy grants this role)
    Admin,
    /// Unprivileged user (every request is denied)
    User,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimingArg {
    /// Deterministic synthetic timings; byte-reproducible
    Sim,
    /// Wall-clock timings from the process clock
    Wall,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

/// Restores the default SIGPIPE disposition so that piping output into a
/// pager or `head` ends the process quietly instead of panicking when
/// stdout closes mid-stream.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate { scenario, seed, out, json } => simulate(&scenario, seed, out.as_deref(), json),
        Command::Verify { model, query, max_states } => verify(&model, query.as_deref(), max_states),
        Command::Bench { runs, requests, role, timing, corpus, out } => {
            bench(runs, requests, role, timing, corpus.as_deref(), out.as_deref())
        }
        Command::Report { samples, format } => report(&samples, format),
    };
    ExitCode::from(code)
}

fn read(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_USAGE
    })
}

fn write(path: &Path, contents: &str) -> Result<(), u8> {
    fs::write(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_USAGE
    })
}

fn simulate(scenario: &Path, seed: Option<u64>, out: Option<&Path>, json: bool) -> u8 {
    let text = match read(scenario) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let mut config = match ScenarioConfig::from_toml_str(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let validated = match validate_scenario(config) {
        Ok(v) => v,
        Err(errors) => {
            eprintln!("error: scenario rejected ({} problems):", errors.violations.len());
            for v in &errors.violations {
                eprintln!("  - {v}");
            }
            return EXIT_USAGE;
        }
    };
    let report = netsim::run(&validated);
    if let Some(path) = out {
        if let Err(code) = write(path, &report.to_json()) {
            return code;
        }
    }
    if json {
        print!("{}", report.to_json());
    } else {
        println!("{}", report.summary);
    }
    EXIT_OK
}

fn verify(model: &str, query: Option<&str>, max_states: usize) -> u8 {
    let source = if let Some(name) = model.strip_prefix("builtin:") {
        match builtin(name) {
            Some(src) => src.to_string(),
            None => {
                eprintln!(
                    "error: no builtin model `{name}`; available: {}",
                    BUILTIN_MODELS.join(", ")
                );
                return EXIT_USAGE;
            }
        }
    } else {
        match read(Path::new(model)) {
            Ok(t) => t,
            Err(code) => return code,
        }
    };
    let net = match ztdn_verify::parse_network(&source) {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {model}: {e}");
            return EXIT_USAGE;
        }
    };
    let mut outcomes = check(&net, CheckOptions { max_states });
    if let Some(wanted) = query {
        let known: Vec<String> = outcomes.iter().map(|o| o.name.clone()).collect();
        outcomes.retain(|o| o.name == wanted);
        if outcomes.is_empty() {
            eprintln!("error: no query named `{wanted}`; model has: {}", known.join(", "));
            return EXIT_USAGE;
        }
    }
    let mut any_violated = false;
    let mut any_unknown = false;
    for o in &outcomes {
        let bound = if o.complete { String::new() } else { ", state bound hit".to_string() };
        println!("{}: {} ({} states{bound})", o.name, o.verdict, o.states_explored);
        match o.verdict {
            Verdict::Violated => any_violated = true,
            Verdict::Unknown => any_unknown = true,
            Verdict::Holds => {}
        }
        if let Some(witness) = &o.witness {
            let steps = witness.steps.len();
            println!("  witness ({steps} step{}):", if steps == 1 { "" } else { "s" });
            for line in describe_witness(&net, witness) {
                println!("    {line}");
            }
        }
    }
    if any_violated {
        EXIT_VIOLATED
    } else if any_unknown {
        EXIT_UNKNOWN
    } else {
        EXIT_OK
    }
}

fn bench(
    runs: u32,
    requests: u32,
    role: RoleArg,
    timing: TimingArg,
    corpus: Option<&Path>,
    out: Option<&Path>,
) -> u8 {
    let corpus = match corpus {
        Some(dir) => match Corpus::from_dir(dir) {
            Ok(c) if !c.is_empty() => c,
            Ok(_) => {
                eprintln!("error: no .txt documents in {}", dir.display());
                return EXIT_USAGE;
            }
            Err(e) => {
                eprintln!("error: cannot read corpus {}: {e}", dir.display());
                return EXIT_USAGE;
            }
        },
        None => Corpus::builtin(),
    };
    let config = BenchConfig {
        runs,
        requests_per_run: requests,
        role: match role {
            RoleArg::Admin => Role::Administrator,
            RoleArg::User => Role::NormalUser,
        },
        timing: match timing {
            TimingArg::Sim => TimingMode::SimulatedDeterministic,
            TimingArg::Wall => TimingMode::WallClock,
        },
        ..BenchConfig::default()
    };
    let outcome = match run_benchmark(&config, &corpus) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let csv = match outcome.to_csv() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match out {
        Some(path) => {
            if let Err(code) = write(path, &csv) {
                return code;
            }
            println!(
                "{} samples, {} grants, {} denials, {} task executions -> {}",
                outcome.samples.len(),
                outcome.grants,
                outcome.denials,
                outcome.task_executions,
                path.display()
            );
        }
        None => print!("{csv}"),
    }
    EXIT_OK
}

fn report(samples: &Path, format: FormatArg) -> u8 {
    let text = match read(samples) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let groups = match summarize_csv(&text) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {}: {e}", samples.display());
            return EXIT_USAGE;
        }
    };
    match format {
        FormatArg::Json => {
            println!("{}", serde_json::to_string_pretty(&groups).expect("summaries serialize"));
        }
        FormatArg::Table => {
            println!(
                "{:<18} {:>8}  {:>24}  {:>24}",
                "task_group", "samples", "policy_check_us", "round_trip_us"
            );
            println!(
                "{:<18} {:>8}  {:>24}  {:>24}",
                "", "", "min / mean / max", "min / mean / max"
            );
            for g in &groups {
                let check = format!(
                    "{} / {:.1} / {}",
                    g.policy_check_us.min, g.policy_check_us.mean, g.policy_check_us.max
                );
                let round = format!(
                    "{} / {:.1} / {}",
                    g.round_trip_us.min, g.round_trip_us.mean, g.round_trip_us.max
                );
                println!("{:<18} {:>8}  {:>24}  {:>24}", g.task_group, g.samples, check, round);
            }
        }
    }
    EXIT_OK
}
