use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wban_sim::channel::Posture;
use wban_sim::harness::replay::{replay, ReplayRequest};
use wban_sim::harness::report::write_experiment;
use wban_sim::harness::{run_experiment, Execution, ExperimentId, Scenario, ScenarioError};

const EXIT_INVALID: u8 = 1;
const EXIT_FAULT: u8 = 2;

#[derive(Parser)]
#[command(name = "wban-sim", version, about = "Broadcast strategies in a 7-node body area network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiment sweeps and write CSV files.
    Run {
        scenario: PathBuf,
        /// E1..E6, or `all`. May be repeated.
        #[arg(long = "experiment", short = 'e', required = true)]
        experiments: Vec<String>,
        #[arg(long, short = 'o')]
        out: PathBuf,
        /// Override the scenario's seed count.
        #[arg(long)]
        seeds: Option<u32>,
        /// Override the scenario's seed base.
        #[arg(long, env = "WBAN_SEED_BASE")]
        seed_base: Option<u64>,
        /// Run seeds one after another instead of on the thread pool.
        #[arg(long)]
        serial: bool,
    },
    /// Check a scenario file and report every violation.
    Validate {
        scenario: PathBuf,
        /// Skip the simulated quiescence check.
        #[arg(long)]
        no_quiescence: bool,
    },
    /// Print the event trace of one single-packet run.
    Replay {
        scenario: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Strategy label from the scenario (default: the first one).
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        posture: Option<Posture>,
        #[arg(long)]
        ttl: Option<u32>,
        /// Write the trace here instead of standard output.
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
}

fn load(path: &PathBuf) -> Result<Scenario, ExitCode> {
    Scenario::load(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(scenario_exit(&e))
    })
}

fn scenario_exit(e: &ScenarioError) -> u8 {
    if e.is_io() {
        EXIT_FAULT
    } else {
        EXIT_INVALID
    }
}

fn parse_experiments(names: &[String]) -> Result<Vec<ExperimentId>, String> {
    let mut ids = Vec::new();
    for n in names.iter().flat_map(|n| n.split(',')) {
        if n.eq_ignore_ascii_case("all") {
            ids.extend(ExperimentId::ALL);
        } else {
            ids.push(n.parse()?);
        }
    }
    ids.sort();
    ids.dedup();
    Ok(ids)
}

fn run(cli: Cli) -> Result<(), ExitCode> {
    match cli.command {
        Command::Run { scenario, experiments, out, seeds, seed_base, serial } => {
            let mut sc = load(&scenario)?;
            let ids = parse_experiments(&experiments).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_INVALID)
            })?;
            if let Some(n) = seeds {
                if n == 0 {
                    eprintln!("error: --seeds must be at least 1");
                    return Err(ExitCode::from(EXIT_INVALID));
                }
                sc.run.seeds = n;
            }
            if let Some(b) = seed_base {
                sc.run.seed_base = b;
            }
            let exec = if serial { Execution::Serial } else { Execution::Parallel };
            let seeds: Vec<u64> = sc.run.seeds().collect();
            for id in ids {
                let Some(spec) = sc.experiment(id) else {
                    eprintln!("error: scenario `{}` does not define {id}", sc.id);
                    return Err(ExitCode::from(EXIT_INVALID));
                };
                let per_node = spec.per_node;
                let results = run_experiment(&sc, id, &seeds, exec).map_err(|e| {
                    eprintln!("error: {id}: {e}");
                    ExitCode::from(EXIT_FAULT)
                })?;
                let written = write_experiment(&out, &sc.id, id, &results, per_node).map_err(|e| {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_FAULT)
                })?;
                for p in written {
                    eprintln!("{id} ({}): {} rows -> {}", id.description(), results.len(), p.display());
                }
            }
            Ok(())
        }
        Command::Validate { scenario, no_quiescence } => {
            let sc = load(&scenario)?;
            if !no_quiescence {
                let v = sc.check_quiescence(5);
                if !v.is_empty() {
                    eprintln!("error: {}: {}", scenario.display(), ScenarioError::Invalid(v));
                    return Err(ExitCode::from(EXIT_INVALID));
                }
            }
            println!("ok: {} ({} strategies, {} experiments)", sc.id, sc.strategies.len(), sc.experiments.len());
            Ok(())
        }
        Command::Replay { scenario, seed, strategy, posture, ttl, out } => {
            let sc = load(&scenario)?;
            let trace = replay(&sc, seed, &ReplayRequest { strategy, posture, ttl }).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_INVALID)
            })?;
            match out {
                Some(path) => std::fs::write(&path, trace).map_err(|e| {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    ExitCode::from(EXIT_FAULT)
                }),
                None => {
                    print!("{trace}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INVALID) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
