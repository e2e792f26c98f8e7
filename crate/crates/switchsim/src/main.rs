// `!(x <= tol)` also rejects NaN, which `x > tol` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use switchsim::config::load_config;
use switchsim::graph_io::load_graph;
use switchsim::report::{event_map_json, friend_json, table_csv, table_json, to_pretty, FriendRun};
use switchsim::sweep::run_sweep;
use switchsim::{tolerance, CliError};
use switchsim_core::friend::{
    build_joint_state, decohered_run_distribution, friend_report, sample_m, SwitchVariant, VariantKind,
};
use switchsim_core::immersion::{immerse, verify_immersion, PlacementParams};
use switchsim_core::oracle;
use switchsim_core::scenario::{probability_distribution, ScenarioKind};

/// Quantum-switch realizations with vacuum states.
#[derive(Parser)]
#[command(name = "switchsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Outcome table of one configuration file.
    Run {
        config: String,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
        /// Cross-check against the state-vector oracle.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Friend observables of a switch variant.
    Friend {
        #[arg(long)]
        variant: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of decohered runs tallied for arrival labels.
        #[arg(long, default_value_t = 1000)]
        runs: usize,
    },
    /// Places a circuit graph (JSON or DOT) in Minkowski spacetime.
    Immerse {
        graph: String,
        /// Check the light-cone order against the circuit order.
        #[arg(long)]
        verify: bool,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<String>,
    },
    /// Haar-random sweep against the closed form and the oracle.
    Sweep {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "four_event")]
        scenario: String,
    },
}

fn cmd_run(path: &str, out: OutFormat, oracle_check: bool) -> Result<(), CliError> {
    let tol = tolerance()?;
    let cfg = load_config(path)?;
    let table = probability_distribution(&cfg)?;
    let norm_err = (table.sum() - 1.0).abs();
    if !(norm_err <= tol) {
        return Err(CliError::Invariant(format!("table sums to {} (tolerance {tol:e})", table.sum())));
    }
    let deviation = if oracle_check { Some(table.max_abs_diff(&oracle::simulate(&cfg)?)) } else { None };
    match out {
        OutFormat::Json => {
            let mut v = table_json(&table);
            v["scenario"] = cfg.kind.as_str().into();
            if let Some(d) = deviation {
                v["oracle_max_deviation"] = d.into();
            }
            print!("{}", to_pretty(&v));
        }
        OutFormat::Csv => {
            print!("{}", table_csv(&table)?);
            if let Some(d) = deviation {
                eprintln!("oracle max deviation: {d:e}");
            }
        }
    }
    match deviation {
        Some(d) if !(d <= tol) => Err(CliError::Mismatch(format!("oracle deviation {d:e} exceeds {tol:e}"))),
        _ => Ok(()),
    }
}

fn cmd_friend(variant: &str, seed: u64, runs: usize) -> Result<(), CliError> {
    let variant = SwitchVariant::new(variant.parse::<VariantKind>()?);
    let report = friend_report(variant)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled = sample_m(&build_joint_state(variant), &mut rng)?;
    let counts = decohered_run_distribution(variant, runs, &mut rng);
    let run = FriendRun { report: &report, seed, sampled_m: sampled.outcome, arrival_counts: &counts };
    print!("{}", to_pretty(&friend_json(&run)));
    Ok(())
}

fn cmd_immerse(path: &str, verify: bool, out: Option<&str>) -> Result<(), CliError> {
    let g = load_graph(path)?;
    let em = immerse(&g, PlacementParams::default())?;
    let report = if verify { Some(verify_immersion(&g, &em)?) } else { None };
    let text = to_pretty(&event_map_json(&em, report.as_ref()));
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e))?,
        None => print!("{text}"),
    }
    match report {
        Some(r) if !r.order_preserved => {
            Err(CliError::Mismatch(format!("{} circuit relations missing from the light-cone order", r.violations)))
        }
        _ => Ok(()),
    }
}

fn cmd_sweep(n: u64, seed: u64, scenario: &str) -> Result<(), CliError> {
    let tol = tolerance()?;
    let kind: ScenarioKind = scenario.parse()?;
    let report = run_sweep(kind, n, seed, tol)?;
    print!("{}", to_pretty(&report.to_json()));
    match report.offending {
        Some(t) => Err(CliError::Mismatch(format!(
            "trial {} (seed {seed}) deviates by {:e}, above {tol:e}",
            t.trial,
            t.worst()
        ))),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out, oracle_check } => cmd_run(config, *out, *oracle_check),
        Command::Friend { variant, seed, runs } => cmd_friend(variant, *seed, *runs),
        Command::Immerse { graph, verify, out } => cmd_immerse(graph, *verify, out.as_deref()),
        Command::Sweep { n, seed, scenario } => cmd_sweep(*n, *seed, scenario),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
