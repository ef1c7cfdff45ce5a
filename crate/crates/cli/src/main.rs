use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use satsec::checks::{oracle_suite, selftest_suite, CheckReport};
use satsec::montecarlo::{run_experiment, scenario_by_name, ScenarioConfig, SecrecySummary, Sweep, SCENARIOS};

#[derive(Parser, Debug)]
#[command(name = "satsec", version, about = "Secrecy-rate simulator for bidirectional multibeam satellite links")]
struct Cli {
    /// Print progress and a summary table to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte Carlo scenario and write CSV plus a JSON manifest.
    Run(RunArgs),
    /// Compare the solvers against brute-force searches.
    Oracle(SeedArg),
    /// Run the oracle comparisons plus invariant checks on small scenarios.
    Selftest(SeedArg),
}

#[derive(Args, Debug)]
struct SeedArg {
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// One of fig2..fig8.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; defaults to `<scenario>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Satellite feed count. Collapses a feed sweep to this single value.
    #[arg(long)]
    feeds: Option<usize>,
    /// Forward-link transmit power in dBW. Collapses a power sweep.
    #[arg(long)]
    power: Option<f64>,
    /// Eavesdropper distance in metres. Collapses a distance sweep.
    #[arg(long)]
    distance: Option<f64>,
    /// JSON file with configuration fields to override; flags win over it.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Overlays `patch` onto `base`, recursing into objects.
fn merge(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn resolve(args: &RunArgs) -> anyhow::Result<ScenarioConfig> {
    let mut config = scenario_by_name(&args.scenario)
        .with_context(|| format!("known scenarios: {}", SCENARIOS.join(", ")))?;
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut patch: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let mut value = serde_json::to_value(&config)?;
        // The sweep is an enum; a different variant must replace, not merge.
        if let (Some(sweep), Some(obj)) = (patch.get("sweep").cloned(), value.as_object_mut()) {
            obj.insert("sweep".into(), sweep);
            patch.as_object_mut().map(|p| p.remove("sweep"));
        }
        merge(&mut value, patch);
        config = serde_json::from_value(value).with_context(|| format!("applying {}", path.display()))?;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(n) = args.feeds {
        config.feeds = n;
        if let Sweep::Feeds(v) = &mut config.sweep {
            *v = vec![n];
        }
    }
    if let Some(p) = args.power {
        config.budget.fl_tx_power_dbw = p;
        if let Sweep::FlPowerDbw(v) = &mut config.sweep {
            *v = vec![p];
        }
    }
    if let Some(d) = args.distance {
        config.ground.eve_distance_range_m = (d, d);
        if let Sweep::EveDistanceM(v) = &mut config.sweep {
            *v = vec![d];
        }
    }
    config.validate()?;
    Ok(config)
}

/// Problems that make the run's numbers untrustworthy.
fn invariant_failures(summary: &SecrecySummary) -> Vec<String> {
    let mut out = Vec::new();
    if summary.dominance_violations > 0 {
        out.push(format!("{} trials where ETA beat OTA", summary.dominance_violations));
    }
    for r in &summary.rows {
        if !r.mean.is_finite() || r.mean < 0.0 {
            out.push(format!("{} at {}: mean {}", r.scheme.name(), r.sweep_value, r.mean));
        }
    }
    out
}

fn run(args: &RunArgs, verbose: u8) -> anyhow::Result<bool> {
    let config = resolve(args)?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", args.scenario)));
    if verbose > 0 {
        eprintln!(
            "{}: {} points x {} trials, seed {}",
            config.name,
            config.sweep.len(),
            config.trials,
            config.master_seed
        );
    }
    let summary = run_experiment(&config)?;
    let failures = invariant_failures(&summary);
    for f in &failures {
        eprintln!("invariant violated: {f}");
    }
    let files = summary.write_files(&config, Path::new(&out))?;
    if verbose > 0 {
        for r in &summary.rows {
            eprintln!("{:>12} {:<9} {:>10.4} +/- {:.4}", r.sweep_value, r.scheme.name(), r.mean, r.stderr);
        }
        for f in &files {
            eprintln!("wrote {}", f.display());
        }
    }
    Ok(failures.is_empty())
}

fn report(reports: &[CheckReport]) -> bool {
    for r in reports {
        println!("{r}");
    }
    reports.iter().all(|r| r.passed)
}

fn dispatch(cli: &Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Run(args) => run(args, cli.verbose),
        Command::Oracle(a) => Ok(report(&oracle_suite(a.seed)?)),
        Command::Selftest(a) => Ok(report(&selftest_suite(a.seed)?)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
