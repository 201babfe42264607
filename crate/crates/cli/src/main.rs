//! `mcsched`: generate instances, solve and verify schedules, run sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mcsched_core::experiment::{emit_csv, solve_scheme, ExperimentConfig, RecordStatus, Scheme};
use mcsched_core::io::{load_instance, load_schedule, parse_toml, save_instance, save_schedule};
use mcsched_core::net::{generate_instance, InstanceConfig};
use mcsched_core::rounding::{milp_relax_schedule_traced, HeuristicOptions};
use mcsched_core::verify::verify_schedule;
use mcsched_core::{Demand, MilpOptions, SchedParams};

#[derive(Parser)]
#[command(name = "mcsched", version, about = "Multicast link scheduling under the SINR model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance and write it as TOML.
    Gen(GenArgs),
    /// Solve an instance with one scheme; print throughput, write the schedule.
    Solve(SolveArgs),
    /// Check a schedule against an instance and print the report.
    Verify(VerifyArgs),
    /// Run a seeded sweep and write CSV results.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 2)]
    sources: usize,
    #[arg(long, default_value_t = 2)]
    group_size: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 3.0)]
    path_loss_exponent: f64,
    /// Receiver noise power, mW.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0.05)]
    min_distance: f64,
    #[arg(long, default_value_t = 1.0)]
    max_distance: f64,
    #[arg(long, short)]
    out: PathBuf,
}

/// Scheduling parameters shared by `solve` and `verify`.
#[derive(Args)]
struct ParamArgs {
    /// Required active slots per link.
    #[arg(long, default_value_t = 1)]
    demand: u32,
    /// SINR threshold in dB.
    #[arg(long, default_value_t = 10.0)]
    beta_db: f64,
    #[arg(long, default_value_t = 300.0)]
    p_max: f64,
    #[arg(long, default_value_t = 3.0)]
    p_min: f64,
    /// Transmit power of the constant-power schemes, mW.
    #[arg(long, default_value_t = 90.0)]
    const_power: f64,
    /// Per-source power budget over all slots, mW (default: slots * p_max).
    #[arg(long)]
    budget: Option<f64>,
}

impl ParamArgs {
    fn params(&self, slots: usize) -> SchedParams {
        SchedParams {
            beta: mcsched_core::net::db_to_linear(self.beta_db),
            demand: Demand::Uniform(self.demand),
            p_slot_max: self.p_max,
            p_slot_min: self.p_min,
            const_power: self.const_power,
            p_budget: self.budget,
            ..SchedParams::new(slots, self.demand)
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file.
    instance: PathBuf,
    #[arg(long, default_value = "dmc-opt")]
    scheme: Scheme,
    #[arg(long, default_value_t = 2)]
    slots: usize,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    node_limit: Option<usize>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Print the per-pass trace of the rounding heuristic.
    #[arg(long)]
    trace: bool,
    /// Schedule output file.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    schedule: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML configuration; flags override its values.
    config: Option<PathBuf>,
    /// Comma-separated source counts.
    #[arg(long, value_delimiter = ',')]
    sources: Option<Vec<usize>>,
    #[arg(long)]
    group_size: Option<usize>,
    #[arg(long)]
    slots: Option<usize>,
    #[arg(long)]
    demand: Option<u32>,
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write zero solve times so repeated runs give identical files.
    #[arg(long)]
    no_timing: bool,
    #[arg(long, short, default_value = "results.csv")]
    out: PathBuf,
}

fn gen(a: GenArgs) -> Result<()> {
    let inst = generate_instance(&InstanceConfig {
        num_sources: a.sources,
        group_size: a.group_size,
        path_loss_exponent: a.path_loss_exponent,
        noise_power: a.noise,
        distance_range: (a.min_distance, a.max_distance),
        seed: a.seed,
    })?;
    save_instance(&inst, &a.out)?;
    println!("wrote {} ({} sources, {} destinations)", a.out.display(), inst.num_sources(), inst.num_destinations());
    Ok(())
}

fn solve(a: SolveArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let params = a.params.params(a.slots);
    params.validate(&inst)?;
    if a.trace && a.scheme == Scheme::DmcOptHeuristic {
        let out = milp_relax_schedule_traced(&inst, &params, HeuristicOptions::default())?;
        for r in &out.trace {
            println!("{r}");
        }
    }
    let milp = MilpOptions {
        node_limit: a.node_limit,
        time_limit: a.time_limit.map(std::time::Duration::from_secs_f64),
        ..MilpOptions::default()
    };
    let outcome = solve_scheme(&inst, &params, a.scheme, &milp);
    println!("scheme: {}", a.scheme);
    println!("status: {}", outcome.status);
    println!("throughput: {}", outcome.throughput);
    if let Some(m) = &outcome.message {
        println!("note: {m}");
    }
    if outcome.status == RecordStatus::Error {
        anyhow::bail!(outcome.message.unwrap_or_else(|| "solve failed".into()));
    }
    if let (Some(path), Some(s)) = (&a.out, &outcome.schedule) {
        save_schedule(s, path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Returns whether the schedule is valid.
fn verify(a: VerifyArgs) -> Result<bool> {
    let inst = load_instance(&a.instance)?;
    let schedule = load_schedule(&a.schedule)?;
    let params = a.params.params(schedule.slots());
    let r = verify_schedule(&inst, &schedule, &params)?;
    println!("sinr_ok: {}", r.sinr_ok);
    println!("worst_sinr_margin: {}", r.worst_sinr_margin);
    println!("budget_ok: {:?}", r.budget_ok);
    println!("demand_ok: {:?}", r.demand_ok);
    println!("power_bounds_ok: {}", r.power_bounds_ok);
    println!("throughput: {}", r.throughput);
    for v in r.violations() {
        println!("violation: {v}");
    }
    println!("valid: {}", r.is_valid());
    Ok(r.is_valid())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_toml::<ExperimentConfig>(&text, Some(path))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = a.sources {
        cfg.sources = v;
    }
    if let Some(v) = a.group_size {
        cfg.group_size = v;
    }
    if let Some(v) = a.slots {
        cfg.slots = v;
    }
    if let Some(v) = a.demand {
        cfg.demand = v;
    }
    if let Some(v) = a.schemes {
        cfg.schemes = v;
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.seed {
        cfg.base_seed = v;
    }
    if a.no_timing {
        cfg.record_timing = false;
    }
    let records = mcsched_core::experiment::run_experiment(&cfg)?;
    let agg = emit_csv(&records, &a.out)?;
    println!("wrote {} records to {} and means to {}", records.len(), a.out.display(), agg.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a).map(|_| true),
        Command::Solve(a) => solve(a).map(|_| true),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
