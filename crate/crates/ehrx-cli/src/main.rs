//! Experiment driver for the energy-harvesting receiver simulator.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ehrx_cli::config::ExperimentConfig;
use ehrx_cli::csvout::{fmt_f64, CsvDoc, Sink};
use ehrx_cli::sweep;
use ehrx_cli::validate;
use ehrx_core::{run, PolicyKind, SimMetrics};

#[derive(Parser)]
#[command(
    name = "ehrx",
    version,
    about = "Simulate and sweep decode/harvest policies for an energy-harvesting receiver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and print a summary
    Run(RunArgs),
    /// Mean throughput against the penalty weight V, per decode-cost coefficient c
    SweepV(SweepArgs),
    /// Mean throughput against a common access probability q, per c
    SweepQ(SweepArgs),
    /// Check the closed-form success probability against a Monte-Carlo estimate
    ValidateLemma(ValidateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Config file (TOML); built-in defaults apply when omitted
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed override
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Slots per run override
    #[arg(long, value_name = "INT")]
    horizon: Option<u64>,
    /// Leading slots excluded from headline averages
    #[arg(long, value_name = "INT")]
    warmup: Option<u64>,
    /// Independent runs per sweep point
    #[arg(long, value_name = "INT")]
    seeds: Option<u32>,
    /// CSV destination; sweeps print to stdout when omitted
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Evaluate the success probability on a precomputed grid
    #[arg(long)]
    fast_ps: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Decision rule: lyapunov, genie, greedy, always-harvest
    #[arg(long, value_name = "NAME")]
    policy: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Worker threads for sweep points (0 or omitted = all cores)
    #[arg(long, value_name = "INT")]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Slots to sample for the empirical estimate
    #[arg(long, value_name = "INT", default_value_t = 10_000_000)]
    samples: u64,
    /// Number of received-power bins
    #[arg(long, value_name = "INT", default_value_t = 25)]
    bins: usize,
    /// Max allowed |empirical - closed form| on bins with enough samples
    #[arg(long, value_name = "FLOAT", default_value_t = 0.02)]
    tolerance: f64,
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.run.master_seed = seed;
    }
    if let Some(horizon) = common.horizon {
        cfg.run.horizon = horizon;
    }
    if let Some(warmup) = common.warmup {
        cfg.run.warmup = warmup;
    }
    if let Some(seeds) = common.seeds {
        cfg.run.seeds = seeds;
    }
    if common.fast_ps {
        cfg.run.fast_ps = true;
    }
    if let Some(out) = &common.out {
        cfg.output_path = Some(out.clone());
    }
    Ok(cfg)
}

/// Opens the CSV sink only when a destination was configured; `run` and
/// `validate-lemma` reserve stdout for their human-readable summaries.
fn optional_sink(cfg: &ExperimentConfig) -> Result<Option<Sink>> {
    cfg.output_path
        .as_deref()
        .map(|p| Sink::create(Some(p)).with_context(|| format!("creating {}", p.display())))
        .transpose()
}

const RUN_HEADER: &str = "policy,c,v,seed,stream,horizon,warmup,throughput,throughput_eq1,\
throughput_full,throughput_eq1_full,decode_count,harvest_count,idle_count,collision_count,\
wasted_decodes,violations,battery_bound_breaches,harvest_rule_breaches,energy_min,energy_max,\
energy_mean,theta,theorem_bound";

fn run_row(m: &SimMetrics, cfg: &ExperimentConfig, stream: u64) -> Vec<String> {
    vec![
        m.policy.to_string(),
        fmt_f64(cfg.energy.decode_cost_c),
        fmt_f64(cfg.energy.v),
        cfg.run.master_seed.to_string(),
        stream.to_string(),
        m.horizon.to_string(),
        m.warmup.to_string(),
        fmt_f64(m.throughput),
        fmt_f64(m.throughput_eq1),
        fmt_f64(m.throughput_full),
        fmt_f64(m.throughput_eq1_full),
        m.decode_count.to_string(),
        m.harvest_count.to_string(),
        m.idle_count.to_string(),
        m.collision_count.to_string(),
        m.wasted_decodes.to_string(),
        m.violations.to_string(),
        m.battery_bound_breaches.to_string(),
        m.harvest_rule_breaches.to_string(),
        fmt_f64(m.energy_min),
        fmt_f64(m.energy_max),
        fmt_f64(m.energy_mean),
        fmt_f64(m.theta),
        fmt_f64(m.theorem_bound),
    ]
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let policy = match &args.policy {
        Some(name) => name.parse::<PolicyKind>()?,
        None => cfg.policy()?,
    };
    let sink = optional_sink(&cfg)?;
    let params = cfg.channel_params()?;
    let energy = cfg.energy_config(&params)?;
    let opts = cfg.run_options(0);
    let metrics = run(policy, &params, &energy, &opts).context("simulation failed")?;

    println!("policy            {}", metrics.policy);
    println!("horizon / warmup  {} / {}", metrics.horizon, metrics.warmup);
    println!("throughput        {:.6} bits/slot (post-warmup)", metrics.throughput);
    println!("throughput full   {:.6} bits/slot", metrics.throughput_full);
    println!(
        "slots             decode {} | harvest {} | idle {} | collision {}",
        metrics.decode_count, metrics.harvest_count, metrics.idle_count, metrics.collision_count
    );
    println!(
        "rule counters     wasted {} | violations {} | battery breaches {} | harvest-rule breaches {}",
        metrics.wasted_decodes,
        metrics.violations,
        metrics.battery_bound_breaches,
        metrics.harvest_rule_breaches
    );
    println!(
        "energy            min {:.4} | max {:.4} | mean {:.4} | target theta {:.4}",
        metrics.energy_min, metrics.energy_max, metrics.energy_mean, metrics.theta
    );
    println!("gap bound B/V     {:.6}", metrics.theorem_bound);

    if let Some(sink) = sink {
        let mut doc = CsvDoc::new("run", &cfg.resolved_json()?, RUN_HEADER);
        doc.row(&run_row(&metrics, &cfg, opts.stream));
        sink.finish(&doc).context("writing CSV")?;
    }
    Ok(())
}

fn cmd_sweep_v(args: SweepArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let sink = Sink::create(cfg.output_path.as_deref()).context("opening CSV destination")?;
    let rows = sweep::sweep_v(&cfg, args.jobs)?;
    let mut doc = CsvDoc::new(
        "sweep-v",
        &cfg.resolved_json()?,
        "c,v,throughput_mean,throughput_stderr,bound_b_over_v",
    );
    for r in &rows {
        doc.row(&[
            fmt_f64(r.c),
            fmt_f64(r.v),
            fmt_f64(r.throughput_mean),
            fmt_f64(r.throughput_stderr),
            fmt_f64(r.bound),
        ]);
    }
    sink.finish(&doc).context("writing CSV")?;
    Ok(())
}

fn cmd_sweep_q(args: SweepArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let sink = Sink::create(cfg.output_path.as_deref()).context("opening CSV destination")?;
    let result = sweep::sweep_q(&cfg, args.jobs)?;
    let mut doc = CsvDoc::new(
        "sweep-q",
        &cfg.resolved_json()?,
        "c,q,throughput_mean,throughput_stderr",
    );
    for &(c, q) in &result.argmax_q {
        doc.comment(format!("argmax c={} q={}", fmt_f64(c), fmt_f64(q)));
    }
    for r in &result.rows {
        doc.row(&[
            fmt_f64(r.c),
            fmt_f64(r.q),
            fmt_f64(r.throughput_mean),
            fmt_f64(r.throughput_stderr),
        ]);
    }
    sink.finish(&doc).context("writing CSV")?;
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let sink = optional_sink(&cfg)?;
    let params = cfg.channel_params()?;
    let report = validate::validate_lemma(
        &params,
        args.samples,
        args.bins,
        args.tolerance,
        cfg.run.master_seed,
    )?;

    println!(
        "closed-form vs Monte-Carlo success probability ({} samples, {} bins, seed {})",
        report.n_samples, args.bins, cfg.run.master_seed
    );
    print!("{}", report.render_table());

    if let Some(sink) = sink {
        let mut doc = CsvDoc::new(
            "validate-lemma",
            &cfg.resolved_json()?,
            "bin_lo,bin_hi,bin_mid,count,successes,empirical,closed_form,abs_dev",
        );
        for b in &report.bins {
            doc.row(&[
                fmt_f64(b.lo),
                fmt_f64(b.hi),
                fmt_f64(b.mid),
                b.count.to_string(),
                b.successes.to_string(),
                b.empirical.map(fmt_f64).unwrap_or_default(),
                fmt_f64(b.closed_form),
                b.abs_dev.map(fmt_f64).unwrap_or_default(),
            ]);
        }
        sink.finish(&doc).context("writing CSV")?;
    }

    if !report.passed() {
        let mut lines = String::new();
        for &i in &report.failing {
            let b = &report.bins[i];
            lines.push_str(&format!(
                "\n  bin [{:.5}, {:.5}): |{:.6} - {:.6}| = {:.6}",
                b.lo,
                b.hi,
                b.empirical.unwrap_or(f64::NAN),
                b.closed_form,
                b.abs_dev.unwrap_or(f64::NAN)
            ));
        }
        bail!(
            "{} bin(s) exceed tolerance {}:{}",
            report.failing.len(),
            report.tolerance,
            lines
        );
    }
    println!("PASS");
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::SweepV(args) => cmd_sweep_v(args),
        Command::SweepQ(args) => cmd_sweep_q(args),
        Command::ValidateLemma(args) => cmd_validate(args),
    }
}
