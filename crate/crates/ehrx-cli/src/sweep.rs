//! Parameter sweeps over the penalty weight V and the common access
//! probability q, each repeated per decode-cost coefficient c.
//!
//! Every (c, axis, seed) run gets the random stream
//! `point_index * seeds + seed_index` under the config's master seed, where
//! points are ordered by (c index, axis index). Results are keyed by
//! construction order, so the output is identical however many worker
//! threads execute the runs.

use anyhow::{Context, Result};
use rayon::prelude::*;

use ehrx_core::{run, ChannelParams, EnergyConfig, PolicyKind, SimMetrics};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepVRow {
    pub c: f64,
    pub v: f64,
    pub throughput_mean: f64,
    pub throughput_stderr: f64,
    /// Optimality-gap bound B/V at this (c, V).
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepQRow {
    pub c: f64,
    pub q: f64,
    pub throughput_mean: f64,
    pub throughput_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QSweepResult {
    pub rows: Vec<SweepQRow>,
    /// Per c, the grid q maximizing mean throughput (first on ties).
    pub argmax_q: Vec<(f64, f64)>,
}

/// Sample mean and its standard error (ddof = 1; zero for a single run).
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn build_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("building worker pool")
}

/// Executes one lyapunov run per (point, seed) pair and groups per-point
/// throughputs, preserving point order.
fn run_points(
    cfg: &ExperimentConfig,
    jobs: Option<usize>,
    points: Vec<(ChannelParams, EnergyConfig)>,
) -> Result<Vec<Vec<f64>>> {
    let seeds = cfg.run.seeds.max(1) as u64;
    let tasks: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| (0..seeds).map(move |s| (p, s)))
        .collect();
    let pool = build_pool(jobs)?;
    let metrics: Vec<SimMetrics> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(p, s)| {
                let (params, energy) = &points[p];
                let opts = cfg.run_options(p as u64 * seeds + s);
                run(PolicyKind::Lyapunov, params, energy, &opts)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut grouped = vec![Vec::with_capacity(seeds as usize); points.len()];
    for ((p, _), m) in tasks.iter().zip(metrics) {
        grouped[*p].push(m.throughput);
    }
    Ok(grouped)
}

/// Mean throughput against V for each c.
pub fn sweep_v(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<SweepVRow>> {
    cfg.validate_sweep_lists()?;
    let params = cfg.channel_params()?;
    let base = cfg.energy_config(&params)?;

    let mut keys = Vec::new();
    let mut points = Vec::new();
    for &c in &cfg.sweep.c_values {
        for &v in &cfg.sweep.v_values {
            let energy = EnergyConfig { decode_cost_c: c, v, ..base.clone() };
            energy.validate().context("invalid swept energy config")?;
            keys.push((c, v));
            points.push((params.clone(), energy));
        }
    }

    let grouped = run_points(cfg, jobs, points)?;
    Ok(keys
        .iter()
        .zip(&grouped)
        .map(|(&(c, v), tputs)| {
            let (mean, stderr) = mean_stderr(tputs);
            let bound = {
                let energy = EnergyConfig { decode_cost_c: c, v, ..base.clone() };
                ehrx_core::compute_b(&energy) / v
            };
            SweepVRow { c, v, throughput_mean: mean, throughput_stderr: stderr, bound }
        })
        .collect())
}

/// Mean throughput against a common access probability q for each c, plus
/// the per-c argmax over the grid.
pub fn sweep_q(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<QSweepResult> {
    cfg.validate_sweep_lists()?;
    let base_params = cfg.channel_params()?;
    let base = cfg.energy_config(&base_params)?;

    let mut keys = Vec::new();
    let mut points = Vec::new();
    for &c in &cfg.sweep.c_values {
        for &q in &cfg.sweep.q_values {
            let params = ChannelParams::new(
                base_params.means.clone(),
                vec![q; base_params.n()],
                base_params.power,
                base_params.gain_quantile_eps,
            )
            .context("invalid swept access probability")?;
            let energy = EnergyConfig { decode_cost_c: c, ..base.clone() };
            keys.push((c, q));
            points.push((params, energy));
        }
    }

    let grouped = run_points(cfg, jobs, points)?;
    let rows: Vec<SweepQRow> = keys
        .iter()
        .zip(&grouped)
        .map(|(&(c, q), tputs)| {
            let (mean, stderr) = mean_stderr(tputs);
            SweepQRow { c, q, throughput_mean: mean, throughput_stderr: stderr }
        })
        .collect();

    let n_q = cfg.sweep.q_values.len();
    let argmax_q = cfg
        .sweep
        .c_values
        .iter()
        .enumerate()
        .map(|(ci, &c)| {
            let block = &rows[ci * n_q..(ci + 1) * n_q];
            let best = block
                .iter()
                .fold(&block[0], |acc, r| if r.throughput_mean > acc.throughput_mean { r } else { acc });
            (c, best.q)
        })
        .collect();

    Ok(QSweepResult { rows, argmax_q })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_of_singleton_is_zero() {
        let (mean, se) = mean_stderr(&[2.5]);
        assert_eq!(mean, 2.5);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn stderr_matches_hand_calculation() {
        let (mean, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mean, 2.5);
        // Sample variance 5/3; stderr sqrt(5/12).
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
