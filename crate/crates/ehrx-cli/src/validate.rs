//! Monte-Carlo validation of the closed-form conditional success
//! probability: bins received power over simulated slots and compares the
//! per-bin empirical success frequency against the closed form at the bin
//! midpoint.

use anyhow::{ensure, Context, Result};

use ehrx_core::{estimate_success_prob_mc, stream_rng, ChannelParams, SuccessModel};

/// Bins with fewer busy slots than this carry too much sampling noise to
/// judge; they are reported but excluded from the pass/fail decision.
pub const MIN_BIN_COUNT: u64 = 1000;

/// Smallest sample budget that gives the qualifying bins a usable count.
pub const MIN_SAMPLES: u64 = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaBin {
    pub lo: f64,
    pub hi: f64,
    pub mid: f64,
    /// Busy slots whose received power landed in `[lo, hi)`.
    pub count: u64,
    pub successes: u64,
    /// Empirical success frequency; `None` for an empty bin.
    pub empirical: Option<f64>,
    /// Closed-form success probability at the bin midpoint.
    pub closed_form: f64,
    pub abs_dev: Option<f64>,
}

impl LemmaBin {
    /// Whether the bin has enough samples to count toward pass/fail.
    pub fn qualified(&self) -> bool {
        self.count >= MIN_BIN_COUNT
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub bins: Vec<LemmaBin>,
    pub n_samples: u64,
    pub tolerance: f64,
    /// Largest absolute deviation among qualified bins (0 if none qualify).
    pub max_dev: f64,
    /// Indices into `bins` of qualified bins exceeding the tolerance.
    pub failing: Vec<usize>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.failing.is_empty()
    }

    /// Fixed-width table for terminal output.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:>12} {:>12} {:>10} {:>11} {:>12} {:>10} {:>6}\n",
            "bin_lo", "bin_hi", "count", "empirical", "closed_form", "abs_dev", "check"
        ));
        for bin in &self.bins {
            let (emp, dev) = match (bin.empirical, bin.abs_dev) {
                (Some(e), Some(d)) => (format!("{e:.6}"), format!("{d:.6}")),
                _ => ("-".to_string(), "-".to_string()),
            };
            let check = if !bin.qualified() {
                "skip"
            } else if bin.abs_dev.unwrap_or(f64::INFINITY) <= self.tolerance {
                "ok"
            } else {
                "FAIL"
            };
            out.push_str(&format!(
                "{:>12.5} {:>12.5} {:>10} {:>11} {:>12.6} {:>10} {:>6}\n",
                bin.lo, bin.hi, bin.count, emp, bin.closed_form, dev, check
            ));
        }
        out.push_str(&format!(
            "max abs deviation over qualified bins: {:.6} (tolerance {})\n",
            self.max_dev, self.tolerance
        ));
        out
    }
}

/// Bin edges spanning `(0, 3 * E[gamma | busy]]`: three conditional means
/// cover the bulk of the received-power mass at the default parameters
/// while keeping per-bin counts high.
pub fn default_bin_edges(params: &ChannelParams, n_bins: usize) -> Result<Vec<f64>> {
    ensure!(n_bins >= 1, "need at least one bin");
    let busy = params.busy_prob();
    ensure!(busy > 0.0, "channel is never busy; no slots to bin");
    let mean_busy_gamma = params
        .means
        .iter()
        .zip(&params.access_probs)
        .map(|(&mu, &q)| params.power * q * mu)
        .sum::<f64>()
        / busy;
    let hi = 3.0 * mean_busy_gamma;
    Ok((0..=n_bins).map(|i| hi * i as f64 / n_bins as f64).collect())
}

/// Runs the Monte-Carlo estimate and scores it against the closed form.
pub fn validate_lemma(
    params: &ChannelParams,
    n_samples: u64,
    n_bins: usize,
    tolerance: f64,
    master_seed: u64,
) -> Result<LemmaReport> {
    ensure!(
        n_samples >= MIN_SAMPLES,
        "need at least {MIN_SAMPLES} samples, got {n_samples}"
    );
    ensure!(
        tolerance.is_finite() && tolerance > 0.0,
        "tolerance must be positive"
    );
    let edges = default_bin_edges(params, n_bins)?;
    let model = SuccessModel::new(params).context("building closed-form success model")?;
    let mut rng = stream_rng(master_seed, 0);
    let estimates = estimate_success_prob_mc(params, &edges, n_samples, &mut rng)
        .context("sampling empirical success frequencies")?;

    let mut bins = Vec::with_capacity(estimates.len());
    let mut max_dev: f64 = 0.0;
    let mut failing = Vec::new();
    for (i, est) in estimates.iter().enumerate() {
        let mid = 0.5 * (est.lo + est.hi);
        let closed_form = model
            .success_prob(mid)
            .with_context(|| format!("closed form at gamma = {mid}"))?;
        let empirical = est.estimate();
        let abs_dev = empirical.map(|e| (e - closed_form).abs());
        let bin = LemmaBin {
            lo: est.lo,
            hi: est.hi,
            mid,
            count: est.count,
            successes: est.successes,
            empirical,
            closed_form,
            abs_dev,
        };
        if bin.qualified() {
            let dev = abs_dev.expect("qualified bin has samples");
            max_dev = max_dev.max(dev);
            if dev > tolerance {
                failing.push(i);
            }
        }
        bins.push(bin);
    }
    Ok(LemmaReport { bins, n_samples, tolerance, max_dev, failing })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_tx() -> ChannelParams {
        ChannelParams::uniform(1, 1.0, 0.5, 1.0, 1e-6).unwrap()
    }

    #[test]
    fn single_transmitter_deviation_is_zero() {
        // One transmitter never collides, so both sides are exactly 1 on
        // every populated bin.
        let report = validate_lemma(&single_tx(), 200_000, 10, 0.02, 7).unwrap();
        assert!(report.passed());
        assert_eq!(report.max_dev, 0.0);
        assert!(report.bins.iter().any(|b| b.qualified()));
    }

    #[test]
    fn impossible_tolerance_lists_failing_bins() {
        let params = ChannelParams::uniform(3, 1.0, 0.3, 1.0, 1e-6).unwrap();
        let report = validate_lemma(&params, 200_000, 10, 1e-9, 7).unwrap();
        assert!(!report.passed());
        assert!(!report.failing.is_empty());
        for &i in &report.failing {
            assert!(report.bins[i].qualified());
            assert!(report.bins[i].abs_dev.unwrap() > 1e-9);
        }
    }

    #[test]
    fn sample_floor_enforced() {
        assert!(validate_lemma(&single_tx(), 99_999, 10, 0.02, 0).is_err());
    }

    #[test]
    fn edges_cover_three_conditional_means() {
        let params = ChannelParams::uniform(2, 2.0, 0.5, 1.0, 1e-6).unwrap();
        let edges = default_bin_edges(&params, 4).unwrap();
        // E[gamma | busy] = (2 * 0.5 * 2.0) / 0.75.
        let expect_hi = 3.0 * 2.0 / 0.75;
        assert_eq!(edges.len(), 5);
        assert_eq!(edges[0], 0.0);
        assert!((edges[4] - expect_hi).abs() < 1e-12);
    }

    #[test]
    fn table_marks_unqualified_bins() {
        let report = validate_lemma(&single_tx(), 100_000, 50, 0.02, 3).unwrap();
        let table = report.render_table();
        assert!(table.contains("ok"));
        // 50 bins over the tail leaves some sparse ones.
        if report.bins.iter().any(|b| !b.qualified()) {
            assert!(table.contains("skip"));
        }
    }
}
