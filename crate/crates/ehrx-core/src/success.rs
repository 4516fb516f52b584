//! Conditional collision statistics: given the receiver observed aggregate
//! power `gamma` in a busy slot, what is the probability the slot held exactly
//! one transmitter?
//!
//! By Bayes over the active set,
//!
//! ```text
//!          sum_i dens_i(gamma) q_i prod_{j != i} (1 - q_j)
//! P_s  =  -------------------------------------------------
//!          sum_{A nonempty} dens_A(gamma) prod_{i in A} q_i prod_{n not in A} (1 - q_n)
//! ```
//!
//! where `dens_A` is the hypoexponential density of the summed (scaled) gains
//! of subset `A`. Enumerating all `2^n - 1` subsets per query would be far too
//! slow for slot-rate use, so construction aggregates subsets by their rate
//! signature: transmitters are grouped by clustered mean, subsets collapse to
//! per-group occupancy counts weighted by within-group Poisson-binomial
//! masses, and every signature's partial-fraction expansion accumulates into
//! one polynomial per rate group. A query then costs one exponential and one
//! Horner evaluation per group. Exponents are shifted by the slowest rate so
//! the ratio stays well scaled out to the largest supported powers.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::channel::{sample_slot_into, ChannelParams, ParamError, SlotRealization};
use crate::hypoexp::{cluster_means, partial_fraction_coeffs, MEAN_CLUSTER_REL_TOL};
use crate::math;

pub use crate::hypoexp::StatsError;

impl From<ParamError> for StatsError {
    fn from(e: ParamError) -> Self {
        StatsError::Channel(e)
    }
}

/// Closed-form evaluator for the conditional success probability.
#[derive(Debug, Clone)]
pub struct SuccessModel {
    /// Rate of each mean group (1 / scaled representative mean), and the
    /// common shift applied to all exponents.
    rates: Vec<f64>,
    min_rate: f64,
    /// Numerator: single-active mass per group (constant in gamma).
    num_consts: Vec<f64>,
    /// Denominator: polynomial in gamma per group, low-order first.
    den_coeffs: Vec<Vec<f64>>,
}

struct SignatureScan<'a> {
    pbs: &'a [Vec<f64>],
    rates: &'a [f64],
    den_coeffs: &'a mut [Vec<f64>],
    total_weight: f64,
    sub_groups: Vec<usize>,
    sub_rates: Vec<f64>,
    sub_mults: Vec<usize>,
}

impl SignatureScan<'_> {
    /// Walk all per-group occupancy vectors, accumulating each signature's
    /// partial-fraction weights into the global per-group polynomials.
    fn walk(&mut self, g: usize, weight: f64) {
        if g == self.pbs.len() {
            if self.sub_groups.is_empty() {
                return;
            }
            self.total_weight += weight;
            let coeffs = partial_fraction_coeffs(&self.sub_rates, &self.sub_mults);
            for (slot, b) in self.sub_groups.iter().zip(&coeffs) {
                for (dst, &bk) in self.den_coeffs[*slot].iter_mut().zip(b) {
                    *dst += weight * bk;
                }
            }
            return;
        }
        for (m, &mass) in self.pbs[g].iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            if m > 0 {
                self.sub_groups.push(g);
                self.sub_rates.push(self.rates[g]);
                self.sub_mults.push(m);
            }
            self.walk(g + 1, weight * mass);
            if m > 0 {
                self.sub_groups.pop();
                self.sub_rates.pop();
                self.sub_mults.pop();
            }
        }
    }
}

/// Probability mass function of the number of active members, by dynamic
/// programming over the member access probabilities.
fn poisson_binomial(probs: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; probs.len() + 1];
    pmf[0] = 1.0;
    for (k, &q) in probs.iter().enumerate() {
        for m in (0..=k).rev() {
            let keep = pmf[m];
            pmf[m + 1] += keep * q;
            pmf[m] = keep * (1.0 - q);
        }
    }
    pmf
}

impl SuccessModel {
    pub fn new(params: &ChannelParams) -> Result<Self, StatsError> {
        params.validate()?;

        // Transmitters that never fire contribute nothing to any busy slot.
        let mut means = Vec::new();
        let mut probs = Vec::new();
        for (&mu, &q) in params.means.iter().zip(&params.access_probs) {
            if q > 0.0 {
                means.push(params.power * mu);
                probs.push(q);
            }
        }
        if means.is_empty() {
            return Err(StatsError::NeverBusy);
        }

        let clusters = cluster_means(&means, MEAN_CLUSTER_REL_TOL);
        let rates = clusters.rates();
        let n_groups = rates.len();

        let mut group_probs = vec![Vec::new(); n_groups];
        for (i, &g) in clusters.assignment.iter().enumerate() {
            group_probs[g].push(probs[i]);
        }

        // Numerator: exactly one active. Weight of "only i fires" is
        // q_i prod_{j != i} (1 - q_j); its density is the group's exponential.
        let mut num_consts = vec![0.0; n_groups];
        for (i, &g) in clusters.assignment.iter().enumerate() {
            let mut w = probs[i];
            for (j, &qj) in probs.iter().enumerate() {
                if j != i {
                    w *= 1.0 - qj;
                }
            }
            num_consts[g] += rates[g] * w;
        }

        // Denominator: every nonempty occupancy signature.
        let pbs: Vec<Vec<f64>> = group_probs.iter().map(|qs| poisson_binomial(qs)).collect();
        let mut den_coeffs: Vec<Vec<f64>> =
            clusters.mults.iter().map(|&m| vec![0.0; m]).collect();
        let mut scan = SignatureScan {
            pbs: &pbs,
            rates: &rates,
            den_coeffs: &mut den_coeffs,
            total_weight: 0.0,
            sub_groups: Vec::with_capacity(n_groups),
            sub_rates: Vec::with_capacity(n_groups),
            sub_mults: Vec::with_capacity(n_groups),
        };
        scan.walk(0, 1.0);
        let total_weight = scan.total_weight;

        // Signature weights must add up to the probability of a busy slot.
        let busy: f64 = 1.0 - probs.iter().map(|&q| 1.0 - q).product::<f64>();
        debug_assert!(
            (total_weight - busy).abs() <= 1e-9,
            "signature weights {total_weight} vs busy probability {busy}"
        );

        let min_rate = rates
            .iter()
            .zip(&den_coeffs)
            .filter(|(_, b)| b.iter().any(|&c| c != 0.0))
            .map(|(&r, _)| r)
            .fold(f64::INFINITY, f64::min);

        Ok(SuccessModel { rates, min_rate, num_consts, den_coeffs })
    }

    /// P(exactly one active | busy slot with received power `gamma`).
    pub fn success_prob(&self, gamma: f64) -> Result<f64, StatsError> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(StatsError::BadGamma);
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (g, &rate) in self.rates.iter().enumerate() {
            // Shift by the slowest rate: scales both sides by e^{min_rate *
            // gamma}, which cancels in the ratio but keeps the denominator
            // representable at large gamma.
            let e = math::exp(-(rate - self.min_rate) * gamma);
            num += self.num_consts[g] * e;
            let mut poly = 0.0;
            for &b in self.den_coeffs[g].iter().rev() {
                poly = poly * gamma + b;
            }
            den += poly * e;
        }
        if den <= 0.0 {
            // The true denominator is a positive mixture density; this can
            // only trigger through floating-point cancellation at extreme
            // parameters. Fail loudly rather than fabricate a probability.
            return Err(StatsError::BadGamma);
        }
        Ok((num / den).clamp(0.0, 1.0))
    }
}

/// One-shot convenience for [`SuccessModel::success_prob`].
pub fn success_prob(gamma: f64, params: &ChannelParams) -> Result<f64, StatsError> {
    SuccessModel::new(params)?.success_prob(gamma)
}

/// Empirical success frequency within one received-power bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinEstimate {
    /// Bin covers `gamma` in `[lo, hi)`.
    pub lo: f64,
    pub hi: f64,
    /// Busy slots that landed in the bin.
    pub count: u64,
    /// Of those, slots with exactly one transmitter active.
    pub successes: u64,
}

impl BinEstimate {
    /// Empirical conditional success probability; `None` for an empty bin.
    pub fn estimate(&self) -> Option<f64> {
        if self.count == 0 {
            None
        } else {
            Some(self.successes as f64 / self.count as f64)
        }
    }
}

/// Monte Carlo estimate of the conditional success probability, binned by
/// received power. Draws `n_samples` slots; idle slots count toward the draw
/// budget but land in no bin (the estimate conditions on a busy slot). Busy
/// slots outside `[edges.first(), edges.last())` are discarded.
pub fn estimate_success_prob_mc<R: Rng + ?Sized>(
    params: &ChannelParams,
    bin_edges: &[f64],
    n_samples: u64,
    rng: &mut R,
) -> Result<Vec<BinEstimate>, StatsError> {
    params.validate()?;
    if params.busy_prob() == 0.0 {
        return Err(StatsError::NeverBusy);
    }
    if bin_edges.len() < 2
        || bin_edges.iter().any(|e| !e.is_finite())
        || bin_edges.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(StatsError::BadBinEdges);
    }
    if n_samples == 0 {
        return Err(StatsError::NoSamples);
    }

    let mut bins: Vec<BinEstimate> = bin_edges
        .windows(2)
        .map(|w| BinEstimate { lo: w[0], hi: w[1], count: 0, successes: 0 })
        .collect();

    let gamma_max = params.default_gamma_max();
    let mut slot = SlotRealization::new();
    for _ in 0..n_samples {
        sample_slot_into(params, gamma_max, rng, &mut slot);
        if slot.is_idle() {
            continue;
        }
        let g = slot.gamma;
        if g < bin_edges[0] || g >= bin_edges[bin_edges.len() - 1] {
            continue;
        }
        let idx = bin_edges.partition_point(|&e| e <= g) - 1;
        bins[idx].count += 1;
        bins[idx].successes += slot.success as u64;
    }
    Ok(bins)
}
