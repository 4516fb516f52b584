//! Density of a sum of independent exponential random variables
//! (hypoexponential distribution), parametrized by the stage means.
//!
//! For pairwise-distinct rates `lambda_i = 1/mu_i` the density is the classic
//! partial-fraction mixture
//!
//! ```text
//! f(x) = sum_i lambda_i e^{-lambda_i x} prod_{j != i} lambda_j / (lambda_j - lambda_i)
//! ```
//!
//! That formula blows up as rates coincide, so means are first clustered:
//! values within [`MEAN_CLUSTER_REL_TOL`] of each other merge into one group
//! represented by their average, giving rates `lambda_g` with multiplicities
//! `m_g`. The Laplace transform `prod_g (lambda_g / (s + lambda_g))^{m_g}`
//! then expands into partial fractions with polynomial weights:
//!
//! ```text
//! f(x) = sum_g e^{-lambda_g x} sum_{l=1}^{m_g} b_{g,l} x^{l-1}
//! ```
//!
//! where the `b_{g,l}` come from Taylor coefficients of the transform with
//! group `g`'s poles removed. Numerical caveat: clustering keeps the expansion
//! well conditioned for exactly repeated or well-separated means, but accuracy
//! degrades when distinct means sit just above the clustering tolerance
//! (relative gaps around 1e-3) because the expansion then cancels heavily.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::{ParamError, MAX_TRANSMITTERS};
use crate::math;

/// Relative tolerance under which two stage means are treated as equal and
/// merged into one group.
pub const MEAN_CLUSTER_REL_TOL: f64 = 1e-4;

/// Invalid input to the collision statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatsError {
    /// The underlying channel parameters are invalid.
    Channel(ParamError),
    /// No stage means given.
    EmptyMeans,
    /// More stages than [`MAX_TRANSMITTERS`].
    TooManyMeans(usize),
    /// Stage mean at `index` is not finite and positive.
    BadMean(usize),
    /// Access probability at `index` is outside [0, 1].
    BadAccessProb(usize),
    /// Means and access probabilities differ in length.
    LengthMismatch { means: usize, probs: usize },
    /// Every access probability is zero, so no slot is ever busy and the
    /// conditional success probability is undefined.
    NeverBusy,
    /// Received power must be finite and > 0 for the conditional law.
    BadGamma,
    /// Bin edges must be finite, strictly increasing, and at least two.
    BadBinEdges,
    /// At least one Monte Carlo sample is required.
    NoSamples,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::Channel(e) => write!(f, "invalid channel parameters: {e}"),
            StatsError::EmptyMeans => write!(f, "at least one stage mean is required"),
            StatsError::TooManyMeans(n) => {
                write!(f, "{n} stages exceeds the supported maximum of {MAX_TRANSMITTERS}")
            }
            StatsError::BadMean(i) => write!(f, "stage mean {i} must be finite and > 0"),
            StatsError::BadAccessProb(i) => {
                write!(f, "access probability {i} must lie in [0, 1]")
            }
            StatsError::LengthMismatch { means, probs } => {
                write!(f, "means has {means} entries but access_probs has {probs}")
            }
            StatsError::NeverBusy => {
                write!(f, "all access probabilities are zero; no slot is ever busy")
            }
            StatsError::BadGamma => write!(f, "received power must be finite and > 0"),
            StatsError::BadBinEdges => {
                write!(f, "bin edges must be finite, strictly increasing, and at least two")
            }
            StatsError::NoSamples => write!(f, "sample count must be at least 1"),
        }
    }
}

impl core::error::Error for StatsError {}

/// Result of grouping nearly equal means.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MeanClusters {
    /// Representative mean (group average), ascending.
    pub reps: Vec<f64>,
    /// Number of original means in each group.
    pub mults: Vec<usize>,
    /// Group index of each original mean.
    pub assignment: Vec<usize>,
}

impl MeanClusters {
    pub fn rates(&self) -> Vec<f64> {
        self.reps.iter().map(|&mu| 1.0 / mu).collect()
    }
}

fn validate_means(means: &[f64]) -> Result<(), StatsError> {
    if means.is_empty() {
        return Err(StatsError::EmptyMeans);
    }
    if means.len() > MAX_TRANSMITTERS {
        return Err(StatsError::TooManyMeans(means.len()));
    }
    for (i, &mu) in means.iter().enumerate() {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(StatsError::BadMean(i));
        }
    }
    Ok(())
}

/// Group means whose neighbours (in sorted order) differ by at most `rel_tol`
/// relative to the larger value. Each group is represented by its average.
pub(crate) fn cluster_means(means: &[f64], rel_tol: f64) -> MeanClusters {
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]));

    let mut reps = Vec::new();
    let mut mults = Vec::new();
    let mut assignment = vec![0usize; means.len()];

    let mut group_sum = 0.0;
    let mut group_len = 0usize;
    let mut last = 0.0;
    for (pos, &idx) in order.iter().enumerate() {
        let v = means[idx];
        let new_group = pos == 0 || (v - last) > rel_tol * v;
        if new_group && group_len > 0 {
            reps.push(group_sum / group_len as f64);
            mults.push(group_len);
            group_sum = 0.0;
            group_len = 0;
        }
        assignment[idx] = reps.len();
        group_sum += v;
        group_len += 1;
        last = v;
    }
    reps.push(group_sum / group_len as f64);
    mults.push(group_len);

    MeanClusters { reps, mults, assignment }
}

/// Density for pairwise-distinct rates.
pub(crate) fn pdf_distinct(x: f64, rates: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, &li) in rates.iter().enumerate() {
        let mut coeff = li;
        for (j, &lj) in rates.iter().enumerate() {
            if j != i {
                coeff *= lj / (lj - li);
            }
        }
        total += coeff * math::exp(-li * x);
    }
    total
}

/// Partial-fraction weights for grouped rates. Entry `[g][l-1]` multiplies
/// `x^{l-1} e^{-lambda_g x}` in the density (the `1/(l-1)!` is folded in).
///
/// For group `g` with multiplicity `m_g`, the weights are the Taylor
/// coefficients at `s = -lambda_g` of `H(t) = prod_{h != g} (t + lambda_h -
/// lambda_g)^{-m_h}`, obtained from the logarithmic-derivative recursion
/// `(j+1) d_{j+1} = sum_r c_r d_{j-r}` with `c_r = (-1)^{r+1} sum_{h != g}
/// m_h (lambda_h - lambda_g)^{-(r+1)}`.
pub(crate) fn partial_fraction_coeffs(rates: &[f64], mults: &[usize]) -> Vec<Vec<f64>> {
    let scale: f64 = rates
        .iter()
        .zip(mults)
        .map(|(&l, &m)| math::ipow(l, m as u32))
        .product();

    let mut coeffs = Vec::with_capacity(rates.len());
    for (g, (&lg, &mg)) in rates.iter().zip(mults).enumerate() {
        let mut d = vec![0.0; mg];
        d[0] = rates
            .iter()
            .zip(mults)
            .enumerate()
            .filter(|&(h, _)| h != g)
            .map(|(_, (&lh, &mh))| 1.0 / math::ipow(lh - lg, mh as u32))
            .product();

        if mg > 1 {
            // c[r] = (-1)^{r+1} sum_{h != g} m_h (lambda_h - lambda_g)^{-(r+1)}
            let mut c = vec![0.0; mg - 1];
            for (h, (&lh, &mh)) in rates.iter().zip(mults).enumerate() {
                if h == g {
                    continue;
                }
                let inv = 1.0 / (lh - lg);
                let mut p = inv;
                for (r, cr) in c.iter_mut().enumerate() {
                    let sign = if r % 2 == 0 { -1.0 } else { 1.0 };
                    *cr += sign * mh as f64 * p;
                    p *= inv;
                }
            }
            for j in 0..mg - 1 {
                let mut acc = 0.0;
                for r in 0..=j {
                    acc += c[r] * d[j - r];
                }
                d[j + 1] = acc / (j + 1) as f64;
            }
        }

        // b_{g,l} = scale * d_{m_g - l} / (l-1)!
        let mut b = vec![0.0; mg];
        let mut fact = 1.0;
        for l in 1..=mg {
            b[l - 1] = scale * d[mg - l] / fact;
            fact *= l as f64;
        }
        coeffs.push(b);
    }
    coeffs
}

/// Evaluate `sum_g e^{-lambda_g x} * poly_g(x)` with Horner's rule.
pub(crate) fn eval_poly_mixture(x: f64, rates: &[f64], coeffs: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (&lg, b) in rates.iter().zip(coeffs) {
        let mut poly = 0.0;
        for &bk in b.iter().rev() {
            poly = poly * x + bk;
        }
        total += poly * math::exp(-lg * x);
    }
    total
}

/// Probability density at `x` of the sum of independent exponentials with the
/// given means. Zero for `x < 0`.
pub fn hypoexp_pdf(x: f64, means: &[f64]) -> Result<f64, StatsError> {
    validate_means(means)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    let clusters = cluster_means(means, MEAN_CLUSTER_REL_TOL);
    let rates = clusters.rates();
    let value = if clusters.mults.iter().all(|&m| m == 1) {
        pdf_distinct(x, &rates)
    } else {
        let coeffs = partial_fraction_coeffs(&rates, &clusters.mults);
        eval_poly_mixture(x, &rates, &coeffs)
    };
    // Roundoff can leave a tiny negative residue where the true density is ~0.
    Ok(value.max(0.0))
}
