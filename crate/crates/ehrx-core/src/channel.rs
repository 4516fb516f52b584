//! Slot-level channel model.
//!
//! `n` transmitters contend on a slotted channel. In each slot, transmitter
//! `i` is active with probability `q_i`, independently of the others and of
//! past slots. Active links see block Rayleigh fading, so the received power
//! gain of link `i` is exponential with mean `mu_i`. The receiver observes the
//! aggregate power `gamma = P * sum(h_i over active i)`; the slot is decodable
//! only when exactly one transmitter is active.

use alloc::vec::Vec;
use core::fmt;
use rand::Rng;

use crate::math;

/// Hard cap on the number of transmitters; the exact collision statistics
/// enumerate per-group occupancy patterns, which grows too fast beyond this.
pub const MAX_TRANSMITTERS: usize = 20;

/// Invalid channel parameterization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamError {
    /// No transmitters given.
    Empty,
    /// More transmitters than [`MAX_TRANSMITTERS`].
    TooMany(usize),
    /// `means` and `access_probs` differ in length.
    LengthMismatch { means: usize, probs: usize },
    /// Mean gain at `index` is not finite and positive.
    BadMean(usize),
    /// Access probability at `index` is outside [0, 1].
    BadAccessProb(usize),
    /// Transmit power is not finite and positive.
    BadPower,
    /// Truncation quantile is outside (0, 1).
    BadQuantile,
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::Empty => write!(f, "at least one transmitter is required"),
            ParamError::TooMany(n) => {
                write!(f, "{n} transmitters exceeds the supported maximum of {MAX_TRANSMITTERS}")
            }
            ParamError::LengthMismatch { means, probs } => write!(
                f,
                "means has {means} entries but access_probs has {probs}"
            ),
            ParamError::BadMean(i) => write!(f, "mean gain {i} must be finite and > 0"),
            ParamError::BadAccessProb(i) => {
                write!(f, "access probability {i} must lie in [0, 1]")
            }
            ParamError::BadPower => write!(f, "transmit power must be finite and > 0"),
            ParamError::BadQuantile => write!(f, "gain quantile epsilon must lie in (0, 1)"),
        }
    }
}

impl core::error::Error for ParamError {}

/// Static description of the contention channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Mean fading gain `mu_i` per transmitter.
    pub means: Vec<f64>,
    /// Per-slot access probability `q_i` per transmitter.
    pub access_probs: Vec<f64>,
    /// Common transmit power `P`.
    pub power: f64,
    /// Upper-tail mass `eps` cut from each fading gain; samples are drawn from
    /// the exponential conditioned on `h < mu * ln(1/eps)`.
    pub gain_quantile_eps: f64,
}

impl ChannelParams {
    pub fn new(
        means: Vec<f64>,
        access_probs: Vec<f64>,
        power: f64,
        gain_quantile_eps: f64,
    ) -> Result<Self, ParamError> {
        let params = ChannelParams { means, access_probs, power, gain_quantile_eps };
        params.validate()?;
        Ok(params)
    }

    /// `n` identical transmitters.
    pub fn uniform(
        n: usize,
        mean: f64,
        access_prob: f64,
        power: f64,
        gain_quantile_eps: f64,
    ) -> Result<Self, ParamError> {
        Self::new(
            alloc::vec![mean; n],
            alloc::vec![access_prob; n],
            power,
            gain_quantile_eps,
        )
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.means.is_empty() {
            return Err(ParamError::Empty);
        }
        if self.means.len() > MAX_TRANSMITTERS {
            return Err(ParamError::TooMany(self.means.len()));
        }
        if self.means.len() != self.access_probs.len() {
            return Err(ParamError::LengthMismatch {
                means: self.means.len(),
                probs: self.access_probs.len(),
            });
        }
        for (i, &mu) in self.means.iter().enumerate() {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(ParamError::BadMean(i));
            }
        }
        for (i, &q) in self.access_probs.iter().enumerate() {
            if !(q.is_finite() && (0.0..=1.0).contains(&q)) {
                return Err(ParamError::BadAccessProb(i));
            }
        }
        if !(self.power.is_finite() && self.power > 0.0) {
            return Err(ParamError::BadPower);
        }
        let eps = self.gain_quantile_eps;
        if !(eps.is_finite() && 0.0 < eps && eps < 1.0) {
            return Err(ParamError::BadQuantile);
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.means.len()
    }

    /// Truncation point of link `i`'s gain: `mu_i * ln(1/eps)`.
    pub fn gain_cap(&self, i: usize) -> f64 {
        self.means[i] * math::ln(1.0 / self.gain_quantile_eps)
    }

    /// Largest possible received power: every link active at its gain cap.
    /// This is the natural `gamma_max` for sizing batteries and tables.
    pub fn default_gamma_max(&self) -> f64 {
        self.power * (0..self.n()).map(|i| self.gain_cap(i)).sum::<f64>()
    }

    /// Mean received power per transmitter as seen by the receiver: `P * mu_i`.
    pub fn scaled_means(&self) -> Vec<f64> {
        self.means.iter().map(|&mu| self.power * mu).collect()
    }

    /// Probability that at least one transmitter is active.
    pub fn busy_prob(&self) -> f64 {
        1.0 - self.access_probs.iter().map(|&q| 1.0 - q).product::<f64>()
    }
}

/// Outcome of sampling one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRealization {
    /// Indices of transmitters that fired this slot.
    pub active: Vec<usize>,
    /// Fading gains of the active transmitters, aligned with `active`.
    pub gains: Vec<f64>,
    /// Received power `P * sum(gains)`, clamped to the engine's `gamma_max`.
    pub gamma: f64,
    /// Exactly one transmitter fired.
    pub success: bool,
}

impl SlotRealization {
    pub fn new() -> Self {
        SlotRealization { active: Vec::new(), gains: Vec::new(), gamma: 0.0, success: false }
    }

    pub fn is_idle(&self) -> bool {
        self.active.is_empty()
    }
}

impl Default for SlotRealization {
    fn default() -> Self {
        Self::new()
    }
}

/// Draw from an exponential with the given mean, conditioned below its upper
/// `1 - eps` quantile. Inverse CDF of the conditional law, so one uniform per
/// draw and the support is exactly `[0, mean * ln(1/eps))`.
fn sample_truncated_exp<R: Rng + ?Sized>(mean: f64, eps: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    -mean * math::log1p(-u * (1.0 - eps))
}

/// Sample one slot: who fires, their gains, and the resulting received power.
pub fn sample_slot<R: Rng + ?Sized>(
    params: &ChannelParams,
    gamma_max: f64,
    rng: &mut R,
) -> SlotRealization {
    let mut slot = SlotRealization::new();
    sample_slot_into(params, gamma_max, rng, &mut slot);
    slot
}

/// As [`sample_slot`] but reuses `slot`'s buffers; the hot path for long runs.
pub fn sample_slot_into<R: Rng + ?Sized>(
    params: &ChannelParams,
    gamma_max: f64,
    rng: &mut R,
    slot: &mut SlotRealization,
) {
    slot.active.clear();
    slot.gains.clear();
    let mut total = 0.0;
    for i in 0..params.n() {
        if rng.gen_bool(params.access_probs[i]) {
            let h = sample_truncated_exp(params.means[i], params.gain_quantile_eps, rng);
            slot.active.push(i);
            slot.gains.push(h);
            total += h;
        }
    }
    slot.gamma = if slot.active.is_empty() {
        0.0
    } else {
        (params.power * total).min(gamma_max)
    };
    slot.success = slot.active.len() == 1;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::stream_rng;

    fn params_3() -> ChannelParams {
        ChannelParams::new(vec![1.0, 2.0, 3.0], vec![0.2, 0.3, 0.4], 1.0, 1e-6).unwrap()
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        assert_eq!(
            ChannelParams::new(vec![], vec![], 1.0, 1e-6).unwrap_err(),
            ParamError::Empty
        );
        assert_eq!(
            ChannelParams::uniform(21, 1.0, 0.1, 1.0, 1e-6).unwrap_err(),
            ParamError::TooMany(21)
        );
        assert_eq!(
            ChannelParams::new(vec![1.0], vec![0.1, 0.2], 1.0, 1e-6).unwrap_err(),
            ParamError::LengthMismatch { means: 1, probs: 2 }
        );
        assert_eq!(
            ChannelParams::new(vec![0.0], vec![0.1], 1.0, 1e-6).unwrap_err(),
            ParamError::BadMean(0)
        );
        assert_eq!(
            ChannelParams::new(vec![1.0], vec![1.5], 1.0, 1e-6).unwrap_err(),
            ParamError::BadAccessProb(0)
        );
        assert_eq!(
            ChannelParams::new(vec![1.0], vec![0.5], 0.0, 1e-6).unwrap_err(),
            ParamError::BadPower
        );
        assert_eq!(
            ChannelParams::new(vec![1.0], vec![0.5], 1.0, 0.0).unwrap_err(),
            ParamError::BadQuantile
        );
        assert_eq!(
            ChannelParams::new(vec![1.0], vec![0.5], 1.0, 1.0).unwrap_err(),
            ParamError::BadQuantile
        );
    }

    #[test]
    fn zero_access_prob_means_always_idle() {
        let params = ChannelParams::uniform(4, 1.0, 0.0, 1.0, 1e-6).unwrap();
        let mut rng = stream_rng(7, 0);
        for _ in 0..200 {
            let slot = sample_slot(&params, f64::INFINITY, &mut rng);
            assert!(slot.is_idle());
            assert_eq!(slot.gamma, 0.0);
            assert!(!slot.success);
        }
    }

    #[test]
    fn single_certain_transmitter_always_succeeds() {
        let params = ChannelParams::new(vec![2.0], vec![1.0], 1.5, 1e-6).unwrap();
        let mut rng = stream_rng(7, 1);
        for _ in 0..200 {
            let slot = sample_slot(&params, f64::INFINITY, &mut rng);
            assert_eq!(slot.active, vec![0]);
            assert!(slot.success);
            assert!(slot.gamma > 0.0);
            assert_eq!(slot.gamma, 1.5 * slot.gains[0]);
        }
    }

    #[test]
    fn gains_respect_truncation_and_gamma_cap() {
        let params = params_3();
        let gamma_max = params.default_gamma_max();
        let mut rng = stream_rng(11, 0);
        for _ in 0..5000 {
            let slot = sample_slot(&params, gamma_max, &mut rng);
            for (&i, &h) in slot.active.iter().zip(&slot.gains) {
                assert!(h >= 0.0);
                assert!(h < params.gain_cap(i), "gain {h} not below cap {}", params.gain_cap(i));
            }
            assert!(slot.gamma <= gamma_max);
            assert_eq!(slot.success, slot.active.len() == 1);
        }
    }

    #[test]
    fn explicit_gamma_cap_clamps() {
        let params = ChannelParams::new(vec![5.0], vec![1.0], 1.0, 1e-6).unwrap();
        let mut rng = stream_rng(3, 0);
        let cap = 0.5;
        let mut hit = 0;
        for _ in 0..2000 {
            let slot = sample_slot(&params, cap, &mut rng);
            assert!(slot.gamma <= cap);
            if slot.gamma == cap {
                hit += 1;
            }
        }
        assert!(hit > 0, "cap of {cap} should bind for mean-5 gains");
    }

    #[test]
    fn same_seed_same_stream_reproduces() {
        let params = params_3();
        let mut a = stream_rng(42, 3);
        let mut b = stream_rng(42, 3);
        for _ in 0..100 {
            assert_eq!(
                sample_slot(&params, 10.0, &mut a),
                sample_slot(&params, 10.0, &mut b)
            );
        }
    }

    #[test]
    fn different_streams_decouple() {
        let params = params_3();
        let mut a = stream_rng(42, 0);
        let mut b = stream_rng(42, 1);
        let differs = (0..100).any(|_| {
            sample_slot(&params, 10.0, &mut a) != sample_slot(&params, 10.0, &mut b)
        });
        assert!(differs);
    }

    #[test]
    fn default_gamma_max_matches_formula() {
        let params = params_3();
        // P * ln(1/eps) * sum(mu_i) with P = 1, eps = 1e-6.
        let expect = (1e6f64).ln() * 6.0;
        assert!((params.default_gamma_max() - expect).abs() < 1e-9);
    }
}
