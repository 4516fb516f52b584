//! Perturbed-Lyapunov index policy for the decode/harvest decision.
//!
//! The receiver keeps a battery (energy queue) `E(t)` and a fixed target
//! level `theta`. Each busy slot it compares two index values derived from a
//! drift-plus-penalty bound:
//!
//! ```text
//! index_decode  = V (1-tau) log2(1+gamma) ps + (E - theta) phi_de(gamma)
//! index_harvest = (theta - E) (1-tau) eta gamma
//! ```
//!
//! and decodes when `index_decode >= index_harvest`, i.e. when
//! `V (1-tau) log2(1+gamma) ps >= (theta - E) ((1-tau) eta gamma +
//! phi_de(gamma))`. Below the target the weighted success rate must beat the
//! full opportunity cost of not banking energy; at or above the target the
//! decode branch always wins. With `theta = V/eta + phi_de(gamma_max) +
//! phi_se + phi_pi` this keeps the battery inside `[0, theta + gamma_max)`
//! and forces harvesting whenever the battery cannot cover a worst-case
//! decode.

use core::fmt;

use crate::math;

/// Invalid receiver energy configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigError {
    /// `tau` must lie in [0, 1).
    BadSlotFraction,
    /// `eta` must lie in (0, 1].
    BadEfficiency,
    /// Energy costs must be finite and >= 0.
    BadCost,
    /// `gamma_max` must be finite and > 0.
    BadGammaMax,
    /// `v` must be finite and > 0.
    BadPenaltyWeight,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::BadSlotFraction => write!(f, "tau must lie in [0, 1)"),
            ConfigError::BadEfficiency => write!(f, "eta must lie in (0, 1]"),
            ConfigError::BadCost => {
                write!(f, "energy costs (phi_se, phi_pi, c, offset) must be finite and >= 0")
            }
            ConfigError::BadGammaMax => write!(f, "gamma_max must be finite and > 0"),
            ConfigError::BadPenaltyWeight => write!(f, "v must be finite and > 0"),
        }
    }
}

impl core::error::Error for ConfigError {}

/// Receiver energy constants and the Lyapunov trade-off weight.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyConfig {
    /// Fraction of the slot spent sensing; decoding/harvesting use the rest.
    pub tau: f64,
    /// RF-to-battery harvesting efficiency.
    pub eta: f64,
    /// Sensing energy drained every slot.
    pub phi_se: f64,
    /// Pilot/processing energy drained every slot.
    pub phi_pi: f64,
    /// Rate-proportional decode cost coefficient `c`.
    pub decode_cost_c: f64,
    /// Additive decode cost.
    pub decode_cost_offset: f64,
    /// Cap on per-slot received power.
    pub gamma_max: f64,
    /// Throughput weight `V` in the drift-plus-penalty objective.
    pub v: f64,
}

impl EnergyConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tau.is_finite() && (0.0..1.0).contains(&self.tau)) {
            return Err(ConfigError::BadSlotFraction);
        }
        if !(self.eta.is_finite() && 0.0 < self.eta && self.eta <= 1.0) {
            return Err(ConfigError::BadEfficiency);
        }
        let costs = [self.phi_se, self.phi_pi, self.decode_cost_c, self.decode_cost_offset];
        if costs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(ConfigError::BadCost);
        }
        if !(self.gamma_max.is_finite() && self.gamma_max > 0.0) {
            return Err(ConfigError::BadGammaMax);
        }
        if !(self.v.is_finite() && self.v > 0.0) {
            return Err(ConfigError::BadPenaltyWeight);
        }
        Ok(())
    }

    /// Spectral efficiency of a decoded slot: `log2(1 + gamma)`.
    #[inline]
    pub fn rate(&self, gamma: f64) -> f64 {
        math::log2_1p(gamma)
    }

    /// Decoding energy `phi_de(gamma) = c log2(1+gamma) + offset`.
    #[inline]
    pub fn phi_de(&self, gamma: f64) -> f64 {
        self.decode_cost_c * math::log2_1p(gamma) + self.decode_cost_offset
    }

    /// Per-slot unconditional drain `phi_se + phi_pi`.
    #[inline]
    pub fn fixed_cost(&self) -> f64 {
        self.phi_se + self.phi_pi
    }

    /// Total energy a decode at `gamma` requires this slot.
    #[inline]
    pub fn decode_cost(&self, gamma: f64) -> f64 {
        self.phi_de(gamma) + self.fixed_cost()
    }

    /// Worst-case decode bill `phi_de(gamma_max) + phi_se + phi_pi`; below
    /// this level the policy is expected to harvest.
    pub fn harvest_threshold(&self) -> f64 {
        self.phi_de(self.gamma_max) + self.fixed_cost()
    }
}

/// Battery target `theta = V/eta + phi_de(gamma_max) + phi_se + phi_pi`.
pub fn compute_theta(cfg: &EnergyConfig) -> f64 {
    cfg.v / cfg.eta + cfg.harvest_threshold()
}

/// Drift constant `B = (gamma_max^2 + phi_de(gamma_max)^2 + (phi_se+phi_pi)^2)/2`;
/// `B/V` is the reported optimality-gap bound.
pub fn compute_b(cfg: &EnergyConfig) -> f64 {
    let phi = cfg.phi_de(cfg.gamma_max);
    let fixed = cfg.fixed_cost();
    0.5 * (cfg.gamma_max * cfg.gamma_max + phi * phi + fixed * fixed)
}

/// Battery level plus the fixed target it is steered toward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    pub energy: f64,
    pub theta: f64,
}

impl ControllerState {
    /// Start at the harvest-forcing threshold so the battery bounds hold from
    /// the first slot.
    pub fn initial(cfg: &EnergyConfig) -> Self {
        ControllerState { energy: cfg.harvest_threshold(), theta: compute_theta(cfg) }
    }
}

/// Outcome of one decode/harvest decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRecord {
    /// True when the slot is decoded (rho = 1).
    pub decode: bool,
    /// Value of the decode branch of the argmax.
    pub index_decode: f64,
    /// Value of the harvest branch of the argmax.
    pub index_harvest: f64,
    /// Success probability fed into the decision.
    pub ps: f64,
    /// Whether the battery covers `phi_de(gamma) + phi_se + phi_pi`.
    pub affordable: bool,
}

/// Index-policy decision for one slot. Idle slots (`gamma <= 0`) force
/// harvest with both branch indices zero; ties go to decode.
pub fn decide(state: &ControllerState, gamma: f64, ps: f64, cfg: &EnergyConfig) -> DecisionRecord {
    if gamma <= 0.0 {
        return DecisionRecord {
            decode: false,
            index_decode: 0.0,
            index_harvest: 0.0,
            ps,
            affordable: state.energy >= cfg.decode_cost(0.0),
        };
    }
    let rate = cfg.rate(gamma);
    let phi_de = cfg.decode_cost_c * rate + cfg.decode_cost_offset;
    let gap = state.theta - state.energy;
    let index_decode = cfg.v * (1.0 - cfg.tau) * rate * ps - gap * phi_de;
    let index_harvest = gap * (1.0 - cfg.tau) * cfg.eta * gamma;
    DecisionRecord {
        decode: index_decode >= index_harvest,
        index_decode,
        index_harvest,
        ps,
        affordable: state.energy >= phi_de + cfg.fixed_cost(),
    }
}

/// Energy queue recursion
/// `E(t+1) = [E - rho phi_de(gamma) - phi_se - phi_pi + (1-rho)(1-tau) eta gamma]^+`
/// with a single clamp at zero on the net result.
pub fn battery_step(state: &ControllerState, decode: bool, gamma: f64, cfg: &EnergyConfig) -> f64 {
    let net = if decode {
        state.energy - cfg.phi_de(gamma) - cfg.fixed_cost()
    } else {
        state.energy - cfg.fixed_cost() + (1.0 - cfg.tau) * cfg.eta * gamma
    };
    net.max(0.0)
}
