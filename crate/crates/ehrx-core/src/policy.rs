//! Reference decision rules the index policy is benchmarked against. All of
//! them share the battery recursion and affordability gate of the main
//! controller, so measured differences isolate the decision rule itself.

use core::fmt;
use core::str::FromStr;

use crate::channel::SlotRealization;
use crate::controller::EnergyConfig;

/// Which decision rule drives a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    /// Perturbed-Lyapunov index policy.
    Lyapunov,
    /// Decodes exactly the collision-free slots it can afford; knows slot
    /// outcomes in advance.
    Genie,
    /// Decodes every busy slot it can afford.
    Greedy,
    /// Never decodes; throughput is identically zero.
    AlwaysHarvest,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] =
        [PolicyKind::Lyapunov, PolicyKind::Genie, PolicyKind::Greedy, PolicyKind::AlwaysHarvest];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Lyapunov => "lyapunov",
            PolicyKind::Genie => "genie",
            PolicyKind::Greedy => "greedy",
            PolicyKind::AlwaysHarvest => "always-harvest",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unknown policy name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsePolicyError;

impl fmt::Display for ParsePolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expected one of: lyapunov, genie, greedy, always-harvest")
    }
}

impl core::error::Error for ParsePolicyError {}

impl FromStr for PolicyKind {
    type Err = ParsePolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lyapunov" => Ok(PolicyKind::Lyapunov),
            "genie" => Ok(PolicyKind::Genie),
            "greedy" => Ok(PolicyKind::Greedy),
            "always-harvest" | "always_harvest" => Ok(PolicyKind::AlwaysHarvest),
            _ => Err(ParsePolicyError),
        }
    }
}

/// Decode iff the slot is known collision-free and the battery covers it.
pub fn genie_decide(energy: f64, slot: &SlotRealization, cfg: &EnergyConfig) -> bool {
    slot.success && energy >= cfg.decode_cost(slot.gamma)
}

/// Decode iff the slot is busy and the battery covers it.
pub fn greedy_decide(energy: f64, gamma: f64, cfg: &EnergyConfig) -> bool {
    gamma > 0.0 && energy >= cfg.decode_cost(gamma)
}

/// Never decode.
pub fn always_harvest_decide() -> bool {
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> EnergyConfig {
        EnergyConfig {
            tau: 0.01,
            eta: 0.7,
            phi_se: 0.01,
            phi_pi: 0.01,
            decode_cost_c: 1.0,
            decode_cost_offset: 0.5,
            gamma_max: 50.0,
            v: 200.0,
        }
    }

    fn slot(active: Vec<usize>, gamma: f64) -> SlotRealization {
        let success = active.len() == 1;
        SlotRealization { gains: vec![0.0; active.len()], active, gamma, success }
    }

    #[test]
    fn genie_skips_collisions_and_unaffordable_slots() {
        let cfg = cfg();
        assert!(!genie_decide(1e9, &slot(vec![1, 2], 3.0), &cfg));
        assert!(!genie_decide(0.0, &slot(vec![1], 3.0), &cfg));
        assert!(genie_decide(1e9, &slot(vec![1], 3.0), &cfg));
        assert!(!genie_decide(1e9, &slot(vec![], 0.0), &cfg));
    }

    #[test]
    fn genie_affordability_is_exact_at_the_boundary() {
        let cfg = cfg();
        let s = slot(vec![0], 1.0);
        let cost = cfg.decode_cost(1.0);
        assert!(genie_decide(cost, &s, &cfg));
        assert!(!genie_decide(cost - 1e-9, &s, &cfg));
    }

    #[test]
    fn greedy_decodes_anything_it_can_pay_for() {
        let cfg = cfg();
        assert!(!greedy_decide(1e9, 0.0, &cfg));
        assert!(!greedy_decide(0.1, 4.0, &cfg));
        assert!(greedy_decide(10.0, 4.0, &cfg));
    }

    #[test]
    fn always_harvest_never_decodes() {
        assert!(!always_harvest_decide());
    }

    #[test]
    fn policy_names_round_trip() {
        for kind in PolicyKind::ALL {
            assert_eq!(kind.as_str().parse::<PolicyKind>().unwrap(), kind);
        }
        assert_eq!("always_harvest".parse::<PolicyKind>().unwrap(), PolicyKind::AlwaysHarvest);
        assert!("idle".parse::<PolicyKind>().is_err());
    }
}
