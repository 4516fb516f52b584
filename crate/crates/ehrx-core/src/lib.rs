//! Discrete-time model of a self-powered receiver on a slotted
//! random-access collision channel.
//!
//! Each slot, every transmitter fires independently; a slot carries data only
//! when exactly one is active, while the superposed signal power can always be
//! harvested. The receiver must split each slot between decoding (spending
//! stored energy) and harvesting (banking it). The pieces:
//!
//! - [`channel`]: slot sampling over independent Rayleigh-faded links.
//! - [`hypoexp`]: density of a sum of independent exponentials, with repeated
//!   rates handled exactly.
//! - [`success`]: closed-form probability that a busy slot is collision-free
//!   given its received power, plus a Monte Carlo estimator for it.
//! - [`controller`]: the Lyapunov drift-plus-penalty decode/harvest rule.
//! - [`policy`]: baseline decision rules for comparison.
//! - [`sim`]: the slot-by-slot engine tying everything together.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod channel;
pub mod controller;
pub mod hypoexp;
pub mod policy;
pub mod sim;
pub mod success;

mod math;

pub use channel::{sample_slot, ChannelParams, ParamError, SlotRealization};
pub use controller::{
    battery_step, compute_b, compute_theta, decide, ControllerState, DecisionRecord, EnergyConfig,
};
pub use hypoexp::hypoexp_pdf;
pub use policy::PolicyKind;
pub use sim::{run, stream_rng, RunOptions, SimError, SimMetrics, Simulation};
pub use success::{estimate_success_prob_mc, success_prob, BinEstimate, StatsError, SuccessModel};
