//! Slot-by-slot simulation: sample the channel, let the policy choose decode
//! or harvest, advance the battery, and accumulate metrics.
//!
//! One run is strictly sequential (the battery is a chain). Parallelism
//! belongs to the layer launching many runs; each run owns a random stream
//! derived from `(master_seed, stream)` via [`stream_rng`], so any assignment
//! of distinct stream indices to runs yields independent, reproducible
//! trajectories.

use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{sample_slot_into, ChannelParams, ParamError, SlotRealization};
use crate::controller::{
    battery_step, compute_b, compute_theta, decide, ConfigError, ControllerState, DecisionRecord,
    EnergyConfig,
};
use crate::policy::{always_harvest_decide, genie_decide, greedy_decide, PolicyKind};
use crate::success::{StatsError, SuccessModel};

/// Number of interpolation intervals in the opt-in success-probability grid.
const FAST_PS_POINTS: usize = 10_000;

/// Deterministic per-run generator: the master seed fixes the key, the stream
/// index selects a decorrelated substream. Runs `(seed, 0), (seed, 1), ...`
/// are mutually independent and individually reproducible.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Run-shape parameters shared by every policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// Total slots to simulate.
    pub horizon: u64,
    /// Leading slots excluded from the headline averages (the battery starts
    /// at the harvest threshold and needs time to fill toward theta).
    pub warmup: u64,
    pub master_seed: u64,
    /// Stream index under the master seed; see [`stream_rng`].
    pub stream: u64,
    /// Replace exact success-probability evaluation with a precomputed
    /// 10^4-point linear-interpolation grid (absolute error < 1e-4).
    pub fast_ps: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { horizon: 1_000_000, warmup: 10_000, master_seed: 0, stream: 0, fast_ps: false }
    }
}

/// Simulation setup failure.
#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    Channel(ParamError),
    Config(ConfigError),
    Stats(StatsError),
    /// Horizon must be at least 1.
    BadHorizon,
    /// Warmup must be strictly below the horizon.
    BadWarmup { warmup: u64, horizon: u64 },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Channel(e) => write!(f, "invalid channel parameters: {e}"),
            SimError::Config(e) => write!(f, "invalid energy configuration: {e}"),
            SimError::Stats(e) => write!(f, "success-probability setup failed: {e}"),
            SimError::BadHorizon => write!(f, "horizon must be at least 1"),
            SimError::BadWarmup { warmup, horizon } => {
                write!(f, "warmup {warmup} must be strictly below horizon {horizon}")
            }
        }
    }
}

impl core::error::Error for SimError {}

impl From<ParamError> for SimError {
    fn from(e: ParamError) -> Self {
        SimError::Channel(e)
    }
}

impl From<ConfigError> for SimError {
    fn from(e: ConfigError) -> Self {
        SimError::Config(e)
    }
}

impl From<StatsError> for SimError {
    fn from(e: StatsError) -> Self {
        SimError::Stats(e)
    }
}

/// Success-probability source for the index policy.
enum PsEval {
    Exact(SuccessModel),
    Grid { inv_step: f64, values: alloc::vec::Vec<f64> },
    /// Baselines never query it; an all-idle channel never produces gamma > 0.
    Unused,
}

impl PsEval {
    fn build(
        params: &ChannelParams,
        gamma_max: f64,
        fast: bool,
    ) -> Result<Self, StatsError> {
        let model = SuccessModel::new(params)?;
        if !fast {
            return Ok(PsEval::Exact(model));
        }
        let step = gamma_max / FAST_PS_POINTS as f64;
        let mut values = alloc::vec::Vec::with_capacity(FAST_PS_POINTS + 1);
        // The gamma -> 0 limit is evaluated just off zero; the density of two
        // or more summed gains vanishes there, so the limit is well defined.
        values.push(model.success_prob(step * 1e-9)?);
        for i in 1..=FAST_PS_POINTS {
            values.push(model.success_prob(step * i as f64)?);
        }
        Ok(PsEval::Grid { inv_step: 1.0 / step, values })
    }

    /// Requires `gamma > 0`.
    fn eval(&self, gamma: f64) -> f64 {
        match self {
            PsEval::Exact(model) => model
                .success_prob(gamma)
                .expect("success probability evaluation failed for sampled gamma"),
            PsEval::Grid { inv_step, values } => {
                let pos = gamma * inv_step;
                let i = pos as usize;
                if i + 1 >= values.len() {
                    return values[values.len() - 1];
                }
                let frac = pos - i as f64;
                values[i] + (values[i + 1] - values[i]) * frac
            }
            PsEval::Unused => unreachable!("policy queried an unavailable success model"),
        }
    }
}

/// Everything that happened in one simulated slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotOutcome {
    /// Slot index, starting at 0.
    pub t: u64,
    pub gamma: f64,
    /// Number of transmitters that fired.
    pub active: usize,
    /// Exactly one fired.
    pub success: bool,
    /// Final action after the affordability gate.
    pub decode: bool,
    /// The policy chose decode but could not pay; converted to harvest.
    pub converted: bool,
    pub index_decode: f64,
    pub index_harvest: f64,
    pub ps: f64,
    pub affordable: bool,
    pub energy_before: f64,
    pub energy_after: f64,
    /// Throughput credited this slot: `(1-tau) log2(1+gamma)` on a decoded
    /// success, else zero.
    pub reward: f64,
}

/// Horizon-aggregated results of one run.
///
/// `throughput*` fields average `(1-tau) log2(1+gamma) S rho` per slot; the
/// `_eq1` variants drop the `(1-tau)` factor. Plain names cover post-warmup
/// slots, `_full` the whole horizon. The design-guarantee counters
/// (`battery_bound_breaches`, `harvest_rule_breaches`) are only meaningful
/// for the lyapunov policy and stay zero for baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct SimMetrics {
    pub policy: PolicyKind,
    pub horizon: u64,
    pub warmup: u64,
    pub throughput: f64,
    pub throughput_eq1: f64,
    pub throughput_full: f64,
    pub throughput_eq1_full: f64,
    pub decode_count: u64,
    pub harvest_count: u64,
    pub idle_count: u64,
    pub collision_count: u64,
    /// Decodes spent on collided slots.
    pub wasted_decodes: u64,
    /// Decode decisions the battery could not cover (converted to harvest).
    pub violations: u64,
    /// Slots ending with `E >= theta + gamma_max` (lyapunov only).
    pub battery_bound_breaches: u64,
    /// Decodes chosen at or below the harvest threshold (lyapunov only).
    pub harvest_rule_breaches: u64,
    pub energy_min: f64,
    pub energy_max: f64,
    pub energy_mean: f64,
    pub theta: f64,
    /// Reported optimality-gap bound `B/V`.
    pub theorem_bound: f64,
}

#[derive(Debug, Clone, Default)]
struct MetricsAcc {
    reward_full: f64,
    reward_warm: f64,
    rate_full: f64,
    rate_warm: f64,
    decode_count: u64,
    idle_count: u64,
    collision_count: u64,
    wasted_decodes: u64,
    violations: u64,
    battery_bound_breaches: u64,
    harvest_rule_breaches: u64,
    energy_min: f64,
    energy_max: f64,
    energy_sum: f64,
}

/// One policy-driven run in progress. Construct, call [`Simulation::step`]
/// `horizon` times (or use [`run`]), then read [`Simulation::metrics`].
pub struct Simulation {
    params: ChannelParams,
    cfg: EnergyConfig,
    policy: PolicyKind,
    opts: RunOptions,
    ps: PsEval,
    rng: ChaCha8Rng,
    state: ControllerState,
    slot: SlotRealization,
    harvest_threshold: f64,
    battery_bound: f64,
    t: u64,
    acc: MetricsAcc,
}

impl Simulation {
    pub fn new(
        policy: PolicyKind,
        params: &ChannelParams,
        cfg: &EnergyConfig,
        opts: &RunOptions,
    ) -> Result<Self, SimError> {
        params.validate()?;
        cfg.validate()?;
        if opts.horizon == 0 {
            return Err(SimError::BadHorizon);
        }
        if opts.warmup >= opts.horizon {
            return Err(SimError::BadWarmup { warmup: opts.warmup, horizon: opts.horizon });
        }

        // Only the index policy consults the success model, and an all-idle
        // channel never offers a busy slot to evaluate it on.
        let ps = if policy == PolicyKind::Lyapunov && params.busy_prob() > 0.0 {
            PsEval::build(params, cfg.gamma_max, opts.fast_ps)?
        } else {
            PsEval::Unused
        };

        let state = ControllerState::initial(cfg);
        let acc = MetricsAcc {
            energy_min: state.energy,
            energy_max: state.energy,
            energy_sum: state.energy,
            ..MetricsAcc::default()
        };

        Ok(Simulation {
            params: params.clone(),
            cfg: cfg.clone(),
            policy,
            opts: opts.clone(),
            ps,
            rng: stream_rng(opts.master_seed, opts.stream),
            state,
            slot: SlotRealization::new(),
            harvest_threshold: cfg.harvest_threshold(),
            battery_bound: compute_theta(cfg) + cfg.gamma_max,
            t: 0,
            acc,
        })
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }

    /// Advance one slot and report what happened in it.
    pub fn step(&mut self) -> SlotOutcome {
        let energy_before = self.state.energy;
        sample_slot_into(&self.params, self.cfg.gamma_max, &mut self.rng, &mut self.slot);
        let gamma = self.slot.gamma;

        let record = match self.policy {
            PolicyKind::Lyapunov => {
                let ps = if gamma > 0.0 { self.ps.eval(gamma) } else { 0.0 };
                decide(&self.state, gamma, ps, &self.cfg)
            }
            PolicyKind::Genie => self.gated(genie_decide(energy_before, &self.slot, &self.cfg)),
            PolicyKind::Greedy => self.gated(greedy_decide(energy_before, gamma, &self.cfg)),
            PolicyKind::AlwaysHarvest => self.gated(always_harvest_decide()),
        };

        let converted = record.decode && !record.affordable;
        let decode = record.decode && record.affordable;
        if converted {
            self.acc.violations += 1;
        }
        if self.policy == PolicyKind::Lyapunov
            && record.decode
            && gamma > 0.0
            && energy_before <= self.harvest_threshold
        {
            self.acc.harvest_rule_breaches += 1;
        }

        let energy_after = battery_step(&self.state, decode, gamma, &self.cfg);
        self.state.energy = energy_after;
        if self.policy == PolicyKind::Lyapunov && energy_after >= self.battery_bound {
            self.acc.battery_bound_breaches += 1;
        }

        if decode {
            self.acc.decode_count += 1;
        }
        if self.slot.is_idle() {
            self.acc.idle_count += 1;
        } else if !self.slot.success {
            self.acc.collision_count += 1;
            if decode {
                self.acc.wasted_decodes += 1;
            }
        }

        let mut reward = 0.0;
        if decode && self.slot.success {
            let rate = self.cfg.rate(gamma);
            reward = (1.0 - self.cfg.tau) * rate;
            self.acc.reward_full += reward;
            self.acc.rate_full += rate;
            if self.t >= self.opts.warmup {
                self.acc.reward_warm += reward;
                self.acc.rate_warm += rate;
            }
        }

        self.acc.energy_min = self.acc.energy_min.min(energy_after);
        self.acc.energy_max = self.acc.energy_max.max(energy_after);
        self.acc.energy_sum += energy_after;

        let t = self.t;
        self.t += 1;

        SlotOutcome {
            t,
            gamma,
            active: self.slot.active.len(),
            success: self.slot.success,
            decode,
            converted,
            index_decode: record.index_decode,
            index_harvest: record.index_harvest,
            ps: record.ps,
            affordable: record.affordable,
            energy_before,
            energy_after,
            reward,
        }
    }

    /// Wrap a baseline's bare decision in the record shape the engine shares
    /// with the index policy.
    fn gated(&self, decode: bool) -> DecisionRecord {
        DecisionRecord {
            decode,
            index_decode: 0.0,
            index_harvest: 0.0,
            ps: 0.0,
            affordable: self.state.energy >= self.cfg.decode_cost(self.slot.gamma),
        }
    }

    /// Metrics over the slots simulated so far.
    pub fn metrics(&self) -> SimMetrics {
        let t = self.t;
        let post = t.saturating_sub(self.opts.warmup);
        let per = |sum: f64, n: u64| if n > 0 { sum / n as f64 } else { 0.0 };
        SimMetrics {
            policy: self.policy,
            horizon: t,
            warmup: self.opts.warmup.min(t),
            throughput: per(self.acc.reward_warm, post),
            throughput_eq1: per(self.acc.rate_warm, post),
            throughput_full: per(self.acc.reward_full, t),
            throughput_eq1_full: per(self.acc.rate_full, t),
            decode_count: self.acc.decode_count,
            harvest_count: t - self.acc.decode_count,
            idle_count: self.acc.idle_count,
            collision_count: self.acc.collision_count,
            wasted_decodes: self.acc.wasted_decodes,
            violations: self.acc.violations,
            battery_bound_breaches: self.acc.battery_bound_breaches,
            harvest_rule_breaches: self.acc.harvest_rule_breaches,
            energy_min: self.acc.energy_min,
            energy_max: self.acc.energy_max,
            energy_mean: self.acc.energy_sum / (t + 1) as f64,
            theta: self.state.theta,
            theorem_bound: compute_b(&self.cfg) / self.cfg.v,
        }
    }
}

/// Simulate `opts.horizon` slots under `policy` and aggregate the metrics.
pub fn run(
    policy: PolicyKind,
    params: &ChannelParams,
    cfg: &EnergyConfig,
    opts: &RunOptions,
) -> Result<SimMetrics, SimError> {
    let mut sim = Simulation::new(policy, params, cfg, opts)?;
    for _ in 0..opts.horizon {
        sim.step();
    }
    Ok(sim.metrics())
}
