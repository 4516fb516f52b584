//! TOML experiment configuration. Every key has a default matching the
//! ten-transmitter reference study, so an empty file (or no file at all)
//! reproduces it; CLI flags override individual run controls.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ehrx_core::{ChannelParams, EnergyConfig, PolicyKind, RunOptions};

/// A per-transmitter quantity given either as one shared value or as an
/// explicit per-transmitter list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrVec {
    Scalar(f64),
    List(Vec<f64>),
}

impl ScalarOrVec {
    fn broadcast(&self, n: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            ScalarOrVec::Scalar(v) => Ok(vec![*v; n]),
            ScalarOrVec::List(vs) => {
                if vs.len() != n {
                    bail!("channel.{what} lists {} values but n = {n}", vs.len());
                }
                Ok(vs.clone())
            }
        }
    }

    fn list_len(&self) -> Option<usize> {
        match self {
            ScalarOrVec::Scalar(_) => None,
            ScalarOrVec::List(vs) => Some(vs.len()),
        }
    }
}

/// Transmitter count when neither `channel.n` nor a per-transmitter list
/// pins one.
pub const DEFAULT_N: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    /// Number of transmitters; a list field or [`DEFAULT_N`] applies when
    /// omitted.
    pub n: Option<usize>,
    /// Mean fading gain(s).
    pub means: ScalarOrVec,
    /// Per-slot access probability(ies).
    pub access_probs: ScalarOrVec,
    /// Common transmit power.
    pub power: f64,
    /// Upper-tail mass cut from each fading gain.
    pub gain_quantile_eps: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            n: None,
            means: ScalarOrVec::Scalar(1.0),
            access_probs: ScalarOrVec::Scalar(0.1),
            power: 1.0,
            gain_quantile_eps: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergySection {
    pub tau: f64,
    pub eta: f64,
    pub phi_se: f64,
    pub phi_pi: f64,
    pub decode_cost_c: f64,
    pub decode_cost_offset: f64,
    /// Received-power cap; omitted means the channel's truncation maximum.
    pub gamma_max: Option<f64>,
    pub v: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        EnergySection {
            tau: 0.01,
            eta: 0.7,
            phi_se: 0.01,
            phi_pi: 0.01,
            decode_cost_c: 1.0,
            decode_cost_offset: 0.5,
            gamma_max: None,
            v: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub horizon: u64,
    pub warmup: u64,
    /// Independent runs aggregated per sweep point.
    pub seeds: u32,
    pub master_seed: u64,
    /// Interpolated success-probability grid instead of exact evaluation.
    pub fast_ps: bool,
    /// Decision rule for the `run` subcommand.
    pub policy: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            horizon: 1_000_000,
            warmup: 10_000,
            seeds: 10,
            master_seed: 0,
            fast_ps: false,
            policy: "lyapunov".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Penalty weights for `sweep-v`.
    pub v_values: Vec<f64>,
    /// Common access probabilities for `sweep-q`.
    pub q_values: Vec<f64>,
    /// Decode-cost coefficients; every sweep repeats per c.
    pub c_values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            v_values: vec![25.0, 50.0, 100.0, 200.0, 400.0],
            q_values: (1..=20).map(|i| i as f64 / 50.0).collect(),
            c_values: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub channel: ChannelSection,
    pub energy: EnergySection,
    pub run: RunSection,
    pub sweep: SweepSection,
    /// Default CSV destination; `--out` overrides, absent means stdout.
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    /// Number of transmitters implied by `[channel]`: explicit `n` wins,
    /// then the length of a list field, then [`DEFAULT_N`].
    pub fn n_transmitters(&self) -> usize {
        self.channel.n.unwrap_or_else(|| {
            self.channel
                .means
                .list_len()
                .or(self.channel.access_probs.list_len())
                .unwrap_or(DEFAULT_N)
        })
    }

    pub fn channel_params(&self) -> Result<ChannelParams> {
        let n = self.n_transmitters();
        let means = self.channel.means.broadcast(n, "means")?;
        let probs = self.channel.access_probs.broadcast(n, "access_probs")?;
        ChannelParams::new(means, probs, self.channel.power, self.channel.gain_quantile_eps)
            .context("invalid [channel] section")
    }

    pub fn energy_config(&self, params: &ChannelParams) -> Result<EnergyConfig> {
        let e = &self.energy;
        let cfg = EnergyConfig {
            tau: e.tau,
            eta: e.eta,
            phi_se: e.phi_se,
            phi_pi: e.phi_pi,
            decode_cost_c: e.decode_cost_c,
            decode_cost_offset: e.decode_cost_offset,
            gamma_max: e.gamma_max.unwrap_or_else(|| params.default_gamma_max()),
            v: e.v,
        };
        cfg.validate().context("invalid [energy] section")?;
        Ok(cfg)
    }

    pub fn run_options(&self, stream: u64) -> RunOptions {
        RunOptions {
            horizon: self.run.horizon,
            warmup: self.run.warmup,
            master_seed: self.run.master_seed,
            stream,
            fast_ps: self.run.fast_ps,
        }
    }

    pub fn policy(&self) -> Result<PolicyKind> {
        self.run
            .policy
            .parse()
            .with_context(|| format!("invalid run.policy {:?}", self.run.policy))
    }

    /// Copy with every derived value made explicit (transmitter count, full
    /// per-transmitter lists, concrete gamma_max); this is what CSV headers
    /// embed. The output path is dropped: the destination is not part of
    /// the experiment, and keeping it would make otherwise-identical CSVs
    /// differ by where they were written.
    pub fn resolved(&self) -> Result<Self> {
        let params = self.channel_params()?;
        let energy_cfg = self.energy_config(&params)?;
        let mut out = self.clone();
        out.channel.n = Some(params.n());
        out.channel.means = ScalarOrVec::List(params.means.clone());
        out.channel.access_probs = ScalarOrVec::List(params.access_probs.clone());
        out.energy.gamma_max = Some(energy_cfg.gamma_max);
        out.output_path = None;
        Ok(out)
    }

    /// One-line JSON of the resolved config, embedded in CSV headers.
    pub fn resolved_json(&self) -> Result<String> {
        let resolved = self.resolved()?;
        serde_json::to_string(&resolved).context("serializing resolved config")
    }

    /// Sweep lists must be non-empty and strictly increasing.
    pub fn validate_sweep_lists(&self) -> Result<()> {
        for (name, list) in [
            ("v_values", &self.sweep.v_values),
            ("q_values", &self.sweep.q_values),
            ("c_values", &self.sweep.c_values),
        ] {
            if list.is_empty() {
                bail!("sweep.{name} must not be empty");
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                bail!("sweep.{name} must be strictly increasing");
            }
        }
        Ok(())
    }
}
