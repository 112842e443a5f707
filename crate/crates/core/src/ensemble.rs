//! Zeropoint-field Monte Carlo ensembles of single three-wave triples.
//!
//! Every vacuum mode starts as a circular complex Gaussian with mean
//! intensity 1, which fixes the unit of intensity for pump amplitudes and
//! detection thresholds. Each trial draws from its own ChaCha20 stream
//! `(seed, trial index)`, so a report depends only on its configuration.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phasematch::{ModeSpec, PhaseMatchSolution};
use crate::threewave::{propagate, PropagationConfig, PropagationError, ThreeWaveState};

/// Mean `|a|²` of a vacuum mode.
pub const ZEROPOINT_MEAN_INTENSITY: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error("trial {trial}: {source}")]
    Propagation {
        trial: u64,
        #[source]
        source: PropagationError,
    },
    #[error("reports are not comparable: {0}")]
    MismatchedConfig(String),
}

/// Deterministic source of vacuum amplitudes.
#[derive(Debug, Clone)]
pub struct ZeropointSampler {
    seed: u64,
    scale: f64,
    rng: ChaCha20Rng,
}

impl ZeropointSampler {
    pub fn new(seed: u64, scale: f64) -> Self {
        Self::substream(seed, scale, 0)
    }

    /// Independent stream `stream` under the same seed.
    pub fn substream(seed: u64, scale: f64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, scale, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Circular complex Gaussian with `E|a|² = scale`.
    pub fn sample(&mut self) -> Complex64 {
        let sigma = (0.5 * self.scale).sqrt();
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(sigma * re, sigma * im)
    }

    /// Uniform phase in `[0, 2π)`.
    pub fn phase(&mut self) -> f64 {
        self.rng.random::<f64>() * std::f64::consts::TAU
    }
}

pub fn sample_vacuum_mode(sampler: &mut ZeropointSampler) -> Complex64 {
    sampler.sample()
}

/// Threshold detector: fires when the intensity exceeds `threshold` times
/// the mean zeropoint intensity.
pub fn detect(intensity: f64, threshold: f64) -> bool {
    intensity > threshold * ZEROPOINT_MEAN_INTENSITY
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// The extraordinary sum-frequency mode is the laser.
    Pdc,
    /// The ordinary higher-frequency member of the pair is the laser.
    Puc,
}

impl Scenario {
    /// Which of the three triple modes carries the laser.
    pub fn laser_mode(self) -> usize {
        match self {
            Scenario::Pdc => 0,
            Scenario::Puc => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Pdc => "pdc",
            Scenario::Puc => "puc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Laser amplitude in units of the square root of the zeropoint intensity.
    pub pump_amplitude: f64,
    /// Mode 0 is `triple.pump`, mode 1 `triple.signal`, mode 2 `triple.idler`.
    pub triple: PhaseMatchSolution,
    pub kappa: f64,
    pub depth: f64,
    pub step_size: f64,
    pub trials: u64,
    pub seed: u64,
    pub detection_threshold: f64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        let bad = |m: String| Err(EnsembleError::InvalidConfig(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.pump_amplitude > 0.0 && self.pump_amplitude.is_finite()) {
            return bad(format!("pump amplitude {} must be positive", self.pump_amplitude));
        }
        if !(self.detection_threshold >= 0.0) {
            return bad(format!(
                "detection threshold {} must be non-negative",
                self.detection_threshold
            ));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return bad(format!("coupling {} must be non-negative", self.kappa));
        }
        self.propagation_config()?;
        Ok(())
    }

    fn propagation_config(&self) -> Result<PropagationConfig, EnsembleError> {
        PropagationConfig::new(self.step_size, self.depth)
            .map_err(|e| EnsembleError::InvalidConfig(e.to_string()))
    }

    pub fn modes(&self) -> [ModeSpec; 3] {
        [self.triple.pump, self.triple.signal, self.triple.idler]
    }

    fn initial_state(&self, trial: u64) -> Result<ThreeWaveState, EnsembleError> {
        let mut sampler = ZeropointSampler::substream(self.seed, ZEROPOINT_MEAN_INTENSITY, trial);
        let laser = self.scenario.laser_mode();
        let phase = sampler.phase();
        let mut amps = [Complex64::new(0.0, 0.0); 3];
        for (i, a) in amps.iter_mut().enumerate() {
            *a = if i == laser {
                Complex64::from_polar(self.pump_amplitude, phase)
            } else {
                sampler.sample()
            };
        }
        ThreeWaveState::new(
            amps,
            self.triple.signal_omega,
            self.triple.idler_omega,
            self.kappa,
            0.0,
        )
        .map_err(|e| EnsembleError::InvalidConfig(e.to_string()))
    }
}

/// What one trial contributes to the report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub index: u64,
    pub deltas: [f64; 3],
    pub detected: [bool; 3],
    /// Detection of the unpropagated (coupling off) intensities.
    pub dark: [bool; 3],
}

pub fn run_trial(config: &ScenarioConfig, index: u64) -> Result<TrialOutcome, EnsembleError> {
    let initial = config.initial_state(index)?;
    let final_state = propagate(&initial, &config.propagation_config()?)
        .map_err(|source| EnsembleError::Propagation { trial: index, source })?;
    let before = initial.fluxes();
    let after = final_state.fluxes();
    Ok(TrialOutcome {
        index,
        deltas: std::array::from_fn(|i| after[i] - before[i]),
        detected: after.map(|n| detect(n, config.detection_threshold)),
        dark: before.map(|n| detect(n, config.detection_threshold)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeRole {
    Laser,
    Vacuum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub label: String,
    pub role: ModeRole,
    pub mean_delta: f64,
    pub std_error: f64,
    pub detection_rate: f64,
    pub dark_rate: f64,
}

impl ModeReport {
    /// Mean change in units of its standard error.
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            if self.mean_delta == 0.0 {
                0.0
            } else {
                self.mean_delta.signum() * f64::INFINITY
            }
        } else {
            self.mean_delta / self.std_error
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub scenario: Scenario,
    pub config: ScenarioConfig,
    /// Ordered as the triple: sum-frequency mode, signal, idler.
    pub modes: [ModeReport; 3],
    pub trials: u64,
    pub seed: u64,
}

impl EnsembleReport {
    /// Aggregates outcomes in trial-index order regardless of the order given.
    pub fn from_outcomes(config: &ScenarioConfig, outcomes: &[TrialOutcome]) -> Self {
        let mut sorted = outcomes.to_vec();
        sorted.sort_by_key(|o| o.index);
        let n = sorted.len() as f64;
        let laser = config.scenario.laser_mode();
        let modes = std::array::from_fn(|m| {
            let mean = sorted.iter().map(|o| o.deltas[m]).sum::<f64>() / n;
            let std_error = if sorted.len() > 1 {
                let ss = sorted
                    .iter()
                    .map(|o| (o.deltas[m] - mean).powi(2))
                    .sum::<f64>();
                (ss / (n - 1.0) / n).sqrt()
            } else {
                0.0
            };
            let rate = |f: &dyn Fn(&TrialOutcome) -> bool| {
                sorted.iter().filter(|o| f(o)).count() as f64 / n
            };
            ModeReport {
                label: config.modes()[m].label(),
                role: if m == laser {
                    ModeRole::Laser
                } else {
                    ModeRole::Vacuum
                },
                mean_delta: mean,
                std_error,
                detection_rate: rate(&|o| o.detected[m]),
                dark_rate: rate(&|o| o.dark[m]),
            }
        });
        Self {
            scenario: config.scenario,
            config: config.clone(),
            modes,
            trials: sorted.len() as u64,
            seed: config.seed,
        }
    }
}

/// Runs every trial (in parallel) and aggregates in index order.
pub fn run_scenario(config: &ScenarioConfig) -> Result<EnsembleReport, EnsembleError> {
    config.validate()?;
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EnsembleReport::from_outcomes(config, &outcomes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub std_error: f64,
}

/// Strength of the up-conversion satellite relative to the main rainbow:
/// `|mean Δ(PUC low-frequency output)| / |mean Δ(PDC low-frequency mode)|`,
/// with first-order error propagation.
///
/// Both runs must share pump amplitude, depth, step and trial count. The
/// coupling must match too, except that an uncoupled PUC control run is
/// accepted.
pub fn satellite_ratio(
    pdc: &EnsembleReport,
    puc: &EnsembleReport,
) -> Result<RatioEstimate, EnsembleError> {
    let mismatch = |m: &str| Err(EnsembleError::MismatchedConfig(m.to_string()));
    if pdc.scenario != Scenario::Pdc || puc.scenario != Scenario::Puc {
        return mismatch("expected one pdc and one puc report");
    }
    let (a, b) = (&pdc.config, &puc.config);
    if a.pump_amplitude != b.pump_amplitude {
        return mismatch("pump amplitude differs");
    }
    if a.depth != b.depth || a.step_size != b.step_size {
        return mismatch("depth or step differs");
    }
    if pdc.trials != puc.trials {
        return mismatch("trial count differs");
    }
    if a.kappa != b.kappa && b.kappa != 0.0 {
        return mismatch("coupling differs");
    }
    let p = &pdc.modes[2];
    let u = &puc.modes[2];
    if p.mean_delta == 0.0 {
        return mismatch("pdc run shows no change in the low-frequency mode");
    }
    let denom = p.mean_delta.abs();
    let ratio = u.mean_delta.abs() / denom;
    let std_error = (u.std_error.powi(2) + ratio.powi(2) * p.std_error.powi(2)).sqrt() / denom;
    Ok(RatioEstimate { ratio, std_error })
}
