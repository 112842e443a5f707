//! Classical three-wave mixing in photon-flux normalization.
//!
//! Mode 0 carries the sum frequency, modes 1 and 2 the difference pair:
//!
//! ```text
//! da₀/dζ = −iκ a₁ a₂  e^{−iΔζ}
//! da₁/dζ = −iκ a₀ a₂* e^{+iΔζ}
//! da₂/dζ = −iκ a₀ a₁* e^{+iΔζ}
//! ```
//!
//! `|aᵢ|²` is proportional to power/ωᵢ, so the Manley–Rowe combinations
//! `N₁ − N₂`, `N₁ + N₀` and `N₂ + N₀` are exact invariants.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagationError {
    #[error("amplitude became non-finite at zeta = {zeta} (step size too large?)")]
    NonFiniteAmplitude { zeta: f64 },
    #[error("invalid propagation config: {0}")]
    InvalidConfig(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("states have different frequencies or coupling")]
    MismatchedStates,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeWaveState {
    pub a0: Complex64,
    pub a1: Complex64,
    pub a2: Complex64,
    omega0: f64,
    omega1: f64,
    omega2: f64,
    kappa: f64,
    delta_k: f64,
    pub zeta: f64,
}

impl ThreeWaveState {
    /// Builds a state with `ω₀ = ω₁ + ω₂` and depth 0.
    pub fn new(
        amplitudes: [Complex64; 3],
        omega1: f64,
        omega2: f64,
        kappa: f64,
        delta_k: f64,
    ) -> Result<Self, PropagationError> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(PropagationError::InvalidState(format!(
                "coupling {kappa} must be finite and non-negative"
            )));
        }
        if !(omega1 > 0.0 && omega2 > 0.0) {
            return Err(PropagationError::InvalidState(
                "frequencies must be positive".into(),
            ));
        }
        let [a0, a1, a2] = amplitudes;
        Ok(Self {
            a0,
            a1,
            a2,
            omega0: omega1 + omega2,
            omega1,
            omega2,
            kappa,
            delta_k,
            zeta: 0.0,
        })
    }

    pub fn amplitudes(&self) -> [Complex64; 3] {
        [self.a0, self.a1, self.a2]
    }

    pub fn with_amplitudes(&self, amplitudes: [Complex64; 3]) -> Self {
        let [a0, a1, a2] = amplitudes;
        Self { a0, a1, a2, ..*self }
    }

    pub fn omegas(&self) -> [f64; 3] {
        [self.omega0, self.omega1, self.omega2]
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn delta_k(&self) -> f64 {
        self.delta_k
    }

    /// Photon fluxes `[N₀, N₁, N₂]`.
    pub fn fluxes(&self) -> [f64; 3] {
        [self.a0.norm_sqr(), self.a1.norm_sqr(), self.a2.norm_sqr()]
    }

    /// `ω₀N₀ + ω₁N₁ + ω₂N₂`.
    pub fn energy(&self) -> f64 {
        let [n0, n1, n2] = self.fluxes();
        self.omega0 * n0 + self.omega1 * n1 + self.omega2 * n2
    }

    fn is_finite(&self) -> bool {
        self.amplitudes()
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }

    fn derivative(&self, amps: [Complex64; 3], zeta: f64) -> [Complex64; 3] {
        let [a0, a1, a2] = amps;
        let coupling = Complex64::new(0.0, -self.kappa);
        let phase = Complex64::from_polar(1.0, self.delta_k * zeta);
        [
            coupling * a1 * a2 * phase.conj(),
            coupling * a0 * a2.conj() * phase,
            coupling * a0 * a1.conj() * phase,
        ]
    }

    fn rk4_step(&self, amps: [Complex64; 3], zeta: f64, h: f64) -> [Complex64; 3] {
        let add = |a: [Complex64; 3], k: [Complex64; 3], s: f64| {
            [a[0] + k[0] * s, a[1] + k[1] * s, a[2] + k[2] * s]
        };
        let k1 = self.derivative(amps, zeta);
        let k2 = self.derivative(add(amps, k1, 0.5 * h), zeta + 0.5 * h);
        let k3 = self.derivative(add(amps, k2, 0.5 * h), zeta + 0.5 * h);
        let k4 = self.derivative(add(amps, k3, h), zeta + h);
        std::array::from_fn(|i| amps[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    step_size: f64,
    total_depth: f64,
    integrator: Integrator,
}

impl PropagationConfig {
    pub fn new(step_size: f64, total_depth: f64) -> Result<Self, PropagationError> {
        if !(step_size > 0.0 && step_size.is_finite()) {
            return Err(PropagationError::InvalidConfig(format!(
                "step size {step_size} must be positive"
            )));
        }
        if !(total_depth >= 0.0 && total_depth.is_finite()) {
            return Err(PropagationError::InvalidConfig(format!(
                "depth {total_depth} must be non-negative"
            )));
        }
        Ok(Self {
            step_size,
            total_depth,
            integrator: Integrator::Rk4,
        })
    }

    pub fn with_default_step(total_depth: f64) -> Result<Self, PropagationError> {
        Self::new(DEFAULT_STEP, total_depth)
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn total_depth(&self) -> f64 {
        self.total_depth
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    /// Number of equal steps covering the depth; the actual step is
    /// `total_depth / steps`, never longer than `step_size`.
    pub fn steps(&self) -> usize {
        if self.total_depth == 0.0 {
            return 0;
        }
        ((self.total_depth / self.step_size) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }
}

fn integrate(
    state: &ThreeWaveState,
    config: &PropagationConfig,
    direction: f64,
) -> Result<ThreeWaveState, PropagationError> {
    let steps = config.steps();
    let end_zeta = state.zeta + direction * config.total_depth;
    if steps == 0 || state.kappa == 0.0 {
        // zero coupling leaves every amplitude fixed
        return Ok(ThreeWaveState {
            zeta: end_zeta,
            ..*state
        });
    }
    let h = direction * config.total_depth / steps as f64;
    let mut amps = state.amplitudes();
    for i in 0..steps {
        let zeta = state.zeta + h * i as f64;
        amps = match config.integrator {
            Integrator::Rk4 => state.rk4_step(amps, zeta, h),
        };
        let next = state.with_amplitudes(amps);
        if !next.is_finite() {
            return Err(PropagationError::NonFiniteAmplitude { zeta: zeta + h });
        }
    }
    Ok(ThreeWaveState {
        zeta: end_zeta,
        ..state.with_amplitudes(amps)
    })
}

/// Advances the state by `config.total_depth` with fixed-step RK4.
pub fn propagate(
    state: &ThreeWaveState,
    config: &PropagationConfig,
) -> Result<ThreeWaveState, PropagationError> {
    integrate(state, config, 1.0)
}

/// Integrates backwards by `config.total_depth`, undoing [`propagate`].
pub fn propagate_back(
    state: &ThreeWaveState,
    config: &PropagationConfig,
) -> Result<ThreeWaveState, PropagationError> {
    integrate(state, config, -1.0)
}

/// `(N₁ − N₂, N₁ + N₀, N₂ + N₀)`.
pub fn manley_rowe_invariants(state: &ThreeWaveState) -> [f64; 3] {
    let [n0, n1, n2] = state.fluxes();
    [n1 - n2, n1 + n0, n2 + n0]
}

/// Signed flux changes `final − initial` per mode.
pub fn gain_signature(
    initial: &ThreeWaveState,
    final_state: &ThreeWaveState,
) -> Result<[f64; 3], PropagationError> {
    if initial.omegas() != final_state.omegas()
        || initial.kappa != final_state.kappa
        || initial.delta_k != final_state.delta_k
    {
        return Err(PropagationError::MismatchedStates);
    }
    let a = initial.fluxes();
    let b = final_state.fluxes();
    Ok([b[0] - a[0], b[1] - a[1], b[2] - a[2]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn state(amps: [Complex64; 3], kappa: f64) -> ThreeWaveState {
        ThreeWaveState::new(amps, 2.0, 1.0, kappa, 0.0).unwrap()
    }

    #[test]
    fn omega0_is_the_sum() {
        let s = state([c(1.0, 0.0); 3], 0.1);
        assert_eq!(s.omegas(), [3.0, 2.0, 1.0]);
        assert!(ThreeWaveState::new([c(0.0, 0.0); 3], 2.0, 1.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn empty_signal_and_idler_is_a_fixed_point() {
        let s = state([c(3.0, -1.0), c(0.0, 0.0), c(0.0, 0.0)], 0.7);
        let out = propagate(&s, &PropagationConfig::new(0.01, 2.0).unwrap()).unwrap();
        assert_eq!(out.amplitudes(), s.amplitudes());
        assert!((out.zeta - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_is_identity() {
        let s = state([c(1.0, 2.0), c(0.3, -0.1), c(-0.5, 0.5)], 0.0);
        let out = propagate(&s, &PropagationConfig::new(0.01, 3.0).unwrap()).unwrap();
        assert_eq!(out.amplitudes(), s.amplitudes());
        assert_eq!(manley_rowe_invariants(&out), manley_rowe_invariants(&s));
    }

    #[test]
    fn zero_state_invariants() {
        assert_eq!(manley_rowe_invariants(&state([c(0.0, 0.0); 3], 1.0)), [0.0; 3]);
    }

    #[test]
    fn config_validation() {
        assert!(PropagationConfig::new(0.0, 1.0).is_err());
        assert!(PropagationConfig::new(0.1, -1.0).is_err());
        assert_eq!(PropagationConfig::new(0.1, 0.0).unwrap().steps(), 0);
        assert_eq!(PropagationConfig::new(1e-3, 1.0).unwrap().steps(), 1000);
        assert_eq!(PropagationConfig::new(0.3, 1.0).unwrap().steps(), 4);
    }

    #[test]
    fn divergence_is_reported() {
        let s = state([c(1e3, 0.0), c(1e3, 0.0), c(1e3, 0.0)], 1e3);
        let err = propagate(&s, &PropagationConfig::new(1.0, 50.0).unwrap()).unwrap_err();
        assert!(matches!(err, PropagationError::NonFiniteAmplitude { .. }));
    }

    #[test]
    fn gain_signature_of_identical_states() {
        let s = state([c(1.0, 2.0), c(0.3, -0.1), c(-0.5, 0.5)], 0.3);
        assert_eq!(gain_signature(&s, &s).unwrap(), [0.0; 3]);
        let other = ThreeWaveState::new(s.amplitudes(), 2.5, 1.0, 0.3, 0.0).unwrap();
        assert_eq!(
            gain_signature(&s, &other),
            Err(PropagationError::MismatchedStates)
        );
    }

    #[test]
    fn mismatch_phase_is_tracked_through_zeta() {
        // with Δ ≠ 0 the gain is reduced relative to the matched case
        let amps = [c(10.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let cfg = PropagationConfig::new(1e-3, 1.0).unwrap();
        let matched = ThreeWaveState::new(amps, 2.0, 1.0, 0.05, 0.0).unwrap();
        let mismatched = ThreeWaveState::new(amps, 2.0, 1.0, 0.05, 3.0).unwrap();
        let g_m = propagate(&matched, &cfg).unwrap().fluxes()[1];
        let g_x = propagate(&mismatched, &cfg).unwrap().fluxes()[1];
        assert!(g_x < g_m);
        assert!(g_x > 1.0);
    }
}
