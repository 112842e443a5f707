//! Type-I phase matching for an on-axis pump.
//!
//! All angles are external: measured in vacuum after the modes leave
//! through an exit face normal to the pump. With that convention the
//! longitudinal wavevector of a mode inside the crystal is
//! `ω·√(n² − sin²θ)` and the transverse one is `ω·sinθ`, which is the form
//! the matching condition takes below.
//!
//! The geometry is planar. Each solution is really a cone around the pump
//! axis; only the in-plane angle is reported.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{CrystalDispersion, DispersionError, Polarization};

/// Speed of light in nm/fs, so that `2πc/λ` comes out in rad/fs.
pub const SPEED_OF_LIGHT_NM_PER_FS: f64 = 299.792_458;

/// Bisection tolerance of the angle → wavelength inversion, in sin²θ.
pub const INVERSE_SIN2_TOLERANCE: f64 = 1e-9;

pub fn angular_frequency(wavelength_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_NM_PER_FS / wavelength_nm
}

pub fn wavelength_from_frequency(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_NM_PER_FS / omega
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseMatchError {
    #[error("no phase-matched signal direction (sin^2 theta1 = {sin2_theta1})")]
    NoSolution { sin2_theta1: f64 },
    #[error("idler cannot leave the crystal (sin^2 theta2 = {sin2_theta2})")]
    IdlerBeyondExit { sin2_theta2: f64 },
    #[error("evanescent branch: square-root argument {argument} is negative")]
    EvanescentBranch { argument: f64 },
    #[error("invalid pump: {0}")]
    InvalidPump(String),
    #[error("invalid mode: {0}")]
    InvalidMode(String),
    #[error("no wavelength in [{lo_nm}, {hi_nm}] nm maps to {angle_deg} deg")]
    AngleNotBracketed { angle_deg: f64, lo_nm: f64, hi_nm: f64 },
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
}

/// One optical mode: vacuum wavelength, polarization inside the crystal,
/// and external angle to the pump axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub wavelength_nm: f64,
    pub polarization: Polarization,
    pub external_angle_deg: f64,
}

impl ModeSpec {
    pub fn new(
        wavelength_nm: f64,
        polarization: Polarization,
        external_angle_deg: f64,
    ) -> Result<Self, PhaseMatchError> {
        if !(wavelength_nm.is_finite() && wavelength_nm > 0.0) {
            return Err(PhaseMatchError::InvalidMode(format!(
                "wavelength {wavelength_nm} nm must be positive"
            )));
        }
        if !(0.0..90.0).contains(&external_angle_deg) {
            return Err(PhaseMatchError::InvalidMode(format!(
                "external angle {external_angle_deg} deg must lie in [0, 90)"
            )));
        }
        Ok(Self {
            wavelength_nm,
            polarization,
            external_angle_deg,
        })
    }

    /// An on-axis mode, as used for pumps.
    pub fn on_axis(wavelength_nm: f64, polarization: Polarization) -> Result<Self, PhaseMatchError> {
        Self::new(wavelength_nm, polarization, 0.0)
    }

    pub fn angular_frequency(&self) -> f64 {
        angular_frequency(self.wavelength_nm)
    }

    /// Label in the `300e` / `450o` notation, wavelength rounded to 0.1 nm.
    pub fn label(&self) -> String {
        let wl = (self.wavelength_nm * 10.0).round() / 10.0;
        format!("{wl}{}", self.polarization.suffix())
    }
}

/// A matched pump/signal/idler triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchSolution {
    pub pump: ModeSpec,
    pub signal: ModeSpec,
    pub idler: ModeSpec,
    pub pump_omega: f64,
    pub signal_omega: f64,
    /// Constructed as `pump_omega − signal_omega`.
    pub idler_omega: f64,
    pub residual_eq1: f64,
    pub sin2_theta1: f64,
}

/// `sin²θ₁` from the closed form
/// `ω₁²sin²θ₁ = −¼k₀² + ½(k₁² + k₂²) − (k₁² − k₂²)²/(4k₀²)`, with `kᵢ = nᵢωᵢ`.
pub fn matched_sin2_theta1(omegas: [f64; 3], indices: [f64; 3]) -> f64 {
    let [w0, w1, w2] = omegas;
    let [n0, n1, n2] = indices;
    let k0sq = (n0 * w0).powi(2);
    let k1sq = (n1 * w1).powi(2);
    let k2sq = (n2 * w2).powi(2);
    let diff = k1sq - k2sq;
    (-0.25 * k0sq + 0.5 * (k1sq + k2sq) - diff * diff / (4.0 * k0sq)) / (w1 * w1)
}

/// `(LHS − RHS)/RHS` of
/// `ω₁√(n₁² − sin²θ₁) + √(ω₂²n₂² − ω₁²sin²θ₁) = ω₀n₀`.
pub fn eq1_residual_raw(
    omegas: [f64; 3],
    indices: [f64; 3],
    sin_theta1: f64,
) -> Result<f64, PhaseMatchError> {
    let [w0, w1, w2] = omegas;
    let [n0, n1, n2] = indices;
    let s2 = sin_theta1 * sin_theta1;
    let a = n1 * n1 - s2;
    if a < 0.0 {
        return Err(PhaseMatchError::EvanescentBranch { argument: a });
    }
    let b = (w2 * n2).powi(2) - (w1 * w1) * s2;
    if b < 0.0 {
        return Err(PhaseMatchError::EvanescentBranch { argument: b });
    }
    let rhs = w0 * n0;
    Ok((w1 * a.sqrt() + b.sqrt() - rhs) / rhs)
}

/// Phase-matching residual of a mode triple, taking the signal angle from
/// `signal.external_angle_deg`.
pub fn eq1_residual(
    crystal: &CrystalDispersion,
    pump: &ModeSpec,
    signal: &ModeSpec,
    idler: &ModeSpec,
) -> Result<f64, PhaseMatchError> {
    let omegas = [
        pump.angular_frequency(),
        signal.angular_frequency(),
        idler.angular_frequency(),
    ];
    let indices = [
        crystal.index_for(pump)?,
        crystal.index_for(signal)?,
        crystal.index_for(idler)?,
    ];
    eq1_residual_raw(omegas, indices, signal.external_angle_deg.to_radians().sin())
}

fn check_pump(pump: &ModeSpec) -> Result<(), PhaseMatchError> {
    if pump.external_angle_deg != 0.0 {
        return Err(PhaseMatchError::InvalidPump(format!(
            "pump must be on axis, got {} deg",
            pump.external_angle_deg
        )));
    }
    Ok(())
}

/// Solves for the Type-I (ordinary signal and idler) emission angles of
/// `signal_wavelength_nm` under an on-axis pump.
///
/// The pump's index comes from its polarization: an extraordinary pump sees
/// the effective index at the crystal's configured cut.
pub fn signal_angle(
    crystal: &CrystalDispersion,
    pump: &ModeSpec,
    signal_wavelength_nm: f64,
) -> Result<PhaseMatchSolution, PhaseMatchError> {
    check_pump(pump)?;
    if !(signal_wavelength_nm > pump.wavelength_nm) || !signal_wavelength_nm.is_finite() {
        return Err(PhaseMatchError::InvalidMode(format!(
            "signal {signal_wavelength_nm} nm must be longer than the pump {} nm",
            pump.wavelength_nm
        )));
    }
    let pump_omega = pump.angular_frequency();
    let signal_omega = angular_frequency(signal_wavelength_nm);
    let idler_omega = pump_omega - signal_omega;
    let idler_wavelength_nm = wavelength_from_frequency(idler_omega);

    let n0 = crystal.index_for(pump)?;
    let n1 = crystal.index_for_polarization(signal_wavelength_nm, Polarization::Ordinary)?;
    let n2 = crystal.index_for_polarization(idler_wavelength_nm, Polarization::Ordinary)?;
    let omegas = [pump_omega, signal_omega, idler_omega];
    let indices = [n0, n1, n2];

    let sin2_theta1 = matched_sin2_theta1(omegas, indices);
    if !(0.0..=1.0).contains(&sin2_theta1) {
        return Err(PhaseMatchError::NoSolution { sin2_theta1 });
    }
    let sin_theta1 = sin2_theta1.sqrt();
    // transverse wavevectors cancel: ω₁ sinθ₁ = ω₂ sinθ₂
    let sin_theta2 = signal_omega * sin_theta1 / idler_omega;
    if sin_theta2 >= 1.0 {
        return Err(PhaseMatchError::IdlerBeyondExit {
            sin2_theta2: sin_theta2 * sin_theta2,
        });
    }
    let theta1 = sin_theta1.asin().to_degrees();
    let theta2 = sin_theta2.asin().to_degrees();
    if theta1 >= 90.0 {
        return Err(PhaseMatchError::NoSolution { sin2_theta1 });
    }
    let residual_eq1 = eq1_residual_raw(omegas, indices, sin_theta1)?;

    Ok(PhaseMatchSolution {
        pump: *pump,
        signal: ModeSpec::new(signal_wavelength_nm, Polarization::Ordinary, theta1)?,
        idler: ModeSpec::new(idler_wavelength_nm, Polarization::Ordinary, theta2)?,
        pump_omega,
        signal_omega,
        idler_omega,
        residual_eq1,
        sin2_theta1,
    })
}

/// A solved point of a rainbow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RainbowPoint {
    pub signal_wavelength_nm: f64,
    pub signal_angle_deg: f64,
    pub idler_wavelength_nm: f64,
    pub idler_angle_deg: f64,
}

/// Why a grid wavelength has no rainbow point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GapReason {
    NoSolution { sin2_theta1: f64 },
    IdlerBeyondExit { sin2_theta2: f64 },
    OutOfRange { wavelength_nm: f64 },
    Invalid { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RainbowEntry {
    Point(RainbowPoint),
    Gap {
        signal_wavelength_nm: f64,
        reason: GapReason,
    },
}

impl RainbowEntry {
    pub fn signal_wavelength_nm(&self) -> f64 {
        match self {
            RainbowEntry::Point(p) => p.signal_wavelength_nm,
            RainbowEntry::Gap {
                signal_wavelength_nm,
                ..
            } => *signal_wavelength_nm,
        }
    }

    pub fn point(&self) -> Option<&RainbowPoint> {
        match self {
            RainbowEntry::Point(p) => Some(p),
            RainbowEntry::Gap { .. } => None,
        }
    }

    pub fn is_gap(&self) -> bool {
        matches!(self, RainbowEntry::Gap { .. })
    }
}

impl From<PhaseMatchError> for GapReason {
    fn from(err: PhaseMatchError) -> Self {
        match err {
            PhaseMatchError::NoSolution { sin2_theta1 } => GapReason::NoSolution { sin2_theta1 },
            PhaseMatchError::IdlerBeyondExit { sin2_theta2 } => {
                GapReason::IdlerBeyondExit { sin2_theta2 }
            }
            PhaseMatchError::Dispersion(DispersionError::OutOfRange { wavelength_nm, .. }) => {
                GapReason::OutOfRange { wavelength_nm }
            }
            other => GapReason::Invalid {
                message: other.to_string(),
            },
        }
    }
}

/// Solves every grid wavelength; unsolvable points become gaps. Output is
/// ordered by signal wavelength.
pub fn rainbow_sweep(
    crystal: &CrystalDispersion,
    pump: &ModeSpec,
    wavelength_grid: &[f64],
) -> Vec<RainbowEntry> {
    let mut grid = wavelength_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.into_iter()
        .map(|wl| match signal_angle(crystal, pump, wl) {
            Ok(sol) => RainbowEntry::Point(RainbowPoint {
                signal_wavelength_nm: wl,
                signal_angle_deg: sol.signal.external_angle_deg,
                idler_wavelength_nm: sol.idler.wavelength_nm,
                idler_angle_deg: sol.idler.external_angle_deg,
            }),
            Err(e) => RainbowEntry::Gap {
                signal_wavelength_nm: wl,
                reason: e.into(),
            },
        })
        .collect()
}

/// Finds the signal wavelength in `[lo_nm, hi_nm]` emitted at `angle_deg`
/// by bisection on the matched sin²θ₁, which must be monotone and solvable
/// across the bracket.
pub fn wavelength_for_angle(
    crystal: &CrystalDispersion,
    pump: &ModeSpec,
    angle_deg: f64,
    lo_nm: f64,
    hi_nm: f64,
) -> Result<f64, PhaseMatchError> {
    let target = angle_deg.to_radians().sin().powi(2);
    let f = |wl: f64| signal_angle(crystal, pump, wl).map(|s| s.sin2_theta1 - target);
    let (mut lo, mut hi) = (lo_nm, hi_nm);
    let (mut f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(PhaseMatchError::AngleNotBracketed {
            angle_deg,
            lo_nm,
            hi_nm,
        });
    }
    loop {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid.abs() <= INVERSE_SIN2_TOLERANCE || mid == lo || mid == hi {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
}

/// Geometry of one up-conversion triple, angles measured from the
/// ordinary laser axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PucGeometry {
    /// The ordinary laser on axis.
    pub laser: ModeSpec,
    /// The extraordinary vacuum mode at `laser + output` frequency.
    pub vacuum_partner: ModeSpec,
    /// The detectable ordinary mode at `vacuum − laser` frequency.
    pub output: ModeSpec,
    /// The same triple in the frame of the extraordinary mode, where it is
    /// an ordinary down-conversion solution with the laser as signal.
    pub triple: PhaseMatchSolution,
}

/// Up-conversion geometry for an ordinary on-axis laser and an
/// extraordinary vacuum mode at `partner_wavelength_nm`.
///
/// The triple is solved with the extraordinary mode in the pump role, then
/// rotated so the laser is the axis. The vacuum partner and the output then
/// both lie on the same side of the laser, at `θ₁` and `θ₁ + θ₂`.
pub fn puc_match(
    crystal: &CrystalDispersion,
    pump: &ModeSpec,
    partner_wavelength_nm: f64,
) -> Result<PucGeometry, PhaseMatchError> {
    check_pump(pump)?;
    if pump.polarization != Polarization::Ordinary {
        return Err(PhaseMatchError::InvalidPump(
            "up-conversion laser must be ordinary".into(),
        ));
    }
    if !(partner_wavelength_nm > 0.0 && partner_wavelength_nm < pump.wavelength_nm) {
        return Err(PhaseMatchError::InvalidMode(format!(
            "partner {partner_wavelength_nm} nm must be shorter than the laser {} nm",
            pump.wavelength_nm
        )));
    }
    let e_mode = ModeSpec::on_axis(partner_wavelength_nm, Polarization::Extraordinary)?;
    let triple = signal_angle(crystal, &e_mode, pump.wavelength_nm)?;
    let theta1 = triple.signal.external_angle_deg;
    let output_angle = theta1 + triple.idler.external_angle_deg;
    if output_angle >= 90.0 {
        return Err(PhaseMatchError::NoSolution {
            sin2_theta1: triple.sin2_theta1,
        });
    }
    Ok(PucGeometry {
        laser: *pump,
        vacuum_partner: ModeSpec::new(partner_wavelength_nm, Polarization::Extraordinary, theta1)?,
        output: ModeSpec::new(triple.idler.wavelength_nm, Polarization::Ordinary, output_angle)?,
        triple,
    })
}
