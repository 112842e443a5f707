//! Refractive indices of uniaxial nonlinear crystals.
//!
//! Wavelengths at the public surface are vacuum wavelengths in nanometres.
//! The Sellmeier forms themselves are evaluated in micrometres, which is the
//! unit nearly every published fit uses.

mod database;

pub use database::{
    load_crystal_database, parse_crystal_database, parse_crystal_database_unchecked,
    to_database_string, DEFAULT_DATABASE, DEFAULT_DATABASE_PATH, FORMAT_VERSION,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phasematch::ModeSpec;

/// The shipped crystal database, parsed and validated.
pub fn default_database() -> Vec<CrystalDispersion> {
    parse_crystal_database(DEFAULT_DATABASE).expect("shipped crystal database is valid")
}

/// Cut angle at which the extraordinary ray sees the principal index.
pub const PRINCIPAL_CUT_DEG: f64 = 90.0;

/// Number of interior sample points used when checking a fit's range invariant.
const INVARIANT_GRID: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispersionError {
    #[error("wavelength {wavelength_nm} nm is outside the valid range {min_nm}-{max_nm} nm")]
    OutOfRange {
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },
    #[error("angle to optic axis {0} deg is outside [0, 90]")]
    InvalidAngle(f64),
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("crystal {crystal}: invalid {field}: {reason}")]
    InvariantViolation {
        crystal: String,
        field: String,
        reason: String,
    },
    #[error("form {form} expects {expected} coefficients, got {got}")]
    CoefficientCount {
        form: SellmeierForm,
        expected: String,
        got: usize,
    },
}

/// Ordinary or extraordinary polarization eigenmode of a uniaxial crystal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    Ordinary,
    Extraordinary,
}

impl Polarization {
    /// The single-letter suffix used in mode labels such as `300e`.
    pub fn suffix(self) -> char {
        match self {
            Polarization::Ordinary => 'o',
            Polarization::Extraordinary => 'e',
        }
    }
}

/// Algebraic variant of a Sellmeier-type fit. `L` is the wavelength in µm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SellmeierForm {
    /// `n² = A + B/(L² − C) + D·L²/(L² − E)`
    TwoPole,
    /// `n² = 1 + Σ Bᵢ·L²/(L² − Cᵢ)`, coefficients given as (Bᵢ, Cᵢ) pairs.
    Standard,
    /// `n² = A + B/(L² − C) − D·L²`
    PoleLinear,
}

impl SellmeierForm {
    pub fn id(self) -> &'static str {
        match self {
            SellmeierForm::TwoPole => "two-pole",
            SellmeierForm::Standard => "standard",
            SellmeierForm::PoleLinear => "pole-linear",
        }
    }

    fn accepts(self, count: usize) -> bool {
        match self {
            SellmeierForm::TwoPole => count == 5,
            SellmeierForm::Standard => count >= 2 && count.is_multiple_of(2),
            SellmeierForm::PoleLinear => count == 4,
        }
    }

    fn expected_count(self) -> &'static str {
        match self {
            SellmeierForm::TwoPole => "5",
            SellmeierForm::Standard => "an even number (>= 2) of",
            SellmeierForm::PoleLinear => "4",
        }
    }

    fn index_squared(self, c: &[f64], lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        match self {
            SellmeierForm::TwoPole => c[0] + c[1] / (l2 - c[2]) + c[3] * l2 / (l2 - c[4]),
            SellmeierForm::Standard => {
                1.0 + c
                    .chunks_exact(2)
                    .map(|p| p[0] * l2 / (l2 - p[1]))
                    .sum::<f64>()
            }
            SellmeierForm::PoleLinear => c[0] + c[1] / (l2 - c[2]) - c[3] * l2,
        }
    }
}

impl fmt::Display for SellmeierForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SellmeierForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "two-pole" => Ok(SellmeierForm::TwoPole),
            "standard" => Ok(SellmeierForm::Standard),
            "pole-linear" => Ok(SellmeierForm::PoleLinear),
            other => Err(format!("unknown Sellmeier form `{other}`")),
        }
    }
}

/// Closed wavelength interval in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavelengthRange {
    pub min_nm: f64,
    pub max_nm: f64,
}

impl WavelengthRange {
    pub fn new(min_nm: f64, max_nm: f64) -> Self {
        Self { min_nm, max_nm }
    }

    pub fn contains(&self, wavelength_nm: f64) -> bool {
        wavelength_nm >= self.min_nm && wavelength_nm <= self.max_nm
    }

    pub fn intersect(&self, other: &WavelengthRange) -> Option<WavelengthRange> {
        let min_nm = self.min_nm.max(other.min_nm);
        let max_nm = self.max_nm.min(other.max_nm);
        (min_nm < max_nm).then_some(WavelengthRange { min_nm, max_nm })
    }

    fn check(&self, wavelength_nm: f64) -> Result<(), DispersionError> {
        if self.contains(wavelength_nm) {
            Ok(())
        } else {
            Err(DispersionError::OutOfRange {
                wavelength_nm,
                min_nm: self.min_nm,
                max_nm: self.max_nm,
            })
        }
    }
}

/// One Sellmeier-type fit for a single principal index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierFit {
    form: SellmeierForm,
    coefficients: Vec<f64>,
    valid_range: WavelengthRange,
}

impl SellmeierFit {
    pub fn new(
        form: SellmeierForm,
        coefficients: Vec<f64>,
        valid_range: WavelengthRange,
    ) -> Result<Self, DispersionError> {
        if !form.accepts(coefficients.len()) {
            return Err(DispersionError::CoefficientCount {
                form,
                expected: form.expected_count().to_string(),
                got: coefficients.len(),
            });
        }
        Ok(Self {
            form,
            coefficients,
            valid_range,
        })
    }

    pub fn form(&self) -> SellmeierForm {
        self.form
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn valid_range(&self) -> WavelengthRange {
        self.valid_range
    }

    /// Refractive index at a vacuum wavelength in nm. Never extrapolates.
    pub fn index(&self, wavelength_nm: f64) -> Result<f64, DispersionError> {
        self.valid_range.check(wavelength_nm)?;
        Ok(self.index_unchecked(wavelength_nm))
    }

    fn index_unchecked(&self, wavelength_nm: f64) -> f64 {
        self.form
            .index_squared(&self.coefficients, wavelength_nm * 1e-3)
            .sqrt()
    }

    /// Samples the valid range and reports the first wavelength where the
    /// index is non-finite or leaves (1, 3).
    fn find_violation(&self) -> Option<(f64, f64)> {
        let WavelengthRange { min_nm, max_nm } = self.valid_range;
        (0..=INVARIANT_GRID)
            .map(|i| min_nm + (max_nm - min_nm) * i as f64 / INVARIANT_GRID as f64)
            .map(|wl| (wl, self.index_unchecked(wl)))
            .find(|&(_, n)| !(n.is_finite() && n > 1.0 && n < 3.0))
    }
}

/// A named uniaxial crystal with its two principal-index fits and the
/// configured angle between the pump direction and the optic axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalDispersion {
    name: String,
    ordinary: SellmeierFit,
    extraordinary: SellmeierFit,
    optic_axis_cut_deg: f64,
}

impl CrystalDispersion {
    /// Builds a crystal after checking every type invariant.
    pub fn new(
        name: impl Into<String>,
        ordinary: SellmeierFit,
        extraordinary: SellmeierFit,
        optic_axis_cut_deg: f64,
    ) -> Result<Self, DispersionError> {
        let crystal = Self::new_unchecked(name, ordinary, extraordinary, optic_axis_cut_deg);
        crystal.validate()?;
        Ok(crystal)
    }

    pub(crate) fn new_unchecked(
        name: impl Into<String>,
        ordinary: SellmeierFit,
        extraordinary: SellmeierFit,
        optic_axis_cut_deg: f64,
    ) -> Self {
        Self {
            name: name.into(),
            ordinary,
            extraordinary,
            optic_axis_cut_deg,
        }
    }

    /// Re-checks every invariant, naming the first offending field.
    pub fn validate(&self) -> Result<(), DispersionError> {
        let violation = |field: &str, reason: String| DispersionError::InvariantViolation {
            crystal: self.name.clone(),
            field: field.to_string(),
            reason,
        };
        if self.name.trim().is_empty() {
            return Err(violation("name", "empty crystal name".into()));
        }
        for (field, fit) in [
            ("ordinary", &self.ordinary),
            ("extraordinary", &self.extraordinary),
        ] {
            let r = fit.valid_range;
            if !(r.min_nm.is_finite() && r.max_nm.is_finite() && r.min_nm > 0.0 && r.min_nm < r.max_nm)
            {
                return Err(violation(
                    "valid-range-nm",
                    format!("{}-{} nm is not a positive increasing interval", r.min_nm, r.max_nm),
                ));
            }
            if let Some((wl, n)) = fit.find_violation() {
                return Err(violation(
                    field,
                    format!("index {n} at {wl} nm is outside (1, 3)"),
                ));
            }
        }
        if self
            .ordinary
            .valid_range
            .intersect(&self.extraordinary.valid_range)
            .is_none()
        {
            return Err(violation(
                "valid-range-nm",
                "ordinary and extraordinary ranges do not overlap".into(),
            ));
        }
        if !(0.0..=90.0).contains(&self.optic_axis_cut_deg) {
            return Err(violation(
                "optic-axis-cut-deg",
                format!("{} is outside [0, 90]", self.optic_axis_cut_deg),
            ));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ordinary(&self) -> &SellmeierFit {
        &self.ordinary
    }

    pub fn extraordinary(&self) -> &SellmeierFit {
        &self.extraordinary
    }

    pub fn optic_axis_cut_deg(&self) -> f64 {
        self.optic_axis_cut_deg
    }

    /// The same crystal cut at a different angle to the optic axis.
    pub fn with_cut(&self, optic_axis_cut_deg: f64) -> Result<Self, DispersionError> {
        if !(0.0..=90.0).contains(&optic_axis_cut_deg) {
            return Err(DispersionError::InvalidAngle(optic_axis_cut_deg));
        }
        Ok(Self {
            optic_axis_cut_deg,
            ..self.clone()
        })
    }

    /// Cut perpendicular to the optic axis, so extraordinary rays see the principal index.
    pub fn principal(&self) -> Self {
        Self {
            optic_axis_cut_deg: PRINCIPAL_CUT_DEG,
            ..self.clone()
        }
    }

    /// Wavelength band where both fits are valid.
    pub fn valid_range(&self) -> WavelengthRange {
        self.ordinary
            .valid_range
            .intersect(&self.extraordinary.valid_range)
            .unwrap_or(self.ordinary.valid_range)
    }

    pub fn index_ordinary(&self, wavelength_nm: f64) -> Result<f64, DispersionError> {
        self.ordinary.index(wavelength_nm)
    }

    pub fn index_extraordinary_principal(&self, wavelength_nm: f64) -> Result<f64, DispersionError> {
        self.extraordinary.index(wavelength_nm)
    }

    /// Index seen by an extraordinary ray travelling at `theta_to_axis_deg`
    /// from the optic axis:
    /// `n(θ) = [cos²θ/n_o² + sin²θ/n_e²]^(−1/2)`.
    pub fn index_extraordinary_effective(
        &self,
        wavelength_nm: f64,
        theta_to_axis_deg: f64,
    ) -> Result<f64, DispersionError> {
        if !(0.0..=90.0).contains(&theta_to_axis_deg) {
            return Err(DispersionError::InvalidAngle(theta_to_axis_deg));
        }
        let n_o = self.ordinary.index(wavelength_nm)?;
        let n_e = self.extraordinary.index(wavelength_nm)?;
        // exact endpoints, so θ = 0 reproduces n_o bit-for-bit
        if theta_to_axis_deg == 0.0 {
            return Ok(n_o);
        }
        if theta_to_axis_deg == 90.0 {
            return Ok(n_e);
        }
        let (s, c) = theta_to_axis_deg.to_radians().sin_cos();
        Ok((c * c / (n_o * n_o) + s * s / (n_e * n_e)).sqrt().recip())
    }

    /// Index for a mode, using the configured cut for extraordinary rays.
    pub fn index_for(&self, mode: &ModeSpec) -> Result<f64, DispersionError> {
        self.index_for_polarization(mode.wavelength_nm, mode.polarization)
    }

    pub fn index_for_polarization(
        &self,
        wavelength_nm: f64,
        polarization: Polarization,
    ) -> Result<f64, DispersionError> {
        match polarization {
            Polarization::Ordinary => self.index_ordinary(wavelength_nm),
            Polarization::Extraordinary => {
                self.index_extraordinary_effective(wavelength_nm, self.optic_axis_cut_deg)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kdp() -> CrystalDispersion {
        default_database()
            .into_iter()
            .find(|c| c.name() == "KDP")
            .unwrap()
    }

    #[test]
    fn kdp_ordinary_matches_handbook_at_mercury_green() {
        // Handbook value for KDP n_o at the 546.1 nm Hg line is 1.5115; the
        // shipped fit evaluates to 1.511602.
        let n = kdp().index_ordinary(546.1).unwrap();
        assert!((n - 1.5115).abs() < 2e-4, "n_o(546.1) = {n}");
        assert!((n - 1.511_601_618).abs() < 1e-8);
        let n_e = kdp().index_extraordinary_principal(546.1).unwrap();
        assert!((n_e - 1.4698).abs() < 2e-4, "n_e(546.1) = {n_e}");
    }

    #[test]
    fn kdp_indices_at_600nm() {
        let k = kdp();
        assert!((k.index_ordinary(600.0).unwrap() - 1.508_851_382).abs() < 1e-8);
        assert!((k.index_extraordinary_principal(600.0).unwrap() - 1.467_855_795).abs() < 1e-8);
    }

    #[test]
    fn far_uv_is_out_of_range() {
        let err = kdp().index_ordinary(10.0).unwrap_err();
        assert!(matches!(err, DispersionError::OutOfRange { wavelength_nm, .. } if wavelength_nm == 10.0));
    }

    #[test]
    fn effective_index_endpoints() {
        let k = kdp();
        assert_eq!(
            k.index_extraordinary_effective(600.0, 0.0).unwrap(),
            k.index_ordinary(600.0).unwrap()
        );
        assert_eq!(
            k.index_extraordinary_effective(600.0, 90.0).unwrap(),
            k.index_extraordinary_principal(600.0).unwrap()
        );
        assert!(k.index_extraordinary_effective(600.0, 91.0).is_err());
    }

    #[test]
    fn extraordinary_pump_index_is_below_ordinary_signals() {
        let k = kdp();
        let n0 = k.index_extraordinary_effective(300.0, k.optic_axis_cut_deg()).unwrap();
        assert!(n0 < k.index_ordinary(450.0).unwrap());
        assert!(n0 < k.index_ordinary(600.0).unwrap());
    }

    #[test]
    fn index_for_dispatches_on_polarization() {
        let k = kdp();
        let o = ModeSpec::new(450.0, Polarization::Ordinary, 0.0).unwrap();
        let e = ModeSpec::new(300.0, Polarization::Extraordinary, 0.0).unwrap();
        assert_eq!(k.index_for(&o).unwrap(), k.index_ordinary(450.0).unwrap());
        assert_eq!(
            k.index_for(&e).unwrap(),
            k.index_extraordinary_effective(300.0, k.optic_axis_cut_deg())
                .unwrap()
        );
        let far = ModeSpec::new(5000.0, Polarization::Ordinary, 0.0).unwrap();
        assert!(matches!(k.index_for(&far), Err(DispersionError::OutOfRange { .. })));
    }

    #[test]
    fn normal_dispersion_across_visible() {
        let k = kdp();
        let grid: Vec<f64> = (0..50).map(|i| 300.0 + 600.0 * i as f64 / 49.0).collect();
        for w in grid.windows(2) {
            assert!(k.index_ordinary(w[1]).unwrap() < k.index_ordinary(w[0]).unwrap());
            assert!(
                k.index_extraordinary_principal(w[1]).unwrap()
                    < k.index_extraordinary_principal(w[0]).unwrap()
            );
        }
    }

    #[test]
    fn coefficient_count_is_checked() {
        let r = WavelengthRange::new(200.0, 1000.0);
        assert!(SellmeierFit::new(SellmeierForm::TwoPole, vec![1.0; 4], r).is_err());
        assert!(SellmeierFit::new(SellmeierForm::Standard, vec![1.0; 3], r).is_err());
        assert!(SellmeierFit::new(SellmeierForm::Standard, vec![1.0, 0.01], r).is_ok());
    }

    #[test]
    fn cut_outside_quadrant_is_rejected() {
        let k = kdp();
        assert!(k.with_cut(-1.0).is_err());
        assert!(k.with_cut(90.5).is_err());
        assert_eq!(k.principal().optic_axis_cut_deg(), 90.0);
    }
}
