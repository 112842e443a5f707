//! Phase matching, classical three-wave mixing and zeropoint-field Monte
//! Carlo for Type-I parametric down conversion and its up-conversion
//! satellite.
//!
//! - [`dispersion`]: Sellmeier fits and the crystal database.
//! - [`phasematch`]: emission angles of rainbow and satellite modes.
//! - [`threewave`]: RK4 propagation of one coupled triple.
//! - [`ensemble`]: vacuum sampling, scenarios and threshold detection.
//! - [`precision`]: the fixed output precision shared by every table.

pub mod dispersion;
pub mod ensemble;
pub mod phasematch;
pub mod precision;
pub mod threewave;

pub use dispersion::{CrystalDispersion, DispersionError, Polarization};
pub use ensemble::{EnsembleError, EnsembleReport, Scenario, ScenarioConfig};
pub use phasematch::{ModeSpec, PhaseMatchError, PhaseMatchSolution};
pub use threewave::{PropagationConfig, PropagationError, ThreeWaveState};
