//! Physical parameters of the emitter–microring system.
//!
//! All frequencies and rates share one (arbitrary) unit; the CLI uses κ = 1.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rates and frequencies of the emitter coupled to the CCW/CW mode pair.
///
/// Missing JSON fields take the [`Default`] values (κ = g = 1, everything
/// else 0).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Resonance of both traveling modes.
    pub omega_c: f64,
    /// Emitter transition frequency.
    pub omega_0: f64,
    /// Emitter coupling to each traveling mode.
    pub g: f64,
    /// Cavity–waveguide decay rate.
    pub kappa: f64,
    /// Round-trip propagation phase to the mirror and back.
    pub phi: f64,
    /// Emitter decay into non-cavity modes.
    pub gamma: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self { omega_c: 0.0, omega_0: 0.0, g: 1.0, kappa: 1.0, phi: 0.0, gamma: 0.0 }
    }
}

/// Coherent drive applied to the emitter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveParams {
    #[serde(rename = "Omega")]
    pub amplitude: f64,
    #[serde(rename = "omega_L")]
    pub omega_l: f64,
}

/// A single violated bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    NonPositiveKappa,
    NegativeCoupling,
    NegativeGamma,
    NegativeDrive,
    NonFinite(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveKappa => write!(f, "kappa must be > 0"),
            Violation::NegativeCoupling => write!(f, "g must be >= 0"),
            Violation::NegativeGamma => write!(f, "gamma must be >= 0"),
            Violation::NegativeDrive => write!(f, "Omega must be >= 0"),
            Violation::NonFinite(field) => write!(f, "{field} must be finite"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("invalid parameters: {}", list(.0))]
pub struct ValidationError(pub Vec<Violation>);

fn list(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl ValidationError {
    pub fn contains(&self, v: Violation) -> bool {
        self.0.contains(&v)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Distance of `phi` from the nearest multiple of 2π.
pub fn phase_distance_to_zero(phi: f64) -> f64 {
    let w = wrap_phase(phi);
    w.min(TAU - w)
}

/// Checks every bound and returns the parameters with `phi` wrapped into `[0, 2π)`.
pub fn validate(params: SystemParams) -> Result<SystemParams, ValidationError> {
    let mut violations = Vec::new();
    let fields = [
        ("omega_c", params.omega_c),
        ("omega_0", params.omega_0),
        ("g", params.g),
        ("kappa", params.kappa),
        ("phi", params.phi),
        ("gamma", params.gamma),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            violations.push(Violation::NonFinite(name));
        }
    }
    if params.kappa.is_finite() && params.kappa <= 0.0 {
        violations.push(Violation::NonPositiveKappa);
    }
    if params.g < 0.0 {
        violations.push(Violation::NegativeCoupling);
    }
    if params.gamma < 0.0 {
        violations.push(Violation::NegativeGamma);
    }
    if !violations.is_empty() {
        return Err(ValidationError(violations));
    }
    Ok(SystemParams { phi: wrap_phase(params.phi), ..params })
}

pub fn validate_drive(drive: DriveParams) -> Result<DriveParams, ValidationError> {
    let mut violations = Vec::new();
    if !drive.amplitude.is_finite() {
        violations.push(Violation::NonFinite("Omega"));
    } else if drive.amplitude < 0.0 {
        violations.push(Violation::NegativeDrive);
    }
    if !drive.omega_l.is_finite() {
        violations.push(Violation::NonFinite("omega_L"));
    }
    if violations.is_empty() {
        Ok(drive)
    } else {
        Err(ValidationError(violations))
    }
}

impl SystemParams {
    pub fn validated(self) -> Result<Self, ValidationError> {
        validate(self)
    }

    /// True when `phi` is a multiple of 2π to within `tol`.
    pub fn is_phase_trivial(&self, tol: f64) -> bool {
        phase_distance_to_zero(self.phi) <= tol
    }

    /// Sets a field by its JSON name. Returns `false` for unknown names.
    pub fn set_field(&mut self, name: &str, value: f64) -> bool {
        match name {
            "omega_c" => self.omega_c = value,
            "omega_0" => self.omega_0 = value,
            "g" => self.g = value,
            "kappa" => self.kappa = value,
            "phi" => self.phi = value,
            "gamma" => self.gamma = value,
            _ => return false,
        }
        true
    }

    pub const FIELD_NAMES: [&'static str; 6] = ["omega_c", "omega_0", "g", "kappa", "phi", "gamma"];
}
