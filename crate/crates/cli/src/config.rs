use std::fmt;

use cepdbs::model::{validate, validate_drive, DriveParams, SystemParams};
use cepdbs::single_excitation::{fw_solve, Branch};
use serde::{Deserialize, Serialize};

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    pub fn numeric(e: impl fmt::Display) -> Self {
        Failure::Numeric(e.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numeric(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

/// Inclusive, evenly spaced grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        cepdbs::spectra::linspace(self.start, self.stop, self.count)
    }

    fn check(&self, what: &str) -> Result<(), Failure> {
        if self.count < 2 {
            return Err(Failure::Config(format!("{what}.count must be >= 2")));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop <= self.start {
            return Err(Failure::Config(format!("{what} needs finite start < stop")));
        }
        Ok(())
    }
}

/// Sweep of one `SystemParams` field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        Grid { start: self.start, stop: self.stop, count: self.count }.points()
    }
}

/// Replaces `phi` with a bound-state phase computed from the other fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiPreset {
    Vacancy,
    FwPlus,
    FwMinus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub omega: Grid,
    pub sweep: Option<SweepSpec>,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { omega: Grid { start: -4.0, stop: 4.0, count: 801 }, sweep: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub t_max: f64,
    pub count: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { t_max: 100.0, count: 1001 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockadeSection {
    pub omega_l: Grid,
    pub n_max: usize,
    pub check_convergence: bool,
    pub lorentz_baseline: bool,
    pub analytic: bool,
}

impl Default for BlockadeSection {
    fn default() -> Self {
        Self {
            omega_l: Grid { start: -2.0, stop: 2.0, count: 81 },
            n_max: 3,
            check_convergence: false,
            lorentz_baseline: true,
            analytic: true,
        }
    }
}

/// Full run description; every section has defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: SystemParams,
    pub drive: Option<DriveParams>,
    pub phi_preset: Option<PhiPreset>,
    pub spectrum: SpectrumSection,
    pub dynamics: TimeSection,
    pub entangle: TimeSection,
    pub blockade: BlockadeSection,
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub g: Option<f64>,
    pub kappa: Option<f64>,
    pub phi: Option<f64>,
    pub n_max: Option<usize>,
}

impl RunConfig {
    /// Parses JSON; errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                Failure::Config(e.inner().to_string())
            } else {
                Failure::Config(format!("{path}: {}", e.inner()))
            }
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(g) = o.g {
            self.params.g = g;
        }
        if let Some(k) = o.kappa {
            self.params.kappa = k;
        }
        if let Some(phi) = o.phi {
            self.params.phi = phi;
            self.phi_preset = None;
        }
        if let Some(n) = o.n_max {
            self.blockade.n_max = n;
        }
    }

    /// Validates every section and resolves the phase preset.
    pub fn resolve(mut self) -> Result<Self, Failure> {
        self.params = resolve_params(self.params, self.phi_preset)?;
        if let Some(d) = self.drive {
            self.drive = Some(validate_drive(d).map_err(|e| Failure::Config(format!("drive: {e}")))?);
        }
        self.spectrum.omega.check("spectrum.omega")?;
        if let Some(s) = &self.spectrum.sweep {
            if !SystemParams::FIELD_NAMES.contains(&s.name.as_str()) {
                return Err(Failure::Config(format!(
                    "spectrum.sweep.name: unknown parameter `{}` (expected one of {})",
                    s.name,
                    SystemParams::FIELD_NAMES.join(", ")
                )));
            }
            Grid { start: s.start, stop: s.stop, count: s.count }.check("spectrum.sweep")?;
        }
        for (name, t) in [("dynamics", &self.dynamics), ("entangle", &self.entangle)] {
            if !(t.t_max > 0.0 && t.t_max.is_finite()) {
                return Err(Failure::Config(format!("{name}.t_max must be > 0")));
            }
            if t.count < 2 {
                return Err(Failure::Config(format!("{name}.count must be >= 2")));
            }
        }
        self.blockade.omega_l.check("blockade.omega_l")?;
        if self.blockade.n_max < 1 {
            return Err(Failure::Config("blockade.n_max must be >= 1".into()));
        }
        Ok(self)
    }
}

/// Validates `p` and, when a preset is given, overwrites `phi`.
pub fn resolve_params(p: SystemParams, preset: Option<PhiPreset>) -> Result<SystemParams, Failure> {
    let mut p = validate(p).map_err(|e| Failure::Config(format!("params: {e}")))?;
    let branch = match preset {
        None => return Ok(p),
        Some(PhiPreset::Vacancy) => {
            p.phi = 0.0;
            return Ok(p);
        }
        Some(PhiPreset::FwPlus) => Branch::Plus,
        Some(PhiPreset::FwMinus) => Branch::Minus,
    };
    let fw = fw_solve(p.g, p.kappa, p.omega_c, branch).map_err(|e| Failure::Config(format!("phi_preset: {e}")))?;
    p.phi = fw.phi_fw;
    Ok(p)
}
