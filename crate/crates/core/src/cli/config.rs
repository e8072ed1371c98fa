use serde::{Deserialize, Serialize};

use crate::geometry::{DEFAULT_APEX_OFFSET, DEFAULT_BOUNDARY_ANGLES, DEFAULT_GAP_HALFWIDTH};
use crate::invariants::{DEFAULT_NU_ROUND_TOL, DEFAULT_WINDOW_FRACTION};
use crate::models::BlochModel;
use crate::quasifree::DISK_GAP_TOL;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Chern,
    Parity,
    Twist,
    Oracle,
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelftestKind {
    Wick,
    Algebraic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Qwz { u: f64 },
    Pip { mu: f64, delta: f64 },
    Trivial,
}

impl ModelConfig {
    /// Majorana indices per site.
    pub fn majorana_count(&self) -> usize {
        match self {
            ModelConfig::Qwz { .. } => 4,
            ModelConfig::Pip { .. } | ModelConfig::Trivial => 2,
        }
    }

    pub fn bloch(&self) -> Option<BlochModel> {
        match *self {
            ModelConfig::Qwz { u } => Some(BlochModel::Qwz { u }),
            ModelConfig::Pip { mu, delta } => Some(BlochModel::Pip { mu, delta, chirality: 1.0 }),
            ModelConfig::Trivial => None,
        }
    }

    /// Replace one parameter by name, as given on the command line.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), CliError> {
        let slot = match (self, key) {
            (ModelConfig::Qwz { u }, "u") => u,
            (ModelConfig::Pip { mu, .. }, "mu") => mu,
            (ModelConfig::Pip { delta, .. }, "delta") => delta,
            (m, k) => return Err(CliError::Config(format!("model {m:?} has no parameter '{k}'"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn family(name: &str) -> Result<Self, CliError> {
        match name {
            "qwz" => Ok(ModelConfig::Qwz { u: 1.0 }),
            "pip" => Ok(ModelConfig::Pip { mu: -1.0, delta: 0.5 }),
            "trivial" => Ok(ModelConfig::Trivial),
            other => Err(CliError::Config(format!("unknown model family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub radius: f64,
    pub apex_offset: [f64; 2],
    pub boundary_angles: [f64; 3],
    pub gap_halfwidth: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            radius: 16.0,
            apex_offset: DEFAULT_APEX_OFFSET,
            boundary_angles: DEFAULT_BOUNDARY_ANGLES,
            gap_halfwidth: DEFAULT_GAP_HALFWIDTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    pub gap_tol: f64,
    /// Radians.
    pub phase_tol: f64,
    pub nu_round_tol: f64,
    pub window_fraction: f64,
    pub kgrid: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            gap_tol: DISK_GAP_TOL,
            phase_tol: 0.05,
            nu_round_tol: DEFAULT_NU_ROUND_TOL,
            window_fraction: DEFAULT_WINDOW_FRACTION,
            kgrid: 200,
        }
    }
}

/// One run. Precedence: built-in defaults, then the `--config` document,
/// then command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    pub model: ModelConfig,
    pub geometry: GeometryConfig,
    pub numerics: NumericsConfig,
    pub copies: usize,
    pub output: Option<String>,
    pub seed: u64,
    pub trials: usize,
    pub selftest: SelftestKind,
    pub radii: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: Task::Chern,
            model: ModelConfig::Qwz { u: 1.0 },
            geometry: GeometryConfig::default(),
            numerics: NumericsConfig::default(),
            copies: 3,
            output: None,
            seed: 42,
            trials: 100,
            selftest: SelftestKind::Wick,
            radii: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let g = &self.geometry;
        if !(g.radius.is_finite() && g.radius > 0.0) {
            return bad(format!("radius must be positive, got {}", g.radius));
        }
        if g.apex_offset.iter().chain(&g.boundary_angles).any(|v| !v.is_finite()) {
            return bad("non-finite geometry value".into());
        }
        let n = &self.numerics;
        if !(n.gap_tol > 0.0 && n.phase_tol > 0.0 && n.nu_round_tol > 0.0 && n.nu_round_tol < 0.5) {
            return bad("tolerances must be positive (nu_round_tol below 0.5)".into());
        }
        if !(n.window_fraction > 0.0 && n.window_fraction <= 1.0) {
            return bad(format!("window_fraction must lie in (0, 1], got {}", n.window_fraction));
        }
        if n.kgrid < 50 {
            return bad(format!("kgrid must be at least 50, got {}", n.kgrid));
        }
        if self.task == Task::Twist && (self.copies == 0 || self.copies % 2 == 0) {
            return bad(format!("copies must be odd, got {}", self.copies));
        }
        if self.task == Task::Selftest && self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        let m = self.model;
        let params: Vec<f64> = match m {
            ModelConfig::Qwz { u } => vec![u],
            ModelConfig::Pip { mu, delta } => vec![mu, delta],
            ModelConfig::Trivial => vec![],
        };
        if params.iter().any(|v| !v.is_finite()) {
            return bad("non-finite model parameter".into());
        }
        Ok(())
    }

    /// Radii for a sweep: at least two, strictly increasing.
    pub fn validate_radii(&self) -> Result<(), CliError> {
        if self.radii.len() < 2 {
            return Err(CliError::Config(format!("a sweep needs at least two radii, got {}", self.radii.len())));
        }
        if self.radii.windows(2).any(|w| !(w[0] < w[1])) || self.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(CliError::Config("radii must be positive and strictly increasing".into()));
        }
        Ok(())
    }
}
