//! Run configuration: one JSON document, optional named presets, and the
//! merge order preset → file → flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spincluster::{CoefficientMode, FieldProfile, InitialCondition, LzsMode, RateParams};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub sites: Option<usize>,
    /// Yangian weights `u`, one per site.
    pub weights: Option<Vec<f64>>,
    /// Numerical tolerance for commutant extraction and axiom checks.
    pub tolerance: Option<f64>,
    pub spectrum: Option<SpectrumConfig>,
    pub phase_map: Option<PhaseMapConfig>,
    pub moments: Option<MomentsConfig>,
    pub levels: Option<LevelsConfig>,
    pub rates: Option<RateParams>,
    pub field: Option<FieldProfile>,
    pub initial: Option<InitialCondition>,
    pub steps: Option<usize>,
    pub lzs_mode: Option<LzsMode>,
    pub coefficient_mode: Option<CoefficientMode>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cluster", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumConfig {
    Triangle { j12: f64, j13: f64 },
    Parallelogram { a12: f64, a13: f64 },
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig::Parallelogram { a12: 1.0, a13: -3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseMapConfig {
    pub a12_range: (f64, f64),
    pub a13_range: (f64, f64),
    pub n_grid: usize,
}

impl Default for PhaseMapConfig {
    fn default() -> Self {
        Self { a12_range: (0.1, 2.0), a13_range: (-5.0, -0.1), n_grid: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentsConfig {
    /// One of the named cluster states, see [`crate::commands::named_state`].
    pub state: String,
    /// Magnetic quantum number for multiplet states; ignored by singlets.
    pub m: f64,
    pub g: f64,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        Self { state: "psi3".into(), m: -1.0, g: spincluster::observables::DEFAULT_G }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevelsConfig {
    pub b_min: f64,
    pub b_max: f64,
    pub n_points: usize,
    pub delta_gap: f64,
    pub gamma: f64,
}

impl Default for LevelsConfig {
    fn default() -> Self {
        Self { b_min: -5.0, b_max: 5.0, n_points: 50, delta_gap: 1.0, gamma: 1.0 }
    }
}

impl LevelsConfig {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if !(self.b_min.is_finite() && self.b_max.is_finite() && self.b_min <= self.b_max) {
            return Err(CliError::Config(format!("invalid field range [{}, {}]", self.b_min, self.b_max)));
        }
        match self.n_points {
            0 => Err(CliError::Config("levels.n_points must be positive".into())),
            1 => Ok(vec![self.b_min]),
            n => {
                let h = (self.b_max - self.b_min) / (n - 1) as f64;
                Ok((0..n).map(|k| if k + 1 == n { self.b_max } else { self.b_min + h * k as f64 }).collect())
            }
        }
    }
}

pub const DEFAULT_STEPS: usize = 100_000;

pub const PRESETS: [&str; 4] = ["v6-triangle", "v8-ground", "fig4-loop", "fig5-lzs"];

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let cfg = match name {
        "v6-triangle" => RunConfig {
            sites: Some(3),
            spectrum: Some(SpectrumConfig::Triangle { j12: 65.0, j13: 7.0 }),
            moments: Some(MomentsConfig { state: "phi_alpha".into(), ..Default::default() }),
            ..Default::default()
        },
        "v8-ground" => RunConfig {
            sites: Some(4),
            spectrum: Some(SpectrumConfig::Parallelogram { a12: 1.0, a13: -3.0 }),
            moments: Some(MomentsConfig::default()),
            ..Default::default()
        },
        "fig4-loop" => RunConfig {
            field: Some(FieldProfile::default()),
            lzs_mode: Some(LzsMode::Off),
            steps: Some(DEFAULT_STEPS),
            ..Default::default()
        },
        // half sweep with the avoided crossing switched on
        "fig5-lzs" => RunConfig {
            field: Some(FieldProfile::sinusoid(10.0, 1.0, 0.0, std::f64::consts::PI)),
            lzs_mode: Some(LzsMode::Adiabatic),
            steps: Some(DEFAULT_STEPS / 2),
            ..Default::default()
        },
        other => {
            return Err(CliError::Config(format!("unknown preset {other:?} (expected one of {})", PRESETS.join(", "))))
        }
    };
    Ok(cfg)
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `top` win; sections are replaced whole.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        RunConfig {
            sites: top.sites.or(self.sites),
            weights: top.weights.or(self.weights),
            tolerance: top.tolerance.or(self.tolerance),
            spectrum: top.spectrum.or(self.spectrum),
            phase_map: top.phase_map.or(self.phase_map),
            moments: top.moments.or(self.moments),
            levels: top.levels.or(self.levels),
            rates: top.rates.or(self.rates),
            field: top.field.or(self.field),
            initial: top.initial.or(self.initial),
            steps: top.steps.or(self.steps),
            lzs_mode: top.lzs_mode.or(self.lzs_mode),
            coefficient_mode: top.coefficient_mode.or(self.coefficient_mode),
            out: top.out.or(self.out),
        }
    }
}
