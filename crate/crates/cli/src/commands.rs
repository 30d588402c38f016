//! Subcommand bodies. Each returns the text to emit.

use serde::{Deserialize, Serialize};
use spincluster::dynamics::{coupled_levels_report, integrate_magnetization, levels_report_csv};
use spincluster::observables::moment_report;
use spincluster::spectra::{
    classify_levels, default_tie_tol, parallelogram_hamiltonian, parallelogram_levels, phase_map, phase_map_csv,
    triangle_hamiltonian, triangle_levels,
};
use spincluster::spin_ops::hermitian_eig;
use spincluster::states::{parallelogram as p4, triangle as t3};
use spincluster::symmetry::{commutant_family, COMMUTANT_TOL};
use spincluster::yangian::{build_q, check_yangian_axioms, q_joint_labels};
use spincluster::{
    CouplingFamily, Error, GroundSpin, LabeledState, LevelSet, MomentReport, SpinRegister, StateVector, YangianWeights,
};

use crate::config::{RunConfig, SpectrumConfig, DEFAULT_STEPS};
use crate::CliError;

const DEFAULT_SITES: usize = 4;

fn register(cfg: &RunConfig) -> Result<SpinRegister, CliError> {
    Ok(SpinRegister::new(cfg.sites.unwrap_or(DEFAULT_SITES))?)
}

fn weights(cfg: &RunConfig, n: usize) -> YangianWeights {
    cfg.weights.clone().map(YangianWeights::new).unwrap_or_else(|| YangianWeights::zeros(n))
}

fn tolerance(cfg: &RunConfig, default: f64) -> Result<f64, CliError> {
    match cfg.tolerance {
        None => Ok(default),
        Some(t) if t > 0.0 && t.is_finite() => Ok(t),
        Some(t) => Err(CliError::Config(format!("tolerance {t} must be positive"))),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Multiplet {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QSpectrumReport {
    pub n_sites: usize,
    pub weights: Vec<f64>,
    pub multiplets: Vec<Multiplet>,
    /// Joint eigenbasis of `S²`, `S_z` and `Q`.
    pub states: Vec<LabeledState>,
}

pub fn q_spectrum(cfg: &RunConfig) -> Result<QSpectrumReport, CliError> {
    let reg = register(cfg)?;
    let w = weights(cfg, reg.n_sites());
    let spectrum = hermitian_eig(&build_q(&reg, &w)?)?;
    let labels = q_joint_labels(&reg, &w)?;
    Ok(QSpectrumReport {
        n_sites: reg.n_sites(),
        weights: w.as_slice().to_vec(),
        multiplets: spectrum
            .multiplets()
            .into_iter()
            .map(|(value, multiplicity)| Multiplet { value, multiplicity })
            .collect(),
        states: labels.states,
    })
}

pub fn check_yangian(cfg: &RunConfig) -> Result<spincluster::AxiomReport, CliError> {
    let reg = register(cfg)?;
    let w = weights(cfg, reg.n_sites());
    let report = check_yangian_axioms(&reg, &w)?;
    // commutators grow quadratically with the weights
    let scale = 1.0 + w.as_slice().iter().fold(0.0f64, |m, u| m.max(u.abs()));
    let tol = tolerance(cfg, 1e-12)? * scale * scale;
    if report.level_zero_residual > tol {
        return Err(Error::NumericalCheck(format!(
            "level-zero relations violated: residual {:.3e} > {tol:.3e}",
            report.level_zero_residual
        ))
        .into());
    }
    Ok(report)
}

pub fn commutant(cfg: &RunConfig) -> Result<CouplingFamily, CliError> {
    let reg = register(cfg)?;
    let q = build_q(&reg, &weights(cfg, reg.n_sites()))?;
    Ok(commutant_family(&reg, &q, tolerance(cfg, COMMUTANT_TOL)?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumReport {
    pub cluster: SpectrumConfig,
    pub levels: LevelSet,
    /// Largest gap between the closed forms and exact diagonalization.
    pub numeric_max_deviation: f64,
    pub ground_labels: Vec<String>,
    pub ground_s: GroundSpin,
    pub ground_energy: f64,
}

pub fn spectrum(cfg: &RunConfig) -> Result<SpectrumReport, CliError> {
    let cluster = cfg.spectrum.unwrap_or_default();
    let (levels, h) = match cluster {
        SpectrumConfig::Triangle { j12, j13 } => (triangle_levels(j12, j13), triangle_hamiltonian(j12, j13)?),
        SpectrumConfig::Parallelogram { a12, a13 } => {
            (parallelogram_levels(a12, a13), parallelogram_hamiltonian(a12, a13)?)
        }
    };
    if levels.levels.iter().any(|l| !l.energy.is_finite()) {
        return Err(CliError::Config("couplings must be finite".into()));
    }
    let deviation = levels.max_deviation(&h)?;
    let scale = 1.0 + levels.levels.iter().fold(0.0f64, |m, l| m.max(l.energy.abs()));
    let tol = tolerance(cfg, 1e-10)? * scale;
    if deviation > tol {
        return Err(Error::NumericalCheck(format!(
            "closed-form levels deviate from diagonalization by {deviation:.3e}"
        ))
        .into());
    }
    let (ground_labels, ground_s, ground_energy) = classify_levels(&levels, default_tie_tol(&levels))?;
    Ok(SpectrumReport { cluster, levels, numeric_max_deviation: deviation, ground_labels, ground_s, ground_energy })
}

pub fn phase_map_table(cfg: &RunConfig) -> Result<String, CliError> {
    let pm = cfg.phase_map.unwrap_or_default();
    Ok(phase_map_csv(&phase_map(pm.a12_range, pm.a13_range, pm.n_grid)?))
}

pub const STATE_NAMES: [&str; 11] = [
    "phi_alpha",
    "phi_beta",
    "quartet",
    "doublet_prime",
    "doublet",
    "quintet",
    "psi1",
    "psi2",
    "psi3",
    "psi_plus",
    "psi_minus",
];

/// Named triangle (`phi_*`, `quartet`, `doublet*`) and parallelogram
/// (`psi*`, `quintet`) states with their site count.
pub fn named_state(name: &str, m: f64) -> Result<(usize, StateVector), CliError> {
    let state = match name {
        "phi_alpha" => (3, t3::phi_alpha()),
        "phi_beta" => (3, t3::phi_beta()),
        "quartet" => (3, t3::quartet(m)?),
        "doublet_prime" => (3, t3::doublet_prime(m)?),
        "doublet" => (3, t3::doublet(m)?),
        "quintet" => (4, p4::quintet(m)?),
        "psi1" => (4, p4::psi1(m)?),
        "psi2" => (4, p4::psi2(m)?),
        "psi3" => (4, p4::psi3(m)?),
        "psi_plus" => (4, p4::psi_plus()),
        "psi_minus" => (4, p4::psi_minus()),
        other => {
            return Err(CliError::Config(format!(
                "unknown state {other:?} (expected one of {})",
                STATE_NAMES.join(", ")
            )))
        }
    };
    Ok(state)
}

pub fn moments(cfg: &RunConfig) -> Result<MomentReport, CliError> {
    let mc = cfg.moments.clone().unwrap_or_default();
    let (n, state) = named_state(&mc.state, mc.m)?;
    if let Some(sites) = cfg.sites {
        if sites != n {
            return Err(CliError::Config(format!("state {} lives on {n} sites, config says {sites}", mc.state)));
        }
    }
    let report = moment_report(&SpinRegister::new(n)?, &mc.state, &state, mc.g)?;
    let scale = 1.0 + mc.g.abs() * n as f64;
    if report.sum_rule_residual > tolerance(cfg, 1e-12)? * scale {
        return Err(Error::NumericalCheck(format!("moment sum rule off by {:.3e}", report.sum_rule_residual)).into());
    }
    Ok(report)
}

pub fn levels_report(cfg: &RunConfig) -> Result<String, CliError> {
    let lc = cfg.levels.unwrap_or_default();
    let report = coupled_levels_report(&lc.grid()?, lc.delta_gap, lc.gamma)?;
    Ok(levels_report_csv(&report))
}

pub fn simulate(cfg: &RunConfig) -> Result<String, CliError> {
    let traj = integrate_magnetization(
        &cfg.rates.unwrap_or_default(),
        &cfg.field.unwrap_or_default(),
        cfg.initial.unwrap_or_default(),
        cfg.steps.unwrap_or(DEFAULT_STEPS),
        cfg.lzs_mode.unwrap_or_default(),
        cfg.coefficient_mode.unwrap_or_default(),
    )?;
    Ok(traj.to_csv())
}
