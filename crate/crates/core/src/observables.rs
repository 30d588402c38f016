//! Local moments, total-spin labels and population magnetization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_ops::{embed_site_spin, total_spin, Axis, SpinRegister, StateVector};
use crate::yangian::spin_label;

pub const DEFAULT_G: f64 = 2.0;

/// Per-site moments `μᵢ = −g⟨Sᵢᶻ⟩` in Bohr magnetons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentVector {
    pub mu: Vec<f64>,
    pub g: f64,
}

impl MomentVector {
    pub fn total(&self) -> f64 {
        self.mu.iter().sum()
    }
}

fn check_state(register: &SpinRegister, state: &StateVector) -> Result<()> {
    if state.len() != register.dimension() {
        return Err(Error::DimensionMismatch { left: state.len(), right: register.dimension() });
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

pub fn local_moments(register: &SpinRegister, state: &StateVector, g: f64) -> Result<MomentVector> {
    check_state(register, state)?;
    if !g.is_finite() {
        return Err(Error::InvalidParameter(format!("g = {g}")));
    }
    let mu = (0..register.n_sites())
        .map(|site| Ok(-g * embed_site_spin(register, site, Axis::Z)?.expectation(state).re))
        .collect::<Result<_>>()?;
    Ok(MomentVector { mu, g })
}

/// `(S, m)` of a spin eigenstate.
pub fn total_spin_labels(register: &SpinRegister, state: &StateVector) -> Result<(f64, f64)> {
    check_state(register, state)?;
    let total = total_spin(register)?;
    let s2 = total.squared();
    let x = s2.expectation(state).re;
    let m = total.z.expectation(state).re;
    let r_s2 = (s2.apply(state) - state.scale(x)).norm();
    let r_z = (total.z.apply(state) - state.scale(m)).norm();
    if r_s2 > 1e-8 || r_z > 1e-8 {
        return Err(Error::NotSpinEigenstate(format!(
            "residuals |S²ψ − ⟨S²⟩ψ| = {r_s2:.3e}, |S_zψ − ⟨S_z⟩ψ| = {r_z:.3e}"
        )));
    }
    Ok((spin_label(x), (2.0 * m).round() / 2.0))
}

/// `M = −scale·(ρ₊₊ − ρ₋₋)`.
pub fn magnetization_expectation(populations: (f64, f64, f64), scale: f64) -> Result<f64> {
    let (p, z, m) = populations;
    if [p, z, m].iter().any(|x| !x.is_finite() || *x < 0.0) || (p + z + m - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("invalid population vector ({p}, {z}, {m})")));
    }
    Ok(-scale * (p - m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentReport {
    pub state: String,
    pub n_sites: usize,
    pub g: f64,
    pub moments: Vec<f64>,
    pub spin: f64,
    pub m: f64,
    /// `|Σμᵢ + g·m|`.
    pub sum_rule_residual: f64,
}

pub fn moment_report(register: &SpinRegister, name: &str, state: &StateVector, g: f64) -> Result<MomentReport> {
    let moments = local_moments(register, state, g)?;
    let (spin, m) = total_spin_labels(register, state)?;
    Ok(MomentReport {
        state: name.to_string(),
        n_sites: register.n_sites(),
        g,
        sum_rule_residual: (moments.total() + g * m).abs(),
        moments: moments.mu,
        spin,
        m,
    })
}
