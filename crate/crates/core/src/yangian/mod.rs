//! The Yangian realization `Y = Σ uᵢSᵢ + i Σ_{i<j} Sᵢ×Sⱼ` on a spin
//! register, its square `Q = Y·Y`, axiom checks, and the joint
//! `{S², S_z, Q}` eigenbasis.

pub mod expansion;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_ops::{
    c, ci, commutator, cross, fix_phase, hermitian_eig, hermitian_eig_matrix, site_spin, total_spin, Axis,
    OperatorMatrix, SpinRegister, StateVector, VectorOperator, HERMITIAN_TOL,
};

/// Residual below which a fitted Serre relation counts as satisfied.
pub const SERRE_TOL: f64 = 1e-10;

/// One real weight `uᵢ` per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct YangianWeights(Vec<f64>);

impl YangianWeights {
    pub fn new(u: Vec<f64>) -> Self {
        Self(u)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check(&self, register: &SpinRegister) -> Result<()> {
        if self.0.len() != register.n_sites() {
            return Err(Error::WeightCount { expected: register.n_sites(), got: self.0.len() });
        }
        if let Some(bad) = self.0.iter().find(|u| !u.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite weight {bad}")));
        }
        Ok(())
    }
}

impl From<Vec<f64>> for YangianWeights {
    fn from(u: Vec<f64>) -> Self {
        Self(u)
    }
}

pub fn build_yangian(register: &SpinRegister, weights: &YangianWeights) -> Result<VectorOperator> {
    weights.check(register)?;
    let n = register.n_sites();
    let spins: Vec<VectorOperator> = (0..n).map(|i| site_spin(register, i)).collect::<Result<_>>()?;
    let mut y = VectorOperator::zeros(register.dimension());
    for (s, &u) in spins.iter().zip(weights.as_slice()) {
        if u != 0.0 {
            y.add_scaled(s, c(u))?;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            y.add_scaled(&cross(&spins[i], &spins[j])?, ci(1.0))?;
        }
    }
    Ok(y)
}

pub fn build_q(register: &SpinRegister, weights: &YangianWeights) -> Result<OperatorMatrix> {
    Ok(build_yangian(register, weights)?.squared())
}

/// Coefficients of the scalar-triple terms `Sᵢ·(Sⱼ×S_k)` in `Q`, keyed by
/// the site triple `(i, j, k)` with `i < j < k`. For three and four sites
/// these are `u_i − u_j + u_k`.
pub fn triple_coefficients(weights: &[f64]) -> Vec<((usize, usize, usize), f64)> {
    let n = weights.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                out.push(((i, j, k), weights[i] - weights[j] + weights[k]));
            }
        }
    }
    out
}

/// Whether `Q` is Hermitian for these weights: every scalar-triple
/// coefficient vanishes. For three sites this is `u₂ = u₁ + u₃`; for four
/// it forces all weights to zero.
pub fn q_hermiticity_condition(weights: &YangianWeights, n: usize) -> Result<bool> {
    if n != 3 && n != 4 {
        return Err(Error::UnsupportedClusterSize(n));
    }
    if weights.len() != n {
        return Err(Error::WeightCount { expected: n, got: weights.len() });
    }
    let scale = weights.as_slice().iter().fold(1.0f64, |m, u| m.max(u.abs()));
    Ok(triple_coefficients(weights.as_slice()).iter().all(|(_, coeff)| coeff.abs() <= 1e-12 * scale))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomReport {
    pub n_sites: usize,
    pub weights: Vec<f64>,
    /// Largest entry of `[I_λ, I_μ] − iε I_ν` and `[I_λ, Y_μ] − iε Y_ν`.
    pub level_zero_residual: f64,
    /// Residual of both reduced Serre relations at the fitted `λ`.
    pub serre_residual: f64,
    /// `None` when both sides of the relation vanish and any `λ` fits.
    pub fitted_lambda: Option<f64>,
    pub serre_consistent: bool,
}

fn levi_civita_residual(a: &VectorOperator, b: &VectorOperator, target: &VectorOperator) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in Axis::ALL {
        for q in Axis::ALL {
            let lhs = commutator(a.component(p), b.component(q))?;
            let expected = if p == q {
                OperatorMatrix::zeros(lhs.dim())
            } else {
                let (next, after) = p.cyclic_successors();
                let (r, sign) = if q == next { (after, 1.0) } else { (next, -1.0) };
                target.component(r).scale_complex(ci(sign))
            };
            worst = worst.max(lhs.max_abs_diff(&expected));
        }
    }
    Ok(worst)
}

/// `[J±, [J₃, J±]]` and `¼ I±(J± I₃ − I± J₃)`.
fn serre_sides(i: &VectorOperator, y: &VectorOperator, raising: bool) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let (jpm, ipm) = if raising { (y.raising(), i.raising()) } else { (y.lowering(), i.lowering()) };
    let lhs = commutator(&jpm, &commutator(&y.z, &jpm)?)?;
    let inner = &(&jpm * &i.z) - &(&ipm * &y.z);
    let rhs = (&ipm * &inner).scale(0.25);
    Ok((lhs, rhs))
}

fn frob_inner(a: &OperatorMatrix, b: &OperatorMatrix) -> Complex64 {
    a.matrix().iter().zip(b.matrix().iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn check_yangian_axioms(register: &SpinRegister, weights: &YangianWeights) -> Result<AxiomReport> {
    let y = build_yangian(register, weights)?;
    let i = total_spin(register)?;
    let level_zero_residual = levi_civita_residual(&i, &i, &i)?.max(levi_civita_residual(&i, &y, &y)?);

    let (lhs_p, rhs_p) = serre_sides(&i, &y, true)?;
    let (lhs_m, rhs_m) = serre_sides(&i, &y, false)?;
    let denom = frob_inner(&rhs_p, &rhs_p).re;
    let fitted_lambda = if denom.sqrt() < 1e-13 { None } else { Some(frob_inner(&rhs_p, &lhs_p).re / denom) };
    let lambda = fitted_lambda.unwrap_or(0.0);
    let serre_residual = (&lhs_p - &rhs_p.scale(lambda)).max_abs().max((&lhs_m - &rhs_m.scale(lambda)).max_abs());
    Ok(AxiomReport {
        n_sites: register.n_sites(),
        weights: weights.as_slice().to_vec(),
        level_zero_residual,
        serre_residual,
        fitted_lambda,
        serre_consistent: serre_residual < SERRE_TOL,
    })
}

/// A simultaneous eigenvector of `S²`, `S_z` and `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledState {
    pub s: f64,
    pub m: f64,
    pub q: f64,
    /// True when another state shares all three labels; the vector is then
    /// an arbitrary orthonormal choice inside that shared eigenspace.
    pub degenerate: bool,
    pub vector: Vec<Complex64>,
}

impl LabeledState {
    pub fn state(&self) -> StateVector {
        StateVector::from_vec(self.vector.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledBasis {
    pub states: Vec<LabeledState>,
}

impl LabeledBasis {
    /// States whose labels match `(s, m, q)` within `tol`.
    pub fn find(&self, s: f64, m: f64, q: f64, tol: f64) -> Vec<&LabeledState> {
        self.states
            .iter()
            .filter(|st| (st.s - s).abs() < tol && (st.m - m).abs() < tol && (st.q - q).abs() < tol)
            .collect()
    }
}

/// Splits the span of `basis` into eigenspaces of `op` restricted to it.
fn refine(op: &OperatorMatrix, basis: &DMatrix<Complex64>) -> Result<Vec<DMatrix<Complex64>>> {
    let restricted = op.restrict(basis);
    let spec = hermitian_eig_matrix(&restricted)?;
    Ok((0..spec.degeneracy_groups.len()).map(|g| basis * spec.group_basis(g)).collect())
}

/// Spin quantum number `S` from `S(S+1)`, rounded to a half-integer.
pub fn spin_label(s_squared: f64) -> f64 {
    let s = 0.5 * (-1.0 + (1.0 + 4.0 * s_squared.max(0.0)).sqrt());
    (2.0 * s).round() / 2.0
}

pub fn q_joint_labels(register: &SpinRegister, weights: &YangianWeights) -> Result<LabeledBasis> {
    let q = build_q(register, weights)?;
    let asym = q.max_asymmetry();
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian { max_asymmetry: asym });
    }
    let total = total_spin(register)?;
    let s2 = total.squared();
    let sz = &total.z;

    let full = hermitian_eig(&s2)?;
    let mut states = Vec::new();
    for g in 0..full.degeneracy_groups.len() {
        for m_space in refine(sz, &full.group_basis(g))? {
            for q_space in refine(&q, &m_space)? {
                let degenerate = q_space.ncols() > 1;
                for col in q_space.column_iter() {
                    let v = fix_phase(&col.into_owned());
                    let s2v = s2.expectation(&v).re;
                    let mv = sz.expectation(&v).re;
                    let qv = q.expectation(&v).re;
                    let resid = (s2.apply(&v) - v.scale(s2v))
                        .norm()
                        .max((sz.apply(&v) - v.scale(mv)).norm())
                        .max((q.apply(&v) - v.map(|z| z * qv)).norm());
                    if resid > 1e-10 {
                        return Err(Error::NumericalCheck(format!("joint eigenvector residual {resid:.3e}")));
                    }
                    states.push(LabeledState {
                        s: spin_label(s2v),
                        m: (2.0 * mv).round() / 2.0,
                        q: qv,
                        degenerate,
                        vector: v.iter().copied().collect(),
                    });
                }
            }
        }
    }
    states.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.m.total_cmp(&b.m)).then(a.q.total_cmp(&b.q)));
    Ok(LabeledBasis { states })
}
