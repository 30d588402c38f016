//! Heisenberg couplings that commute with `Q`.
//!
//! The commutant is the nullspace of the linear map `a ↦ [Q, H(a)]` over
//! pairwise exchange constants. For the four-spin cluster the degenerate
//! `(S = 1, q = −½)` doublet of `Q` leaves one rotation angle `θ` that the
//! Hamiltonian fixes; [`extract_mixing_theta`] recovers it.

use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_ops::{commutator, hermitian_eig, spin_dot, OperatorMatrix, SpinRegister, HERMITIAN_TOL};
use crate::states::parallelogram as p4;
use crate::yangian::{build_q, YangianWeights};

/// Relative singular-value threshold for the commutant nullspace.
pub const COMMUTANT_TOL: f64 = 1e-10;
/// Largest `‖[Q, H]‖_max` accepted as commuting.
pub const COMMUTE_TOL: f64 = 1e-9;

/// Exchange constants `a_ij`, `i < j`, stored in lexicographic pair order
/// `(0,1), (0,2), …, (0,n−1), (1,2), …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSet {
    pub n_sites: usize,
    pub a: Vec<f64>,
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Lexicographic list of pairs `(i, j)`, `i < j`.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

impl CouplingSet {
    pub fn new(n_sites: usize, a: Vec<f64>) -> Result<Self> {
        if a.len() != pair_count(n_sites) {
            return Err(Error::InvalidParameter(format!(
                "{n_sites} sites need {} couplings, got {}",
                pair_count(n_sites),
                a.len()
            )));
        }
        if let Some(x) = a.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coupling {x}")));
        }
        Ok(Self { n_sites, a })
    }

    pub fn zeros(n_sites: usize) -> Self {
        Self { n_sites, a: vec![0.0; pair_count(n_sites)] }
    }

    fn index(&self, i: usize, j: usize) -> Result<usize> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if i == j {
            return Err(Error::RepeatedSite(vec![i, j]));
        }
        if j >= self.n_sites {
            return Err(Error::SiteOutOfRange { site: j, n_sites: self.n_sites });
        }
        // Pairs before row i, then offset within the row.
        Ok(i * self.n_sites - i * (i + 1) / 2 + (j - i - 1))
    }

    /// `a_ij`, symmetric in its arguments.
    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.a[self.index(i, j)?])
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        let k = self.index(i, j)?;
        self.a[k] = value;
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Orthonormal basis (in coefficient space) of a linear coupling family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingFamily {
    pub n_sites: usize,
    pub dimension: usize,
    pub basis: Vec<CouplingSet>,
    /// All singular values of the commutator map, descending.
    pub singular_values: Vec<f64>,
}

impl CouplingFamily {
    /// Norm of the component of `couplings` orthogonal to the family.
    pub fn distance(&self, couplings: &CouplingSet) -> f64 {
        let mut rest = couplings.a.clone();
        for b in &self.basis {
            let p: f64 = b.a.iter().zip(&couplings.a).map(|(x, y)| x * y).sum();
            for (r, x) in rest.iter_mut().zip(&b.a) {
                *r -= p * x;
            }
        }
        rest.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// The family member with the given basis coordinates.
    pub fn member(&self, coords: &[f64]) -> Result<CouplingSet> {
        if coords.len() != self.dimension {
            return Err(Error::DimensionMismatch { left: coords.len(), right: self.dimension });
        }
        let mut a = vec![0.0; pair_count(self.n_sites)];
        for (c, b) in coords.iter().zip(&self.basis) {
            for (x, y) in a.iter_mut().zip(&b.a) {
                *x += c * y;
            }
        }
        CouplingSet::new(self.n_sites, a)
    }
}

pub fn heisenberg_hamiltonian(register: &SpinRegister, couplings: &CouplingSet) -> Result<OperatorMatrix> {
    if couplings.n_sites != register.n_sites() {
        return Err(Error::DimensionMismatch { left: couplings.n_sites, right: register.n_sites() });
    }
    let mut h = OperatorMatrix::zeros(register.dimension());
    for (&(i, j), &a) in pairs(register.n_sites()).iter().zip(&couplings.a) {
        if a != 0.0 {
            h = h + spin_dot(register, i, j)?.scale(a);
        }
    }
    Ok(h)
}

pub fn commutator_norm(q: &OperatorMatrix, h: &OperatorMatrix) -> Result<f64> {
    Ok(commutator(q, h)?.max_abs())
}

/// Nullspace of `a ↦ [Q, H(a)]`. Real and imaginary parts of each
/// vectorized commutator are stacked into one real column per pair.
pub fn commutant_family(register: &SpinRegister, q: &OperatorMatrix, tol: f64) -> Result<CouplingFamily> {
    let asym = q.max_asymmetry();
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian { max_asymmetry: asym });
    }
    if q.dim() != register.dimension() {
        return Err(Error::DimensionMismatch { left: q.dim(), right: register.dimension() });
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must lie in (0, 1)")));
    }
    let n = register.n_sites();
    let all_pairs = pairs(n);
    let p = all_pairs.len();
    if p == 0 {
        return Ok(CouplingFamily { n_sites: n, dimension: 0, basis: vec![], singular_values: vec![] });
    }
    let d2 = q.dim() * q.dim();
    let mut map = DMatrix::<f64>::zeros(2 * d2, p);
    for (col, &(i, j)) in all_pairs.iter().enumerate() {
        let c = commutator(q, &spin_dot(register, i, j)?)?;
        for (k, z) in c.matrix().iter().enumerate() {
            map[(k, col)] = z.re;
            map[(d2 + k, col)] = z.im;
        }
    }
    let svd = SVD::new(map, false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::NumericalCheck("SVD did not return right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let largest = singular_values.first().copied().unwrap_or(0.0);

    let mut null_rows: Vec<Vec<f64>> = order
        .iter()
        .filter(|&&k| svd.singular_values[k] <= tol * largest || largest == 0.0)
        .map(|&k| v_t.row(k).iter().copied().collect())
        .collect();
    // Thin SVD of a tall matrix returns all p right vectors, so nothing is
    // missing; make signs deterministic.
    for row in &mut null_rows {
        let lead = row.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() + 1e-12 { x } else { m });
        if lead < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
    }

    let mut basis = Vec::with_capacity(null_rows.len());
    for row in null_rows {
        let set = CouplingSet::new(n, row)?;
        let norm = commutator_norm(q, &heisenberg_hamiltonian(register, &set)?)?;
        if norm > COMMUTE_TOL {
            return Err(Error::NumericalCheck(format!("commutant basis vector leaves [Q,H] = {norm:.3e}")));
        }
        basis.push(set);
    }
    Ok(CouplingFamily { n_sites: n, dimension: basis.len(), basis, singular_values })
}

/// `Q` at zero weights and its commutant, the common case.
pub fn default_commutant(n: usize) -> Result<CouplingFamily> {
    let register = SpinRegister::new(n)?;
    let q = build_q(&register, &YangianWeights::zeros(n))?;
    commutant_family(&register, &q, COMMUTANT_TOL)
}

/// Triangle couplings with `a₂₃ = a₁₂`.
pub fn constrained_couplings_triangle(j12: f64, j13: f64) -> Result<CouplingSet> {
    let mut c = CouplingSet::zeros(3);
    c.set(0, 1, j12)?;
    c.set(1, 2, j12)?;
    c.set(0, 2, j13)?;
    CouplingSet::new(3, c.a)
}

/// Four-site couplings with `a₂₄`, `a₁₄`, `a₂₃` fixed by `a₁₂`, `a₃₄`, `a₁₃`.
pub fn constrained_couplings_parallelogram(a12: f64, a34: f64, a13: f64) -> Result<CouplingSet> {
    let mut c = CouplingSet::zeros(4);
    c.set(0, 1, a12)?;
    c.set(2, 3, a34)?;
    c.set(0, 2, a13)?;
    c.set(1, 3, (a12 + 2.0 * a13 - a34) / 2.0)?;
    c.set(0, 3, (a12 + 2.0 * a13) / 3.0)?;
    c.set(1, 2, (2.0 * a12 - 2.0 * a13 + 3.0 * a34) / 3.0)?;
    CouplingSet::new(4, c.a)
}

/// Residuals of the three linear relations that define the four-site
/// family, in the order `a₂₄`, `a₁₄`, `a₂₃`.
pub fn parallelogram_relation_residuals(c: &CouplingSet) -> Result<[f64; 3]> {
    if c.n_sites != 4 {
        return Err(Error::UnsupportedClusterSize(c.n_sites));
    }
    let (a12, a34, a13) = (c.get(0, 1)?, c.get(2, 3)?, c.get(0, 2)?);
    Ok([
        c.get(1, 3)? - (a12 + 2.0 * a13 - a34) / 2.0,
        c.get(0, 3)? - (a12 + 2.0 * a13) / 3.0,
        c.get(1, 2)? - (2.0 * a12 - 2.0 * a13 + 3.0 * a34) / 3.0,
    ])
}

/// Norm of the part of `H` that couples different eigenspaces of `Q`.
pub fn off_block_norm(q: &OperatorMatrix, h: &OperatorMatrix) -> Result<f64> {
    let spec = hermitian_eig(q)?;
    let groups: Vec<DMatrix<_>> = (0..spec.degeneracy_groups.len()).map(|g| spec.group_basis(g)).collect();
    let mut total = 0.0;
    for (i, a) in groups.iter().enumerate() {
        for (j, b) in groups.iter().enumerate() {
            if i != j {
                let block = a.adjoint() * h.matrix() * b;
                total += block.iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
    }
    Ok(total.sqrt())
}

/// `H` restricted to the `(ψ¹, ψ³)` plane in one `m` sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegenerateBlock {
    pub h11: f64,
    pub h13: f64,
    pub h33: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaReport {
    pub theta: f64,
    pub block: DegenerateBlock,
    /// Largest change of the block entries across `m = −1, 0, +1`.
    pub m_spread: f64,
    pub commutator_norm: f64,
    /// `⟨ψ¹'|H|ψ³'⟩` for the returned angle.
    pub off_diagonal_residual: f64,
    /// The printed angle law evaluated at the returned angle.
    pub printed_law_residual: f64,
}

fn degenerate_block(h: &OperatorMatrix, m: f64) -> Result<DegenerateBlock> {
    let v1 = p4::psi1(m)?;
    let v3 = p4::psi3(m)?;
    Ok(DegenerateBlock {
        h11: h.matrix_element(&v1, &v1).re,
        h13: h.matrix_element(&v1, &v3).re,
        h33: h.matrix_element(&v3, &v3).re,
    })
}

/// Off-diagonal element of the block after the rotation
/// `ψ¹' = cos(θ/2)ψ¹ − sin(θ/2)ψ³`, `ψ³' = sin(θ/2)ψ¹ + cos(θ/2)ψ³`.
pub fn rotated_off_diagonal(block: &DegenerateBlock, theta: f64) -> f64 {
    0.5 * theta.sin() * (block.h11 - block.h33) + block.h13 * theta.cos()
}

/// The angle law as printed, with the three independent couplings.
pub fn printed_theta_law(a12: f64, a34: f64, a13: f64, theta: f64) -> f64 {
    let (s, c) = (theta / 2.0).sin_cos();
    c * c * (a12 / 2.0 - a34 / 2.0)
        + s * s * (2.5 * a12 - 2.5 * a34)
        + 0.5 * theta.sin() * (-2.0 / 3.0 * a12 - 2.0 * a34 + 8.0 / 3.0 * a13)
}

/// The angle law that the block diagonalization actually obeys: the
/// rotated off-diagonal element written in the couplings.
pub fn theta_law(a12: f64, a34: f64, a13: f64, theta: f64) -> f64 {
    0.5 * theta.sin() * (a12 / 3.0 + a34 - 4.0 * a13 / 3.0) + 5f64.sqrt() / 4.0 * (a12 - a34) * theta.cos()
}

/// Rotation angle of the `(ψ¹, ψ³)` plane that diagonalizes `H`.
///
/// `θ ∈ [−π/2, π/2]`, so the first rotated vector is the eigenvector with
/// the larger `ψ¹` overlap and that overlap is nonnegative. A fully
/// degenerate block gives `θ = 0`.
pub fn extract_mixing_theta(couplings: &CouplingSet) -> Result<ThetaReport> {
    if couplings.n_sites != 4 {
        return Err(Error::UnsupportedClusterSize(couplings.n_sites));
    }
    let register = SpinRegister::new(4)?;
    let q = build_q(&register, &YangianWeights::zeros(4))?;
    let h = heisenberg_hamiltonian(&register, couplings)?;
    let norm = commutator_norm(&q, &h)?;
    let scale = couplings.norm().max(1.0);
    if norm > COMMUTE_TOL * scale {
        return Err(Error::NotInCommutant { norm });
    }

    let block = degenerate_block(&h, -1.0)?;
    let mut m_spread = 0.0f64;
    for m in [0.0, 1.0] {
        let other = degenerate_block(&h, m)?;
        m_spread = m_spread
            .max((other.h11 - block.h11).abs())
            .max((other.h13 - block.h13).abs())
            .max((other.h33 - block.h33).abs());
    }
    if m_spread > 1e-10 * scale {
        return Err(Error::NumericalCheck(format!("degenerate block depends on m (spread {m_spread:.3e})")));
    }

    let diff = block.h11 - block.h33;
    let theta = if diff.abs() <= 1e-13 * scale && block.h13.abs() <= 1e-13 * scale {
        0.0
    } else {
        let t = (-2.0 * block.h13).atan2(diff);
        use std::f64::consts::PI;
        if t > PI / 2.0 {
            t - PI
        } else if t < -PI / 2.0 {
            t + PI
        } else {
            t
        }
    };
    let (a12, a34, a13) = (couplings.get(0, 1)?, couplings.get(2, 3)?, couplings.get(0, 2)?);
    Ok(ThetaReport {
        theta,
        block,
        m_spread,
        commutator_norm: norm,
        off_diagonal_residual: rotated_off_diagonal(&block, theta),
        printed_law_residual: printed_theta_law(a12, a34, a13, theta),
    })
}
