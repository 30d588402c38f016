//! Dense spin operators on tensor-product spaces.
//!
//! A register of `n` spin-1/2 sites has dimension `2^n`. Basis index `b`
//! stores site `k` in bit `n - 1 - k` (site 0 is the leftmost tensor factor
//! and the most significant bit); a clear bit is spin-up, a set bit is
//! spin-down.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type StateVector = DVector<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const GROUPING_TOL: f64 = 1e-9;

const MAX_SITES: usize = 8;

#[inline]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[inline]
pub(crate) fn ci(im: f64) -> Complex64 {
    Complex64::new(0.0, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The two axes following `self` cyclically, so that `(self, a, b)` is
    /// an even permutation of `(x, y, z)`.
    pub fn cyclic_successors(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::Z, Axis::X),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// An `n`-site spin-1/2 cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinRegister {
    n_sites: usize,
}

impl SpinRegister {
    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::RegisterSize(n_sites));
        }
        Ok(Self { n_sites })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dimension(&self) -> usize {
        1 << self.n_sites
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites {
            Err(Error::SiteOutOfRange { site, n_sites: self.n_sites })
        } else {
            Ok(())
        }
    }

    /// True when `site` is spin-down in basis state `index`.
    pub fn is_down(&self, index: usize, site: usize) -> bool {
        (index >> (self.n_sites - 1 - site)) & 1 == 1
    }

    /// Basis index of a product state written as a string of `u`/`d`
    /// (or `↑`/`↓`) characters, site 0 first.
    pub fn basis_index(&self, spins: &str) -> Result<usize> {
        let chars: Vec<char> = spins.chars().collect();
        if chars.len() != self.n_sites {
            return Err(Error::InvalidParameter(format!(
                "product state '{spins}' has {} sites, register has {}",
                chars.len(),
                self.n_sites
            )));
        }
        chars.iter().try_fold(0usize, |acc, &ch| {
            let bit = match ch {
                'u' | 'U' | '↑' => 0,
                'd' | 'D' | '↓' => 1,
                other => return Err(Error::InvalidParameter(format!("unknown spin symbol '{other}'"))),
            };
            Ok((acc << 1) | bit)
        })
    }

    /// Normalized superposition `Σ cᵢ |spinsᵢ⟩` of product states. The
    /// coefficients are used as given and the result is then normalized.
    pub fn superposition(&self, terms: &[(f64, &str)]) -> Result<StateVector> {
        let mut v = StateVector::zeros(self.dimension());
        for &(coeff, spins) in terms {
            v[self.basis_index(spins)?] += c(coeff);
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("empty superposition".into()));
        }
        Ok(v.unscale(norm))
    }
}

/// Dense square complex matrix acting on a spin Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(DMatrix<Complex64>);

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { left: m.nrows(), right: m.ncols() });
        }
        Ok(Self(m))
    }

    /// Row-major real entries.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch { left: rows.len(), right: dim * dim });
        }
        Ok(Self(DMatrix::from_row_iterator(dim, dim, rows.iter().map(|&x| c(x)))))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max |X_ij − conj(X_ji)|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_asymmetry() <= tol
    }

    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).scale(0.5))
    }

    pub fn anti_hermitian_part(&self) -> Self {
        Self((&self.0 - self.0.adjoint()).scale(0.5))
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        &self.0 * v
    }

    /// `⟨a|X|b⟩`.
    pub fn matrix_element(&self, a: &StateVector, b: &StateVector) -> Complex64 {
        a.dotc(&(&self.0 * b))
    }

    pub fn expectation(&self, v: &StateVector) -> Complex64 {
        self.matrix_element(v, v)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// Restriction `Vᴴ X V` onto the span of the orthonormal columns of `basis`.
    pub fn restrict(&self, basis: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        basis.adjoint() * &self.0 * basis
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() })
        } else {
            Ok(())
        }
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix(-&self.0)
    }
}

impl Add for OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(self.0 + rhs.0)
    }
}

impl Sub for OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(self.0 - rhs.0)
    }
}

/// Three Cartesian components of a vector operator.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorOperator {
    pub x: OperatorMatrix,
    pub y: OperatorMatrix,
    pub z: OperatorMatrix,
}

impl VectorOperator {
    pub fn new(x: OperatorMatrix, y: OperatorMatrix, z: OperatorMatrix) -> Result<Self> {
        x.check_same_dim(&y)?;
        x.check_same_dim(&z)?;
        Ok(Self { x, y, z })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { x: OperatorMatrix::zeros(dim), y: OperatorMatrix::zeros(dim), z: OperatorMatrix::zeros(dim) }
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn component(&self, axis: Axis) -> &OperatorMatrix {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }

    fn component_mut(&mut self, axis: Axis) -> &mut OperatorMatrix {
        match axis {
            Axis::X => &mut self.x,
            Axis::Y => &mut self.y,
            Axis::Z => &mut self.z,
        }
    }

    /// `self ← self + factor · other`, componentwise.
    pub fn add_scaled(&mut self, other: &VectorOperator, factor: Complex64) -> Result<()> {
        self.x.check_same_dim(&other.x)?;
        for axis in Axis::ALL {
            let target = self.component_mut(axis);
            target.0 += other.component(axis).0.map(|z| z * factor);
        }
        Ok(())
    }

    /// `Σ_a A_a B_a`.
    pub fn dot(&self, other: &VectorOperator) -> Result<OperatorMatrix> {
        self.x.check_same_dim(&other.x)?;
        Ok(&(&(&self.x * &other.x) + &(&self.y * &other.y)) + &(&self.z * &other.z))
    }

    /// `A·A`.
    pub fn squared(&self) -> OperatorMatrix {
        &(&(&self.x * &self.x) + &(&self.y * &self.y)) + &(&self.z * &self.z)
    }

    /// Raising combination `A_x + i A_y`.
    pub fn raising(&self) -> OperatorMatrix {
        &self.x + &self.y.scale_complex(ci(1.0))
    }

    /// Lowering combination `A_x − i A_y`.
    pub fn lowering(&self) -> OperatorMatrix {
        &self.x - &self.y.scale_complex(ci(1.0))
    }
}

fn pauli_half(axis: Axis) -> OperatorMatrix {
    let m = match axis {
        Axis::X => DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.5), c(0.5), c(0.0)]),
        Axis::Y => DMatrix::from_row_slice(2, 2, &[c(0.0), ci(-0.5), ci(0.5), c(0.0)]),
        Axis::Z => DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)]),
    };
    OperatorMatrix(m)
}

/// Spin-1 matrices in the `|+1⟩, |0⟩, |−1⟩` basis.
pub fn spin_one(axis: Axis) -> OperatorMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let m = match axis {
        Axis::X => DMatrix::from_row_slice(3, 3, &[c(0.0), c(r), c(0.0), c(r), c(0.0), c(r), c(0.0), c(r), c(0.0)]),
        Axis::Y => {
            DMatrix::from_row_slice(3, 3, &[c(0.0), ci(-r), c(0.0), ci(r), c(0.0), ci(-r), c(0.0), ci(r), c(0.0)])
        }
        Axis::Z => DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.0), c(-1.0)])),
    };
    OperatorMatrix(m)
}

/// `½σ_axis` on `site`, identity on every other site.
pub fn embed_site_spin(register: &SpinRegister, site: usize, axis: Axis) -> Result<OperatorMatrix> {
    register.check_site(site)?;
    let local = pauli_half(axis);
    let id = OperatorMatrix::identity(2);
    let mut acc = OperatorMatrix::identity(1);
    for k in 0..register.n_sites() {
        acc = acc.kron(if k == site { &local } else { &id });
    }
    Ok(acc)
}

pub fn site_spin(register: &SpinRegister, site: usize) -> Result<VectorOperator> {
    Ok(VectorOperator {
        x: embed_site_spin(register, site, Axis::X)?,
        y: embed_site_spin(register, site, Axis::Y)?,
        z: embed_site_spin(register, site, Axis::Z)?,
    })
}

/// Total spin `Σᵢ Sᵢ`.
pub fn total_spin(register: &SpinRegister) -> Result<VectorOperator> {
    let mut total = VectorOperator::zeros(register.dimension());
    for site in 0..register.n_sites() {
        total.add_scaled(&site_spin(register, site)?, c(1.0))?;
    }
    Ok(total)
}

/// `S_i · S_j`.
pub fn spin_dot(register: &SpinRegister, i: usize, j: usize) -> Result<OperatorMatrix> {
    register.check_site(i)?;
    register.check_site(j)?;
    if i == j {
        return Err(Error::RepeatedSite(vec![i, j]));
    }
    site_spin(register, i)?.dot(&site_spin(register, j)?)
}

/// `(A × B)_axis`, with operator order preserved: `(A×B)_x = A_y B_z − A_z B_y`.
pub fn cross_component(a: &VectorOperator, b: &VectorOperator, axis: Axis) -> Result<OperatorMatrix> {
    a.x.check_same_dim(&b.x)?;
    let (p, q) = axis.cyclic_successors();
    Ok(&(a.component(p) * b.component(q)) - &(a.component(q) * b.component(p)))
}

pub fn cross(a: &VectorOperator, b: &VectorOperator) -> Result<VectorOperator> {
    Ok(VectorOperator {
        x: cross_component(a, b, Axis::X)?,
        y: cross_component(a, b, Axis::Y)?,
        z: cross_component(a, b, Axis::Z)?,
    })
}

/// `S_i · (S_j × S_k)`.
pub fn scalar_triple(register: &SpinRegister, i: usize, j: usize, k: usize) -> Result<OperatorMatrix> {
    for s in [i, j, k] {
        register.check_site(s)?;
    }
    if i == j || j == k || i == k {
        return Err(Error::RepeatedSite(vec![i, j, k]));
    }
    let jk = cross(&site_spin(register, j)?, &site_spin(register, k)?)?;
    site_spin(register, i)?.dot(&jk)
}

/// `XY − YX`.
pub fn commutator(x: &OperatorMatrix, y: &OperatorMatrix) -> Result<OperatorMatrix> {
    x.check_same_dim(y)?;
    Ok(&(x * y) - &(y * x))
}

/// Eigendata of a Hermitian operator: ascending eigenvalues, orthonormal
/// eigenvectors as columns, and groups of (near-)degenerate indices.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
    pub degeneracy_groups: Vec<Vec<usize>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, index: usize) -> StateVector {
        self.eigenvectors.column(index).into_owned()
    }

    /// Mean eigenvalue and size of each degeneracy group, ascending.
    pub fn multiplets(&self) -> Vec<(f64, usize)> {
        self.degeneracy_groups
            .iter()
            .map(|g| {
                let mean = g.iter().map(|&i| self.eigenvalues[i]).sum::<f64>() / g.len() as f64;
                (mean, g.len())
            })
            .collect()
    }

    /// Orthonormal basis of the eigenspace of degeneracy group `group`.
    pub fn group_basis(&self, group: usize) -> DMatrix<Complex64> {
        let idx = &self.degeneracy_groups[group];
        DMatrix::from_columns(&idx.iter().map(|&i| self.eigenvectors.column(i).into_owned()).collect::<Vec<_>>())
    }
}

/// Groups consecutive sorted values whose successive gaps are below `tol`.
pub fn group_sorted(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (v - values[*g.last().unwrap()]).abs() < tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Hermitian eigendecomposition. Inputs whose asymmetry exceeds
/// [`HERMITIAN_TOL`] are rejected.
pub fn hermitian_eig(x: &OperatorMatrix) -> Result<Spectrum> {
    hermitian_eig_matrix(x.matrix())
}

pub(crate) fn hermitian_eig_matrix(m: &DMatrix<Complex64>) -> Result<Spectrum> {
    let n = m.nrows();
    let asym = OperatorMatrix(m.clone()).max_asymmetry();
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian { max_asymmetry: asym });
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let columns: Vec<_> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    let eigenvectors = if n == 0 { DMatrix::zeros(0, 0) } else { DMatrix::from_columns(&columns) };
    let degeneracy_groups = group_sorted(&eigenvalues, GROUPING_TOL);
    Ok(Spectrum { eigenvalues, eigenvectors, degeneracy_groups })
}

/// Multiplies `v` by a unit phase so that its first component of largest
/// magnitude is real and positive.
pub fn fix_phase(v: &StateVector) -> StateVector {
    let max = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let pivot = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)).copied().unwrap_or(c(1.0));
    if pivot.norm() == 0.0 {
        return v.clone();
    }
    let phase = pivot.conj() / pivot.norm();
    v.map(|z| z * phase)
}

/// `|⟨a|b⟩|`.
pub fn overlap(a: &StateVector, b: &StateVector) -> f64 {
    a.dotc(b).norm()
}
