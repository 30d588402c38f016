//! Closed-form spectra of the symmetric triangle and parallelogram,
//! ground-state classification and phase maps.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_ops::{hermitian_eig, OperatorMatrix, SpinRegister};
use crate::states::parallelogram as p4;
use crate::symmetry::{constrained_couplings_parallelogram, constrained_couplings_triangle, heisenberg_hamiltonian};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    pub label: String,
    pub spin: f64,
    pub energy: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSet {
    pub levels: Vec<Level>,
}

impl LevelSet {
    fn from(rows: &[(&str, f64, f64)]) -> Self {
        let levels = rows
            .iter()
            .map(|&(label, spin, energy)| Level {
                label: label.to_string(),
                spin,
                energy,
                multiplicity: (2.0 * spin + 1.0).round() as usize,
            })
            .collect();
        Self { levels }
    }

    pub fn total_multiplicity(&self) -> usize {
        self.levels.iter().map(|l| l.multiplicity).sum()
    }

    /// `Σ E·g`, zero for a traceless Hamiltonian.
    pub fn weighted_sum(&self) -> f64 {
        self.levels.iter().map(|l| l.energy * l.multiplicity as f64).sum()
    }

    pub fn get(&self, label: &str) -> Option<&Level> {
        self.levels.iter().find(|l| l.label == label)
    }

    /// Every eigenvalue repeated by multiplicity, ascending.
    pub fn expanded(&self) -> Vec<f64> {
        let mut out: Vec<f64> =
            self.levels.iter().flat_map(|l| std::iter::repeat_n(l.energy, l.multiplicity)).collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// Largest gap between the closed forms and the eigenvalues of `h`.
    pub fn max_deviation(&self, h: &OperatorMatrix) -> Result<f64> {
        let numeric = hermitian_eig(h)?.eigenvalues;
        let closed = self.expanded();
        if numeric.len() != closed.len() {
            return Err(Error::DimensionMismatch { left: closed.len(), right: numeric.len() });
        }
        Ok(numeric.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

pub const ALPHA: &str = "alpha";
pub const BETA: &str = "beta";
pub const QUARTET: &str = "quartet";

pub const E2: &str = "E2";
pub const E1_1: &str = "E1^1";
pub const E1_2: &str = "E1^2";
pub const E1_3: &str = "E1^3";
pub const E0_PLUS: &str = "E0^+";
pub const E0_MINUS: &str = "E0^-";

/// Triangle with `J₁₂ = J₂₃`.
pub fn triangle_levels(j12: f64, j13: f64) -> LevelSet {
    LevelSet::from(&[(ALPHA, 0.5, j13 / 4.0 - j12), (BETA, 0.5, -0.75 * j13), (QUARTET, 1.5, j12 / 2.0 + j13 / 4.0)])
}

/// Parallelogram with `a₃₄ = a₁₂`, `a₂₄ = a₁₃`.
pub fn parallelogram_levels(a12: f64, a13: f64) -> LevelSet {
    LevelSet::from(&[
        (E2, 2.0, a12 + a13 / 2.0),
        (E1_1, 1.0, -a13 / 2.0),
        (E1_2, 1.0, a12 / 3.0 - 5.0 * a13 / 6.0),
        (E1_3, 1.0, -4.0 * a12 / 3.0 + 5.0 * a13 / 6.0),
        (E0_PLUS, 0.0, -2.0 * a12 + a13 / 2.0),
        (E0_MINUS, 0.0, -1.5 * a13),
    ])
}

pub fn triangle_hamiltonian(j12: f64, j13: f64) -> Result<OperatorMatrix> {
    heisenberg_hamiltonian(&SpinRegister::new(3)?, &constrained_couplings_triangle(j12, j13)?)
}

pub fn parallelogram_hamiltonian(a12: f64, a13: f64) -> Result<OperatorMatrix> {
    heisenberg_hamiltonian(&SpinRegister::new(4)?, &constrained_couplings_parallelogram(a12, a12, a13)?)
}

/// Total spin of the ground multiplet, or a marker when tied levels carry
/// different spins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroundSpin {
    Definite(f64),
    Mixed(MixedMarker),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MixedMarker {
    #[serde(rename = "degenerate-mixed")]
    DegenerateMixed,
}

impl fmt::Display for GroundSpin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundSpin::Definite(s) => write!(f, "{s}"),
            GroundSpin::Mixed(_) => f.write_str("degenerate-mixed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasePoint {
    pub a12: f64,
    pub a13: f64,
    pub ground_labels: Vec<String>,
    pub ground_s: GroundSpin,
    pub ground_energy: f64,
}

/// Default tie tolerance: `1e-9 · max|E|`.
pub fn default_tie_tol(levels: &LevelSet) -> f64 {
    1e-9 * levels.levels.iter().map(|l| l.energy.abs()).fold(0.0, f64::max)
}

pub fn classify_levels(levels: &LevelSet, tie_tol: f64) -> Result<(Vec<String>, GroundSpin, f64)> {
    if !(tie_tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tie tolerance {tie_tol} must be nonnegative")));
    }
    let min = levels.levels.iter().map(|l| l.energy).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::InvalidParameter("level set is empty or non-finite".into()));
    }
    let ground: Vec<&Level> = levels.levels.iter().filter(|l| l.energy - min <= tie_tol).collect();
    let spin = if ground.iter().all(|l| l.spin == ground[0].spin) {
        GroundSpin::Definite(ground[0].spin)
    } else {
        GroundSpin::Mixed(MixedMarker::DegenerateMixed)
    };
    Ok((ground.iter().map(|l| l.label.clone()).collect(), spin, min))
}

/// Ground level(s) of the parallelogram. `tie_tol = None` uses
/// [`default_tie_tol`].
pub fn classify_ground(a12: f64, a13: f64, tie_tol: Option<f64>) -> Result<PhasePoint> {
    if !a12.is_finite() || !a13.is_finite() {
        return Err(Error::InvalidParameter("couplings must be finite".into()));
    }
    let levels = parallelogram_levels(a12, a13);
    let tol = tie_tol.unwrap_or_else(|| default_tie_tol(&levels));
    if tol <= 0.0 && tie_tol.is_some() {
        return Err(Error::InvalidParameter(format!("tie tolerance {tol} must be positive")));
    }
    let (ground_labels, ground_s, ground_energy) = classify_levels(&levels, tol)?;
    Ok(PhasePoint { a12, a13, ground_labels, ground_s, ground_energy })
}

fn axis(range: (f64, f64), n_grid: usize) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::InvalidParameter(format!("invalid range [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (n_grid - 1) as f64;
    Ok((0..n_grid).map(|k| if k + 1 == n_grid { hi } else { lo + step * k as f64 }).collect())
}

/// Ground classification on an inclusive grid, `a₁₂` outer, `a₁₃` inner.
/// A range with equal ends contributes a single value.
pub fn phase_map(a12_range: (f64, f64), a13_range: (f64, f64), n_grid: usize) -> Result<Vec<PhasePoint>> {
    if n_grid < 2 {
        return Err(Error::InvalidParameter(format!("n_grid = {n_grid}, need at least 2")));
    }
    let xs = axis(a12_range, n_grid)?;
    let ys = axis(a13_range, n_grid)?;
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for &a12 in &xs {
        for &a13 in &ys {
            out.push(classify_ground(a12, a13, None)?);
        }
    }
    Ok(out)
}

pub const PHASE_MAP_HEADER: &str = "a12,a13,ground_labels,ground_S,ground_energy";

pub fn phase_map_csv(points: &[PhasePoint]) -> String {
    let mut s = String::from(PHASE_MAP_HEADER);
    s.push('\n');
    for p in points {
        s.push_str(&format!(
            "{:.16e},{:.16e},{},{},{:.16e}\n",
            p.a12,
            p.a13,
            p.ground_labels.join(";"),
            p.ground_s,
            p.ground_energy
        ));
    }
    s
}

/// The printed level chain `E³ < E⁺ < E₂ < E⁻ < E¹ < E²`.
pub const PRINTED_CHAIN: [&str; 6] = [E1_3, E0_PLUS, E2, E0_MINUS, E1_1, E1_2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingReport {
    pub a12: f64,
    pub a13: f64,
    /// Labels sorted by energy.
    pub actual: Vec<(String, f64)>,
    pub printed_chain: Vec<String>,
    /// Adjacent pairs of the printed chain that are out of order.
    pub violations: Vec<(String, String)>,
    pub ground_matches: bool,
}

pub fn ordering_report(a12: f64, a13: f64) -> OrderingReport {
    let levels = parallelogram_levels(a12, a13);
    let mut actual: Vec<(String, f64)> = levels.levels.iter().map(|l| (l.label.clone(), l.energy)).collect();
    actual.sort_by(|a, b| a.1.total_cmp(&b.1));
    let energy = |label: &str| levels.get(label).map(|l| l.energy).unwrap_or(f64::NAN);
    let violations = PRINTED_CHAIN
        .windows(2)
        .filter(|w| !(energy(w[0]) < energy(w[1])))
        .map(|w| (w[0].to_string(), w[1].to_string()))
        .collect();
    OrderingReport {
        a12,
        a13,
        ground_matches: actual[0].0 == PRINTED_CHAIN[0] && actual[0].1 < actual[1].1,
        actual,
        printed_chain: PRINTED_CHAIN.iter().map(|s| s.to_string()).collect(),
        violations,
    }
}

/// Overlap of `|ψ³_{1,m}⟩` with the numeric ground eigenspace of the
/// parallelogram, per `m`. Fails unless the ground space is threefold.
pub fn ground_psi3_overlaps(a12: f64, a13: f64) -> Result<Vec<(f64, f64)>> {
    let spec = hermitian_eig(&parallelogram_hamiltonian(a12, a13)?)?;
    let ground = spec.group_basis(0);
    if ground.ncols() != 3 {
        return Err(Error::NumericalCheck(format!("ground space has dimension {}, expected 3", ground.ncols())));
    }
    [-1.0, 0.0, 1.0]
        .iter()
        .map(|&m| {
            let v = p4::psi3(m)?;
            Ok((m, (ground.adjoint() * &v).norm()))
        })
        .collect()
}
