//! Closed-form expansions of `Q` in terms of `Sᵢ·Sⱼ` and `Sᵢ·(Sⱼ×S_k)`,
//! and the action of `Q` on the Lie-algebra (total-spin) bases.
//!
//! Action tables store `entries[b][a] = ⟨b|Q|a⟩`, i.e. the coefficient of
//! `|b⟩` in `Q|a⟩` read along a column, and the coefficient of `|a⟩` in
//! the expansion of `Q|b⟩` read along a row. For nonzero weights `Q` is not
//! Hermitian, so tables are not symmetric in general.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_ops::{ci, scalar_triple, spin_dot, OperatorMatrix, SpinRegister, StateVector};
use crate::states::{parallelogram as p4, triangle as t3};

use super::{build_q, triple_coefficients, YangianWeights};

const S2: f64 = 0.75;

/// `Q` assembled term by term from `Sᵢ·Sⱼ` and `Sᵢ·(Sⱼ×S_k)` for three or
/// four sites. Independent of [`build_q`], which squares `Y` directly.
pub fn q_closed_form(register: &SpinRegister, weights: &YangianWeights) -> Result<OperatorMatrix> {
    let n = register.n_sites();
    if n != 3 && n != 4 {
        return Err(Error::UnsupportedClusterSize(n));
    }
    if weights.len() != n {
        return Err(Error::WeightCount { expected: n, got: weights.len() });
    }
    let u = weights.as_slice();
    let dim = register.dimension();
    let id = OperatorMatrix::identity(dim);
    let mut d = vec![vec![OperatorMatrix::zeros(dim); n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate().skip(i + 1) {
            *slot = spin_dot(register, i, j)?;
        }
    }

    // Weight-dependent part.
    let mut q = id.scale(S2 * u.iter().map(|x| x * x).sum::<f64>());
    for i in 0..n {
        for j in i + 1..n {
            q = q + d[i][j].scale(2.0 * u[i] * u[j]);
        }
    }
    for ((i, j, k), coeff) in triple_coefficients(u) {
        if coeff != 0.0 {
            q = q + scalar_triple(register, i, j, k)?.scale_complex(ci(2.0 * coeff));
        }
    }

    let anti = |a: &OperatorMatrix, b: &OperatorMatrix| &(a * b) + &(b * a);
    let mut pair_sum = OperatorMatrix::zeros(dim);
    for (i, row) in d.iter().enumerate() {
        for dij in &row[i + 1..] {
            pair_sum = pair_sum + dij.clone();
        }
    }
    let square = &pair_sum * &pair_sum;

    // Weight-independent part, i.e. (iΣ Sᵢ×Sⱼ)².
    let bracket = if n == 3 {
        id.scale(3.0 * S2 * S2) - pair_sum + (&d[1][2] + &d[0][1]).scale(2.0 * S2) - d[0][2].scale(2.0 * S2) - square
            + anti(&d[0][1], &d[1][2]).scale(2.0)
    } else {
        let linear = &(&(&d[1][2] + &d[1][3]) + &d[2][3])
            + &(&(&(&d[2][3] - &d[0][2]) - &d[0][3])
                + &(&(&(&d[0][1] - &d[0][3]) - &d[1][3]) + &(&(&d[0][1] + &d[0][2]) + &d[1][2])));
        id.scale(6.0 * S2 * S2) - square - pair_sum
            + linear.scale(2.0 * S2)
            + anti(&d[1][2], &d[0][1]).scale(2.0)
            + anti(&d[1][3], &d[0][1]).scale(2.0)
            + anti(&d[2][3], &d[0][2]).scale(2.0)
            + anti(&d[2][3], &d[1][2]).scale(2.0)
            + (&(&d[0][2] * &d[1][3]) - &(&d[0][3] * &d[1][2])).scale(2.0)
            + (&d[0][1] * &d[2][3]).scale(6.0)
    };
    Ok(q - bracket)
}

/// One total-spin sector of an action table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionBlock {
    pub spin: f64,
    pub basis: Vec<String>,
    /// `entries[b][a] = ⟨b|Q|a⟩`.
    pub entries: Vec<Vec<f64>>,
}

impl ActionBlock {
    fn new(spin: f64, basis: &[&str], entries: Vec<Vec<f64>>) -> Self {
        Self { spin, basis: basis.iter().map(|s| s.to_string()).collect(), entries }
    }

    pub fn max_abs_diff(&self, other: &ActionBlock) -> Result<f64> {
        if self.basis.len() != other.basis.len() {
            return Err(Error::DimensionMismatch { left: self.basis.len(), right: other.basis.len() });
        }
        Ok(self
            .entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// `⟨b|Q|a⟩` over the given basis. Fails if any element has a noticeable
/// imaginary part (all reference bases are real).
pub fn action_block_numeric(q: &OperatorMatrix, basis: &[StateVector]) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::with_capacity(basis.len());
    for b in basis {
        let mut row = Vec::with_capacity(basis.len());
        for a in basis {
            let z = q.matrix_element(b, a);
            if z.im.abs() > 1e-10 {
                return Err(Error::NumericalCheck(format!("action element has imaginary part {:.3e}", z.im)));
            }
            row.push(z.re);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn weights3(u: &[f64]) -> Result<[f64; 3]> {
    u.try_into().map_err(|_| Error::WeightCount { expected: 3, got: u.len() })
}

fn weights4(u: &[f64]) -> Result<[f64; 4]> {
    u.try_into().map_err(|_| Error::WeightCount { expected: 4, got: u.len() })
}

const TRIANGLE_DOUBLET: [&str; 2] = ["phi'", "phi"];
const TRIPLET: [&str; 3] = ["phi1", "phi2", "phi3"];
const SINGLET: [&str; 2] = ["phi1_00", "phi2_00"];

/// Three-spin table with the doublet block in the order `(φ', φ)`.
pub fn triangle_table(u: &[f64]) -> Result<Vec<ActionBlock>> {
    let [u1, u2, u3] = weights3(u)?;
    let r3 = 3f64.sqrt();
    let sq = u1 * u1 + u2 * u2 + u3 * u3;
    let quartet = 0.75 * sq + 0.5 * (u1 * u2 + u2 * u3 + u1 * u3) - 1.0;
    let pp = 0.75 * sq + 0.5 * u1 * u2 - u2 * u3 - u1 * u3 - 1.75;
    let pp_p = -r3 / 2.0 * (u1 - u2 + 1.0) * (u3 + 1.0);
    let p_pp = -r3 / 2.0 * (u1 - u2 - 1.0) * (u3 - 1.0);
    let p = 0.75 * (u1 - u2).powi(2) + 0.75 * u3 * u3 - 0.75;
    Ok(vec![
        ActionBlock::new(1.5, &["phi_3/2"], vec![vec![quartet]]),
        ActionBlock::new(0.5, &TRIANGLE_DOUBLET, vec![vec![pp, pp_p], vec![p_pp, p]]),
    ])
}

pub fn triangle_table_numeric(u: &[f64], m: f64) -> Result<Vec<ActionBlock>> {
    let register = SpinRegister::new(3)?;
    let q = build_q(&register, &YangianWeights::new(weights3(u)?.to_vec()))?;
    let quartet = action_block_numeric(&q, &[t3::quartet(m)?])?;
    let doublet = action_block_numeric(&q, &[t3::doublet_prime(m)?, t3::doublet(m)?])?;
    Ok(vec![ActionBlock::new(1.5, &["phi_3/2"], quartet), ActionBlock::new(0.5, &TRIANGLE_DOUBLET, doublet)])
}

struct FourSiteTerms {
    quintet: f64,
    d11: f64,
    d22: f64,
    d33: f64,
    o12: f64,
    o13: f64,
    o23: f64,
    e11: f64,
    e12: f64,
    e22: f64,
}

fn four_site_terms(u: [f64; 4]) -> FourSiteTerms {
    let [u1, u2, u3, u4] = u;
    let r2 = 2f64.sqrt();
    let r3 = 3f64.sqrt();
    let sum: f64 = u.iter().sum();
    let sq: f64 = u.iter().map(|x| x * x).sum();
    let skew = u1 + u2 - u3 - u4;
    FourSiteTerms {
        quintet: 0.375 * sum * sum + 0.25 * (u1 - u2).powi(2) - 2.5 + 0.125 * skew * skew + 0.25 * (u3 - u4).powi(2),
        d11: 0.5 * sq - 4.5 + 0.25 * skew * skew,
        d22: 0.5 * (u3 + u4).powi(2) + 0.25 * (u3 - u4).powi(2) + 0.75 * (u1 - u2).powi(2) - 1.0,
        d33: 0.5 * (u1 + u2).powi(2) + 0.25 * (u1 - u2).powi(2) + 0.75 * (u3 - u4).powi(2) - 1.0,
        o12: -(u1 - u2 + 1.0) * (u3 + u4 + 2.0) / r2,
        o13: (u3 - u4 + 1.0) * (u1 - u2 - 2.0) / r2,
        o23: 0.5 * (u1 - u2 - 1.0) * (u3 - u4 + 1.0),
        e11: 0.5 * (skew - 2.0) * (skew + 2.0) + 0.25 * ((u1 - u2).powi(2) + (u3 - u4).powi(2) - 2.0),
        e12: -r3 / 2.0 * (u1 - u2 + 1.0) * (u3 - u4 + 1.0),
        e22: 0.75 * ((u1 - u2).powi(2) + (u3 - u4).powi(2) - 2.0),
    }
}

/// Four-spin table exactly as printed: symmetric, with the `(φ¹, φ³)`
/// element carrying `(u₁−u₂−2)`. Agrees with `Q` only at `u = 0`.
pub fn parallelogram_table_printed(u: &[f64]) -> Result<Vec<ActionBlock>> {
    let t = four_site_terms(weights4(u)?);
    Ok(vec![
        ActionBlock::new(2.0, &["phi_2"], vec![vec![t.quintet]]),
        ActionBlock::new(
            1.0,
            &TRIPLET,
            vec![vec![t.d11, t.o12, t.o13], vec![t.o12, t.d22, t.o23], vec![t.o13, t.o23, t.d33]],
        ),
        ActionBlock::new(0.0, &SINGLET, vec![vec![t.e11, t.e12], vec![t.e12, t.e22]]),
    ])
}

/// Four-spin table valid for all weights. The diagonal and upper entries
/// are the printed ones except `⟨φ¹|Q|φ³⟩`, which has `(u₁+u₂−2)`; the
/// lower entries follow from flipping the sign of the `±1`, `±2` shifts.
pub fn parallelogram_table(u: &[f64]) -> Result<Vec<ActionBlock>> {
    let w = weights4(u)?;
    let [u1, u2, u3, u4] = w;
    let t = four_site_terms(w);
    let r2 = 2f64.sqrt();
    let r3 = 3f64.sqrt();
    let o13 = (u3 - u4 + 1.0) * (u1 + u2 - 2.0) / r2;
    let o31 = (u3 - u4 - 1.0) * (u1 + u2 + 2.0) / r2;
    let o21 = -(u1 - u2 - 1.0) * (u3 + u4 - 2.0) / r2;
    let o32 = 0.5 * (u1 - u2 + 1.0) * (u3 - u4 - 1.0);
    let e21 = -r3 / 2.0 * (u1 - u2 - 1.0) * (u3 - u4 - 1.0);
    Ok(vec![
        ActionBlock::new(2.0, &["phi_2"], vec![vec![t.quintet]]),
        ActionBlock::new(1.0, &TRIPLET, vec![vec![t.d11, t.o12, o13], vec![o21, t.d22, t.o23], vec![o31, o32, t.d33]]),
        ActionBlock::new(0.0, &SINGLET, vec![vec![t.e11, t.e12], vec![e21, t.e22]]),
    ])
}

/// Four-spin table from `Q` itself, triplets evaluated in sector `m`.
pub fn parallelogram_table_numeric(u: &[f64], m: f64) -> Result<Vec<ActionBlock>> {
    let register = SpinRegister::new(4)?;
    let q = build_q(&register, &YangianWeights::new(weights4(u)?.to_vec()))?;
    let quintet = action_block_numeric(&q, &[p4::quintet(m)?])?;
    let triplet = action_block_numeric(
        &q,
        &[
            p4::lie_triplet(p4::Triplet::First, m)?,
            p4::lie_triplet(p4::Triplet::Second, m)?,
            p4::lie_triplet(p4::Triplet::Third, m)?,
        ],
    )?;
    let singlet = action_block_numeric(&q, &[p4::lie_singlet_first(), p4::lie_singlet_second()])?;
    Ok(vec![
        ActionBlock::new(2.0, &["phi_2"], quintet),
        ActionBlock::new(1.0, &TRIPLET, triplet),
        ActionBlock::new(0.0, &SINGLET, singlet),
    ])
}

/// Largest entrywise difference between two tables with the same layout.
pub fn table_diff(a: &[ActionBlock], b: &[ActionBlock]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
    }
    a.iter().zip(b).try_fold(0.0f64, |acc, (x, y)| Ok(acc.max(x.max_abs_diff(y)?)))
}

/// Entries of `printed` that disagree with `reference` by more than `tol`,
/// as `(spin, row label, column label, printed, reference)`.
pub fn table_mismatches(
    printed: &[ActionBlock],
    reference: &[ActionBlock],
    tol: f64,
) -> Vec<(f64, String, String, f64, f64)> {
    let mut out = Vec::new();
    for (p, r) in printed.iter().zip(reference) {
        for (i, (prow, rrow)) in p.entries.iter().zip(&r.entries).enumerate() {
            for (j, (a, b)) in prow.iter().zip(rrow).enumerate() {
                if (a - b).abs() > tol {
                    out.push((p.spin, p.basis[i].clone(), p.basis[j].clone(), *a, *b));
                }
            }
        }
    }
    out
}
