//! Named reference states of the 3- and 4-spin clusters.
//!
//! Lowest-`m` members are written out as product-state superpositions;
//! the other members of each multiplet are generated with the raising
//! operator `S⁺` so relative phases are consistent across `m` sectors.
//! Where a printed vector is not an eigenvector of `S²` its sign typo is
//! corrected (the doublet `|φ_{1/2,m}⟩` of the triangle).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_ops::{total_spin, SpinRegister, StateVector};

/// Raise `v` by `steps` units of `S_z` with `S⁺`, renormalizing each time.
pub fn raise(register: &SpinRegister, v: &StateVector, steps: usize) -> Result<StateVector> {
    let plus = total_spin(register)?.raising();
    let mut out = v.clone();
    for _ in 0..steps {
        out = plus.apply(&out);
        let norm = out.norm();
        if norm < 1e-12 {
            return Err(Error::InvalidParameter("raising past the top of the multiplet".into()));
        }
        out.unscale_mut(norm);
    }
    Ok(out)
}

/// Number of `S⁺` applications from `m_low` to `m`, checked.
fn steps_between(m_low: f64, m: f64, s: f64) -> Result<usize> {
    let steps = m - m_low;
    if m > s + 1e-12 || steps < -1e-12 || (steps - steps.round()).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("m = {m} is not a member of the spin-{s} multiplet")));
    }
    Ok(steps.round() as usize)
}

fn register(n: usize) -> SpinRegister {
    SpinRegister::new(n).expect("3 and 4 are valid register sizes")
}

pub mod triangle {
    //! Three spins.

    use super::*;

    /// `|φ_α⟩` with `Q = −1/4`, written at `S = 1/2, m = −1/2`.
    pub fn phi_alpha() -> StateVector {
        register(3).superposition(&[(-1.0, "udd"), (-1.0, "ddu"), (2.0, "dud")]).unwrap()
    }

    /// `|φ_β⟩` with `Q = −9/4`, written at `S = 1/2, m = −1/2`.
    pub fn phi_beta() -> StateVector {
        register(3).superposition(&[(1.0, "udd"), (-1.0, "ddu")]).unwrap()
    }

    /// `|φ_{3/2,m}⟩`.
    pub fn quartet(m: f64) -> Result<StateVector> {
        let r = register(3);
        let low = r.superposition(&[(1.0, "ddd")])?;
        raise(&r, &low, steps_between(-1.5, m, 1.5)?)
    }

    /// `|φ'_{1/2,m}⟩`.
    pub fn doublet_prime(m: f64) -> Result<StateVector> {
        let r = register(3);
        let low = r.superposition(&[(1.0, "udd"), (1.0, "dud"), (-2.0, "ddu")])?;
        raise(&r, &low, steps_between(-0.5, m, 0.5)?)
    }

    /// `|φ_{1/2,m}⟩`, the antisymmetric (sites 1,2) doublet.
    pub fn doublet(m: f64) -> Result<StateVector> {
        let r = register(3);
        let low = r.superposition(&[(1.0, "udd"), (-1.0, "dud")])?;
        raise(&r, &low, steps_between(-0.5, m, 0.5)?)
    }
}

pub mod parallelogram {
    //! Four spins.

    use super::*;

    /// Lie-algebra label of the three `S = 1` basis vectors `|φ^k_{1,m}⟩`.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
    pub enum Triplet {
        First,
        Second,
        Third,
    }

    /// `|φ_{2,m}⟩`, which is also the `Q` eigenvector `|ψ_{2,m}⟩`.
    pub fn quintet(m: f64) -> Result<StateVector> {
        let r = register(4);
        let low = r.superposition(&[(1.0, "dddd")])?;
        raise(&r, &low, steps_between(-2.0, m, 2.0)?)
    }

    /// Lie-algebra basis `|φ^k_{1,m}⟩`.
    pub fn lie_triplet(k: Triplet, m: f64) -> Result<StateVector> {
        let r = register(4);
        let low = match k {
            Triplet::First => r.superposition(&[(1.0, "uddd"), (1.0, "dudd"), (-1.0, "ddud"), (-1.0, "dddu")])?,
            Triplet::Second => r.superposition(&[(1.0, "uddd"), (-1.0, "dudd")])?,
            Triplet::Third => r.superposition(&[(1.0, "ddud"), (-1.0, "dddu")])?,
        };
        raise(&r, &low, steps_between(-1.0, m, 1.0)?)
    }

    /// Lie-algebra singlets `|φ¹_{0,0}⟩`, `|φ²_{0,0}⟩`.
    pub fn lie_singlet_first() -> StateVector {
        register(4)
            .superposition(&[
                (2.0, "uudd"),
                (2.0, "dduu"),
                (-1.0, "udud"),
                (-1.0, "dudu"),
                (-1.0, "uddu"),
                (-1.0, "duud"),
            ])
            .unwrap()
    }

    pub fn lie_singlet_second() -> StateVector {
        register(4).superposition(&[(1.0, "udud"), (1.0, "dudu"), (-1.0, "uddu"), (-1.0, "duud")]).unwrap()
    }

    /// `|ψ^1_{1,m}⟩`, `Q = −1/2`.
    pub fn psi1(m: f64) -> Result<StateVector> {
        let r = register(4);
        let low = r.superposition(&[(-1.0, "uddd"), (1.0, "dudd"), (1.0, "ddud"), (-1.0, "dddu")])?;
        raise(&r, &low, steps_between(-1.0, m, 1.0)?)
    }

    /// `|ψ^2_{1,m}⟩`, `Q = −11/2`.
    pub fn psi2(m: f64) -> Result<StateVector> {
        let r = register(4);
        let low = r.superposition(&[(3.0, "uddd"), (1.0, "dudd"), (-1.0, "ddud"), (-3.0, "dddu")])?;
        raise(&r, &low, steps_between(-1.0, m, 1.0)?)
    }

    /// `|ψ^3_{1,m}⟩`, `Q = −1/2`; the `S = 1` ground state of the
    /// parallelogram when `a₁₂ > 0` and `a₁₃ < −2a₁₂`.
    pub fn psi3(m: f64) -> Result<StateVector> {
        let r = register(4);
        let low = r.superposition(&[(1.0, "uddd"), (-3.0, "dudd"), (3.0, "ddud"), (-1.0, "dddu")])?;
        raise(&r, &low, steps_between(-1.0, m, 1.0)?)
    }

    /// `|ψ^+_{0,0}⟩`, `Q = −1`.
    pub fn psi_plus() -> StateVector {
        register(4)
            .superposition(&[
                (1.0, "uudd"),
                (1.0, "dduu"),
                (-2.0, "udud"),
                (-2.0, "dudu"),
                (1.0, "uddu"),
                (1.0, "duud"),
            ])
            .unwrap()
    }

    /// `|ψ^-_{0,0}⟩`, `Q = −3`.
    pub fn psi_minus() -> StateVector {
        register(4).superposition(&[(-1.0, "uudd"), (-1.0, "dduu"), (1.0, "uddu"), (1.0, "duud")]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::parallelogram::{self as p4, Triplet};
    use super::triangle as t3;
    use super::*;
    use crate::spin_ops::overlap;

    fn s2_and_sz(n: usize, v: &StateVector) -> (f64, f64, f64) {
        let total = total_spin(&register(n)).unwrap();
        let s2 = total.squared();
        let x = s2.expectation(v).re;
        let m = total.z.expectation(v).re;
        let resid = (s2.apply(v) - v.scale(x)).norm();
        (x, m, resid)
    }

    #[test]
    fn triangle_lie_basis_is_orthonormal_spin_basis() {
        let mut all = Vec::new();
        for m in [-1.5, -0.5, 0.5, 1.5] {
            let v = t3::quartet(m).unwrap();
            let (s2, mz, r) = s2_and_sz(3, &v);
            assert!((s2 - 3.75).abs() < 1e-12 && (mz - m).abs() < 1e-12 && r < 1e-12);
            all.push(v);
        }
        for m in [-0.5, 0.5] {
            for v in [t3::doublet_prime(m).unwrap(), t3::doublet(m).unwrap()] {
                let (s2, mz, r) = s2_and_sz(3, &v);
                assert!((s2 - 0.75).abs() < 1e-12 && (mz - m).abs() < 1e-12 && r < 1e-12);
                all.push(v);
            }
        }
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((overlap(a, b) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn four_spin_states_have_expected_spin_labels() {
        for m in [-1.0, 0.0, 1.0] {
            for k in [Triplet::First, Triplet::Second, Triplet::Third] {
                let (s2, mz, r) = s2_and_sz(4, &p4::lie_triplet(k, m).unwrap());
                assert!((s2 - 2.0).abs() < 1e-12 && (mz - m).abs() < 1e-12 && r < 1e-12);
            }
            for v in [p4::psi1(m).unwrap(), p4::psi2(m).unwrap(), p4::psi3(m).unwrap()] {
                let (s2, mz, r) = s2_and_sz(4, &v);
                assert!((s2 - 2.0).abs() < 1e-12 && (mz - m).abs() < 1e-12 && r < 1e-12);
            }
        }
        for v in [p4::psi_plus(), p4::psi_minus(), p4::lie_singlet_first(), p4::lie_singlet_second()] {
            let (s2, _, r) = s2_and_sz(4, &v);
            assert!(s2.abs() < 1e-12 && r < 1e-12);
        }
        let (s2, mz, _) = s2_and_sz(4, &p4::quintet(2.0).unwrap());
        assert!((s2 - 6.0).abs() < 1e-12 && (mz - 2.0).abs() < 1e-12);
    }

    #[test]
    fn raising_out_of_multiplet_is_an_error() {
        assert!(p4::psi3(2.0).is_err());
        assert!(p4::psi3(-0.5).is_err());
        assert!(t3::doublet(1.5).is_err());
    }

    #[test]
    fn psi_states_are_orthonormal() {
        let v = [p4::psi1(-1.0).unwrap(), p4::psi2(-1.0).unwrap(), p4::psi3(-1.0).unwrap(), p4::quintet(-1.0).unwrap()];
        for i in 0..v.len() {
            for j in 0..v.len() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((overlap(&v[i], &v[j]) - expected).abs() < 1e-12);
            }
        }
        assert!(overlap(&p4::psi_plus(), &p4::psi_minus()) < 1e-12);
    }
}
