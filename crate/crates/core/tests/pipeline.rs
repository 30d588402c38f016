//! End-to-end flows through the public API.

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use spincluster::dynamics::{equilibrium_populations, integrate_magnetization};
use spincluster::observables::{local_moments, moment_report};
use spincluster::spectra::{classify_ground, parallelogram_hamiltonian, parallelogram_levels, E1_3};
use spincluster::spin_ops::hermitian_eig;
use spincluster::symmetry::{commutator_norm, default_commutant, heisenberg_hamiltonian};
use spincluster::yangian::{build_q, q_joint_labels};
use spincluster::{
    CoefficientMode, FieldProfile, InitialCondition, LzsMode, RateParams, SpinRegister, StateVector, YangianWeights,
};

#[test]
fn ground_state_from_diagonalization_carries_the_predicted_moments() {
    let reg = SpinRegister::new(4).unwrap();
    let spec = hermitian_eig(&parallelogram_hamiltonian(1.0, -3.0).unwrap()).unwrap();
    assert_eq!(spec.multiplets()[0].1, 3);
    // pick the m = −1 member of the ground triplet by projecting out S_z
    let ground = spec.group_basis(0);
    let sz = spincluster::spin_ops::total_spin(&reg).unwrap().z;
    let block = sz.restrict(&ground);
    let local = nalgebra::SymmetricEigen::new(block.map(|z| z.re));
    let k = local.eigenvalues.imin();
    let coeffs = local.eigenvectors.column(k).map(|x| num_complex::Complex64::new(x, 0.0));
    let state = StateVector::from_vec((&ground * coeffs).iter().copied().collect());
    let report = moment_report(&reg, "ground", &state, 2.0).unwrap();
    assert_eq!((report.spin, report.m), (1.0, -1.0));
    for (got, want) in report.moments.iter().zip([0.9, 0.1, 0.1, 0.9]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-10);
    }
}

#[test]
fn commutant_members_share_eigenvectors_with_q() {
    let reg = SpinRegister::new(4).unwrap();
    let w = YangianWeights::zeros(4);
    let labels = q_joint_labels(&reg, &w).unwrap();
    let family = default_commutant(4).unwrap();
    let h = heisenberg_hamiltonian(&reg, &family.member(&[0.7, -1.1, 0.4]).unwrap()).unwrap();
    // nondegenerate joint labels are eigenvectors of every commuting H
    for s in labels.states.iter().filter(|s| !s.degenerate) {
        let v = s.state();
        let e = h.expectation(&v).re;
        assert!((h.apply(&v) - v.scale(e)).norm() < 1e-9);
    }
}

#[test]
fn equilibrium_start_stays_put_under_constant_field() {
    let params = RateParams::default();
    let profile = FieldProfile::constant(0.8, 0.0, 3.0);
    let traj = integrate_magnetization(
        &params,
        &profile,
        InitialCondition::Equilibrium,
        3000,
        LzsMode::Off,
        CoefficientMode::Derived,
    )
    .unwrap();
    let (p, z, m) = equilibrium_populations(0.8, &params).unwrap();
    for row in &traj.rows {
        assert_abs_diff_eq!(row.rho00, z, epsilon = 1e-10);
        assert_abs_diff_eq!(row.n, m - p, epsilon = 1e-10);
    }
}

#[test]
fn polarized_start_relaxes_toward_equilibrium() {
    let params = RateParams { a: 5.0, ..Default::default() };
    let profile = FieldProfile::constant(1.0, 0.0, 20.0);
    let traj = integrate_magnetization(
        &params,
        &profile,
        InitialCondition::PolarizedUp,
        20_000,
        LzsMode::Off,
        CoefficientMode::Derived,
    )
    .unwrap();
    let (p, z, m) = equilibrium_populations(1.0, &params).unwrap();
    let end = traj.last();
    assert_abs_diff_eq!(end.rho00, z, epsilon = 1e-6);
    assert_abs_diff_eq!(end.n, m - p, epsilon = 1e-6);
    assert!(traj.rows.iter().all(|r| r.m_norm.abs() <= 1.0 + 1e-12));
}

#[test]
fn psi3_is_the_ground_state_exactly_where_classified() {
    let reg = SpinRegister::new(4).unwrap();
    let psi3 = spincluster::states::parallelogram::psi3(0.0).unwrap();
    for (a12, a13) in [(1.0, -3.0), (0.5, -1.5), (2.0, -4.5)] {
        let point = classify_ground(a12, a13, None).unwrap();
        assert_eq!(point.ground_labels, vec![E1_3.to_string()]);
        let h = parallelogram_hamiltonian(a12, a13).unwrap();
        assert_abs_diff_eq!(h.expectation(&psi3).re, point.ground_energy, epsilon = 1e-12);
    }
    let mu = local_moments(&reg, &psi3, 2.0).unwrap();
    assert_abs_diff_eq!(mu.total(), 0.0, epsilon = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_commutant_member_commutes_with_q(coords in prop::collection::vec(-3.0f64..3.0, 3)) {
        let reg = SpinRegister::new(4).unwrap();
        let q = build_q(&reg, &YangianWeights::zeros(4)).unwrap();
        let family = default_commutant(4).unwrap();
        let h = heisenberg_hamiltonian(&reg, &family.member(&coords).unwrap()).unwrap();
        prop_assert!(commutator_norm(&q, &h).unwrap() < 1e-9);
    }

    #[test]
    fn ground_labels_are_scale_invariant(a12 in -5.0f64..5.0, a13 in -5.0f64..5.0, c in 0.1f64..10.0) {
        let a = classify_ground(a12, a13, None).unwrap();
        let b = classify_ground(c * a12, c * a13, None).unwrap();
        prop_assert_eq!(a.ground_labels, b.ground_labels);
    }

    #[test]
    fn closed_form_levels_match_diagonalization(a12 in -10.0f64..10.0, a13 in -10.0f64..10.0) {
        let h = parallelogram_hamiltonian(a12, a13).unwrap();
        prop_assert!(parallelogram_levels(a12, a13).max_deviation(&h).unwrap() < 1e-10);
    }
}
