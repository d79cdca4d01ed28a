use proptest::prelude::*;

use selfenergy_core::closedform::{drude_midpoint_shift, pc_shift, pc_shift_derivative, static_force};
use selfenergy_core::experiment::{delta_b, delta_b_static, m_ratio, SurfaceForces};
use selfenergy_core::quantities::constants::SPEED_OF_LIGHT;
use selfenergy_core::selfenergy::{dynamical_force, mass_shift, self_energy};
use selfenergy_core::{CavityConfig, DielectricModel, ElectronState, ShiftSettings};

fn shift(model: &DielectricModel, d: f64, zeta: f64, e: &ElectronState) -> f64 {
    let c = CavityConfig::from_zeta(d, zeta).unwrap();
    self_energy(model, &c, e, &ShiftSettings::default()).unwrap().value
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn shift_is_linear_in_parallel_momentum() {
    let d = 1e-5;
    for m in [DielectricModel::gold(), DielectricModel::gold_plasma()] {
        let a = shift(&m, d, 0.3, &ElectronState::from_beta(0.01).unwrap());
        let b = shift(&m, d, 0.3, &ElectronState::from_beta(0.03).unwrap());
        assert!(rel(b, 9.0 * a) < 1e-12);
    }
}

#[test]
fn stiff_plasma_approaches_the_conductor() {
    let e = ElectronState::from_beta(0.01).unwrap();
    let d = 1e-5;
    let mut last = f64::INFINITY;
    for wp in [1e16, 1e17, 1e18] {
        let m = DielectricModel::plasma(wp).unwrap();
        let gap = rel(shift(&m, d, 0.3, &e), pc_shift(0.3, d, &e).unwrap());
        assert!(gap < last, "{wp}: {gap}");
        last = gap;
    }
    assert!(last < 1e-2, "{last}");
}

#[test]
fn force_is_minus_the_shift_gradient() {
    let e = ElectronState::from_beta(0.02).unwrap();
    let d = 1e-5;
    for m in [DielectricModel::gold(), DielectricModel::gold_plasma()] {
        let c = CavityConfig::from_zeta(d, 0.25).unwrap();
        let f = dynamical_force(&m, &c, &e, &ShiftSettings::default()).unwrap().value;
        let central = |h: f64| -(shift(&m, d, 0.25 + h, &e) - shift(&m, d, 0.25 - h, &e)) / (2.0 * h * d);
        let fd = (4.0 * central(1e-3) - central(2e-3)) / 3.0;
        assert!(rel(f, fd) < 1e-5, "{f} {fd}");
    }
    let c = CavityConfig::from_zeta(d, 0.25).unwrap();
    let f = dynamical_force(&DielectricModel::PerfectConductor, &c, &e, &Default::default()).unwrap().value;
    assert!(rel(f, -pc_shift_derivative(0.25, d, &e).unwrap()) < 1e-8);
}

#[test]
fn mass_shift_opposes_the_energy_shift() {
    let e = ElectronState::from_beta(0.01).unwrap();
    let de = shift(&DielectricModel::gold(), 1e-5, 0.5, &e);
    let dm = mass_shift(de, &e).unwrap();
    // p^2 = (m beta c)^2, so dm = -2 dE / (beta c)^2
    let want = -2.0 * de / (0.01f64 * SPEED_OF_LIGHT).powi(2);
    assert!(rel(dm, want) < 1e-12, "{dm} {want}");
    assert!(mass_shift(de, &ElectronState::new(0.0, 0.0).unwrap()).is_err());
}

#[test]
fn field_modulation_decomposes() {
    let s = ShiftSettings::default();
    let m = DielectricModel::gold();
    let (zeta, d, beta) = (0.2, 1e-5, 0.03);
    let forces = SurfaceForces::compute(&m, zeta, d, &s).unwrap();
    let db = delta_b(&m, zeta, d, beta, &s).unwrap();
    let dbs = delta_b_static(&m, zeta, d, beta).unwrap();
    assert!(rel(db, forces.delta_b(beta)) < 1e-12);
    assert!(rel(1.0 - db / dbs, m_ratio(&m, zeta, d, beta, &s).unwrap()) < 1e-9);
    assert_eq!(static_force(&m, 0.5, d).unwrap(), 0.0);
    assert!(m_ratio(&m, 0.5, d, beta, &s).is_err());
}

#[test]
fn dynamical_ratio_signs_follow_the_model() {
    let s = ShiftSettings::default();
    let mp = m_ratio(&DielectricModel::gold_plasma(), 0.1, 1e-5, 0.01, &s).unwrap();
    let md = m_ratio(&DielectricModel::gold(), 0.1, 1e-5, 0.01, &s).unwrap();
    assert!(mp > 0.0 && md < 0.0, "{mp} {md}");
    // quadratic in beta at fixed geometry
    let md2 = m_ratio(&DielectricModel::gold(), 0.1, 1e-5, 0.02, &s).unwrap();
    assert!(rel(md2, 4.0 * md) < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conductor_pipeline_matches_closed_form(zeta in 0.03f64..0.97, log_d in -6.0f64..-3.0) {
        let d = 10f64.powf(log_d);
        let e = ElectronState::from_beta(0.01).unwrap();
        let got = shift(&DielectricModel::PerfectConductor, d, zeta, &e);
        prop_assert!(rel(got, pc_shift(zeta, d, &e).unwrap()) < 1e-6);
    }

    #[test]
    fn shift_is_mirror_symmetric(zeta in 0.05f64..0.45, pick in 0usize..3) {
        let m = [DielectricModel::gold(), DielectricModel::gold_plasma(), DielectricModel::drude(9e15, 3e13).unwrap()][pick].clone();
        let e = ElectronState::from_beta(0.01).unwrap();
        let a = shift(&m, 1e-5, zeta, &e);
        let b = shift(&m, 1e-5, 1.0 - zeta, &e);
        prop_assert!(rel(b, a) < 1e-8);
    }

    #[test]
    fn midpoint_matches_closed_form(
        wp in 3e15f64..3e16,
        wt in 2e14f64..2e15,
        gamma in 1e12f64..2e14,
        log_d in -6.0f64..-4.3,
    ) {
        let m = DielectricModel::drude_lorentz(wp, wt, gamma).unwrap();
        let d = 10f64.powf(log_d);
        let e = ElectronState::from_beta(0.01).unwrap();
        let c = CavityConfig::from_zeta(d, 0.5).unwrap();
        let got = self_energy(&m, &c, &e, &ShiftSettings::default()).unwrap().value;
        let want = drude_midpoint_shift(&m, d, &e).unwrap();
        prop_assert!(rel(got, want) < 1e-4);
    }
}
