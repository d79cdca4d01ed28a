//! Closed-form results: the perfect-conductor shift and its derivative, the
//! midpoint shift for dispersive plates with a finite static permittivity,
//! and the electrostatic image force.

pub mod special;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::dielectric::DielectricModel;
use crate::error::{Error, Result};
use crate::quantities::constants::{ELEMENTARY_CHARGE, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::quantities::{coupling_prefactor, ElectronState};

pub use special::{
    digamma, dilog, harmonic, hurwitz_zeta2, lerch_phi, lerch_phi_with, trigamma, SpecialFunctionAccuracy,
    EULER_GAMMA,
};

fn check_zeta(zeta: f64) -> Result<()> {
    if zeta > 0.0 && zeta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "perfect-conductor shift",
            value: zeta,
            reason: "diverges on the plates; requires 0 < zeta < 1",
        })
    }
}

fn check_d(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("d", d, "must be positive"))
    }
}

/// `e^2 <p_par^2> / (32 pi eps0 m^2 c^2)` in J m.
fn pc_scale(electron: &ElectronState) -> f64 {
    coupling_prefactor() * electron.p_par_sq() / (32.0 * PI)
}

/// `pi cot(pi z) - 2 [H_{3-z} + (3z^2 - 12z + 11) / ((z-3)(z-2)(z-1))]`
pub fn pc_bracket(zeta: f64) -> Result<f64> {
    check_zeta(zeta)?;
    let rational = (3.0 * zeta * zeta - 12.0 * zeta + 11.0) / ((zeta - 3.0) * (zeta - 2.0) * (zeta - 1.0));
    Ok(PI / (PI * zeta).tan() - 2.0 * (harmonic(3.0 - zeta)? + rational))
}

/// Energy shift (J) between perfectly conducting plates. Only `<p_par^2>`
/// enters.
pub fn pc_shift(zeta: f64, d: f64, electron: &ElectronState) -> Result<f64> {
    check_d(d)?;
    Ok(pc_scale(electron) / d * pc_bracket(zeta)?)
}

/// `d(pc_shift)/dz` in J/m (equivalently N); the force is its negative.
pub fn pc_shift_derivative(zeta: f64, d: f64, electron: &ElectronState) -> Result<f64> {
    check_d(d)?;
    check_zeta(zeta)?;
    let s = (PI * zeta).sin();
    // d/dz H_{3-z} = -psi'(4 - z); the rational term is sum_j 1/(z - j)
    let rational_prime: f64 = (1..=3).map(|j| -1.0 / (zeta - j as f64).powi(2)).sum();
    let bracket_prime = -PI * PI / (s * s) - 2.0 * (-trigamma(4.0 - zeta)? + rational_prime);
    Ok(pc_scale(electron) / (d * d) * bracket_prime)
}

/// Leading small-distance shift `e^2 <p_par^2> / (32 pi eps0 m^2 c^2 z)` (J)
/// near a single perfect conductor.
pub fn pc_single_plate_shift(z: f64, electron: &ElectronState) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::invalid("z", z, "must be positive"));
    }
    Ok(pc_scale(electron) / z)
}

/// Midpoint shift (J) for plates with finite static permittivity, from
/// `eta(0)`, `eps'(0)` and `eps''(0)`.
pub fn drude_midpoint_shift(model: &DielectricModel, d: f64, electron: &ElectronState) -> Result<f64> {
    check_d(d)?;
    let taylor = model.static_taylor()?;
    let eta = model.static_eta()?;
    // derivatives in reduced units, frequency measured in c/d
    let t = SPEED_OF_LIGHT / d;
    let e1 = taylor.d1 * t;
    let e2 = taylor.d2 * t * t;
    let bracket = midpoint_bracket(eta, e1, e2)?;
    if bracket.im.abs() > 1e-9 * bracket.norm() {
        return Err(Error::NonFinite {
            what: "midpoint bracket (imaginary part does not cancel)",
        });
    }
    Ok(-coupling_prefactor() * electron.p_par_sq() / (256.0 * PI * d * eta * eta) * bracket.re)
}

/// Curly bracket of the midpoint formula with `d = 1`:
/// `16 eta^3 + 8 (eta-1)^4 ln(1+eta) e1^2
///  + (eta-1)^2 (2 eta e2 + (eta^2-1) e1^2)(eta Phi(eta^2,2,1/2) + 4 Li2(eta) - 3 Li2(eta^2))`.
pub fn midpoint_bracket(eta: f64, e1: C64, e2: C64) -> Result<C64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain {
            function: "midpoint shift",
            value: eta,
            reason: "requires 0 < eta(0) < 1 (finite static permittivity)",
        });
    }
    let e1sq = e1 * e1;
    let am1 = eta - 1.0;
    let special = eta * lerch_phi(eta * eta, 2.0, 0.5)? + 4.0 * dilog(eta)? - 3.0 * dilog(eta * eta)?;
    let first = C64::from(16.0 * eta.powi(3));
    let second = 8.0 * am1.powi(4) * (1.0 + eta).ln() * e1sq;
    let third = am1 * am1 * (2.0 * eta * e2 + (eta * eta - 1.0) * e1sq) * special;
    Ok(first + second + third)
}

/// Electrostatic image force (N) on the charge, positive towards increasing
/// `z`. Rejects `zeta` within `1e-6` of either plate.
pub fn static_force(model: &DielectricModel, zeta: f64, d: f64) -> Result<f64> {
    check_d(d)?;
    if !(zeta > 1e-6 && zeta < 1.0 - 1e-6) {
        return Err(Error::Domain {
            function: "static_force",
            value: zeta,
            reason: "requires 1e-6 < zeta < 1 - 1e-6",
        });
    }
    let eta = model.static_eta()?;
    let x = eta * eta;
    let phi = |a: f64| if x >= 1.0 { hurwitz_zeta2(a) } else { lerch_phi(x, 2.0, a) };
    let bracket = phi(1.0 - zeta)? - phi(zeta)?;
    Ok(eta * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (16.0 * PI * VACUUM_PERMITTIVITY * d * d) * bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::constants::ELECTRON_MASS;
    use std::f64::consts::LN_2;

    fn beta(b: f64) -> ElectronState {
        ElectronState::from_beta(b).unwrap()
    }

    #[test]
    fn pc_midpoint_is_e0() {
        let e = beta(0.01);
        let d = 1e-5;
        let p2 = (ELECTRON_MASS * 0.01 * SPEED_OF_LIGHT).powi(2);
        let e0 = ELEMENTARY_CHARGE.powi(2) * p2 * LN_2
            / (8.0 * PI * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT.powi(2) * ELECTRON_MASS.powi(2) * d);
        let got = pc_shift(0.5, d, &e).unwrap();
        assert!(((got - e0) / e0).abs() < 1e-14);
        assert!((e0 / 8e-28 - 1.0).abs() < 0.05);
    }

    #[test]
    fn pc_bracket_is_mirror_symmetric() {
        for i in 1..=9 {
            let z = i as f64 / 10.0;
            let (a, b) = (pc_bracket(z).unwrap(), pc_bracket(1.0 - z).unwrap());
            assert!((a - b).abs() <= 1e-10 * a.abs(), "{z}: {a} {b}");
        }
    }

    #[test]
    fn pc_bracket_equals_digamma_form() {
        for z in [0.05, 0.3, 0.77] {
            let want = -digamma(z).unwrap() - digamma(1.0 - z).unwrap() - 2.0 * EULER_GAMMA;
            assert!((pc_bracket(z).unwrap() - want).abs() < 1e-12 * want.abs());
        }
    }

    #[test]
    fn pc_small_zeta_limit() {
        let e = beta(0.01);
        let d = 1.0;
        for z in [1e-4, 1e-6] {
            let ratio = pc_shift(z, d, &e).unwrap() / pc_single_plate_shift(z * d, &e).unwrap();
            assert!((ratio - 1.0).abs() < 2.0 * z, "{z}: {ratio}");
        }
    }

    #[test]
    fn pc_derivative_matches_differences() {
        let e = beta(0.02);
        let d = 1e-5;
        for z in [0.3, 0.5, 0.81] {
            let h = 1e-5;
            let fd = (pc_shift(z + h, d, &e).unwrap() - pc_shift(z - h, d, &e).unwrap()) / (2.0 * h * d);
            let an = pc_shift_derivative(z, d, &e).unwrap();
            let scale = pc_shift(0.5, d, &e).unwrap() / d;
            assert!((fd - an).abs() <= 1e-8 * an.abs().max(scale), "{z}: {fd} {an}");
        }
        // energy falls towards the nearer plate
        assert!(pc_shift_derivative(0.1, d, &e).unwrap() < 0.0);
    }

    #[test]
    fn pc_rejects_plates() {
        assert!(pc_shift(0.0, 1e-5, &beta(0.01)).is_err());
        assert!(pc_shift_derivative(1.0, 1e-5, &beta(0.01)).is_err());
    }

    #[test]
    fn lossless_bracket_keeps_two_terms() {
        let eta = 0.9;
        let e2 = C64::new(3.0, 0.0);
        let full = midpoint_bracket(eta, C64::new(0.0, 0.0), e2).unwrap();
        let special = eta * lerch_phi(eta * eta, 2.0, 0.5).unwrap() + 4.0 * dilog(eta).unwrap()
            - 3.0 * dilog(eta * eta).unwrap();
        let two = 16.0 * eta.powi(3) + (eta - 1.0).powi(2) * 2.0 * eta * e2.re * special;
        assert!((full.re - two).abs() < 1e-14 * two.abs());
    }

    #[test]
    fn gold_midpoint_is_negative_and_comparable_to_e0() {
        let e = beta(0.01);
        let d = 1e-5;
        let v = drude_midpoint_shift(&DielectricModel::gold(), d, &e).unwrap();
        let e0 = pc_shift(0.5, d, &e).unwrap();
        assert!(v < 0.0);
        assert!((v / e0).abs() > 0.2 && (v / e0).abs() < 5.0, "{}", v / e0);
    }

    #[test]
    fn midpoint_rejects_static_pole_models() {
        let e = beta(0.01);
        assert!(drude_midpoint_shift(&DielectricModel::gold_plasma(), 1e-5, &e).is_err());
        assert!(drude_midpoint_shift(&DielectricModel::PerfectConductor, 1e-5, &e).is_err());
    }

    #[test]
    fn static_force_symmetry_and_image_limit() {
        let g = DielectricModel::gold();
        let d = 1e-5;
        assert_eq!(static_force(&g, 0.5, d).unwrap(), 0.0);
        for z in [0.1, 0.27, 0.4] {
            let (a, b) = (static_force(&g, z, d).unwrap(), static_force(&g, 1.0 - z, d).unwrap());
            assert!((a + b).abs() <= 1e-12 * a.abs());
            assert!(a < 0.0);
        }
        let pc = DielectricModel::PerfectConductor;
        let zeta = 1e-4;
        let z = zeta * d;
        let image = -ELEMENTARY_CHARGE.powi(2) / (16.0 * PI * VACUUM_PERMITTIVITY * z * z);
        let f = static_force(&pc, zeta, d).unwrap();
        assert!((f / image - 1.0).abs() < 1e-6, "{}", f / image);
        assert!(static_force(&pc, 1e-7, d).is_err());
    }
}
