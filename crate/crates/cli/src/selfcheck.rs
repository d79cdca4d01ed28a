//! Embedded oracle suite: contour residues of Laurent polynomials, the
//! numerical pipeline against the closed forms, special-function identities
//! and mirror symmetry.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use selfenergy_core::closedform::{digamma, drude_midpoint_shift, lerch_phi, pc_shift};
use selfenergy_core::selfenergy::{dynamical_force, residue_at_zero, self_energy, ResidueSettings};
use selfenergy_core::{CavityConfig, DielectricModel, ElectronState, Result};

/// One check: `measured` is a relative or absolute error, compared with
/// `tolerance`.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.measured.is_finite() && self.measured <= self.tolerance
    }

    fn from(name: &'static str, tolerance: f64, r: Result<(f64, String)>) -> Self {
        match r {
            Ok((measured, detail)) => Self {
                name,
                measured,
                tolerance,
                detail,
            },
            Err(e) => Self {
                name,
                measured: f64::INFINITY,
                tolerance,
                detail: e.to_string(),
            },
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn laurent_residues() -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for order in 1..=5 {
        // coefficients c_k for k = -order ..= 5
        let coeffs: Vec<(i32, C64)> = (-order..=5)
            .map(|k| (k, C64::new(1.0 + 0.37 * k as f64, 0.5 - 0.21 * k as f64)))
            .collect();
        let f = |w: C64| -> Result<C64> { Ok(coeffs.iter().map(|(k, c)| c * w.powi(*k)).sum()) };
        let want = coeffs.iter().find(|(k, _)| *k == -1).map(|(_, c)| *c).unwrap_or_default();
        let got = residue_at_zero(f, 0.5, &ResidueSettings::default())?.value[0];
        worst = worst.max((got - want).norm() / want.norm());
    }
    Ok((worst, "poles of order 1..5".into()))
}

fn perfect_conductor(perturb: f64) -> Result<(f64, String)> {
    let e = ElectronState::from_beta(0.01)?;
    let d = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 1..=9 {
        let zeta = i as f64 / 10.0;
        let c = CavityConfig::from_zeta(d, zeta)?;
        let got = self_energy(&DielectricModel::PerfectConductor, &c, &e, &Default::default())?.value;
        let want = pc_shift(zeta, d, &e)? * (1.0 + perturb);
        worst = worst.max(rel(got, want));
    }
    Ok((worst, "zeta = 0.1 ..= 0.9".into()))
}

fn midpoint() -> Result<(f64, String)> {
    let e = ElectronState::from_beta(0.01)?;
    let d = 1e-5;
    let gold = DielectricModel::gold();
    let mut worst: f64 = 0.0;
    for m in [gold.clone(), gold.with_frequencies_scaled(0.5)?, gold.with_frequencies_scaled(2.0)?] {
        let c = CavityConfig::from_zeta(d, 0.5)?;
        let got = self_energy(&m, &c, &e, &Default::default())?.value;
        worst = worst.max(rel(got, drude_midpoint_shift(&m, d, &e)?));
    }
    Ok((worst, "gold and gold with frequencies x0.5, x2".into()))
}

fn special_functions() -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for x in [0.1, 0.37, 0.5, 0.83, 2.7] {
        let reflection = digamma(1.0 - x)? - digamma(x)?;
        let want = PI / (PI * x).tan();
        worst = worst.max((reflection - want).abs() / want.abs().max(1.0));
        let recurrence = digamma(x + 1.0)? - digamma(x)?;
        worst = worst.max((recurrence - 1.0 / x).abs() * x);
    }
    for (x, a) in [(0.3, 0.5), (0.9, 1.7), (0.979, 0.25)] {
        let shift = x * lerch_phi(x, 2.0, a + 1.0)? + 1.0 / (a * a);
        worst = worst.max(rel(shift, lerch_phi(x, 2.0, a)?));
    }
    Ok((worst, "digamma reflection and recurrence, Lerch index shift".into()))
}

fn mirror() -> Result<(f64, String)> {
    let e = ElectronState::from_beta(0.01)?;
    let d = 1e-5;
    let g = DielectricModel::gold();
    let at = |z| CavityConfig::from_zeta(d, z);
    let a = self_energy(&g, &at(0.3)?, &e, &Default::default())?.value;
    let b = self_energy(&g, &at(0.7)?, &e, &Default::default())?.value;
    let fa = dynamical_force(&g, &at(0.3)?, &e, &Default::default())?.value;
    let fb = dynamical_force(&g, &at(0.7)?, &e, &Default::default())?.value;
    let worst = rel(b, a).max(((fa + fb) / fa).abs());
    Ok((worst, "gold shift and force at zeta = 0.3 and 0.7".into()))
}

/// Runs every check. `perturb` scales the closed-form reference of the
/// perfect-conductor check by `1 + perturb`; it exists only to prove the
/// check can fail.
pub fn run(perturb: f64) -> Vec<Check> {
    vec![
        Check::from("residue-laurent", 1e-12, laurent_residues()),
        Check::from("perfect-conductor-closed-form", 1e-6, perfect_conductor(perturb)),
        Check::from("midpoint-closed-form", 1e-4, midpoint()),
        Check::from("special-function-identities", 1e-10, special_functions()),
        Check::from("mirror-symmetry", 1e-6, mirror()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_pass() {
        let c = Check::from("s", 1e-10, special_functions());
        assert!(c.passed(), "{c:?}");
        let c = Check::from("r", 1e-12, laurent_residues());
        assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn errors_fail_the_check() {
        let c = Check::from("x", 1.0, Err(selfenergy_core::Error::ZeroMomentum));
        assert!(!c.passed());
    }
}
