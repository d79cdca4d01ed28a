//! Physical constants, parameter records and the S.I. <-> reduced-unit mapping.
//!
//! Every public value in this crate is S.I. Numerical kernels work in reduced
//! units where lengths are measured in units of the plate separation `d` and
//! frequencies in units of `c/d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values, S.I.
pub mod constants {
    /// Elementary charge (C).
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Electron mass (kg).
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
    /// Speed of light in vacuum (m/s).
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Vacuum permittivity (F/m).
    pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
    /// Reduced Planck constant (J s).
    pub const HBAR: f64 = 1.054_571_817e-34;
}

use constants::*;

/// `m c / e` in T m. Multiplying by `beta / R` gives the cyclotron field.
pub fn cyclotron_constant() -> f64 {
    ELECTRON_MASS * SPEED_OF_LIGHT / ELEMENTARY_CHARGE
}

/// `e^2 / (eps0 m^2 c^2)`, the factor that turns a reduced Green-function
/// integral times `<p^2>` into an energy times length (J m / (kg m/s)^2).
pub(crate) fn coupling_prefactor() -> f64 {
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE
        / (VACUUM_PERMITTIVITY
            * ELECTRON_MASS
            * ELECTRON_MASS
            * SPEED_OF_LIGHT
            * SPEED_OF_LIGHT)
}

/// Momentum second moments of the electron.
///
/// `p_par_sq` is the summed second moment of the two components parallel to the
/// plates, `p_perp_sq` the one normal to them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectronState {
    p_par_sq: f64,
    p_perp_sq: f64,
}

impl ElectronState {
    pub fn new(p_par_sq: f64, p_perp_sq: f64) -> Result<Self> {
        if !(p_par_sq.is_finite() && p_par_sq >= 0.0) {
            return Err(Error::invalid("p_par_sq", p_par_sq, "must be finite and >= 0"));
        }
        if !(p_perp_sq.is_finite() && p_perp_sq >= 0.0) {
            return Err(Error::invalid("p_perp_sq", p_perp_sq, "must be finite and >= 0"));
        }
        Ok(Self {
            p_par_sq,
            p_perp_sq,
        })
    }

    /// Sharp momentum `m beta c` parallel to the plates.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::invalid("beta", beta, "must satisfy 0 <= beta < 1"));
        }
        let p = ELECTRON_MASS * beta * SPEED_OF_LIGHT;
        Self::new(p * p, 0.0)
    }

    pub fn p_par_sq(&self) -> f64 {
        self.p_par_sq
    }

    pub fn p_perp_sq(&self) -> f64 {
        self.p_perp_sq
    }

    pub fn p_sq(&self) -> f64 {
        self.p_par_sq + self.p_perp_sq
    }

    /// Parallel speed in units of c implied by `p_par_sq`.
    pub fn beta_par(&self) -> f64 {
        self.p_par_sq.sqrt() / (ELECTRON_MASS * SPEED_OF_LIGHT)
    }
}

/// Plate separation and electron position; plates sit at `z = 0` and `z = d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    d: f64,
    z: f64,
}

impl CavityConfig {
    pub fn new(d: f64, z: f64) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::invalid("d", d, "plate separation must be positive"));
        }
        if !(z.is_finite() && z > 0.0 && z < d) {
            return Err(Error::invalid("z", z, "electron must lie strictly between the plates"));
        }
        Ok(Self { d, z })
    }

    pub fn from_zeta(d: f64, zeta: f64) -> Result<Self> {
        if !(zeta.is_finite() && zeta > 0.0 && zeta < 1.0) {
            return Err(Error::invalid("zeta", zeta, "must lie in (0, 1)"));
        }
        Self::new(d, zeta * d)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn zeta(&self) -> f64 {
        self.z / self.d
    }
}

/// Dimensionless parameter set: lengths in units of `d`, frequencies in `c/d`,
/// momenta in units of `m c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParameters {
    pub zeta: f64,
    pub length_scale: f64,
    pub frequency_scale: f64,
    pub p_par_sq: f64,
    pub p_perp_sq: f64,
}

pub fn to_internal(config: &CavityConfig, electron: &ElectronState) -> ReducedParameters {
    let mc = ELECTRON_MASS * SPEED_OF_LIGHT;
    ReducedParameters {
        zeta: config.zeta(),
        length_scale: config.d(),
        frequency_scale: SPEED_OF_LIGHT / config.d(),
        p_par_sq: electron.p_par_sq() / (mc * mc),
        p_perp_sq: electron.p_perp_sq() / (mc * mc),
    }
}

pub fn from_internal(reduced: &ReducedParameters) -> Result<(CavityConfig, ElectronState)> {
    let mc = ELECTRON_MASS * SPEED_OF_LIGHT;
    let cavity = CavityConfig::new(reduced.length_scale, reduced.zeta * reduced.length_scale)?;
    let electron = ElectronState::new(reduced.p_par_sq * mc * mc, reduced.p_perp_sq * mc * mc)?;
    Ok((cavity, electron))
}

/// Convergence record attached to every computed shift.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Number of k_par nodes at which a residue was extracted.
    pub k_evaluations: usize,
    /// Quadrature panels in the final partition.
    pub panels: usize,
    /// Contour nodes used per residue.
    pub contour_nodes: usize,
    /// Smallest and largest contour radius used, in rad/s.
    pub min_contour_radius: f64,
    pub max_contour_radius: f64,
    /// Every residue passed its radius-shrinking check.
    pub residues_converged: bool,
    /// The k_par quadrature met its tolerance.
    pub quadrature_converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftResult {
    /// Energy shift (J).
    pub value: f64,
    /// Estimated absolute numerical error (J).
    pub abs_error_estimate: f64,
    pub diagnostics: Diagnostics,
}

impl ShiftResult {
    pub fn converged(&self) -> bool {
        self.diagnostics.residues_converged && self.diagnostics.quadrature_converged
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zeta_is_z_over_d() {
        let c = CavityConfig::new(10e-6, 5e-6).unwrap();
        assert_eq!(c.zeta(), 0.5);
    }

    #[test]
    fn electron_on_plate_rejected() {
        assert!(CavityConfig::new(10e-6, 10e-6).is_err());
        assert!(CavityConfig::new(10e-6, 0.0).is_err());
        assert!(CavityConfig::new(-1.0, 0.5).is_err());
        assert!(CavityConfig::from_zeta(1e-5, 1.0).is_err());
    }

    #[test]
    fn round_trip_fixed_point() {
        let c = CavityConfig::new(10e-6, 1e-6).unwrap();
        let e = ElectronState::from_beta(0.01).unwrap();
        let (c2, e2) = from_internal(&to_internal(&c, &e)).unwrap();
        assert!(((c2.d() - c.d()) / c.d()).abs() < 1e-15);
        assert!(((c2.z() - c.z()) / c.z()).abs() < 1e-15);
        assert!(((e2.p_par_sq() - e.p_par_sq()) / e.p_par_sq()).abs() < 1e-15);
    }

    #[test]
    fn cyclotron_constant_matches_quoted_value() {
        // B/beta at R = 1 mm is about 1.7 T
        let per_beta = cyclotron_constant() / 1e-3;
        assert!((per_beta - 1.7).abs() < 0.01, "{per_beta}");
        assert!((cyclotron_constant() - 0.0017).abs() < 0.00001);
    }

    #[test]
    fn invalid_momenta_rejected() {
        assert!(ElectronState::new(-1.0, 0.0).is_err());
        assert!(ElectronState::new(0.0, f64::NAN).is_err());
        assert!(ElectronState::from_beta(1.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_random(
            d in 1e-9f64..1e-2,
            zeta in 1e-6f64..(1.0 - 1e-6),
            beta in 0.0f64..0.99,
            perp in 0.0f64..1e-44,
        ) {
            let c = CavityConfig::from_zeta(d, zeta).unwrap();
            let e = ElectronState::new(ElectronState::from_beta(beta).unwrap().p_par_sq(), perp).unwrap();
            let (c2, e2) = from_internal(&to_internal(&c, &e)).unwrap();
            let rel = |a: f64, b: f64| if a == b { 0.0 } else { ((a - b) / b).abs() };
            prop_assert!(rel(c2.d(), c.d()) <= 1e-15);
            prop_assert!(rel(c2.z(), c.z()) <= 2e-15);
            prop_assert!(rel(e2.p_par_sq(), e.p_par_sq()) <= 1e-15);
            prop_assert!(rel(e2.p_perp_sq(), e.p_perp_sq()) <= 1e-15);
        }
    }
}
