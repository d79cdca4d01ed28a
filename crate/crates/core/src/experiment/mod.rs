//! Half-cyclotron experiment model.
//!
//! An electron circulates at `beta` on a ring of radius `R`; on half of the
//! orbit it moves between the plates. Keeping the orbit closed needs a field
//! modulation `dB = -F_surf / (e beta c)` during the confined half, with
//! `F_surf` the static image force plus the dynamical force `-d(dE)/dz`.
//!
//! Sign conventions: forces are positive towards increasing `z`. The
//! dynamical force is evaluated with `<p_par^2> = (m beta c)^2` and
//! `<p_perp^2> = 0`.

mod figures;
mod uncertainty;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::closedform::static_force;
use crate::dielectric::DielectricModel;
use crate::error::{Error, Result};
use crate::quantities::constants::{ELECTRON_MASS, ELEMENTARY_CHARGE, SPEED_OF_LIGHT};
use crate::quantities::{cyclotron_constant, CavityConfig, ElectronState};
use crate::selfenergy::{channel_force_integrals, Channels, ShiftSettings};

pub use figures::{
    figure_data, linspace, logspace, Dataset, Fig1Config, Fig2Config, Fig3Config, FigureRequest, Row,
};
pub use uncertainty::{propagate_errors, Contributions, ErrorEstimate, Propagator, Quantity};

/// Smallest accepted `R / d`.
pub const MIN_RING_RATIO: f64 = 20.0;
/// `R / d` below which a warning is logged.
pub const WARN_RING_RATIO: f64 = 100.0;

/// How [`propagate_errors`] combines the uncertainty sources.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Linear propagation, contributions added in quadrature.
    #[default]
    FirstOrder,
    /// Sample standard deviation over independent normal draws.
    MonteCarlo,
}

/// What the relative field stability multiplies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldReference {
    /// `field_stability * B0`.
    #[default]
    Background,
    /// `field_stability * |dB|`, i.e. only the modulation source fluctuates.
    Modulation,
}

/// One-sigma uncertainties of the apparatus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UncertaintyBudget {
    /// Electron position (m).
    pub sigma_z: f64,
    /// Plate separation (m).
    pub sigma_d: f64,
    /// Ring radius (m).
    pub sigma_r: f64,
    /// Relative field stability, applied per `field_reference`.
    pub field_stability: f64,
    pub field_reference: FieldReference,
    pub mc_samples: usize,
    pub method: Method,
    pub seed: u64,
}

impl Default for UncertaintyBudget {
    fn default() -> Self {
        Self {
            sigma_z: 2.5e-9,
            sigma_d: 1e-6,
            sigma_r: 5e-6,
            field_stability: 1e-5,
            field_reference: FieldReference::Background,
            mc_samples: 10_000,
            method: Method::FirstOrder,
            seed: 0,
        }
    }
}

impl UncertaintyBudget {
    /// Every sigma zero.
    pub fn exact() -> Self {
        Self {
            sigma_z: 0.0,
            sigma_d: 0.0,
            sigma_r: 0.0,
            field_stability: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_z", self.sigma_z),
            ("sigma_d", self.sigma_d),
            ("sigma_r", self.sigma_r),
            ("field_stability", self.field_stability),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, v, "must be finite and >= 0"));
            }
        }
        if self.method == Method::MonteCarlo && self.mc_samples < 2 {
            return Err(Error::invalid("mc_samples", self.mc_samples as f64, "need at least 2 samples"));
        }
        Ok(())
    }
}

/// Geometry, model and budget of one half-cyclotron configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    r: f64,
    d: f64,
    z: f64,
    beta_grid: Vec<f64>,
    model: DielectricModel,
    budget: UncertaintyBudget,
}

impl ExperimentConfig {
    /// Rejects `R / d < 20`; warns below 100.
    pub fn new(
        r: f64,
        d: f64,
        z: f64,
        beta_grid: Vec<f64>,
        model: DielectricModel,
        budget: UncertaintyBudget,
    ) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid("R", r, "must be positive"));
        }
        CavityConfig::new(d, z)?;
        let ratio = r / d;
        if ratio < MIN_RING_RATIO {
            return Err(Error::RingTooSmall { ratio });
        }
        if ratio < WARN_RING_RATIO {
            warn!("R / d = {ratio:.1}: edge effects of the ring are neglected, which assumes R >> d");
        }
        for &b in &beta_grid {
            check_beta(b)?;
        }
        budget.validate()?;
        Ok(Self {
            r,
            d,
            z,
            beta_grid,
            model,
            budget,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
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

    pub fn beta_grid(&self) -> &[f64] {
        &self.beta_grid
    }

    pub fn model(&self) -> &DielectricModel {
        &self.model
    }

    pub fn budget(&self) -> &UncertaintyBudget {
        &self.budget
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("beta", beta, "requires 0 < beta < 1"))
    }
}

/// Background field `B0 = (m c / e) beta / R` (T) for a cyclotron orbit of
/// radius `r`.
pub fn cyclotron_field(beta: f64, r: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("R", r, "must be positive"));
    }
    Ok(cyclotron_constant() * beta / r)
}

/// `beta` of the orbit with radius `r` in the field `b0`.
pub fn beta_for_field(b0: f64, r: f64) -> f64 {
    b0 * r / cyclotron_constant()
}

/// Field modulation `-F / (e beta c)` (T) compensating a force `F` (N).
pub fn compensating_field(force: f64, beta: f64) -> f64 {
    -force / (ELEMENTARY_CHARGE * beta * SPEED_OF_LIGHT)
}

/// Modulation compensating the static image force only.
pub fn delta_b_static(model: &DielectricModel, zeta: f64, d: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(compensating_field(static_force(model, zeta, d)?, beta))
}

/// Dynamical force per unit `beta^2` (N): `F_dyn(beta) = beta^2 * this`.
pub fn dynamical_force_per_beta_sq(model: &DielectricModel, zeta: f64, d: f64, settings: &ShiftSettings) -> Result<f64> {
    let ch = channel_force_integrals(model, d, zeta, Channels::Parallel, settings)?;
    let unit = ElectronState::new((ELECTRON_MASS * SPEED_OF_LIGHT).powi(2), 0.0)?;
    Ok(ch.force(d, &unit)?.value)
}

/// Static and dynamical forces at one position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceForces {
    /// Image force (N).
    pub static_force: f64,
    /// Dynamical force per unit `beta^2` (N).
    pub dynamical_per_beta_sq: f64,
}

impl SurfaceForces {
    pub fn compute(model: &DielectricModel, zeta: f64, d: f64, settings: &ShiftSettings) -> Result<Self> {
        Ok(Self {
            static_force: static_force(model, zeta, d)?,
            dynamical_per_beta_sq: dynamical_force_per_beta_sq(model, zeta, d, settings)?,
        })
    }

    pub fn dynamical(&self, beta: f64) -> f64 {
        beta * beta * self.dynamical_per_beta_sq
    }

    pub fn delta_b_static(&self, beta: f64) -> f64 {
        compensating_field(self.static_force, beta)
    }

    pub fn delta_b(&self, beta: f64) -> f64 {
        compensating_field(self.static_force + self.dynamical(beta), beta)
    }

    /// `M = -F_dyn / F_static`, cross-checked against `1 - dB / dB_static`.
    pub fn m_ratio(&self, beta: f64) -> Result<f64> {
        if self.static_force == 0.0 {
            return Err(Error::MidpointUndefined { quantity: "M" });
        }
        let direct = -self.dynamical(beta) / self.static_force;
        let via_field = 1.0 - self.delta_b(beta) / self.delta_b_static(beta);
        // the field route loses |log10 M| digits to cancellation
        if (direct - via_field).abs() > 1e-10 * direct.abs() + 8.0 * f64::EPSILON {
            return Err(Error::Inconsistent {
                what: "M from forces and from field ratio",
                first: direct,
                second: via_field,
            });
        }
        Ok(direct)
    }
}

/// Total modulation including the dynamical force.
pub fn delta_b(model: &DielectricModel, zeta: f64, d: f64, beta: f64, settings: &ShiftSettings) -> Result<f64> {
    check_beta(beta)?;
    Ok(SurfaceForces::compute(model, zeta, d, settings)?.delta_b(beta))
}

/// `M = -F_dyn / F_static`; undefined at the midpoint.
pub fn m_ratio(model: &DielectricModel, zeta: f64, d: f64, beta: f64, settings: &ShiftSettings) -> Result<f64> {
    check_beta(beta)?;
    if zeta == 0.5 {
        return Err(Error::MidpointUndefined { quantity: "M" });
    }
    SurfaceForces::compute(model, zeta, d, settings)?.m_ratio(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::pc_shift_derivative;

    #[test]
    fn cyclotron_field_values() {
        let b = cyclotron_field(0.1, 1e-3).unwrap();
        assert!((b / 0.17 - 1.0).abs() < 0.01, "{b}");
        let b = cyclotron_field(0.0206, 1e-3).unwrap();
        assert!((b / 0.035 - 1.0).abs() < 0.01, "{b}");
        assert!(cyclotron_field(1e-12, 1e-3).unwrap() < 1e-11);
        assert!(cyclotron_field(0.0, 1e-3).is_err());
        assert!((beta_for_field(b, 1e-3) / 0.0206 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn static_modulation_midpoint_and_sign() {
        let g = DielectricModel::gold();
        assert_eq!(delta_b_static(&g, 0.5, 1e-5, 0.01).unwrap(), 0.0);
        // pulled towards z = 0, so the modulation is positive
        assert!(delta_b_static(&g, 0.1, 1e-5, 0.01).unwrap() > 0.0);
        let a = 0.01 * delta_b_static(&g, 0.1, 1e-5, 0.01).unwrap();
        let b = 0.07 * delta_b_static(&g, 0.1, 1e-5, 0.07).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn decomposition_and_zero_stub() {
        let f = SurfaceForces {
            static_force: -3e-17,
            dynamical_per_beta_sq: 2e-15,
        };
        let beta = 0.03;
        let lhs = f.delta_b(beta) - f.delta_b_static(beta);
        let rhs = compensating_field(f.dynamical(beta), beta);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        let stub = SurfaceForces {
            dynamical_per_beta_sq: 0.0,
            ..f
        };
        assert_eq!(stub.delta_b(beta), stub.delta_b_static(beta));
        assert_eq!(stub.m_ratio(beta).unwrap(), 0.0);
    }

    #[test]
    fn pc_dynamical_force_matches_closed_form() {
        let d = 1e-5;
        let zeta = 0.25;
        let pc = DielectricModel::PerfectConductor;
        let got = dynamical_force_per_beta_sq(&pc, zeta, d, &Default::default()).unwrap();
        let unit = ElectronState::new((ELECTRON_MASS * SPEED_OF_LIGHT).powi(2), 0.0).unwrap();
        let want = -pc_shift_derivative(zeta, d, &unit).unwrap();
        assert!((got / want - 1.0).abs() < 1e-8, "{got} {want}");
    }

    #[test]
    fn m_ratio_mirror_symmetric_and_midpoint_error() {
        let s = ShiftSettings::default();
        let g = DielectricModel::gold();
        let a = m_ratio(&g, 0.2, 1e-5, 0.02, &s).unwrap();
        let b = m_ratio(&g, 0.8, 1e-5, 0.02, &s).unwrap();
        assert!((a - b).abs() <= 1e-6 * a.abs(), "{a} {b}");
        assert_eq!(m_ratio(&g, 0.5, 1e-5, 0.02, &s), Err(Error::MidpointUndefined { quantity: "M" }));
    }

    #[test]
    fn ring_guard() {
        let g = DielectricModel::gold();
        let b = UncertaintyBudget::default();
        let r = ExperimentConfig::new(1e-4, 1e-5, 1e-6, vec![0.01], g.clone(), b);
        assert!(matches!(r, Err(Error::RingTooSmall { .. })));
        assert!(ExperimentConfig::new(5e-4, 1e-5, 1e-6, vec![0.01], g.clone(), b).is_ok());
        assert!(ExperimentConfig::new(1e-3, 1e-5, 1e-6, vec![1.0], g, b).is_err());
    }

    #[test]
    fn budget_validation() {
        assert!(UncertaintyBudget::default().validate().is_ok());
        let bad = UncertaintyBudget {
            sigma_z: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
