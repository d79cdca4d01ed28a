//! Numerical self-energy: residue of `G^sc(r, r, w) / w` at `w = 0` for every
//! parallel wavenumber, then the integral over `k_par`.
//!
//! In reduced units (`d = 1`, `c = 1`) the shift is
//!
//! `dE = -(e^2 / (2 eps0 m^2 c^2 d)) (<p_par^2> S_par + <p_perp^2> S_perp)`
//!
//! with `S = int dk Res_{w=0} g(k, w) / w` and `g` the channel integrand of
//! [`crate::cavity_green`]. Momenta are in S.I. here, the `S` are dimensionless.

mod quadrature;
mod residue;

use std::cell::Cell;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity_green::{cavity_trace_split, ChannelWeights, KOmegaPoint, Medium, SplitWeights};
use crate::dielectric::DielectricModel;
use crate::error::{Error, Result};
use crate::quantities::constants::ELECTRON_MASS;
use crate::quantities::{coupling_prefactor, CavityConfig, Diagnostics, ElectronState, ShiftResult};

pub use quadrature::{integrate, QuadratureResult, QuadratureSettings};
pub use residue::{residue_at_zero, Residue, ResidueSettings};

/// Numerical settings for one shift evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShiftSettings {
    pub residue: ResidueSettings,
    pub quadrature: QuadratureSettings,
}

impl ShiftSettings {
    pub fn validate(&self) -> Result<()> {
        self.residue.validate()?;
        self.quadrature.validate()
    }

    /// Same settings with the quadrature tolerance tightened to at most `rel_tol`.
    pub fn tightened(&self, rel_tol: f64) -> Self {
        let mut s = *self;
        s.quadrature.rel_tol = s.quadrature.rel_tol.min(rel_tol);
        s.quadrature.max_panels = s.quadrature.max_panels.max(4096);
        s
    }
}

/// Which momentum channels to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channels {
    Parallel,
    Both,
}

impl Channels {
    pub fn for_electron(electron: &ElectronState) -> Self {
        if electron.p_perp_sq() > 0.0 {
            Channels::Both
        } else {
            Channels::Parallel
        }
    }
}

/// Reduced channel integrals at one position; independent of the electron.
/// `perpendicular` is `None` when only the parallel channel was integrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelIntegrals {
    pub zeta: f64,
    pub parallel: f64,
    pub perpendicular: Option<f64>,
    /// Quadrature error plus integrated contour spread, per channel.
    pub parallel_error: f64,
    pub perpendicular_error: f64,
    pub diagnostics: Diagnostics,
}

impl ChannelIntegrals {
    /// Energy shift (J) for plate separation `d` and the given electron.
    pub fn energy(&self, d: f64, electron: &ElectronState) -> Result<ShiftResult> {
        let scale = coupling_prefactor() / (2.0 * d);
        let (pp, pz) = (electron.p_par_sq(), electron.p_perp_sq());
        let perp = match self.perpendicular {
            Some(v) => v,
            None if pz == 0.0 => 0.0,
            None => {
                return Err(Error::invalid(
                    "p_perp_sq",
                    pz,
                    "perpendicular channel was not integrated",
                ))
            }
        };
        Ok(ShiftResult {
            value: -scale * (pp * self.parallel + pz * perp),
            abs_error_estimate: scale * (pp * self.parallel_error + pz * self.perpendicular_error),
            diagnostics: self.diagnostics,
        })
    }
}

/// Halving failures get one retry on a contour 16 times smaller before
/// being reported.
const RETRY_SHRINK: f64 = 1.0 / 16.0;

/// Reduced channel integrals `S_par`, `S_perp` for the cavity of width `d`
/// (m) with the electron at `zeta`.
///
/// The perpendicular residue grows like `1 / (2 pi k)` at small `k` when
/// `eta(0) = 1`, so that channel is refused for such models.
pub fn channel_integrals(
    model: &DielectricModel,
    d: f64,
    zeta: f64,
    channels: Channels,
    settings: &ShiftSettings,
) -> Result<ChannelIntegrals> {
    settings.validate()?;
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::invalid("zeta", zeta, "must lie strictly between 0 and 1"));
    }
    let with_perp = channels == Channels::Both;
    if with_perp && (model.static_eta() == Ok(1.0)) {
        return Err(Error::PerpendicularDivergent);
    }
    let medium = Medium::new(model, d)?;
    let zmin = zeta.min(1.0 - zeta);
    let jacobian = 1.0 / (2.0 * zmin);

    let evaluations = Cell::new(0usize);
    let min_radius = Cell::new(f64::INFINITY);
    let max_radius = Cell::new(0.0f64);

    // The conductor part of the integrand is singular only at |w| = k and
    // gets a wide contour; the material remainder is small wherever its
    // own singularities force a small contour.
    let residue_of = |k: f64, part: fn(&SplitWeights) -> ChannelWeights, radius: f64| {
        let g = |w: C64| -> Result<[C64; 2]> {
            let pt = KOmegaPoint::new(k, w, &medium)?;
            let ch = part(&cavity_trace_split(&pt, zeta, 1.0)?);
            let perp = if with_perp { ch.perpendicular / w } else { C64::new(0.0, 0.0) };
            Ok([ch.parallel / w, perp])
        };
        match residue::residue_vector(g, radius, &settings.residue, k) {
            Err(Error::ResidueNotConverged { .. }) => {
                log::debug!("residue at k = {k:e} unstable, retrying on a smaller contour");
                residue::residue_vector(g, radius * RETRY_SHRINK, &settings.residue, k)
            }
            other => other,
        }
    };
    let is_conductor = model.is_perfect_conductor();

    let integrand = |u: f64| -> Result<[f64; 4]> {
        let k = u * jacobian;
        let fraction = settings.residue.radius_fraction;
        let mut res = residue_of(k, |s| s.conductor, fraction * k)?;
        let mut radii = (res.radius, res.radius);
        if !is_conductor {
            let m = residue_of(k, |s| s.material, fraction * medium.nearest_singularity(k))?;
            for c in 0..2 {
                res.value[c] += m.value[c];
                res.spread[c] += m.spread[c];
            }
            radii = (radii.0.min(m.radius), radii.1.max(m.radius));
        }
        evaluations.set(evaluations.get() + 1);
        min_radius.set(min_radius.get().min(radii.0));
        max_radius.set(max_radius.get().max(radii.1));
        Ok([
            jacobian * res.value[0].re,
            jacobian * res.value[1].re,
            jacobian * res.spread[0],
            jacobian * res.spread[1],
        ])
    };

    let q = &settings.quadrature;
    let r = integrate(
        integrand,
        0.0,
        q.u_max,
        q.rel_tol,
        q.max_panels,
        [true, with_perp, false, false],
    )?;
    if !r.converged {
        log::warn!(
            "k_par quadrature at zeta = {zeta} stopped at {} panels (error {:e})",
            r.panels,
            r.abs_error[0]
        );
    }
    let fs = medium.frequency_scale();
    Ok(ChannelIntegrals {
        zeta,
        parallel: r.value[0],
        perpendicular: with_perp.then_some(r.value[1]),
        parallel_error: r.abs_error[0] + r.value[2],
        perpendicular_error: if with_perp { r.abs_error[1] + r.value[3] } else { 0.0 },
        diagnostics: Diagnostics {
            k_evaluations: evaluations.get(),
            panels: r.panels,
            contour_nodes: settings.residue.contour_nodes,
            min_contour_radius: min_radius.get() * fs,
            max_contour_radius: max_radius.get() * fs,
            residues_converged: true,
            quadrature_converged: r.converged,
        },
    })
}

/// Surface-dependent energy shift (J) of the electron in the cavity.
pub fn self_energy(
    model: &DielectricModel,
    cavity: &CavityConfig,
    electron: &ElectronState,
    settings: &ShiftSettings,
) -> Result<ShiftResult> {
    let ch = channel_integrals(model, cavity.d(), cavity.zeta(), Channels::for_electron(electron), settings)?;
    ch.energy(cavity.d(), electron)
}

/// `dE(zeta)` over a grid. Points are independent; a failure at one point is
/// reported in place. Output order follows `zeta_grid`.
pub fn shift_profile(
    model: &DielectricModel,
    d: f64,
    electron: &ElectronState,
    zeta_grid: &[f64],
    settings: &ShiftSettings,
) -> Vec<(f64, Result<ShiftResult>)> {
    zeta_grid
        .par_iter()
        .map(|&zeta| {
            let r = channel_integrals(model, d, zeta, Channels::for_electron(electron), settings)
                .and_then(|ch| ch.energy(d, electron));
            (zeta, r)
        })
        .collect()
}

/// A force (N) with its numerical error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceResult {
    pub value: f64,
    pub abs_error_estimate: f64,
}

/// Relative finite-difference step in `zeta`.
pub const FORCE_STEP: f64 = 1e-4;

/// Quadrature tolerance used for the shifts entering a finite difference.
const FORCE_QUADRATURE_TOL: f64 = 1e-12;

/// Reduced force `-dS/dzeta` per channel, i.e. the derivative of the channel
/// integrals, by a Richardson-extrapolated central difference.
pub fn channel_force_integrals(
    model: &DielectricModel,
    d: f64,
    zeta: f64,
    channels: Channels,
    settings: &ShiftSettings,
) -> Result<ChannelIntegrals> {
    let h = FORCE_STEP;
    if !(zeta - 2.0 * h > 0.0 && zeta + 2.0 * h < 1.0) {
        return Err(Error::StepHitsBoundary { step: h * d });
    }
    let s = settings.tightened(FORCE_QUADRATURE_TOL);
    let at = |dz: f64| channel_integrals(model, d, zeta + dz, channels, &s);
    let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);

    let richardson = |f: fn(&ChannelIntegrals) -> f64| {
        // (D1 - D2) / 3 with D1, D2 the central differences at h and 2h
        let d1 = (f(&p1) - f(&m1)) / (2.0 * h);
        let d2 = (f(&p2) - f(&m2)) / (4.0 * h);
        let value = (4.0 * d1 - d2) / 3.0;
        (-value, (value - d1).abs())
    };
    let (par, par_trunc) = richardson(|c| c.parallel);
    let (perp, perp_trunc) = richardson(|c| c.perpendicular.unwrap_or(0.0));
    // input errors amplified by the difference weights (4/3 + 1/6) / h
    let amp = 1.5 / h;
    let par_in = amp * p1.parallel_error.max(m1.parallel_error).max(p2.parallel_error).max(m2.parallel_error);
    let perp_in = amp
        * p1.perpendicular_error
            .max(m1.perpendicular_error)
            .max(p2.perpendicular_error)
            .max(m2.perpendicular_error);

    let mut diagnostics = p1.diagnostics;
    for c in [&m1, &p2, &m2] {
        let g = &c.diagnostics;
        diagnostics.k_evaluations += g.k_evaluations;
        diagnostics.panels = diagnostics.panels.max(g.panels);
        diagnostics.min_contour_radius = diagnostics.min_contour_radius.min(g.min_contour_radius);
        diagnostics.max_contour_radius = diagnostics.max_contour_radius.max(g.max_contour_radius);
        diagnostics.residues_converged &= g.residues_converged;
        diagnostics.quadrature_converged &= g.quadrature_converged;
    }
    Ok(ChannelIntegrals {
        zeta,
        parallel: par,
        perpendicular: p1.perpendicular.map(|_| perp),
        parallel_error: par_trunc + par_in,
        perpendicular_error: perp_trunc + perp_in,
        diagnostics,
    })
}

impl ChannelIntegrals {
    /// For integrals from [`channel_force_integrals`]: the force (N) on the
    /// electron, positive towards increasing `z`.
    pub fn force(&self, d: f64, electron: &ElectronState) -> Result<ForceResult> {
        // dE/dz = (1/d) dE/dzeta; the stored values are already -dS/dzeta
        let e = self.energy(d, electron)?;
        Ok(ForceResult {
            value: e.value / d,
            abs_error_estimate: e.abs_error_estimate / d,
        })
    }
}

/// Dynamical force `F = -d(dE)/dz` (N), positive towards increasing `z`.
pub fn dynamical_force(
    model: &DielectricModel,
    cavity: &CavityConfig,
    electron: &ElectronState,
    settings: &ShiftSettings,
) -> Result<ForceResult> {
    let ch = channel_force_integrals(model, cavity.d(), cavity.zeta(), Channels::for_electron(electron), settings)?;
    ch.force(cavity.d(), electron)
}

/// Mass correction `dm = -2 m^2 dE / <p^2>` (kg).
pub fn mass_shift(delta_e: f64, electron: &ElectronState) -> Result<f64> {
    let p2 = electron.p_sq();
    if p2 <= 0.0 {
        return Err(Error::ZeroMomentum);
    }
    Ok(-2.0 * ELECTRON_MASS * ELECTRON_MASS * delta_e / p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::constants::*;
    use std::f64::consts::{LN_2, PI};

    fn beta(b: f64) -> ElectronState {
        ElectronState::from_beta(b).unwrap()
    }

    fn e0(d: f64, b: f64) -> f64 {
        let p2 = (ELECTRON_MASS * b * SPEED_OF_LIGHT).powi(2);
        ELEMENTARY_CHARGE.powi(2) * p2 * LN_2
            / (8.0 * PI * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT.powi(2) * ELECTRON_MASS.powi(2) * d)
    }

    #[test]
    fn perfect_conductor_midpoint_is_e0() {
        let c = CavityConfig::from_zeta(1e-5, 0.5).unwrap();
        let r = self_energy(&DielectricModel::PerfectConductor, &c, &beta(0.01), &Default::default()).unwrap();
        let want = e0(1e-5, 0.01);
        assert!(((r.value - want) / want).abs() < 1e-8, "{} vs {want}", r.value);
        assert!(r.converged());
        assert!(r.abs_error_estimate < 1e-8 * want);
    }

    #[test]
    fn perpendicular_channel_adds_linearly() {
        let m = DielectricModel::gold();
        let ch = channel_integrals(&m, 1e-5, 0.3, Channels::Both, &Default::default()).unwrap();
        let a = ch.energy(1e-5, &ElectronState::new(1e-46, 0.0).unwrap()).unwrap();
        let b = ch.energy(1e-5, &ElectronState::new(1e-46, 1e-46).unwrap()).unwrap();
        let c = ch.energy(1e-5, &ElectronState::new(0.0, 1e-46).unwrap()).unwrap();
        assert!((b.value - a.value - c.value).abs() <= 1e-14 * b.value.abs());
        assert!(c.value != 0.0);
    }

    #[test]
    fn perpendicular_channel_refused_when_eta_is_one() {
        let e = ElectronState::new(1e-46, 1e-46).unwrap();
        let c = CavityConfig::from_zeta(1e-5, 0.3).unwrap();
        for m in [DielectricModel::PerfectConductor, DielectricModel::gold_plasma()] {
            let r = self_energy(&m, &c, &e, &Default::default());
            assert_eq!(r.unwrap_err(), Error::PerpendicularDivergent);
        }
        let par_only = channel_integrals(&DielectricModel::PerfectConductor, 1e-5, 0.3, Channels::Parallel, &Default::default())
            .unwrap();
        assert!(par_only.energy(1e-5, &e).is_err());
    }

    #[test]
    fn midpoint_force_vanishes() {
        let c = CavityConfig::from_zeta(1e-5, 0.5).unwrap();
        let f = dynamical_force(&DielectricModel::gold(), &c, &beta(0.01), &Default::default()).unwrap();
        assert!(f.value.abs() <= f.abs_error_estimate.max(1e-30), "{f:?}");
    }

    #[test]
    fn force_step_guard() {
        let c = CavityConfig::from_zeta(1e-5, 1e-4).unwrap();
        let r = dynamical_force(&DielectricModel::PerfectConductor, &c, &beta(0.01), &Default::default());
        assert!(matches!(r, Err(Error::StepHitsBoundary { .. })));
    }

    #[test]
    fn mass_shift_sign_and_zero() {
        let e = beta(0.01);
        assert!(mass_shift(1e-27, &e).unwrap() < 0.0);
        assert_eq!(mass_shift(0.0, &e).unwrap(), 0.0);
        let still = ElectronState::new(0.0, 0.0).unwrap();
        assert_eq!(mass_shift(1.0, &still), Err(Error::ZeroMomentum));
    }

    #[test]
    fn profile_keeps_grid_order_and_reports_bad_points() {
        let grid = [0.2, 1.5, 0.7];
        let out = shift_profile(&DielectricModel::PerfectConductor, 1e-5, &beta(0.01), &grid, &Default::default());
        assert_eq!(out.iter().map(|p| p.0).collect::<Vec<_>>(), grid);
        assert!(out[0].1.is_ok() && out[1].1.is_err() && out[2].1.is_ok());
    }

    #[test]
    fn invalid_settings_rejected() {
        let mut s = ShiftSettings::default();
        s.residue.contour_nodes = 6;
        assert!(channel_integrals(&DielectricModel::PerfectConductor, 1e-5, 0.5, Channels::Parallel, &s).is_err());
    }
}
