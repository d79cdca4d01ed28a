//! Residues at the origin by trapezoidal quadrature on a circle.
//!
//! For `f` analytic in a punctured disk, `(1/2 pi i) oint f dw` over a circle of
//! radius `rho` equals the mean of `f(w_j) w_j` over equispaced nodes up to
//! terms of the Laurent series with index `-1 +- N`; the rule is exact for any
//! pole order below `N`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResidueSettings {
    /// Contour radius as a fraction of the distance to the nearest singularity.
    pub radius_fraction: f64,
    /// Trapezoid nodes on the circle; even, at least 8.
    pub contour_nodes: usize,
    /// How many times the radius is halved to confirm the value.
    pub radius_halving_checks: usize,
    /// Relative agreement required across halvings.
    pub tolerance: f64,
}

impl Default for ResidueSettings {
    fn default() -> Self {
        Self {
            radius_fraction: 0.1,
            contour_nodes: 64,
            radius_halving_checks: 2,
            tolerance: 1e-8,
        }
    }
}

impl ResidueSettings {
    pub fn validate(&self) -> Result<()> {
        if self.contour_nodes < 8 || !self.contour_nodes.is_multiple_of(2) {
            return Err(Error::invalid(
                "contour_nodes",
                self.contour_nodes as f64,
                "must be even and at least 8",
            ));
        }
        if !(self.radius_fraction > 0.0 && self.radius_fraction < 1.0) {
            return Err(Error::invalid(
                "radius_fraction",
                self.radius_fraction,
                "must lie in (0, 1)",
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid("tolerance", self.tolerance, "must be positive"));
        }
        Ok(())
    }
}

/// A residue with its stability spread across radius halvings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residue<const N: usize> {
    pub value: [C64; N],
    /// Largest change seen when shrinking the contour, per component.
    pub spread: [f64; N],
    pub radius: f64,
}

/// One trapezoid pass. Also returns `rho * max |f|` per component, the scale
/// that bounds round-off in the result.
pub(crate) fn contour_mean<const N: usize, F>(f: &F, radius: f64, nodes: usize) -> Result<([C64; N], [f64; N])>
where
    F: Fn(C64) -> Result<[C64; N]>,
{
    let mut acc = [C64::new(0.0, 0.0); N];
    let mut scale = [0.0f64; N];
    // half-step offset keeps nodes off the real axis
    for j in 0..nodes {
        let theta = 2.0 * PI * (j as f64 + 0.5) / nodes as f64;
        let w = C64::from_polar(radius, theta);
        let vals = f(w)?;
        for c in 0..N {
            let term = vals[c] * w;
            if !(term.re.is_finite() && term.im.is_finite()) {
                return Err(Error::NonFinite {
                    what: "contour integrand",
                });
            }
            acc[c] += term;
            scale[c] = scale[c].max(term.norm());
        }
    }
    let n = nodes as f64;
    Ok((acc.map(|a| a / n), scale))
}

/// Residue at the origin of a vector of functions sharing the same evaluation,
/// confirmed by shrinking the contour. `k_par` is only used for diagnostics.
pub(crate) fn residue_vector<const N: usize, F>(
    f: F,
    radius: f64,
    settings: &ResidueSettings,
    k_par: f64,
) -> Result<Residue<N>>
where
    F: Fn(C64) -> Result<[C64; N]>,
{
    let (first, scale0) = contour_mean(&f, radius, settings.contour_nodes)?;
    let mut spread = [0.0f64; N];
    let mut rho = radius;
    for _ in 0..settings.radius_halving_checks {
        rho *= 0.5;
        let (next, scale) = contour_mean(&f, rho, settings.contour_nodes)?;
        for c in 0..N {
            let diff = (next[c] - first[c]).norm();
            let roundoff = 100.0 * f64::EPSILON * scale[c].max(scale0[c]);
            if diff > settings.tolerance * first[c].norm() + roundoff {
                return Err(Error::ResidueNotConverged {
                    k_par,
                    radius,
                    first: first[c].re,
                    shrunk_radius: rho,
                    second: next[c].re,
                });
            }
            spread[c] = spread[c].max(diff);
        }
    }
    Ok(Residue {
        value: first,
        spread,
        radius,
    })
}

/// `Res_{w=0} f` on a circle of the given radius, checked by halving it
/// `settings.radius_halving_checks` times.
pub fn residue_at_zero<F>(f: F, radius: f64, settings: &ResidueSettings) -> Result<Residue<1>>
where
    F: Fn(C64) -> Result<C64>,
{
    settings.validate()?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", radius, "contour radius must be positive"));
    }
    residue_vector(|w| f(w).map(|v| [v]), radius, settings, f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn res(f: impl Fn(C64) -> C64, radius: f64) -> C64 {
        residue_at_zero(|w| Ok(f(w)), radius, &ResidueSettings::default())
            .unwrap()
            .value[0]
    }

    #[test]
    fn simple_pole() {
        assert!((res(|w| 3.0 / w, 0.5) - 3.0).norm() < 1e-14);
    }

    #[test]
    fn third_order_laurent_polynomial() {
        let f = |w: C64| 5.0 / (w * w * w) + 2.0 / w + 7.0 + w * w;
        assert!((res(f, 0.1) - 2.0).norm() < 1e-12);
    }

    #[test]
    fn entire_over_w() {
        assert!((res(|w| w.exp() / w, 0.5) - 1.0).norm() < 1e-14);
    }

    #[test]
    fn detects_enclosed_pole() {
        // pole at 0.3 lies inside radius 0.5 but outside 0.25
        let r = residue_at_zero(
            |w| Ok(1.0 / w + 1.0 / (w - 0.3)),
            0.5,
            &ResidueSettings::default(),
        );
        assert!(matches!(r, Err(Error::ResidueNotConverged { .. })));
    }

    #[test]
    fn settings_validated() {
        let bad = ResidueSettings {
            contour_nodes: 7,
            ..Default::default()
        };
        assert!(residue_at_zero(|w| Ok(1.0 / w), 1.0, &bad).is_err());
        assert!(residue_at_zero(|w| Ok(1.0 / w), 0.0, &ResidueSettings::default()).is_err());
    }

    #[test]
    fn failure_propagates() {
        let r = residue_at_zero(|_| Err(Error::ZeroMomentum), 1.0, &ResidueSettings::default());
        assert_eq!(r.unwrap_err(), Error::ZeroMomentum);
    }

    proptest! {
        // Laurent polynomials with poles up to order 5
        #[test]
        fn exact_on_laurent_polynomials(
            coeffs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 9),
            radius in 0.2f64..2.0,
        ) {
            let a: Vec<C64> = coeffs.iter().map(|&(r, i)| c(r, i)).collect();
            // a[j] multiplies w^(j - 5), j = 0..9
            let f = |w: C64| {
                a.iter().enumerate().fold(c(0.0, 0.0), |acc, (j, cj)| acc + cj * w.powi(j as i32 - 5))
            };
            let settings = ResidueSettings { contour_nodes: 32, radius_halving_checks: 0, ..Default::default() };
            let got = residue_at_zero(|w| Ok(f(w)), radius, &settings).unwrap().value[0];
            let want = a[4];
            let scale = a.iter().enumerate()
                .map(|(j, cj)| cj.norm() * radius.powi(j as i32 - 4))
                .fold(0.0, f64::max);
            prop_assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0) + 1e-14 * scale,
                "got {} want {}", got, want);
        }
    }
}
