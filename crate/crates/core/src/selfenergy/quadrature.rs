//! Globally adaptive Gauss-Kronrod (10/21) quadrature for vector integrands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSettings {
    /// Upper cutoff in `u = 2 k min(z, d - z)`.
    pub u_max: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            u_max: 60.0,
            rel_tol: 1e-9,
            max_panels: 2048,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::invalid("rel_tol", self.rel_tol, "must lie in (0, 1)"));
        }
        if (-self.u_max).exp() >= self.rel_tol * 1e-3 {
            return Err(Error::invalid(
                "u_max",
                self.u_max,
                "exp(-u_max) must be below rel_tol * 1e-3",
            ));
        }
        if self.max_panels == 0 {
            return Err(Error::invalid("max_panels", 0.0, "must be at least 1"));
        }
        Ok(())
    }
}

// Kronrod abscissae (positive half, descending) and weights; Gauss weights for
// the odd-indexed abscissae. From QUADPACK qk21.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    abs: [f64; N],
}

fn gk21<const N: usize, F>(f: &F, a: f64, b: f64) -> Result<Panel<N>>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut abs = [0.0; N];
    for c in 0..N {
        kron[c] = fc[c] * WGK[10];
        abs[c] = fc[c].abs() * WGK[10];
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let lo = f(center - dx)?;
        let hi = f(center + dx)?;
        for c in 0..N {
            let s = lo[c] + hi[c];
            kron[c] += WGK[j] * s;
            abs[c] += WGK[j] * (lo[c].abs() + hi[c].abs());
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for c in 0..N {
        value[c] = kron[c] * half;
        error[c] = ((kron[c] - gauss[c]) * half).abs();
        abs[c] *= half.abs();
        if !value[c].is_finite() {
            return Err(Error::NonFinite {
                what: "quadrature integrand",
            });
        }
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        abs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<const N: usize> {
    pub value: [f64; N],
    pub abs_error: [f64; N],
    pub panels: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Integrate `f` over `[a, b]`, bisecting the panel with the largest error
/// until every component with `controlled[c]` meets
/// `err <= max(rel_tol |I|, 50 eps int|f|)` or `max_panels` is reached.
/// Uncontrolled components ride along on the same partition.
pub fn integrate<const N: usize, F>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_panels: usize,
    controlled: [bool; N],
) -> Result<QuadratureResult<N>>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    let mut panels = vec![gk21(&f, a, b)?];
    let mut evaluations = 21;
    loop {
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        let mut abs = [0.0; N];
        for p in &panels {
            for c in 0..N {
                value[c] += p.value[c];
                error[c] += p.error[c];
                abs[c] += p.abs[c];
            }
        }
        let done = (0..N).all(|c| {
            !controlled[c] || error[c] <= (rel_tol * value[c].abs()).max(50.0 * f64::EPSILON * abs[c])
        });
        if done || panels.len() >= max_panels {
            return Ok(QuadratureResult {
                value,
                abs_error: error,
                panels: panels.len(),
                evaluations,
                converged: done,
            });
        }
        // worst panel measured relative to each controlled component's target
        let weight: Vec<f64> = (0..N)
            .map(|c| {
                if controlled[c] {
                    1.0 / (rel_tol * value[c].abs()).max(50.0 * f64::EPSILON * abs[c]).max(f64::MIN_POSITIVE)
                } else {
                    0.0
                }
            })
            .collect();
        let (worst, _) = panels
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (0..N).map(|c| p.error[c] * weight[c]).sum::<f64>()))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk21(&f, p.a, mid)?);
        panels.push(gk21(&f, mid, p.b)?);
        evaluations += 42;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| Ok([x.powi(5) - 3.0 * x * x + 1.0]), 0.0, 2.0, 1e-12, 10, [true]).unwrap();
        let want = 64.0 / 6.0 - 8.0 + 2.0;
        assert!((r.value[0] - want).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn exponential_tail() {
        // int_0^60 u^2 e^-u du = 2 (1 - e^-60 (1 + 60 + 1800))
        let r = integrate(|u: f64| Ok([u * u * (-u).exp()]), 0.0, 60.0, 1e-12, 500, [true]).unwrap();
        assert!((r.value[0] - 2.0).abs() < 1e-12, "{}", r.value[0]);
        assert!(r.converged);
    }

    #[test]
    fn vector_components_share_partition() {
        let r = integrate(
            |x: f64| Ok([x.sin(), (1.0 + x).ln()]),
            0.0,
            std::f64::consts::PI,
            1e-12,
            200,
            [true, false],
        )
        .unwrap();
        assert!((r.value[0] - 2.0).abs() < 1e-12);
        let pi = std::f64::consts::PI;
        let want = (1.0 + pi) * (1.0 + pi).ln() - pi;
        assert!((r.value[1] - want).abs() < 1e-10);
    }

    #[test]
    fn reports_non_convergence() {
        let r = integrate(|x: f64| Ok([x.sqrt().recip()]), 0.0, 1.0, 1e-14, 4, [true]).unwrap();
        assert!(!r.converged);
        assert_eq!(r.panels, 4);
    }

    #[test]
    fn settings_validation() {
        assert!(QuadratureSettings::default().validate().is_ok());
        let s = QuadratureSettings {
            u_max: 10.0,
            ..Default::default()
        };
        assert!(s.validate().is_err());
    }
}
