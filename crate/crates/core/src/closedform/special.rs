//! Real special functions: digamma, trigamma, harmonic numbers at real
//! argument, the dilogarithm and the Lerch transcendent.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selfenergy::integrate;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_4;

/// Accuracy controls for the series-based functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpecialFunctionAccuracy {
    pub target: f64,
    pub max_terms: usize,
}

impl Default for SpecialFunctionAccuracy {
    fn default() -> Self {
        Self {
            target: 1e-12,
            max_terms: 1_000_000,
        }
    }
}

impl SpecialFunctionAccuracy {
    pub fn validate(&self) -> Result<()> {
        if !(self.target >= 100.0 * f64::EPSILON && self.target < 1.0) {
            return Err(Error::invalid(
                "target",
                self.target,
                "must lie in [100 eps, 1)",
            ));
        }
        if self.max_terms == 0 {
            return Err(Error::invalid("max_terms", 0.0, "must be positive"));
        }
        Ok(())
    }
}

fn at_pole(function: &'static str, x: f64) -> Error {
    Error::Domain {
        function,
        value: x,
        reason: "pole at a non-positive integer",
    }
}

/// Recurrence threshold for the asymptotic expansions.
const ASYMPTOTIC_FROM: f64 = 10.0;

/// Digamma `psi(x)` for real `x` away from the poles at `0, -1, -2, ...`.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain {
            function: "digamma",
            value: x,
            reason: "argument must be finite",
        });
    }
    if x <= 0.0 {
        if x == x.floor() {
            return Err(at_pole("digamma", x));
        }
        // psi(x) = psi(1 - x) - pi cot(pi x)
        return Ok(digamma(1.0 - x)? - PI / (PI * x).tan());
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < ASYMPTOTIC_FROM {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r / 12.0))))));
    Ok(acc + x.ln() - 0.5 / x - series)
}

/// Trigamma `psi'(x)` for real `x` away from the poles.
pub fn trigamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain {
            function: "trigamma",
            value: x,
            reason: "argument must be finite",
        });
    }
    if x <= 0.0 {
        if x == x.floor() {
            return Err(at_pole("trigamma", x));
        }
        // psi'(x) + psi'(1 - x) = pi^2 / sin^2(pi x)
        let s = (PI * x).sin();
        return Ok(PI * PI / (s * s) - trigamma(1.0 - x)?);
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < ASYMPTOTIC_FROM {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    let series = 1.0 / 6.0
        - r * (1.0 / 30.0
            - r * (1.0 / 42.0 - r * (1.0 / 30.0 - r * (5.0 / 66.0 - r * (691.0 / 2730.0 - r * 7.0 / 6.0)))));
    Ok(acc + 1.0 / x + 0.5 * r + series * r / x)
}

/// Harmonic number continued to real argument, `H_x = psi(x + 1) + gamma`.
pub fn harmonic(x: f64) -> Result<f64> {
    if !(x > -1.0) {
        return Err(Error::Domain {
            function: "harmonic",
            value: x,
            reason: "requires x > -1",
        });
    }
    Ok(digamma(x + 1.0)? + EULER_GAMMA)
}

/// Dilogarithm `Li_2(x)` on `[-1, 1]`.
pub fn dilog(x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            function: "dilog",
            value: x,
            reason: "requires -1 <= x <= 1",
        });
    }
    const PI2_6: f64 = PI * PI / 6.0;
    if x == 1.0 {
        return Ok(PI2_6);
    }
    if x > 0.5 {
        // Li2(x) + Li2(1 - x) = pi^2/6 - ln x ln(1 - x)
        return Ok(PI2_6 - x.ln() * (-x).ln_1p() - dilog_series(1.0 - x));
    }
    if x < -0.5 {
        // Li2(x) = -Li2(x / (x - 1)) - ln^2(1 - x) / 2, with x/(x-1) in (1/3, 1/2]
        let l = (-x).ln_1p();
        return Ok(-dilog_series(x / (x - 1.0)) - 0.5 * l * l);
    }
    Ok(dilog_series(x))
}

/// `sum x^k / k^2` for `|x| <= 1/2`.
fn dilog_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut p = 1.0;
    for k in 1..200 {
        p *= x;
        let term = p / (k * k) as f64;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Lerch transcendent `Phi(x, s, a) = sum_k x^k / (k + a)^s` for
/// `0 <= x < 1`, `s >= 1`, `a > 0`.
pub fn lerch_phi(x: f64, s: f64, alpha: f64) -> Result<f64> {
    lerch_phi_with(x, s, alpha, &SpecialFunctionAccuracy::default())
}

/// Beyond this many series terms the integral representation is used.
const SERIES_TERM_LIMIT: f64 = 4000.0;

pub fn lerch_phi_with(x: f64, s: f64, alpha: f64, acc: &SpecialFunctionAccuracy) -> Result<f64> {
    acc.validate()?;
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain {
            function: "lerch_phi",
            value: x,
            reason: "requires 0 <= x < 1",
        });
    }
    if !(s >= 1.0 && s.is_finite()) {
        return Err(Error::Domain {
            function: "lerch_phi",
            value: s,
            reason: "requires s >= 1",
        });
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain {
            function: "lerch_phi",
            value: alpha,
            reason: "requires alpha > 0",
        });
    }
    if x == 0.0 {
        return Ok(alpha.powf(-s));
    }
    // terms needed for x^n < target
    let needed = acc.target.ln() / x.ln();
    if needed <= SERIES_TERM_LIMIT {
        lerch_series(x, s, alpha, acc)
    } else {
        lerch_integral(x, s, alpha, acc)
    }
}

/// Direct summation with the geometric tail bound
/// `x^n / ((n + a)^s (1 - x))`.
pub(crate) fn lerch_series(x: f64, s: f64, alpha: f64, acc: &SpecialFunctionAccuracy) -> Result<f64> {
    let mut sum = 0.0;
    let mut p = 1.0;
    for k in 0..acc.max_terms {
        let base = (k as f64 + alpha).powf(-s);
        sum += p * base;
        p *= x;
        let tail = p * (k as f64 + 1.0 + alpha).powf(-s) / (1.0 - x);
        if tail <= acc.target * sum {
            return Ok(sum);
        }
    }
    Err(Error::Domain {
        function: "lerch_phi",
        value: x,
        reason: "series did not reach the target within max_terms",
    })
}

/// `Phi = a^-s + ... + x^(m-1) (a+m-1)^-s + x^m Phi(x, s, a + m)` with
/// `a + m >= 1`, and for the remainder
/// `Phi(x, s, b) = (1/Gamma(s)) int_0^inf t^(s-1) e^(-b t) / (1 - x e^(-t)) dt`.
fn lerch_integral(x: f64, s: f64, alpha: f64, acc: &SpecialFunctionAccuracy) -> Result<f64> {
    let mut head = 0.0;
    let mut p = 1.0;
    let mut b = alpha;
    while b < 1.0 {
        head += p * b.powf(-s);
        p *= x;
        b += 1.0;
    }
    let one_minus_x = 1.0 - x;
    let f = |t: f64| -> Result<[f64; 1]> {
        // 1 - x e^-t = (1 - x) - x expm1(-t), free of cancellation near t = 0
        let den = one_minus_x - x * (-t).exp_m1();
        Ok([t.powf(s - 1.0) * (-b * t).exp() / den])
    };
    // the integrand varies on the scale (1 - x) near the origin
    let knee = (10.0 * one_minus_x).min(1.0);
    let upper = (s + 40.0) / b;
    let tol = acc.target;
    let a = integrate(f, 0.0, knee, tol, 4096, [true])?;
    let c = integrate(f, knee, upper, tol, 4096, [true])?;
    if !(a.converged && c.converged) {
        return Err(Error::Domain {
            function: "lerch_phi",
            value: x,
            reason: "integral representation did not converge",
        });
    }
    Ok(head + p * (a.value[0] + c.value[0]) / gamma_real(s))
}

/// Gamma function for `s >= 1` (Lanczos, g = 7).
fn gamma_real(s: f64) -> f64 {
    if s == s.floor() && s < 25.0 {
        return (1..s as u64).map(|k| k as f64).product();
    }
    const G: f64 = 7.0;
    #[allow(clippy::excessive_precision)]
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = s - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Hurwitz zeta at `s = 2`, the `x = 1` endpoint of `Phi(x, 2, a)`.
pub fn hurwitz_zeta2(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain {
            function: "hurwitz_zeta2",
            value: alpha,
            reason: "requires alpha > 0",
        });
    }
    trigamma(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn digamma_known_values() {
        assert!(close(digamma(1.0).unwrap(), -EULER_GAMMA, 1e-15));
        assert!(close(digamma(0.5).unwrap(), -EULER_GAMMA - 2.0 * LN_2, 1e-15));
        assert!(close(digamma(-0.5).unwrap(), 2.0 - EULER_GAMMA - 2.0 * LN_2, 1e-14));
        assert!(digamma(0.0).is_err() && digamma(-3.0).is_err());
    }

    #[test]
    fn trigamma_known_values() {
        assert!(close(trigamma(1.0).unwrap(), PI * PI / 6.0, 1e-15));
        assert!(close(trigamma(0.5).unwrap(), PI * PI / 2.0, 1e-15));
        assert!(close(trigamma(-0.5).unwrap(), PI * PI / 2.0 + 4.0, 1e-14));
        assert!(trigamma(-2.0).is_err());
    }

    #[test]
    fn harmonic_values() {
        assert!(close(harmonic(3.0).unwrap(), 11.0 / 6.0, 1e-14));
        assert!(close(harmonic(2.5).unwrap(), 46.0 / 15.0 - 2.0 * LN_2, 1e-14));
        assert!(close(harmonic(0.0).unwrap(), 0.0, 1e-15));
        assert!(harmonic(-1.0).is_err());
    }

    #[test]
    fn dilog_known_values() {
        assert_eq!(dilog(1.0).unwrap(), PI * PI / 6.0);
        assert_eq!(dilog(0.0).unwrap(), 0.0);
        assert!(close(dilog(0.5).unwrap(), PI * PI / 12.0 - 0.5 * LN_2 * LN_2, 1e-15));
        assert!(close(dilog(-1.0).unwrap(), -PI * PI / 12.0, 1e-15));
        assert!(dilog(1.0001).is_err());
    }

    #[test]
    fn dilog_half_matches_long_series() {
        let brute: f64 = (1..=1_000_000i32).rev().map(|k| 0.5f64.powi(k) / (k as f64 * k as f64)).sum();
        assert!(close(dilog(0.5).unwrap(), brute, 1e-14));
    }

    #[test]
    fn lerch_brute_force() {
        let brute: f64 = (0..200).rev().map(|k| 0.25f64.powi(k) / (k as f64 + 0.5).powi(2)).sum();
        assert!(close(lerch_phi(0.25, 2.0, 0.5).unwrap(), brute, 1e-12));
    }

    #[test]
    fn lerch_domain() {
        assert!(lerch_phi(1.0, 2.0, 0.5).is_err());
        assert!(lerch_phi(0.5, 0.5, 0.5).is_err());
        assert!(lerch_phi(0.5, 2.0, 0.0).is_err());
    }

    #[test]
    fn lerch_integral_matches_series() {
        let acc = SpecialFunctionAccuracy::default();
        for &(x, a) in &[(0.97, 0.5), (0.99, 0.3), (0.995, 1.7), (0.9, 0.01)] {
            let s = lerch_series(x, 2.0, a, &acc).unwrap();
            let i = lerch_integral(x, 2.0, a, &acc).unwrap();
            assert!(close(i, s, 1e-11), "x={x} a={a}: {i} vs {s}");
        }
    }

    #[test]
    fn lerch_tends_to_trigamma() {
        let a = 0.3;
        let near = lerch_phi(1.0 - 1e-9, 2.0, a).unwrap();
        let limit = hurwitz_zeta2(a).unwrap();
        // dPhi/dx diverges only logarithmically at x = 1
        assert!((near - limit).abs() < 1e-6 * limit, "{near} {limit}");
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_real(4.0), 6.0);
        assert!(close(gamma_real(2.5), 0.75 * PI.sqrt(), 1e-13));
    }

    proptest! {
        #[test]
        fn euler_reflection(x in 0.001f64..0.999) {
            let lhs = dilog(x).unwrap() + dilog(1.0 - x).unwrap();
            let rhs = PI * PI / 6.0 - x.ln() * (1.0 - x).ln();
            prop_assert!(close(lhs, rhs, 1e-10));
        }

        #[test]
        fn lerch_index_shift(x in 0.01f64..0.999) {
            let lhs = lerch_phi(x, 2.0, 1.0).unwrap();
            let rhs = dilog(x).unwrap() / x;
            prop_assert!(close(lhs, rhs, 1e-10), "{} {}", lhs, rhs);
        }

        #[test]
        fn lerch_at_zero(s in 1.0f64..5.0, a in 0.01f64..10.0) {
            prop_assert_eq!(lerch_phi(0.0, s, a).unwrap(), a.powf(-s));
        }

        #[test]
        fn lerch_recurrence(x in 0.0f64..0.999, a in 0.05f64..5.0) {
            let lhs = lerch_phi(x, 2.0, a).unwrap();
            let rhs = a.powi(-2) + x * lerch_phi(x, 2.0, a + 1.0).unwrap();
            prop_assert!(close(lhs, rhs, 1e-10));
        }

        #[test]
        fn digamma_recurrence(x in 0.01f64..10.0) {
            let lhs = harmonic(x).unwrap() - harmonic(x - 1.0).unwrap();
            prop_assert!(close(lhs, 1.0 / x, 1e-10));
            prop_assert!(close(trigamma(x).unwrap() - trigamma(x + 1.0).unwrap(), 1.0 / (x * x), 1e-10));
        }
    }
}
