//! Roots of small complex polynomials (Durand-Kerner iteration).

use num_complex::Complex64 as C64;

/// Roots of `sum coeffs[i] x^i`. Leading coefficient must be non-zero.
pub(crate) fn roots(coeffs: &[C64]) -> Vec<C64> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |x: C64| monic.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * x + c);

    // Cauchy bound for the initial circle
    let bound = 1.0 + monic[..degree].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = C64::from_polar(1.0, 0.4);
    let mut z: Vec<C64> = (0..degree)
        .map(|k| seed.powu(k as u32) * bound * 0.5 + C64::new(1e-3 * bound, 0.0) * k as f64)
        .collect();

    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..degree {
            let mut den = C64::new(1.0, 0.0);
            for j in 0..degree {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                den = C64::new(f64::EPSILON, 0.0);
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm() / (1.0 + z[i].norm()));
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}
