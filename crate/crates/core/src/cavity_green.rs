//! Equal-point scattering Green tensor of a planar cavity, as an integrand over
//! the parallel wavenumber.
//!
//! Everything here is in reduced units for a chosen length scale `L`:
//! wavenumbers in `1/L`, frequencies in `c/L`, positions in `L`. The Green
//! tensor is normalised so that `curl curl G - (w/c)^2 eps G = delta`, giving
//!
//! `G_xx(r, r, w) = int_0^inf dk  parallel(k, w)` and likewise for `G_zz`.
//!
//! Each polarisation contributes a near-plate reflection `exp(2i kz z)`, a
//! far-plate reflection `exp(2i kz (d - z))` and a round trip `exp(2i kz d)`,
//! all resummed over multiple reflections by `1 - r^2 exp(2i kz d)`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64 as C64;

use crate::dielectric::DielectricModel;
use crate::error::{Error, Result};
use crate::poly;
use crate::quantities::constants::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    /// TE
    S,
    /// TM
    P,
}

/// A dielectric model viewed in reduced units for length scale `L`.
#[derive(Debug, Clone)]
pub struct Medium<'a> {
    model: &'a DielectricModel,
    frequency_scale: f64,
    rational: Option<(f64, f64, f64)>,
}

impl<'a> Medium<'a> {
    pub fn new(model: &'a DielectricModel, length_scale: f64) -> Result<Self> {
        if !(length_scale.is_finite() && length_scale > 0.0) {
            return Err(Error::invalid("length_scale", length_scale, "must be positive"));
        }
        let frequency_scale = SPEED_OF_LIGHT / length_scale;
        let rational = model
            .rational_parameters()
            .map(|(wp, wt, g)| (wp / frequency_scale, wt / frequency_scale, g / frequency_scale));
        Ok(Self {
            model,
            frequency_scale,
            rational,
        })
    }

    pub fn model(&self) -> &DielectricModel {
        self.model
    }

    /// `c / L` in rad/s.
    pub fn frequency_scale(&self) -> f64 {
        self.frequency_scale
    }

    /// `w^2 eps(w)` at reduced frequency `w`.
    pub fn omega_sq_epsilon(&self, omega: C64) -> Result<C64> {
        match self.rational {
            Some((wp, wt, g)) => {
                let w2 = omega * omega;
                if wt == 0.0 && g == 0.0 {
                    return Ok(w2 - wp * wp);
                }
                if wt == 0.0 {
                    let den = omega + C64::i() * g;
                    return Ok(w2 - wp * wp * omega / den);
                }
                let den = w2 - wt * wt + C64::i() * g * omega;
                if den.norm() == 0.0 {
                    return Err(Error::NonFinite {
                        what: "permittivity at a material resonance",
                    });
                }
                Ok(w2 - wp * wp * w2 / den)
            }
            None => {
                let eps = self.model.epsilon(omega * self.frequency_scale)?;
                Ok(omega * omega * eps)
            }
        }
    }

    /// Lower bound on the distance from `w = 0` to the nearest singularity of
    /// the cavity integrand at parallel wavenumber `k` (reduced units).
    ///
    /// Covers the vacuum and medium light lines, material poles, the
    /// quasi-static surface mode and `eps = 0`, plus a guard for the
    /// slow gap mode of metallic walls.
    pub fn nearest_singularity(&self, k: f64) -> f64 {
        let mut nearest = k;
        let i = C64::i();
        let mut consider = |roots: Vec<C64>| {
            for r in roots {
                let n = r.norm();
                if n > 0.0 && n.is_finite() {
                    nearest = nearest.min(n);
                }
            }
        };
        match (self.model, self.rational) {
            (DielectricModel::PerfectConductor, _) => {}
            (_, Some((wp, wt, g))) => {
                let one = C64::new(1.0, 0.0);
                let base = -(wt * wt);
                // material poles, eps = -1, eps = 0
                for shift in [0.0, 0.5 * wp * wp, wp * wp] {
                    if wt == 0.0 && shift == 0.0 {
                        // w (w + i g): the root at 0 cancels in w^2 eps
                        consider(vec![-i * g]);
                    } else {
                        consider(poly::roots(&[C64::from(base - shift), i * g, one]));
                    }
                }
                // medium light line w^2 eps(w) = k^2
                let k2 = k * k;
                let line = if wt == 0.0 && g == 0.0 {
                    poly::roots(&[C64::from(-(wp * wp + k2)), C64::from(0.0), one])
                } else if wt == 0.0 {
                    poly::roots(&[-i * g * k2, C64::from(-(wp * wp + k2)), i * g, one])
                } else {
                    poly::roots(&[
                        C64::from(k2 * wt * wt),
                        -i * g * k2,
                        C64::from(-(wt * wt + wp * wp + k2)),
                        i * g,
                        one,
                    ])
                };
                consider(line);
                consider(vec![C64::from(k / (1.0 + 2.0 / wp).sqrt())]);
            }
            (DielectricModel::Custom(c), None) => {
                let eps0 = c.static_taylor.eps0.norm().max(1.0);
                consider(vec![
                    C64::from(k / eps0.sqrt()),
                    C64::from(c.singularity_scale / self.frequency_scale),
                ]);
            }
            _ => unreachable!("built-in kinds always carry rational parameters"),
        }
        nearest
    }
}

/// Square root on the branch `Im >= 0` (and `Re >= 0` when `Im = 0`).
pub fn decaying_sqrt(x: C64) -> C64 {
    let r = x.sqrt();
    if r.im < 0.0 || (r.im == 0.0 && r.re < 0.0) {
        -r
    } else {
        r
    }
}

/// A `(k_par, omega)` evaluation point with both normal wavenumbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KOmegaPoint {
    pub k_par: f64,
    pub omega: C64,
    pub kz_vac: C64,
    /// `None` for a perfect conductor.
    pub kz_med: Option<C64>,
    omega_sq_eps: Option<C64>,
}

impl KOmegaPoint {
    pub fn new(k_par: f64, omega: C64, medium: &Medium<'_>) -> Result<Self> {
        if !(k_par.is_finite() && k_par >= 0.0) {
            return Err(Error::invalid("k_par", k_par, "must be finite and >= 0"));
        }
        let kz_vac = decaying_sqrt(omega * omega - k_par * k_par);
        let (kz_med, omega_sq_eps) = if medium.model().is_perfect_conductor() {
            (None, None)
        } else {
            let w2e = medium.omega_sq_epsilon(omega)?;
            (Some(decaying_sqrt(w2e - k_par * k_par)), Some(w2e))
        };
        debug_assert!(kz_vac.im >= 0.0);
        debug_assert!(kz_med.is_none_or(|k| k.im >= 0.0));
        Ok(Self {
            k_par,
            omega,
            kz_vac,
            kz_med,
            omega_sq_eps,
        })
    }

    fn pole(&self) -> Error {
        Error::SurfaceModePole {
            k_par: self.k_par,
            omega_re: self.omega.re,
            omega_im: self.omega.im,
        }
    }
}

/// Half-space reflection coefficient seen from the vacuum side.
pub fn fresnel(pol: Polarization, pt: &KOmegaPoint) -> Result<C64> {
    let (kz_med, w2e) = match (pt.kz_med, pt.omega_sq_eps) {
        (Some(k), Some(w)) => (k, w),
        _ => {
            return Ok(match pol {
                Polarization::S => C64::new(-1.0, 0.0),
                Polarization::P => C64::new(1.0, 0.0),
            })
        }
    };
    let kv = pt.kz_vac;
    let (num, den) = match pol {
        Polarization::S => (kv - kz_med, kv + kz_med),
        Polarization::P => {
            // (eps kv - km) / (eps kv + km), scaled by w^2
            let w2 = pt.omega * pt.omega;
            (w2e * kv - w2 * kz_med, w2e * kv + w2 * kz_med)
        }
    };
    if den.norm() == 0.0 || !den.norm().is_finite() {
        return Err(pt.pole());
    }
    Ok(num / den)
}

/// Integrand channels of the trace: `parallel` multiplies `<p_par^2>` (it is
/// the `G_xx = G_yy` integrand), `perpendicular` multiplies `<p_perp^2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelWeights {
    pub parallel: C64,
    pub perpendicular: C64,
}

impl ChannelWeights {
    pub fn zero() -> Self {
        Self {
            parallel: C64::new(0.0, 0.0),
            perpendicular: C64::new(0.0, 0.0),
        }
    }
}

/// `exp(x) - 1` without cancellation for small `|x|`.
fn expm1(x: C64) -> C64 {
    let half = (0.5 * x.im).sin();
    C64::new(x.re.exp_m1() * x.im.cos() - 2.0 * half * half, x.re.exp() * x.im.sin())
}

fn prefactor(pt: &KOmegaPoint) -> C64 {
    C64::i() / (8.0 * PI) * pt.k_par / pt.kz_vac
}

/// `(1 + r_s, r_p - 1)`, the departures from a perfect conductor, computed
/// without cancellation. Both vanish for a perfect conductor.
pub fn conductor_defects(pt: &KOmegaPoint) -> Result<(C64, C64)> {
    let (kz_med, w2e) = match (pt.kz_med, pt.omega_sq_eps) {
        (Some(k), Some(w)) => (k, w),
        _ => return Ok((C64::new(0.0, 0.0), C64::new(0.0, 0.0))),
    };
    let kv = pt.kz_vac;
    let w2 = pt.omega * pt.omega;
    let den_s = kv + kz_med;
    let den_p = w2e * kv + w2 * kz_med;
    for den in [den_s, den_p] {
        if den.norm() == 0.0 || !den.norm().is_finite() {
            return Err(pt.pole());
        }
    }
    Ok((2.0 * kv / den_s, -2.0 * w2 * kz_med / den_p))
}

/// The cavity integrand split as `conductor + material`. `conductor` is the
/// perfect-conductor integrand and depends on the plates only through
/// `d`; `material` is the exact remainder, proportional to the
/// [`conductor_defects`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitWeights {
    pub conductor: ChannelWeights,
    pub material: ChannelWeights,
}

impl SplitWeights {
    pub fn total(&self) -> ChannelWeights {
        ChannelWeights {
            parallel: self.conductor.parallel + self.material.parallel,
            perpendicular: self.conductor.perpendicular + self.material.perpendicular,
        }
    }
}

/// Numerator or denominator as a quadratic in a conductor defect `a`.
#[derive(Clone, Copy)]
struct Quadratic([C64; 3]);

impl Quadratic {
    fn at(&self, a: C64) -> C64 {
        self.0[0] + a * (self.0[1] + a * self.0[2])
    }
}

/// `N(a) / D(a)` split into `N(0) / D(0)` and the remainder
/// `(a (N1 D0 - N0 D1) + a^2 (N2 D0 - N0 D2)) / (D(a) D0)`.
fn split_ratio(num: Quadratic, den: Quadratic, a: C64) -> (C64, C64) {
    let [n0, n1, n2] = num.0;
    let [d0, d1, d2] = den.0;
    let base = n0 / d0;
    let rest = a * ((n1 * d0 - n0 * d1) + a * (n2 * d0 - n0 * d2)) / (den.at(a) * d0);
    (base, rest)
}

/// Cavity with identical plates at `0` and `d`, electron at `z`.
pub fn cavity_trace_integrand(pt: &KOmegaPoint, z: f64, d: f64) -> Result<ChannelWeights> {
    cavity_trace_split(pt, z, d).map(|s| s.total())
}

/// [`cavity_trace_integrand`] as conductor part plus material remainder.
pub fn cavity_trace_split(pt: &KOmegaPoint, z: f64, d: f64) -> Result<SplitWeights> {
    if !(z > 0.0 && z < d) {
        return Err(Error::invalid("z", z, "must lie strictly between the plates"));
    }
    // r_s = -1 + a_s, r_p = 1 + a_p
    let (a_s, a_p) = conductor_defects(pt)?;
    let kv = pt.kz_vac;
    let two_i_kv = 2.0 * C64::i() * kv;
    let w2 = pt.omega * pt.omega;
    let q = |a: C64, b: C64, c: C64| Quadratic([a, b, c]);
    // Numerators r(e1 + e2) + 2 r^2 e3 (sign of the first term flipped for the
    // tangential p part) and denominators 1 - r^2 e3, expanded in the defects.
    // Near k = 0 the phases approach one and everything is O(k): carry phases
    // minus one. Far from it the direct phases are cancellation-free.
    let (s_num, s_den, pt_num, pn_num, p_den) = if (two_i_kv * d).re < -LN_2 {
        let nf = (two_i_kv * z).exp() + (two_i_kv * (d - z)).exp();
        let e3 = (two_i_kv * d).exp();
        let one = C64::new(1.0, 0.0);
        (
            q(2.0 * e3 - nf, nf - 4.0 * e3, 2.0 * e3),
            q(one - e3, 2.0 * e3, -e3),
            q(2.0 * e3 - nf, 4.0 * e3 - nf, 2.0 * e3),
            q(nf + 2.0 * e3, nf + 4.0 * e3, 2.0 * e3),
            q(one - e3, -2.0 * e3, -e3),
        )
    } else {
        let nf = expm1(two_i_kv * z) + expm1(two_i_kv * (d - z));
        let m3 = expm1(two_i_kv * d);
        let e3 = 1.0 + m3;
        (
            q(2.0 * m3 - nf, nf - 4.0 * m3 - 2.0, 2.0 * e3),
            q(-m3, 2.0 * e3, -e3),
            q(2.0 * m3 - nf, 2.0 + 4.0 * m3 - nf, 2.0 * e3),
            q(nf + 2.0 * m3 + 4.0, nf + 4.0 * m3 + 6.0, 2.0 * e3),
            q(-m3, -2.0 * e3, -e3),
        )
    };
    for den in [s_den.0[0], s_den.at(a_s), p_den.0[0], p_den.at(a_p)] {
        if den.norm() == 0.0 {
            return Err(Error::CavityResonance {
                k_par: pt.k_par,
                omega_re: pt.omega.re,
                omega_im: pt.omega.im,
            });
        }
    }
    let (s0, s1) = split_ratio(s_num, s_den, a_s);
    let (t0, t1) = split_ratio(pt_num, p_den, a_p);
    let (n0, n1) = split_ratio(pn_num, p_den, a_p);

    let pre = prefactor(pt);
    let tan = kv * kv / w2;
    let norm = 2.0 * pt.k_par * pt.k_par / w2;
    Ok(SplitWeights {
        conductor: ChannelWeights {
            parallel: pre * (s0 + tan * t0),
            perpendicular: pre * norm * n0,
        },
        material: ChannelWeights {
            parallel: pre * (s1 + tan * t1),
            perpendicular: pre * norm * n1,
        },
    })
}

/// Single interface at `0`, electron at `z > 0`.
pub fn single_interface_trace_integrand(pt: &KOmegaPoint, z: f64) -> Result<ChannelWeights> {
    if !(z > 0.0) {
        return Err(Error::invalid("z", z, "must be above the interface"));
    }
    let rs = fresnel(Polarization::S, pt)?;
    let rp = fresnel(Polarization::P, pt)?;
    let kv = pt.kz_vac;
    let phase = (2.0 * C64::i() * kv * z).exp();
    let w2 = pt.omega * pt.omega;
    let pre = prefactor(pt);
    Ok(ChannelWeights {
        parallel: pre * phase * (rs - kv * kv / w2 * rp),
        perpendicular: pre * phase * 2.0 * pt.k_par * pt.k_par / w2 * rp,
    })
}
