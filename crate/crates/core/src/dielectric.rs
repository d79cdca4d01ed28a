//! Material response models `eps(omega)` on complex frequency.
//!
//! All model parameters are angular frequencies in rad/s. The sign convention
//! is `eps = 1 - wp^2 / (w^2 - wT^2 + i g w)`, so a passive medium has
//! `Im eps > 0` for `w > 0`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Gold, as parametrised for the self-energy figures: `wp = 1.37e16`,
/// `wT = 1e15`, `gamma = 4.05e13` (rad/s).
pub const GOLD_PLASMA_FREQUENCY: f64 = 1.37e16;
pub const GOLD_RESONANCE_FREQUENCY: f64 = 1.0e15;
pub const GOLD_DAMPING: f64 = 4.05e13;

/// `eps(0)`, `eps'(0)`, `eps''(0)`, derivatives taken with respect to
/// angular frequency (units s and s^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticTaylor {
    pub eps0: C64,
    pub d1: C64,
    pub d2: C64,
}

impl StaticTaylor {
    /// `(eps(0) - 1) / (eps(0) + 1)`.
    pub fn eta0(&self) -> C64 {
        (self.eps0 - 1.0) / (self.eps0 + 1.0)
    }
}

type EpsilonFn = dyn Fn(C64) -> C64 + Send + Sync;

/// A user-supplied response. The callable takes rad/s.
///
/// `singularity_scale` must be a lower bound (rad/s) on the distance from the
/// origin to the nearest pole or zero of `eps`; contour radii stay below it.
#[derive(Clone)]
pub struct CustomModel {
    pub label: String,
    epsilon: Arc<EpsilonFn>,
    pub static_taylor: StaticTaylor,
    pub singularity_scale: f64,
}

impl CustomModel {
    pub fn new<F>(
        label: impl Into<String>,
        epsilon: F,
        static_taylor: StaticTaylor,
        singularity_scale: f64,
    ) -> Result<Self>
    where
        F: Fn(C64) -> C64 + Send + Sync + 'static,
    {
        if !(singularity_scale.is_finite() && singularity_scale > 0.0) {
            return Err(Error::invalid(
                "singularity_scale",
                singularity_scale,
                "must be a positive frequency",
            ));
        }
        Ok(Self {
            label: label.into(),
            epsilon: Arc::new(epsilon),
            static_taylor,
            singularity_scale,
        })
    }

    pub fn evaluate(&self, omega: C64) -> C64 {
        (self.epsilon)(omega)
    }
}

impl fmt::Debug for CustomModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomModel")
            .field("label", &self.label)
            .field("static_taylor", &self.static_taylor)
            .field("singularity_scale", &self.singularity_scale)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum DielectricModel {
    /// Handled through exact reflection coefficients; has no finite `eps`.
    PerfectConductor,
    /// `1 - wp^2 / w^2`.
    Plasma { plasma_frequency: f64 },
    /// `1 - wp^2 / (w^2 - wT^2 + i g w)`.
    DrudeLorentz {
        plasma_frequency: f64,
        resonance_frequency: f64,
        damping: f64,
    },
    /// `1 - wp^2 / (w^2 + i g w)`, i.e. Drude-Lorentz with `wT = 0`.
    Drude { plasma_frequency: f64, damping: f64 },
    Custom(CustomModel),
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, v, "must be positive"))
    }
}

fn check_non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, v, "must be non-negative"))
    }
}

impl DielectricModel {
    pub fn plasma(plasma_frequency: f64) -> Result<Self> {
        check_positive("plasma_frequency", plasma_frequency)?;
        Ok(Self::Plasma { plasma_frequency })
    }

    pub fn drude_lorentz(plasma_frequency: f64, resonance_frequency: f64, damping: f64) -> Result<Self> {
        check_positive("plasma_frequency", plasma_frequency)?;
        check_non_negative("resonance_frequency", resonance_frequency)?;
        check_non_negative("damping", damping)?;
        Ok(Self::DrudeLorentz {
            plasma_frequency,
            resonance_frequency,
            damping,
        })
    }

    pub fn drude(plasma_frequency: f64, damping: f64) -> Result<Self> {
        check_positive("plasma_frequency", plasma_frequency)?;
        check_non_negative("damping", damping)?;
        Ok(Self::Drude {
            plasma_frequency,
            damping,
        })
    }

    /// Gold Drude-Lorentz preset.
    pub fn gold() -> Self {
        Self::DrudeLorentz {
            plasma_frequency: GOLD_PLASMA_FREQUENCY,
            resonance_frequency: GOLD_RESONANCE_FREQUENCY,
            damping: GOLD_DAMPING,
        }
    }

    /// Lossless plasma model with gold's plasma frequency.
    pub fn gold_plasma() -> Self {
        Self::Plasma {
            plasma_frequency: GOLD_PLASMA_FREQUENCY,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::PerfectConductor => "perfect-conductor",
            Self::Plasma { .. } => "plasma",
            Self::DrudeLorentz { .. } => "drude-lorentz",
            Self::Drude { .. } => "drude",
            Self::Custom(_) => "custom",
        }
    }

    pub fn is_perfect_conductor(&self) -> bool {
        matches!(self, Self::PerfectConductor)
    }

    /// `(wp, wT, gamma)` for the three built-in rational kinds.
    pub fn rational_parameters(&self) -> Option<(f64, f64, f64)> {
        match *self {
            Self::Plasma { plasma_frequency } => Some((plasma_frequency, 0.0, 0.0)),
            Self::DrudeLorentz {
                plasma_frequency,
                resonance_frequency,
                damping,
            } => Some((plasma_frequency, resonance_frequency, damping)),
            Self::Drude {
                plasma_frequency,
                damping,
            } => Some((plasma_frequency, 0.0, damping)),
            Self::PerfectConductor | Self::Custom(_) => None,
        }
    }

    /// Same model with every characteristic frequency multiplied by `factor`.
    pub fn with_frequencies_scaled(&self, factor: f64) -> Result<Self> {
        check_positive("factor", factor)?;
        Ok(match self {
            Self::PerfectConductor => Self::PerfectConductor,
            Self::Plasma { plasma_frequency } => Self::plasma(plasma_frequency * factor)?,
            Self::DrudeLorentz {
                plasma_frequency,
                resonance_frequency,
                damping,
            } => Self::drude_lorentz(
                plasma_frequency * factor,
                resonance_frequency * factor,
                damping * factor,
            )?,
            Self::Drude {
                plasma_frequency,
                damping,
            } => Self::drude(plasma_frequency * factor, damping * factor)?,
            Self::Custom(c) => {
                let inner = c.epsilon.clone();
                let t = c.static_taylor;
                Self::Custom(CustomModel::new(
                    format!("{} (x{factor})", c.label),
                    move |w| inner(w / factor),
                    StaticTaylor {
                        eps0: t.eps0,
                        d1: t.d1 / factor,
                        d2: t.d2 / (factor * factor),
                    },
                    c.singularity_scale * factor,
                )?)
            }
        })
    }

    /// `eps(omega)`.
    pub fn epsilon(&self, omega: C64) -> Result<C64> {
        match self {
            Self::PerfectConductor => Err(Error::PerfectConductorEpsilon),
            Self::Custom(c) => finite(c.evaluate(omega), "custom permittivity"),
            _ => {
                let (wp, wt, g) = self.rational_parameters().expect("rational kind");
                let den = omega * omega - wt * wt + C64::i() * g * omega;
                if den == C64::new(0.0, 0.0) {
                    return if omega == C64::new(0.0, 0.0) {
                        Err(Error::StaticPole {
                            model: self.kind_name(),
                        })
                    } else {
                        Err(Error::NonFinite {
                            what: "permittivity at a material resonance",
                        })
                    };
                }
                finite(1.0 - wp * wp / den, "permittivity")
            }
        }
    }

    /// `omega^2 eps(omega)`, which stays finite at `omega = 0` for every
    /// built-in kind.
    pub fn omega_sq_epsilon(&self, omega: C64) -> Result<C64> {
        let w2 = omega * omega;
        match self {
            Self::PerfectConductor => Err(Error::PerfectConductorEpsilon),
            Self::Custom(c) => finite(w2 * c.evaluate(omega), "custom permittivity"),
            Self::Plasma { plasma_frequency } => Ok(w2 - plasma_frequency * plasma_frequency),
            Self::Drude {
                plasma_frequency,
                damping,
            } => {
                // w^2 - wp^2 w / (w + i g)
                let den = omega + C64::i() * *damping;
                if den == C64::new(0.0, 0.0) {
                    return Err(Error::StaticPole { model: "drude" });
                }
                finite(w2 - plasma_frequency * plasma_frequency * omega / den, "permittivity")
            }
            Self::DrudeLorentz {
                plasma_frequency,
                resonance_frequency,
                damping,
            } => {
                let den = w2 - resonance_frequency * resonance_frequency + C64::i() * damping * omega;
                if den == C64::new(0.0, 0.0) {
                    if omega == C64::new(0.0, 0.0) {
                        // wT = g = 0 degenerates to the plasma form
                        return Ok(-C64::from(plasma_frequency * plasma_frequency));
                    }
                    return Err(Error::NonFinite {
                        what: "permittivity at a material resonance",
                    });
                }
                finite(w2 - plasma_frequency * plasma_frequency * w2 / den, "permittivity")
            }
        }
    }

    /// `eta = (eps - 1) / (eps + 1)`; exactly 1 for a perfect conductor and in
    /// the static limit of models whose `eps(0)` diverges.
    pub fn eta(&self, omega: C64) -> Result<C64> {
        let zero = C64::new(0.0, 0.0);
        match self {
            Self::PerfectConductor => return Ok(C64::new(1.0, 0.0)),
            Self::Plasma { .. } | Self::Drude { .. } if omega == zero => {
                return Ok(C64::new(1.0, 0.0))
            }
            Self::DrudeLorentz {
                resonance_frequency, ..
            } if omega == zero && *resonance_frequency == 0.0 => {
                return Ok(C64::new(1.0, 0.0))
            }
            _ => {}
        }
        let eps = self.epsilon(omega)?;
        let den = eps + 1.0;
        if den.norm() == 0.0 {
            return Err(Error::SurfaceModePole {
                k_par: 0.0,
                omega_re: omega.re,
                omega_im: omega.im,
            });
        }
        Ok((eps - 1.0) / den)
    }

    /// Static Taylor data. Built-in kinds use closed forms; custom models
    /// return the data they were constructed with.
    pub fn static_taylor(&self) -> Result<StaticTaylor> {
        match self {
            Self::PerfectConductor => Err(Error::PerfectConductorEpsilon),
            Self::Plasma { .. } => Err(Error::StaticPole { model: "plasma" }),
            Self::Drude { .. } => Err(Error::StaticPole { model: "drude" }),
            Self::DrudeLorentz {
                resonance_frequency: wt,
                ..
            } if *wt == 0.0 => Err(Error::StaticPole {
                model: "drude-lorentz (wT = 0)",
            }),
            Self::DrudeLorentz {
                plasma_frequency: wp,
                resonance_frequency: wt,
                damping: g,
            } => {
                let (wp2, wt2) = (wp * wp, wt * wt);
                Ok(StaticTaylor {
                    eps0: C64::new(1.0 + wp2 / wt2, 0.0),
                    d1: C64::new(0.0, g * wp2 / (wt2 * wt2)),
                    d2: C64::new(2.0 * wp2 * (wt2 - g * g) / (wt2 * wt2 * wt2), 0.0),
                })
            }
            Self::Custom(c) => Ok(c.static_taylor),
        }
    }

    /// Real static `eta(0)` entering the electrostatic image force.
    pub fn static_eta(&self) -> Result<f64> {
        match self {
            Self::PerfectConductor | Self::Plasma { .. } | Self::Drude { .. } => Ok(1.0),
            Self::DrudeLorentz {
                resonance_frequency, ..
            } if *resonance_frequency == 0.0 => Ok(1.0),
            _ => {
                let eta = self.static_taylor()?.eta0();
                if eta.im.abs() > 1e-12 * eta.re.abs() {
                    return Err(Error::invalid(
                        "eps(0)",
                        eta.im,
                        "static permittivity must be real",
                    ));
                }
                Ok(eta.re)
            }
        }
    }
}

fn finite(v: C64, what: &'static str) -> Result<C64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { what })
    }
}
