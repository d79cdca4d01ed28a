//! Propagation of the apparatus uncertainties into `dB`, `beta dB` and `M`.
//!
//! `R` enters through `beta = e B0 R / (m c)` at fixed `B0`; quantities
//! labelled by `beta` use the nominal value as the abscissa. Field
//! instability adds `field_stability * B0` (or `* |dB|`, see
//! [`FieldReference`]) to the measured modulation.
//!
//! The dynamical force varies on the scale of `z` itself, so it is
//! tabulated once per configuration on a 3 x 3 grid at `+-3 sigma` in
//! `(z, d)` and interpolated quadratically; the static force is exact at
//! every evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_beta, compensating_field, cyclotron_field, dynamical_force_per_beta_sq, ExperimentConfig, FieldReference, Method,
};
use crate::closedform::static_force;
use crate::error::{Error, Result};
use crate::selfenergy::ShiftSettings;

/// Quantities [`propagate_errors`] can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    DeltaBStatic,
    DeltaB,
    BetaDeltaBStatic,
    BetaDeltaB,
    M,
}

/// One-sigma contribution of each source; first-order mode only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Contributions {
    pub z: f64,
    pub d: f64,
    pub r: f64,
    pub field: f64,
}

impl Contributions {
    /// Largest contribution other than `R`'s.
    pub fn largest_besides_r(&self) -> f64 {
        self.z.max(self.d).max(self.field)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    /// Value at the nominal parameters.
    pub value: f64,
    pub sigma: f64,
    /// Standard error of `sigma` itself (zero in first-order mode).
    pub sigma_standard_error: f64,
    pub contributions: Option<Contributions>,
}

/// Offsets, in units of sigma, of the interpolation nodes.
const NODE_SPREAD: f64 = 3.0;

/// Quadratic Lagrange interpolation along one axis; a single node means
/// the axis carries no uncertainty.
#[derive(Debug, Clone)]
struct Axis {
    centre: f64,
    half_width: f64,
}

impl Axis {
    fn new(centre: f64, sigma: f64) -> Self {
        Self {
            centre,
            half_width: NODE_SPREAD * sigma,
        }
    }

    fn nodes(&self) -> Vec<f64> {
        if self.half_width == 0.0 {
            vec![self.centre]
        } else {
            vec![self.centre - self.half_width, self.centre, self.centre + self.half_width]
        }
    }

    fn weights(&self, x: f64) -> Vec<f64> {
        if self.half_width == 0.0 {
            return vec![1.0];
        }
        let t = (x - self.centre) / self.half_width;
        vec![0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)]
    }
}

/// Dynamical force per unit `beta^2` as a function of `(z, d)` near the
/// nominal point.
#[derive(Debug, Clone)]
struct DynamicalSurface {
    z: Axis,
    d: Axis,
    /// Row-major, `z` index outer.
    values: Vec<f64>,
}

impl DynamicalSurface {
    fn build(config: &ExperimentConfig, settings: &ShiftSettings) -> Result<Self> {
        let b = config.budget();
        let z = Axis::new(config.z(), b.sigma_z);
        let d = Axis::new(config.d(), b.sigma_d);
        let points: Vec<(f64, f64)> = z
            .nodes()
            .into_iter()
            .flat_map(|zn| d.nodes().into_iter().map(move |dn| (zn, dn)))
            .collect();
        let values = points
            .par_iter()
            .map(|&(zn, dn)| dynamical_force_per_beta_sq(config.model(), zn / dn, dn, settings))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { z, d, values })
    }

    fn at(&self, z: f64, d: f64) -> f64 {
        let wz = self.z.weights(z);
        let wd = self.d.weights(d);
        let mut acc = 0.0;
        for (i, a) in wz.iter().enumerate() {
            for (j, b) in wd.iter().enumerate() {
                acc += a * b * self.values[i * wd.len() + j];
            }
        }
        acc
    }
}

/// Evaluates quantities and their uncertainties for one configuration,
/// reusing the dynamical-force table across `beta`.
#[derive(Debug, Clone)]
pub struct Propagator {
    config: ExperimentConfig,
    surface: DynamicalSurface,
    /// Standard normal draws `(z, d, R, field)` per Monte-Carlo sample.
    draws: Vec<[f64; 4]>,
}

impl Propagator {
    pub fn new(config: &ExperimentConfig, settings: &ShiftSettings) -> Result<Self> {
        settings.validate()?;
        let surface = DynamicalSurface::build(config, settings)?;
        let b = config.budget();
        let draws = match b.method {
            Method::FirstOrder => Vec::new(),
            Method::MonteCarlo => normal_draws(b.seed, b.mc_samples),
        };
        Ok(Self {
            config: config.clone(),
            surface,
            draws,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    /// Dynamical force per unit `beta^2` (N) at the nominal point.
    pub fn dynamical_per_beta_sq(&self) -> f64 {
        self.surface.at(self.config.z(), self.config.d())
    }

    /// `q` at nominal `beta` with the apparatus at `(z, d, r)`.
    fn evaluate(&self, q: Quantity, beta: f64, z: f64, d: f64, r: f64) -> Result<f64> {
        let beta_actual = beta * r / self.config.r();
        let f_static = static_force(self.config.model(), z / d, d)?;
        let f_dyn = beta_actual * beta_actual * self.surface.at(z, d);
        Ok(match q {
            Quantity::DeltaBStatic => compensating_field(f_static, beta_actual),
            Quantity::DeltaB => compensating_field(f_static + f_dyn, beta_actual),
            Quantity::BetaDeltaBStatic => beta * compensating_field(f_static, beta_actual),
            Quantity::BetaDeltaB => beta * compensating_field(f_static + f_dyn, beta_actual),
            Quantity::M => {
                if f_static == 0.0 {
                    return Err(Error::MidpointUndefined { quantity: "M" });
                }
                -f_dyn / f_static
            }
        })
    }

    /// Nominal value of `q`.
    pub fn value(&self, q: Quantity, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        let c = &self.config;
        self.evaluate(q, beta, c.z(), c.d(), c.r())
    }

    /// One-sigma effect of the field instability on `q`.
    fn field_sigma(&self, q: Quantity, beta: f64) -> Result<f64> {
        let c = &self.config;
        let b = c.budget();
        if b.field_stability == 0.0 {
            return Ok(0.0);
        }
        let sigma_b = match b.field_reference {
            FieldReference::Background => b.field_stability * cyclotron_field(beta, c.r())?,
            FieldReference::Modulation => b.field_stability * self.value(Quantity::DeltaB, beta)?.abs(),
        };
        Ok(match q {
            Quantity::DeltaBStatic | Quantity::DeltaB => sigma_b,
            Quantity::BetaDeltaBStatic | Quantity::BetaDeltaB => beta * sigma_b,
            // M = 1 - dB / dB_static with dB the measured modulation
            Quantity::M => sigma_b / self.value(Quantity::DeltaBStatic, beta)?.abs(),
        })
    }

    pub fn propagate(&self, q: Quantity, beta: f64) -> Result<ErrorEstimate> {
        match self.config.budget().method {
            Method::FirstOrder => self.first_order(q, beta),
            Method::MonteCarlo => self.monte_carlo(q, beta),
        }
    }

    fn first_order(&self, q: Quantity, beta: f64) -> Result<ErrorEstimate> {
        let value = self.value(q, beta)?;
        let c = &self.config;
        let b = c.budget();
        let (z, d, r) = (c.z(), c.d(), c.r());
        let partial = |name: &'static str, sigma: f64, at: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
            if sigma == 0.0 {
                return Ok(0.0);
            }
            let h = 1e-3 * sigma;
            let slope = (at(h)? - at(-h)?) / (2.0 * h);
            if !slope.is_finite() {
                return Err(Error::NonFinitePartial { parameter: name });
            }
            Ok(slope.abs() * sigma)
        };
        let contributions = Contributions {
            z: partial("z", b.sigma_z, &|h| self.evaluate(q, beta, z + h, d, r))?,
            d: partial("d", b.sigma_d, &|h| self.evaluate(q, beta, z, d + h, r))?,
            r: partial("R", b.sigma_r, &|h| self.evaluate(q, beta, z, d, r + h))?,
            field: self.field_sigma(q, beta)?,
        };
        let k = &contributions;
        let sigma = (k.z * k.z + k.d * k.d + k.r * k.r + k.field * k.field).sqrt();
        Ok(ErrorEstimate {
            value,
            sigma,
            sigma_standard_error: 0.0,
            contributions: Some(contributions),
        })
    }

    fn monte_carlo(&self, q: Quantity, beta: f64) -> Result<ErrorEstimate> {
        let value = self.value(q, beta)?;
        let c = &self.config;
        let b = c.budget();
        let field = self.field_sigma(q, beta)?;
        let samples = self
            .draws
            .par_iter()
            .map(|n| {
                let v = self.evaluate(
                    q,
                    beta,
                    c.z() + b.sigma_z * n[0],
                    c.d() + b.sigma_d * n[1],
                    c.r() + b.sigma_r * n[2],
                )?;
                Ok(v + field * n[3])
            })
            .collect::<Result<Vec<f64>>>()?;
        // sequential sums keep the result independent of the thread count
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
        let sigma = var.sqrt();
        if !sigma.is_finite() {
            return Err(Error::NonFinite {
                what: "Monte-Carlo sample standard deviation",
            });
        }
        Ok(ErrorEstimate {
            value,
            sigma,
            sigma_standard_error: sigma / (2.0 * (n - 1.0)).sqrt(),
            contributions: None,
        })
    }
}

/// Sample `i` comes from stream `i` of the seeded generator, so draws do not
/// depend on how samples are scheduled.
fn normal_draws(seed: u64, count: usize) -> Vec<[f64; 4]> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            std::array::from_fn(|_| rng.sample(StandardNormal))
        })
        .collect()
}

/// Value and one-sigma uncertainty of `q` at `beta` for `config`.
pub fn propagate_errors(
    q: Quantity,
    config: &ExperimentConfig,
    beta: f64,
    settings: &ShiftSettings,
) -> Result<ErrorEstimate> {
    Propagator::new(config, settings)?.propagate(q, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectric::DielectricModel;
    use crate::experiment::UncertaintyBudget;

    fn config(budget: UncertaintyBudget, model: DielectricModel) -> ExperimentConfig {
        ExperimentConfig::new(1e-3, 1e-5, 1e-6, vec![0.02], model, budget).unwrap()
    }

    #[test]
    fn axis_interpolates_quadratics_exactly() {
        let a = Axis::new(2.0, 0.1);
        let f = |x: f64| 3.0 * x * x - x + 0.5;
        for x in [1.8, 2.05, 2.3] {
            let got: f64 = a.nodes().iter().zip(a.weights(x)).map(|(n, w)| w * f(*n)).sum();
            assert!((got - f(x)).abs() < 1e-12);
        }
        assert_eq!(Axis::new(1.0, 0.0).weights(5.0), vec![1.0]);
    }

    #[test]
    fn zero_budget_gives_zero_sigma() {
        let p = Propagator::new(&config(UncertaintyBudget::exact(), DielectricModel::PerfectConductor), &Default::default())
            .unwrap();
        for q in [Quantity::DeltaB, Quantity::BetaDeltaB, Quantity::M] {
            let e = p.propagate(q, 0.02).unwrap();
            assert_eq!(e.sigma, 0.0);
        }
    }

    #[test]
    fn static_beta_delta_b_is_beta_independent() {
        let p = Propagator::new(&config(UncertaintyBudget::default(), DielectricModel::gold_plasma()), &Default::default())
            .unwrap();
        let a = p.value(Quantity::BetaDeltaBStatic, 0.01).unwrap();
        let b = p.value(Quantity::BetaDeltaBStatic, 0.09).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs());
        // R shifts beta at fixed B0, a relative sigma_R / R effect
        let e = p.propagate(Quantity::BetaDeltaBStatic, 0.05).unwrap();
        let rel = e.contributions.unwrap().r / e.value.abs();
        assert!((rel / 5e-3 - 1.0).abs() < 1e-6, "{rel}");
    }

    #[test]
    fn monte_carlo_is_reproducible_and_consistent() {
        let mut b = UncertaintyBudget::default();
        let fo = Propagator::new(&config(b, DielectricModel::PerfectConductor), &Default::default()).unwrap();
        b.method = Method::MonteCarlo;
        b.mc_samples = 4000;
        b.seed = 7;
        let mc = Propagator::new(&config(b, DielectricModel::PerfectConductor), &Default::default()).unwrap();
        let x = fo.propagate(Quantity::BetaDeltaB, 0.02).unwrap();
        let y = mc.propagate(Quantity::BetaDeltaB, 0.02).unwrap();
        assert_eq!(x.value, y.value);
        assert!((x.sigma - y.sigma).abs() < 3.0 * y.sigma_standard_error, "{x:?} {y:?}");
        let again = mc.propagate(Quantity::BetaDeltaB, 0.02).unwrap();
        assert_eq!(y.sigma.to_bits(), again.sigma.to_bits());
    }

    #[test]
    fn field_reference_scales_the_stability_term() {
        let mut b = UncertaintyBudget::default();
        let bg = Propagator::new(&config(b, DielectricModel::gold()), &Default::default()).unwrap();
        b.field_reference = FieldReference::Modulation;
        let md = Propagator::new(&config(b, DielectricModel::gold()), &Default::default()).unwrap();
        let beta = 0.02;
        let x = bg.propagate(Quantity::DeltaB, beta).unwrap().contributions.unwrap();
        let y = md.propagate(Quantity::DeltaB, beta).unwrap().contributions.unwrap();
        let b0 = cyclotron_field(beta, 1e-3).unwrap();
        let db = md.value(Quantity::DeltaB, beta).unwrap();
        assert!((x.field / (1e-5 * b0) - 1.0).abs() < 1e-14);
        assert!((y.field / (1e-5 * db.abs()) - 1.0).abs() < 1e-14);
        assert_eq!((x.z, x.d, x.r), (y.z, y.d, y.r));
    }

    #[test]
    fn draws_do_not_depend_on_order() {
        let all = normal_draws(3, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        rng.set_stream(9);
        let last: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        assert_eq!(all[9], last);
        assert_ne!(all[0], all[1]);
    }
}
