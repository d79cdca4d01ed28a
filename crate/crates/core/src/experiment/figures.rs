//! Tabular data behind the three figures: shift profiles, field modulation
//! bands at several positions, and the correction factor `M` versus `beta`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{beta_for_field, cyclotron_field, ExperimentConfig, UncertaintyBudget};
use super::uncertainty::{ErrorEstimate, Propagator, Quantity};
use crate::closedform::pc_shift;
use crate::dielectric::DielectricModel;
use crate::error::{Error, Result};
use crate::quantities::ElectronState;
use crate::selfenergy::{shift_profile, ShiftSettings};

/// One row; `None` cells are undefined, `error` says why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub values: Vec<Option<f64>>,
    pub error: Option<String>,
}

/// A table plus the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub parameters: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            parameters: BTreeMap::new(),
            labels: BTreeMap::new(),
        }
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows that carry an error.
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// Records the kind and rational parameters of `model` under `prefix`.
    pub fn add_model(&mut self, prefix: &str, model: &DielectricModel) {
        self.labels.insert(format!("{prefix}.kind"), model.kind_name().to_string());
        if let Some((wp, wt, g)) = model.rational_parameters() {
            self.parameters.insert(format!("{prefix}.plasma_frequency"), wp);
            self.parameters.insert(format!("{prefix}.resonance_frequency"), wt);
            self.parameters.insert(format!("{prefix}.damping"), g);
        }
    }

    fn add_budget(&mut self, b: &UncertaintyBudget) {
        self.parameters.insert("sigma_z".into(), b.sigma_z);
        self.parameters.insert("sigma_d".into(), b.sigma_d);
        self.parameters.insert("sigma_r".into(), b.sigma_r);
        self.parameters.insert("field_stability".into(), b.field_stability);
        let reference = match b.field_reference {
            super::FieldReference::Background => "background",
            super::FieldReference::Modulation => "modulation",
        };
        self.labels.insert("field_reference".into(), reference.into());
        let method = match b.method {
            super::Method::FirstOrder => "first-order".to_string(),
            super::Method::MonteCarlo => format!("monte-carlo ({} samples, seed {})", b.mc_samples, b.seed),
        };
        self.labels.insert("error_method".into(), method);
    }
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` geometrically spaced values from `start` to `stop` inclusive.
pub fn logspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    linspace(start.ln(), stop.ln(), n).into_iter().map(f64::exp).collect()
}

/// Shift profiles normalised by the perfect-conductor midpoint shift.
#[derive(Debug, Clone)]
pub struct Fig1Config {
    pub d: f64,
    pub beta: f64,
    pub zeta_grid: Vec<f64>,
    pub plasma: DielectricModel,
    pub drude: DielectricModel,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            d: 1e-5,
            beta: 0.01,
            zeta_grid: linspace(0.02, 0.98, 49),
            plasma: DielectricModel::gold_plasma(),
            drude: DielectricModel::gold(),
        }
    }
}

/// `beta dB` bands at several positions in one cavity.
#[derive(Debug, Clone)]
pub struct Fig2Config {
    pub d: f64,
    pub r: f64,
    pub positions: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub plasma: DielectricModel,
    pub drude: DielectricModel,
    pub budget: UncertaintyBudget,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            d: 2e-5,
            r: 1e-3,
            positions: vec![1.5e-6, 2e-6, 2.5e-6],
            beta_grid: linspace(0.01, 0.1, 10),
            plasma: DielectricModel::gold_plasma(),
            drude: DielectricModel::gold(),
            budget: UncertaintyBudget::default(),
        }
    }
}

/// `M` versus `beta` at one position, plus the schematic field schedule.
#[derive(Debug, Clone)]
pub struct Fig3Config {
    pub z: f64,
    pub d: f64,
    pub r: f64,
    pub beta_grid: Vec<f64>,
    pub plasma: DielectricModel,
    pub drude: DielectricModel,
    pub budget: UncertaintyBudget,
    /// Working point of the schedule.
    pub inset_beta: f64,
    /// Samples per orbital period in the schedule.
    pub inset_samples_per_period: usize,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self {
            z: 1e-6,
            d: 1e-5,
            r: 1e-3,
            beta_grid: logspace(1e-3, 1e-1, 21),
            plasma: DielectricModel::gold_plasma(),
            drude: DielectricModel::gold(),
            budget: UncertaintyBudget::default(),
            inset_beta: beta_for_field(0.035, 1e-3),
            inset_samples_per_period: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub enum FigureRequest {
    Fig1(Fig1Config),
    Fig2(Fig2Config),
    Fig3(Fig3Config),
}

/// Datasets for one figure. Per-point failures are flagged in the rows;
/// configuration errors are returned.
pub fn figure_data(request: &FigureRequest, settings: &ShiftSettings) -> Result<Vec<Dataset>> {
    settings.validate()?;
    match request {
        FigureRequest::Fig1(c) => fig1(c, settings).map(|d| vec![d]),
        FigureRequest::Fig2(c) => fig2(c, settings),
        FigureRequest::Fig3(c) => fig3(c, settings),
    }
}

fn fig1(c: &Fig1Config, settings: &ShiftSettings) -> Result<Dataset> {
    if c.zeta_grid.is_empty() {
        return Err(Error::invalid("zeta_grid", 0.0, "empty grid"));
    }
    let electron = ElectronState::from_beta(c.beta)?;
    let e0 = pc_shift(0.5, c.d, &electron)?;
    let mut ds = Dataset::new(
        "fig1",
        &[
            "zeta",
            "shift_plasma_over_e0",
            "shift_drude_over_e0",
            "abs_error_plasma_over_e0",
            "abs_error_drude_over_e0",
        ],
    );
    ds.parameters.insert("d".into(), c.d);
    ds.parameters.insert("beta".into(), c.beta);
    ds.parameters.insert("e0".into(), e0);
    ds.add_model("plasma", &c.plasma);
    ds.add_model("drude", &c.drude);

    let plasma = shift_profile(&c.plasma, c.d, &electron, &c.zeta_grid, settings);
    let drude = shift_profile(&c.drude, c.d, &electron, &c.zeta_grid, settings);
    for ((zeta, p), (_, q)) in plasma.into_iter().zip(drude) {
        let mut values = vec![Some(zeta), None, None, None, None];
        let mut errors = Vec::new();
        for (k, (name, r)) in [("plasma", p), ("drude", q)].into_iter().enumerate() {
            match r {
                Ok(s) if s.converged() => {
                    values[1 + k] = Some(s.value / e0);
                    values[3 + k] = Some(s.abs_error_estimate / e0);
                }
                Ok(s) => {
                    values[1 + k] = Some(s.value / e0);
                    values[3 + k] = Some(s.abs_error_estimate / e0);
                    errors.push(format!("{name}: not converged"));
                }
                Err(e) => errors.push(format!("{name}: {e}")),
            }
        }
        ds.rows.push(row(values, errors));
    }
    Ok(ds)
}

fn row(values: Vec<Option<f64>>, errors: Vec<String>) -> Row {
    Row {
        values,
        error: (!errors.is_empty()).then(|| errors.join("; ")),
    }
}

fn propagators(
    positions: &[f64],
    d: f64,
    r: f64,
    beta_grid: &[f64],
    models: [&DielectricModel; 2],
    budget: &UncertaintyBudget,
    settings: &ShiftSettings,
) -> Result<Vec<[Propagator; 2]>> {
    let configs = positions
        .iter()
        .map(|&z| {
            let make = |m: &DielectricModel| ExperimentConfig::new(r, d, z, beta_grid.to_vec(), m.clone(), *budget);
            Ok([make(models[0])?, make(models[1])?])
        })
        .collect::<Result<Vec<_>>>()?;
    configs
        .par_iter()
        .map(|[a, b]| {
            let (pa, pb) = rayon::join(|| Propagator::new(a, settings), || Propagator::new(b, settings));
            Ok([pa?, pb?])
        })
        .collect()
}

/// Pushes value, sigma and (first-order) contributions, or nulls.
fn push_estimate(values: &mut Vec<Option<f64>>, errors: &mut Vec<String>, name: &str, r: Result<ErrorEstimate>, detail: bool) {
    let width = if detail { 6 } else { 2 };
    match r {
        Ok(e) => {
            values.push(Some(e.value));
            values.push(Some(e.sigma));
            if detail {
                let k = e.contributions;
                values.extend([k.map(|k| k.z), k.map(|k| k.d), k.map(|k| k.r), k.map(|k| k.field)]);
            }
        }
        Err(e) => {
            values.extend(std::iter::repeat_n(None, width));
            errors.push(format!("{name}: {e}"));
        }
    }
}

const FIG2_FAMILIES: [(&str, usize, Quantity); 4] = [
    ("static_plasma", 0, Quantity::BetaDeltaBStatic),
    ("static_drude", 1, Quantity::BetaDeltaBStatic),
    ("plasma", 0, Quantity::BetaDeltaB),
    ("drude", 1, Quantity::BetaDeltaB),
];

fn fig2(c: &Fig2Config, settings: &ShiftSettings) -> Result<Vec<Dataset>> {
    if c.positions.is_empty() || c.beta_grid.is_empty() {
        return Err(Error::invalid("beta_grid", 0.0, "empty grid"));
    }
    let props = propagators(&c.positions, c.d, c.r, &c.beta_grid, [&c.plasma, &c.drude], &c.budget, settings)?;
    let mut columns = vec!["beta".to_string(), "b0".to_string()];
    for (fam, _, _) in FIG2_FAMILIES {
        columns.push(format!("beta_delta_b_{fam}"));
        for part in ["", "_z", "_d", "_r", "_field"] {
            columns.push(format!("sigma_{fam}{part}"));
        }
    }
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();

    let mut out = Vec::new();
    for (&z, pair) in c.positions.iter().zip(&props) {
        let mut ds = Dataset::new(format!("fig2_z{:.0}nm", z * 1e9), &columns);
        ds.parameters.insert("z".into(), z);
        ds.parameters.insert("d".into(), c.d);
        ds.parameters.insert("r".into(), c.r);
        ds.add_model("plasma", &c.plasma);
        ds.add_model("drude", &c.drude);
        ds.add_budget(&c.budget);
        ds.rows = c
            .beta_grid
            .par_iter()
            .map(|&beta| {
                let mut values = vec![Some(beta), cyclotron_field(beta, c.r).ok()];
                let mut errors = Vec::new();
                for (fam, i, q) in FIG2_FAMILIES {
                    push_estimate(&mut values, &mut errors, fam, pair[i].propagate(q, beta), true);
                }
                row(values, errors)
            })
            .collect();
        out.push(ds);
    }
    Ok(out)
}

fn fig3(c: &Fig3Config, settings: &ShiftSettings) -> Result<Vec<Dataset>> {
    if c.beta_grid.is_empty() {
        return Err(Error::invalid("beta_grid", 0.0, "empty grid"));
    }
    let mut props = propagators(&[c.z], c.d, c.r, &c.beta_grid, [&c.plasma, &c.drude], &c.budget, settings)?;
    let pair = props.remove(0);

    let mut ds = Dataset::new("fig3", &["beta", "b0", "m_plasma", "sigma_m_plasma", "m_drude", "sigma_m_drude"]);
    ds.parameters.insert("z".into(), c.z);
    ds.parameters.insert("d".into(), c.d);
    ds.parameters.insert("r".into(), c.r);
    ds.add_model("plasma", &c.plasma);
    ds.add_model("drude", &c.drude);
    ds.add_budget(&c.budget);
    ds.rows = c
        .beta_grid
        .par_iter()
        .map(|&beta| {
            let mut values = vec![Some(beta), cyclotron_field(beta, c.r).ok()];
            let mut errors = Vec::new();
            for (name, p) in [("plasma", &pair[0]), ("drude", &pair[1])] {
                push_estimate(&mut values, &mut errors, name, p.propagate(Quantity::M, beta), false);
            }
            row(values, errors)
        })
        .collect();

    Ok(vec![ds, fig3_inset(c, &pair)?])
}

/// Square-wave schedule of `dB / B0` over two orbital periods: zero on the
/// free half, the required modulation on the confined half. Schematic only.
fn fig3_inset(c: &Fig3Config, pair: &[Propagator; 2]) -> Result<Dataset> {
    let beta = c.inset_beta;
    let b0 = cyclotron_field(beta, c.r)?;
    let levels = [
        pair[1].value(Quantity::DeltaBStatic, beta)? / b0,
        pair[0].value(Quantity::DeltaB, beta)? / b0,
        pair[1].value(Quantity::DeltaB, beta)? / b0,
    ];
    let mut ds = Dataset::new(
        "fig3_inset",
        &["t_over_period", "modulation_static_over_b0", "modulation_plasma_over_b0", "modulation_drude_over_b0"],
    );
    ds.parameters.insert("beta".into(), beta);
    ds.parameters.insert("b0".into(), b0);
    ds.parameters.insert("z".into(), c.z);
    ds.parameters.insert("d".into(), c.d);
    ds.parameters.insert("r".into(), c.r);
    ds.labels.insert("note".into(), "schematic square-wave schedule; transitions are idealised".into());
    let n = c.inset_samples_per_period.max(2);
    for i in 0..=2 * n {
        let t = i as f64 / n as f64;
        let confined = t.fract() >= 0.5 && i != 2 * n;
        let values = std::iter::once(Some(t))
            .chain(levels.iter().map(|&l| Some(if confined { l } else { 0.0 })))
            .collect();
        ds.rows.push(Row { values, error: None });
    }
    Ok(ds)
}
