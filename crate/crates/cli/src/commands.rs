//! The `shift`, `forces` and `figure` commands. Each returns its datasets and
//! the number of rows that failed.

use rayon::prelude::*;
use thiserror::Error;

use selfenergy_core::closedform::{pc_shift, static_force};
use selfenergy_core::experiment::{compensating_field, figure_data, Dataset, FigureRequest, Row, SurfaceForces};
use selfenergy_core::selfenergy::{dynamical_force, shift_profile};
use selfenergy_core::{CavityConfig, Error as CoreError};

use crate::config::{parse_grid, ConfigError, LoadedConfig};
use crate::output::OutputError;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Compute(#[from] CoreError),
    #[error(transparent)]
    Output(#[from] OutputError),
}

/// Datasets plus the count of rows that did not compute.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub datasets: Vec<Dataset>,
    pub failures: usize,
}

const DEFAULT_ZETA_GRID: &str = "0.1:0.9:9";

/// Flag grid, else the `[section] zeta_grid` of the config, else the single
/// `[geometry]` position, else the default.
fn zeta_grid(cfg: &LoadedConfig, flag: Option<&str>, section: &str) -> Result<Vec<f64>, ConfigError> {
    let from_config = match section {
        "shift" => cfg.config.shift.zeta_grid.as_ref(),
        _ => cfg.config.forces.zeta_grid.as_ref(),
    };
    match (flag, from_config) {
        (Some(s), _) => parse_grid(s).map_err(|m| ConfigError::Invalid {
            origin: "--zeta-grid".into(),
            line: None,
            message: m,
        }),
        (None, Some(g)) => cfg.grid("zeta_grid", g),
        (None, None) => match cfg.cavity()? {
            Some(c) => Ok(vec![c.zeta()]),
            None => Ok(parse_grid(DEFAULT_ZETA_GRID).expect("default grid parses")),
        },
    }
}

/// `(zeta, dE, dE / E0, abs_error)` over a grid of positions.
pub fn shift(cfg: &LoadedConfig, flag_grid: Option<&str>) -> Result<Outcome, CommandError> {
    let grid = zeta_grid(cfg, flag_grid, "shift")?;
    let model = cfg.model()?;
    let electron = cfg.electron()?;
    let d = cfg.d();
    // E0 needs a parallel momentum
    let e0 = pc_shift(0.5, d, &electron).ok().filter(|e| *e != 0.0);

    let mut ds = Dataset::new("shift", &["zeta", "shift", "shift_over_e0", "abs_error"]);
    ds.parameters.insert("d".into(), d);
    ds.parameters.insert("p_par_sq".into(), electron.p_par_sq());
    ds.parameters.insert("p_perp_sq".into(), electron.p_perp_sq());
    if let Some(e0) = e0 {
        ds.parameters.insert("e0".into(), e0);
    }
    ds.add_model("model", &model);

    let mut failures = 0;
    for (zeta, r) in shift_profile(&model, d, &electron, &grid, &cfg.config.numerics) {
        let row = match r {
            Ok(s) => {
                let error = (!s.converged()).then(|| "not converged".to_string());
                Row {
                    values: vec![Some(zeta), Some(s.value), e0.map(|e| s.value / e), Some(s.abs_error_estimate)],
                    error,
                }
            }
            Err(e) => Row {
                values: vec![Some(zeta), None, None, None],
                error: Some(e.to_string()),
            },
        };
        failures += usize::from(row.error.is_some());
        ds.rows.push(row);
    }
    Ok(Outcome {
        datasets: vec![ds],
        failures,
    })
}

const MIDPOINT_NOTE: &str = "midpoint: M undefined (static force vanishes)";

/// `(zeta, F_static, F_dyn, dB_static, dB, M)` at the configured electron.
pub fn forces(cfg: &LoadedConfig, flag_grid: Option<&str>) -> Result<Outcome, CommandError> {
    let grid = zeta_grid(cfg, flag_grid, "forces")?;
    let model = cfg.model()?;
    let electron = cfg.electron()?;
    let beta = electron.beta_par();
    if !(beta > 0.0 && beta < 1.0) {
        return Err(cfg.invalid("beta", "forces need a parallel momentum with 0 < beta < 1").into());
    }
    let d = cfg.d();
    let settings = cfg.config.numerics;

    let mut ds = Dataset::new(
        "forces",
        &["zeta", "f_static", "f_dyn", "delta_b_static", "delta_b", "m", "f_dyn_abs_error"],
    );
    ds.parameters.insert("d".into(), d);
    ds.parameters.insert("beta".into(), beta);
    ds.add_model("model", &model);

    let rows: Vec<(Row, bool)> = grid
        .par_iter()
        .map(|&zeta| {
            let computed = CavityConfig::from_zeta(d, zeta).and_then(|c| {
                let fs = static_force(&model, zeta, d)?;
                let fd = dynamical_force(&model, &c, &electron, &settings)?;
                Ok((fs, fd))
            });
            match computed {
                Ok((fs, fd)) => {
                    let forces = SurfaceForces {
                        static_force: fs,
                        dynamical_per_beta_sq: fd.value / (beta * beta),
                    };
                    let (m, error, failed) = match forces.m_ratio(beta) {
                        Ok(m) => (Some(m), None, false),
                        Err(CoreError::MidpointUndefined { .. }) => (None, Some(MIDPOINT_NOTE.to_string()), false),
                        Err(e) => (None, Some(e.to_string()), true),
                    };
                    let values = vec![
                        Some(zeta),
                        Some(fs),
                        Some(fd.value),
                        Some(compensating_field(fs, beta)),
                        Some(compensating_field(fs + fd.value, beta)),
                        m,
                        Some(fd.abs_error_estimate),
                    ];
                    (Row { values, error }, failed)
                }
                Err(e) => {
                    let mut values = vec![None; 7];
                    values[0] = Some(zeta);
                    (
                        Row {
                            values,
                            error: Some(e.to_string()),
                        },
                        true,
                    )
                }
            }
        })
        .collect();
    let failures = rows.iter().filter(|(_, f)| *f).count();
    ds.rows = rows.into_iter().map(|(r, _)| r).collect();
    Ok(Outcome {
        datasets: vec![ds],
        failures,
    })
}

/// Which figure dataset to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    Fig1,
    Fig2,
    Fig3,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::Fig1 => "fig1",
            Which::Fig2 => "fig2",
            Which::Fig3 => "fig3",
        }
    }
}

pub fn figure(cfg: &LoadedConfig, which: Which) -> Result<Outcome, CommandError> {
    let request = match which {
        Which::Fig1 => FigureRequest::Fig1(cfg.fig1()?),
        Which::Fig2 => FigureRequest::Fig2(cfg.fig2()?),
        Which::Fig3 => FigureRequest::Fig3(cfg.fig3()?),
    };
    let datasets = figure_data(&request, &cfg.config.numerics)?;
    let failures = datasets.iter().map(Dataset::failed_rows).sum();
    Ok(Outcome { datasets, failures })
}
