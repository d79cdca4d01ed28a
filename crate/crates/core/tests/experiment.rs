use selfenergy_core::experiment::{
    beta_for_field, cyclotron_field, figure_data, propagate_errors, ExperimentConfig, Fig2Config, Fig3Config,
    FigureRequest, Method, Quantity, UncertaintyBudget,
};
use selfenergy_core::{DielectricModel, Error, ShiftSettings};

#[test]
fn working_point_round_trips() {
    let beta = beta_for_field(0.035, 1e-3);
    assert!((cyclotron_field(beta, 1e-3).unwrap() / 0.035 - 1.0).abs() < 1e-14);
}

#[test]
fn small_rings_are_rejected() {
    let r = ExperimentConfig::new(1e-4, 1e-5, 1e-6, vec![0.01], DielectricModel::gold(), Default::default());
    assert!(matches!(r, Err(Error::RingTooSmall { .. })));
}

#[test]
fn monte_carlo_agrees_with_first_order() {
    let s = ShiftSettings::default();
    let mk = |method| {
        let budget = UncertaintyBudget {
            method,
            mc_samples: 4000,
            ..Default::default()
        };
        ExperimentConfig::new(1e-3, 1e-5, 1e-6, vec![0.02], DielectricModel::gold_plasma(), budget).unwrap()
    };
    let lin = propagate_errors(Quantity::DeltaB, &mk(Method::FirstOrder), 0.02, &s).unwrap();
    let mc = propagate_errors(Quantity::DeltaB, &mk(Method::MonteCarlo), 0.02, &s).unwrap();
    assert_eq!(lin.value, mc.value);
    assert!((mc.sigma - lin.sigma).abs() < 4.0 * mc.sigma_standard_error, "{lin:?} {mc:?}");
}

#[test]
fn figure_datasets_have_the_advertised_shape() {
    let s = ShiftSettings::default();
    let fig2 = Fig2Config {
        positions: vec![2e-6],
        beta_grid: vec![0.02, 0.04],
        budget: UncertaintyBudget {
            sigma_d: 0.0,
            ..Default::default()
        },
        ..Default::default()
    };
    let ds = figure_data(&FigureRequest::Fig2(fig2), &s).unwrap();
    assert_eq!(ds.len(), 1);
    assert_eq!(ds[0].name, "fig2_z2000nm");
    assert_eq!(ds[0].rows.len(), 2);
    assert_eq!(ds[0].failed_rows(), 0);

    let fig3 = Fig3Config {
        beta_grid: vec![0.01],
        inset_samples_per_period: 4,
        ..Default::default()
    };
    let ds = figure_data(&FigureRequest::Fig3(fig3), &s).unwrap();
    let names: Vec<&str> = ds.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(names, ["fig3", "fig3_inset"]);
    let row = &ds[0].rows[0].values;
    let mp = row[ds[0].column("m_plasma").unwrap()].unwrap();
    let md = row[ds[0].column("m_drude").unwrap()].unwrap();
    assert!(mp > 0.0 && md < 0.0);
    // two periods, both ends included
    assert_eq!(ds[1].rows.len(), 9);
}
