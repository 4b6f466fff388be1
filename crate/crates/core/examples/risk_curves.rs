//! Fit a CBNN and write the risk curve of one subject next to Kaplan-Meier.

use cbnn::casebase::sample_case_base;
use cbnn::models::{fit_cbnn, km_risk, risk_curve, uniform_grid};
use cbnn::neuralnet::NetworkConfig;
use cbnn::simulation::{simulate_dataset, SimulationHazardSpec};

fn main() -> cbnn::Result<()> {
    let d = simulate_dataset(1000, &SimulationHazardSpec::default(), 3)?.dataset;
    let sample = sample_case_base(&d, 50, 4)?;
    let config = NetworkConfig {
        epochs: 20,
        ..NetworkConfig::default()
    };
    let model = fit_cbnn(&sample, &config)?;
    let grid = uniform_grid(d.max_time(), 50)?;
    let curve = risk_curve(&model, &d.records()[0].covariates, &grid)?;
    let km = km_risk(&d, &grid)?;
    println!("time,cbnn,km");
    for (k, t) in grid.iter().enumerate() {
        println!("{t:.4},{:.5},{:.5}", curve.values[k], km.values[k]);
    }
    Ok(())
}
