//! Recover a constant hazard of 0.1 with intercept-only CBLR and a CBNN.

use cbnn::casebase::sample_case_base;
use cbnn::models::{fit_cblr, fit_cbnn, FeatureMap, HazardModel};
use cbnn::neuralnet::NetworkConfig;
use cbnn::simulation::{simulate_dataset, SimulationHazardSpec};

fn main() -> cbnn::Result<()> {
    let mut spec = SimulationHazardSpec::constant(0.1);
    spec.t_max = 30.0;
    let d = simulate_dataset(5000, &spec, 1)?.dataset;
    let sample = sample_case_base(&d, 100, 2)?;
    let crude = d.event_count() as f64 / d.total_follow_up();

    let config = NetworkConfig {
        epochs: 30,
        ..NetworkConfig::default()
    };
    let cblr = fit_cblr(&sample, FeatureMap::intercept_only(), &config)?;
    println!("crude rate c/B = {crude:.5}");
    println!("CBLR hazard     = {:.5}", cblr.hazard(&[0.0, 0.0, 0.0], 1.0)?);

    let cbnn = fit_cbnn(&sample, &config)?;
    for t in [1.0, 5.0, 10.0] {
        println!("CBNN hazard at t = {t:>4}: {:.5}", cbnn.hazard(&[0.0, 0.0, 0.0], t)?);
    }
    Ok(())
}
