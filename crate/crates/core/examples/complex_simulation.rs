//! Simulate the spline-hazard cohort and report its censoring make-up.

use cbnn::simulation::{cumulative_hazard, log_hazard, simulate_dataset, SimulationHazardSpec};

fn main() -> cbnn::Result<()> {
    let spec = SimulationHazardSpec::default();
    let sim = simulate_dataset(2000, &spec, 42)?;
    let r = sim.report;
    println!(
        "{} subjects: {} events, {} random and {} administrative censorings",
        r.subjects, r.events, r.random_censored, r.administrative_censored
    );
    for z in [[0.0, 0.0, 0.0], [1.0, 0.5, -0.5]] {
        let h = log_hazard(&spec, &z, 1.0)?.exp();
        let cum = cumulative_hazard(&spec, &z, spec.t_max)?;
        println!("z = {z:?}: hazard(1) = {h:.4}, survival(t_max) = {:.4}", (-cum).exp());
    }
    Ok(())
}
