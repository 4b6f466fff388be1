//! Score two closed-form hazards against the Kaplan-Meier null.

use cbnn::data::split_dataset;
use cbnn::data::SplitSpec;
use cbnn::metrics::{default_eval_grid, evaluate_suite};
use cbnn::models::{HazardFn, HazardModel};
use cbnn::simulation::{simulate_dataset, SimulationHazardSpec};

fn main() -> cbnn::Result<()> {
    let mut spec = SimulationHazardSpec::constant(0.2);
    spec.beta = [0.8, 0.0, 0.0];
    let d = simulate_dataset(3000, &spec, 5)?.dataset;
    let test = split_dataset(&d, &SplitSpec::default())?.test;

    let truth = HazardFn(|z: &[f64], _t: f64| 0.2 * (0.8 * z[0]).exp());
    let blind = HazardFn(|_: &[f64], _t: f64| 0.2);
    let grid = default_eval_grid(&test, 20)?;
    let t_max = *grid.last().unwrap();
    let models: [(&str, &dyn HazardModel); 2] = [("truth", &truth), ("blind", &blind)];
    let suite = evaluate_suite(&models, &test, &grid, t_max)?;
    for m in &suite.models {
        println!(
            "{:>6}: IBS {:.5}, IPA(t_max) {:?}, AUC(t_max) {:?}",
            m.name,
            m.ibs,
            m.ipa.at(t_max),
            m.auc.at(t_max)
        );
    }
    suite.write_metrics_csv(std::io::stdout().lock())?;
    Ok(())
}
