//! Bootstrap percentile bands for CBNN and CBLR on held-out data.

use cbnn::data::{split_dataset, SplitSpec};
use cbnn::harness::{bootstrap_evaluate, ModelSpec};
use cbnn::metrics::default_eval_grid;
use cbnn::models::FeatureMap;
use cbnn::neuralnet::NetworkConfig;
use cbnn::simulation::{simulate_dataset, SimulationHazardSpec};

fn main() -> cbnn::Result<()> {
    let d = simulate_dataset(800, &SimulationHazardSpec::default(), 9)?.dataset;
    let split = split_dataset(&d, &SplitSpec::default())?;
    let config = NetworkConfig {
        hidden_layers: vec![20, 10],
        epochs: 15,
        num_batches: 20,
        ..NetworkConfig::default()
    };
    let specs = vec![
        ("CBNN".to_string(), ModelSpec::Cbnn { config: config.clone() }),
        (
            "CBLR".to_string(),
            ModelSpec::Cblr {
                feature_map: FeatureMap::linear(3),
                config,
            },
        ),
    ];
    let grid = default_eval_grid(&split.test, 10)?;
    let t_max = *grid.last().unwrap();
    let result = bootstrap_evaluate(&split.train, &split.test, &specs, 10, &grid, t_max, 20, 10)?;
    for m in &result.point.models {
        println!("{:>4}: IBS {:.5} band {:?}", m.name, m.ibs, m.ibs_band);
    }
    Ok(())
}
