//! End-to-end run on simulated data with a fixed network, written to a
//! directory given as the first argument (default `pipeline-out`).

use cbnn::harness::{run_pipeline, DataSource, EvalGridSpec, PipelineConfig};
use cbnn::neuralnet::NetworkConfig;
use cbnn::simulation::SimulationHazardSpec;

fn main() -> cbnn::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "pipeline-out".into());
    let config = PipelineConfig {
        data: DataSource::Simulate {
            n: 1000,
            spec: SimulationHazardSpec::default(),
        },
        search: None,
        network: Some(NetworkConfig {
            hidden_layers: vec![20, 10],
            epochs: 20,
            num_batches: 20,
            ..NetworkConfig::default()
        }),
        ratio: 20,
        bootstrap: 5,
        eval_grid: EvalGridSpec {
            points: 20,
            ..EvalGridSpec::default()
        },
        output_dir: out.into(),
        seed: 1,
        ..PipelineConfig::default()
    };
    let result = run_pipeline(&config)?;
    println!("{}", serde_json::to_string_pretty(&result.summary)?);
    Ok(())
}
