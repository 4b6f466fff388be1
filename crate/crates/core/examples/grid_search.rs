//! A reduced three-fold grid search over learning rate and activation.

use cbnn::harness::{grid_search, GridOptions, SearchSpace};
use cbnn::neuralnet::Activation;
use cbnn::simulation::{simulate_dataset, SimulationHazardSpec};

fn main() -> cbnn::Result<()> {
    let d = simulate_dataset(600, &SimulationHazardSpec::default(), 8)?.dataset;
    let space = SearchSpace {
        learning_rates: vec![0.001, 0.01],
        dropout_rates: vec![0.05],
        first_layer: vec![20],
        second_layer: vec![10],
        num_batches: vec![20],
        activations: vec![Activation::Relu, Activation::Linear],
        epochs: 20,
    };
    let options = GridOptions {
        ratio: 20,
        ..GridOptions::default()
    };
    let result = grid_search(&d, &space, &options)?;
    result.write_csv(std::io::stdout().lock())?;
    println!("selected cell {}", result.selected);
    Ok(())
}
