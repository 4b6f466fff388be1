use super::network::{Gradients, LayerParams, Network};
use crate::error::{Error, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-7;

/// First and second moment estimates plus the step counter. Empty until the
/// first update.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdamState {
    pub(crate) first: Vec<LayerParams>,
    pub(crate) second: Vec<LayerParams>,
    pub(crate) step: u64,
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(net: &mut Network, grads: &Gradients, learning_rate: f64) -> Result<()> {
    if grads.0.len() != net.layers.len()
        || grads
            .0
            .iter()
            .zip(&net.layers)
            .any(|(g, l)| g.weights.dim() != l.weights.dim() || g.bias.len() != l.bias.len())
    {
        return Err(Error::Contract("gradient shapes do not match the network".into()));
    }
    if grads.0.iter().any(|g| g.weights.iter().chain(&g.bias).any(|v| !v.is_finite())) {
        return Err(Error::Numeric("non-finite gradient passed to Adam".into()));
    }
    let state = &mut net.adam;
    if state.first.is_empty() {
        state.first = grads.0.iter().map(|g| LayerParams::zeros(g.inputs(), g.outputs())).collect();
        state.second = state.first.clone();
    }
    state.step += 1;
    let t = state.step as i32;
    let correct1 = 1.0 - ADAM_BETA1.powi(t);
    let correct2 = 1.0 - ADAM_BETA2.powi(t);

    let update = |param: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = *m / correct1;
        let v_hat = *v / correct2;
        *param -= learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
    };
    for (((layer, g), m), v) in net
        .layers
        .iter_mut()
        .zip(&grads.0)
        .zip(&mut state.first)
        .zip(&mut state.second)
    {
        ndarray::Zip::from(&mut layer.weights)
            .and(&mut m.weights)
            .and(&mut v.weights)
            .and(&g.weights)
            .for_each(|p, m, v, &g| update(p, m, v, g));
        ndarray::Zip::from(&mut layer.bias)
            .and(&mut m.bias)
            .and(&mut v.bias)
            .and(&g.bias)
            .for_each(|p, m, v, &g| update(p, m, v, g));
    }
    Ok(())
}
