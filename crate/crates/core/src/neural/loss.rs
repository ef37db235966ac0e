use super::layer::{backprop_sequence, LayerGrad};
use super::network::Network;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::NUM_CLASSES;

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `-ln softmax(logits)[label]` via log-sum-exp.
pub fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

pub(crate) fn check_label(label: usize) -> Result<()> {
    if label >= NUM_CLASSES {
        return Err(Error::invalid(format!("label {label} outside 0..{NUM_CLASSES}")));
    }
    Ok(())
}

pub fn zero_grads(net: &Network) -> Vec<LayerGrad> {
    net.layers().iter().map(LayerGrad::zeros_like).collect()
}

/// Runs one sample forward and, when anything is trainable, backward with the
/// logit gradient scaled by `weight`. Returns the unscaled sample loss.
pub(crate) fn accumulate_sample(
    net: &Network,
    x: &Tensor,
    label: usize,
    weight: f64,
    grads: &mut [LayerGrad],
) -> Result<f64> {
    check_label(label)?;
    let (logits, caches) = net.forward_cached(x)?;
    let loss = cross_entropy(logits.data(), label);
    if let Some(stop) = net.first_trainable() {
        let mut g = softmax(logits.data());
        g[label] -= 1.0;
        g.iter_mut().for_each(|v| *v *= weight);
        backprop_sequence(net.layers(), &caches, Tensor::from_parts(vec![NUM_CLASSES], g), grads, stop);
    }
    Ok(loss)
}

/// Mean cross-entropy over the batch and its gradient for every layer.
/// Frozen layers get all-zero entries.
pub fn loss_and_grad(net: &Network, inputs: &[Tensor], labels: &[usize]) -> Result<(f64, Vec<LayerGrad>)> {
    if inputs.len() != labels.len() || inputs.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "{} inputs for {} labels",
            inputs.len(),
            labels.len()
        )));
    }
    let mut grads = zero_grads(net);
    let weight = 1.0 / inputs.len() as f64;
    let mut total = 0.0;
    for (x, &y) in inputs.iter().zip(labels) {
        total += accumulate_sample(net, x, y, weight, &mut grads)?;
    }
    Ok((total * weight, grads))
}
