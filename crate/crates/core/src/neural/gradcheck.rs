//! Central finite-difference checks of the analytic gradients.

use super::layer::{backprop_sequence, sequence_margin, ConvSpec, Layer, LayerGrad};
use super::loss::{cross_entropy, loss_and_grad};
use super::network::Network;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Layer kinds with a dedicated randomized check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckedKind {
    Dense,
    Conv2d,
    MaxPool2d,
    Relu,
    Residual,
    Inception,
}

impl CheckedKind {
    pub const ALL: [CheckedKind; 6] = [
        CheckedKind::Dense,
        CheckedKind::Conv2d,
        CheckedKind::MaxPool2d,
        CheckedKind::Relu,
        CheckedKind::Residual,
        CheckedKind::Inception,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    /// Largest relative error over parameter and input gradients.
    pub max_rel_error: f64,
    pub entries: usize,
}

/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

fn normal_tensor(shape: Vec<usize>, rng: &mut SplitMix64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.normal()).collect()).expect("finite")
}

fn jitter_biases(layer: &mut Layer, rng: &mut SplitMix64) {
    layer.biases_mut().iter_mut().for_each(|b| *b = 0.1 * rng.normal());
}

fn conv(spec: ConvSpec, rng: &mut SplitMix64) -> Layer {
    let mut l = Layer::conv2d(spec, rng).expect("valid spec");
    jitter_biases(&mut l, rng);
    l
}

/// A small random layer of `kind` with a matching random input.
pub fn random_case(kind: CheckedKind, rng: &mut SplitMix64) -> (Layer, Tensor) {
    let pick = |rng: &mut SplitMix64, lo: usize, hi: usize| lo + rng.below(hi - lo + 1);
    match kind {
        CheckedKind::Dense => {
            let (i, o) = (pick(rng, 1, 6), pick(rng, 1, 6));
            let mut l = Layer::dense(i, o, rng).expect("nonzero");
            jitter_biases(&mut l, rng);
            (l, normal_tensor(vec![i], rng))
        }
        CheckedKind::Conv2d => {
            let k = pick(rng, 1, 3);
            let spec = ConvSpec::new(pick(rng, 1, 3), pick(rng, 1, 3), k, pick(rng, 1, 2), pick(rng, 0, k - 1));
            let (h, w) = (pick(rng, k, k + 4), pick(rng, k, k + 4));
            let x = normal_tensor(vec![spec.in_channels, h, w], rng);
            (conv(spec, rng), x)
        }
        CheckedKind::MaxPool2d => {
            let size = pick(rng, 1, 3);
            let stride = pick(rng, 1, size);
            let shape = vec![pick(rng, 1, 2), pick(rng, size, size + 4), pick(rng, size, size + 4)];
            (Layer::max_pool(size, stride).expect("positive"), normal_tensor(shape, rng))
        }
        CheckedKind::Relu => {
            let shape = vec![pick(rng, 1, 3), pick(rng, 1, 5), pick(rng, 1, 5)];
            (Layer::relu(), normal_tensor(shape, rng))
        }
        CheckedKind::Residual => {
            let c = pick(rng, 1, 3);
            let k = [1, 3][rng.below(2)];
            let inner = vec![
                conv(ConvSpec::new(c, c, 3, 1, 1), rng),
                Layer::relu(),
                conv(ConvSpec::new(c, c, k, 1, k / 2), rng),
            ];
            let shape = vec![c, pick(rng, 2, 5), pick(rng, 2, 5)];
            (Layer::residual(inner).expect("nonempty"), normal_tensor(shape, rng))
        }
        CheckedKind::Inception => {
            let cin = pick(rng, 1, 2);
            let n_branches = pick(rng, 2, 3);
            let branches = (0..n_branches)
                .map(|_| {
                    let k = [1, 3, 5][rng.below(3)];
                    vec![conv(ConvSpec::new(cin, pick(rng, 1, 3), k, 1, k / 2), rng), Layer::relu()]
                })
                .collect();
            let shape = vec![cin, pick(rng, 2, 5), pick(rng, 2, 5)];
            (Layer::inception(branches).expect("nonempty"), normal_tensor(shape, rng))
        }
    }
}

/// Kink margin of `layer` at `x`; see [`check_kind`].
pub fn kink_margin(layer: &Layer, x: &Tensor) -> Result<f64> {
    let (_, cache) = layer.forward_cached(x)?;
    Ok(sequence_margin(std::slice::from_ref(layer), std::slice::from_ref(&cache)))
}

/// Checks parameter and input gradients of the scalar `Σ r·layer(x)` for a
/// random direction `r`.
pub fn check_layer(layer: &Layer, x: &Tensor, eps: f64, rng: &mut SplitMix64) -> Result<GradCheck> {
    let (out, cache) = layer.forward_cached(x)?;
    let r = normal_tensor(out.shape().to_vec(), rng);
    let objective = |l: &Layer, x: &Tensor| -> Result<f64> {
        let y = l.forward(x)?;
        Ok(y.data().iter().zip(r.data()).map(|(a, b)| a * b).sum())
    };
    let mut grad = LayerGrad::zeros_like(layer);
    let gx = backprop_sequence(
        std::slice::from_ref(layer),
        std::slice::from_ref(&cache),
        r.clone(),
        std::slice::from_mut(&mut grad),
        0,
    );
    let analytic = grad.flatten();
    let params = layer.param_values();
    let mut worst: f64 = 0.0;
    let mut probe = layer.clone();
    for (j, &a) in analytic.iter().enumerate() {
        let mut p = params.clone();
        p[j] += eps;
        probe.set_param_values(&p);
        let up = objective(&probe, x)?;
        p[j] -= 2.0 * eps;
        probe.set_param_values(&p);
        let down = objective(&probe, x)?;
        worst = worst.max(rel_error(a, (up - down) / (2.0 * eps)));
    }
    for (i, &a) in gx.data().iter().enumerate() {
        let nudged = |delta: f64| {
            let mut v = x.data().to_vec();
            v[i] += delta;
            Tensor::new(x.shape().to_vec(), v)
        };
        let numeric = (objective(layer, &nudged(eps)?)? - objective(layer, &nudged(-eps)?)?) / (2.0 * eps);
        worst = worst.max(rel_error(a, numeric));
    }
    Ok(GradCheck {
        max_rel_error: worst,
        entries: analytic.len() + gx.len(),
    })
}

/// Draws a random case of `kind` from `seed`, redrawing while the forward pass
/// sits within `kink_guard` of a ReLU or pooling non-differentiability, and
/// checks it.
pub fn check_kind(kind: CheckedKind, seed: u64, eps: f64, kink_guard: f64) -> Result<GradCheck> {
    for attempt in 0..1000 {
        let mut rng = SplitMix64::derive(seed, attempt);
        let (layer, x) = random_case(kind, &mut rng);
        if kink_margin(&layer, &x)? > kink_guard {
            return check_layer(&layer, &x, eps, &mut rng);
        }
    }
    Err(Error::invalid(format!("no kink-free {kind:?} case found for seed {seed}")))
}

/// Checks the mean cross-entropy gradient of a whole network against
/// finite differences over every parameter.
pub fn check_network(net: &Network, inputs: &[Tensor], labels: &[usize], eps: f64) -> Result<GradCheck> {
    let (_, grads) = loss_and_grad(net, inputs, labels)?;
    let loss = |n: &Network| -> Result<f64> {
        let mut total = 0.0;
        for (x, &y) in inputs.iter().zip(labels) {
            total += cross_entropy(n.forward(x)?.data(), y);
        }
        Ok(total / inputs.len() as f64)
    };
    let mut worst: f64 = 0.0;
    let mut entries = 0;
    let mut probe = net.clone();
    for (li, g) in grads.iter().enumerate() {
        let base = net.layers()[li].param_values();
        for (j, &a) in g.flatten().iter().enumerate() {
            let mut p = base.clone();
            p[j] += eps;
            probe.layers_mut()[li].set_param_values(&p);
            let up = loss(&probe)?;
            p[j] -= 2.0 * eps;
            probe.layers_mut()[li].set_param_values(&p);
            let down = loss(&probe)?;
            probe.layers_mut()[li].set_param_values(&base);
            let numeric = if net.layers()[li].is_frozen() { 0.0 } else { (up - down) / (2.0 * eps) };
            worst = worst.max(rel_error(a, numeric));
            entries += 1;
        }
    }
    Ok(GradCheck {
        max_rel_error: worst,
        entries,
    })
}
