use std::ops::Range;

use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
}

impl ConvSpec {
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, padding: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel,
            stride,
            padding,
        }
    }

    fn weight_len(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel * self.kernel
    }

    fn output_extent(&self, extent: usize) -> Option<usize> {
        let padded = extent + 2 * self.padding;
        (padded >= self.kernel).then(|| (padded - self.kernel) / self.stride + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerKind {
    Dense { inputs: usize, outputs: usize },
    Conv2d(ConvSpec),
    MaxPool2d { size: usize, stride: usize },
    Relu,
    Flatten,
    /// `inner(x) + x`.
    Residual(Vec<Layer>),
    /// Branch outputs concatenated along the channel axis.
    Inception(Vec<Vec<Layer>>),
}

impl LayerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LayerKind::Dense { .. } => "dense",
            LayerKind::Conv2d(_) => "conv2d",
            LayerKind::MaxPool2d { .. } => "maxpool2d",
            LayerKind::Relu => "relu",
            LayerKind::Flatten => "flatten",
            LayerKind::Residual(_) => "residual",
            LayerKind::Inception(_) => "inception",
        }
    }

    /// Shape-describing integers as stored in checkpoints.
    pub fn params(&self) -> Vec<usize> {
        match self {
            LayerKind::Dense { inputs, outputs } => vec![*inputs, *outputs],
            LayerKind::Conv2d(s) => vec![s.in_channels, s.out_channels, s.kernel, s.stride, s.padding],
            LayerKind::MaxPool2d { size, stride } => vec![*size, *stride],
            LayerKind::Relu | LayerKind::Flatten => Vec::new(),
            LayerKind::Residual(inner) => vec![inner.len()],
            LayerKind::Inception(branches) => vec![branches.len()],
        }
    }

    fn param_lens(&self) -> (usize, usize) {
        match self {
            LayerKind::Dense { inputs, outputs } => (inputs * outputs, *outputs),
            LayerKind::Conv2d(s) => (s.weight_len(), s.out_channels),
            _ => (0, 0),
        }
    }
}

/// One node of a network. Blocks own their inner layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    kind: LayerKind,
    weights: Vec<f64>,
    biases: Vec<f64>,
    frozen: bool,
}

/// Parameter gradients mirroring a layer's tree.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    /// Residual: one per inner layer. Inception: one per branch, each holding
    /// one child per branch layer.
    pub children: Vec<LayerGrad>,
}

impl LayerGrad {
    pub fn zeros_like(layer: &Layer) -> Self {
        let children = match &layer.kind {
            LayerKind::Residual(inner) => inner.iter().map(LayerGrad::zeros_like).collect(),
            LayerKind::Inception(branches) => branches
                .iter()
                .map(|b| LayerGrad {
                    weights: Vec::new(),
                    biases: Vec::new(),
                    children: b.iter().map(LayerGrad::zeros_like).collect(),
                })
                .collect(),
            _ => Vec::new(),
        };
        Self {
            weights: vec![0.0; layer.weights.len()],
            biases: vec![0.0; layer.biases.len()],
            children,
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.weights.iter_mut().for_each(|v| *v *= factor);
        self.biases.iter_mut().for_each(|v| *v *= factor);
        self.children.iter_mut().for_each(|c| c.scale(factor));
    }

    pub fn add_assign(&mut self, other: &LayerGrad) {
        self.weights.iter_mut().zip(&other.weights).for_each(|(a, b)| *a += b);
        self.biases.iter_mut().zip(&other.biases).for_each(|(a, b)| *a += b);
        self.children
            .iter_mut()
            .zip(&other.children)
            .for_each(|(a, b)| a.add_assign(b));
    }

    /// Every gradient entry, depth first.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.weights);
        out.extend_from_slice(&self.biases);
        self.children.iter().for_each(|c| c.collect(out));
    }
}

/// What a layer keeps from its forward pass for the backward pass.
#[derive(Debug, Clone)]
pub(crate) enum Cache {
    Input(Tensor),
    Pool { input: Tensor, argmax: Vec<usize> },
    Flatten(Vec<usize>),
    Sequence(Vec<Cache>),
    Branches { caches: Vec<Vec<Cache>>, channels: Vec<usize> },
}

fn glorot(rng: &mut SplitMix64, n: usize, fan_in: usize, fan_out: usize) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.uniform(-limit, limit)).collect()
}

impl Layer {
    pub fn dense(inputs: usize, outputs: usize, rng: &mut SplitMix64) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::invalid("dense layer needs nonzero extents"));
        }
        Ok(Self {
            kind: LayerKind::Dense { inputs, outputs },
            weights: glorot(rng, inputs * outputs, inputs, outputs),
            biases: vec![0.0; outputs],
            frozen: false,
        })
    }

    pub fn conv2d(spec: ConvSpec, rng: &mut SplitMix64) -> Result<Self> {
        if spec.in_channels == 0 || spec.out_channels == 0 || spec.kernel == 0 || spec.stride == 0 {
            return Err(Error::invalid(format!("invalid conv spec {spec:?}")));
        }
        let area = spec.kernel * spec.kernel;
        Ok(Self {
            weights: glorot(
                rng,
                spec.weight_len(),
                spec.in_channels * area,
                spec.out_channels * area,
            ),
            biases: vec![0.0; spec.out_channels],
            kind: LayerKind::Conv2d(spec),
            frozen: false,
        })
    }

    pub fn max_pool(size: usize, stride: usize) -> Result<Self> {
        if size == 0 || stride == 0 {
            return Err(Error::invalid("pool size and stride must be positive"));
        }
        Ok(Self::bare(LayerKind::MaxPool2d { size, stride }))
    }

    pub fn relu() -> Self {
        Self::bare(LayerKind::Relu)
    }

    pub fn flatten() -> Self {
        Self::bare(LayerKind::Flatten)
    }

    pub fn residual(inner: Vec<Layer>) -> Result<Self> {
        if inner.is_empty() {
            return Err(Error::invalid("residual block needs inner layers"));
        }
        Ok(Self::bare(LayerKind::Residual(inner)))
    }

    pub fn inception(branches: Vec<Vec<Layer>>) -> Result<Self> {
        if branches.is_empty() || branches.iter().any(Vec::is_empty) {
            return Err(Error::invalid("inception block needs nonempty branches"));
        }
        Ok(Self::bare(LayerKind::Inception(branches)))
    }

    fn bare(kind: LayerKind) -> Self {
        Self {
            kind,
            weights: Vec::new(),
            biases: Vec::new(),
            frozen: false,
        }
    }

    /// Rebuilds a layer from stored parameters, checking lengths and finiteness.
    pub fn from_parts(kind: LayerKind, weights: Vec<f64>, biases: Vec<f64>, frozen: bool) -> Result<Self> {
        let (wl, bl) = kind.param_lens();
        if weights.len() != wl || biases.len() != bl {
            return Err(Error::ShapeMismatch(format!(
                "{} layer {:?} needs {wl} weights and {bl} biases, got {} and {}",
                kind.name(),
                kind.params(),
                weights.len(),
                biases.len()
            )));
        }
        if weights.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{} layer parameters", kind.name())));
        }
        Ok(Self {
            kind,
            weights,
            biases,
            frozen,
        })
    }

    pub fn kind(&self) -> &LayerKind {
        &self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Sets the flag on this layer and everything nested inside it.
    pub fn set_frozen(&mut self, frozen: bool) {
        self.frozen = frozen;
        self.children_mut().for_each(|c| c.set_frozen(frozen));
    }

    pub fn children(&self) -> Box<dyn Iterator<Item = &Layer> + '_> {
        match &self.kind {
            LayerKind::Residual(inner) => Box::new(inner.iter()),
            LayerKind::Inception(branches) => Box::new(branches.iter().flatten()),
            _ => Box::new(std::iter::empty()),
        }
    }

    pub(crate) fn children_mut(&mut self) -> Box<dyn Iterator<Item = &mut Layer> + '_> {
        match &mut self.kind {
            LayerKind::Residual(inner) => Box::new(inner.iter_mut()),
            LayerKind::Inception(branches) => Box::new(branches.iter_mut().flatten()),
            _ => Box::new(std::iter::empty()),
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len() + self.children().map(Layer::param_count).sum::<usize>()
    }

    /// Every parameter, depth first: own weights, own biases, then children.
    /// Matches the order of [`LayerGrad::flatten`].
    pub fn param_values(&self) -> Vec<f64> {
        let mut out = self.weights.clone();
        out.extend_from_slice(&self.biases);
        self.children().for_each(|c| out.extend(c.param_values()));
        out
    }

    /// Inverse of [`Layer::param_values`]; returns how many values were used.
    pub fn set_param_values(&mut self, values: &[f64]) -> usize {
        let (w, b) = (self.weights.len(), self.biases.len());
        self.weights.copy_from_slice(&values[..w]);
        self.biases.copy_from_slice(&values[w..w + b]);
        let mut used = w + b;
        for child in self.children_mut() {
            used += child.set_param_values(&values[used..]);
        }
        used
    }

    /// Applies `update` to every unfrozen parameter slice with its gradient.
    pub(crate) fn for_each_trainable(
        &mut self,
        grad: &LayerGrad,
        state: &mut LayerGrad,
        update: &mut impl FnMut(&mut [f64], &[f64], &mut [f64]),
    ) {
        if !self.frozen {
            update(&mut self.weights, &grad.weights, &mut state.weights);
            update(&mut self.biases, &grad.biases, &mut state.biases);
        }
        match &mut self.kind {
            LayerKind::Residual(inner) => {
                for ((l, g), s) in inner.iter_mut().zip(&grad.children).zip(&mut state.children) {
                    l.for_each_trainable(g, s, update);
                }
            }
            LayerKind::Inception(branches) => {
                for ((b, g), s) in branches.iter_mut().zip(&grad.children).zip(&mut state.children) {
                    for ((l, lg), ls) in b.iter_mut().zip(&g.children).zip(&mut s.children) {
                        l.for_each_trainable(lg, ls, update);
                    }
                }
            }
            _ => {}
        }
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let mismatch = |what: &str| {
            Err(Error::ShapeMismatch(format!(
                "{} layer cannot take input {input:?}: {what}",
                self.kind.name()
            )))
        };
        match &self.kind {
            LayerKind::Dense { inputs, outputs } => {
                if input != [*inputs] {
                    return mismatch(&format!("expected [{inputs}]"));
                }
                Ok(vec![*outputs])
            }
            LayerKind::Conv2d(spec) => {
                let [c, h, w] = input else {
                    return mismatch("expected rank 3");
                };
                if *c != spec.in_channels {
                    return mismatch(&format!("expected {} channels", spec.in_channels));
                }
                match (spec.output_extent(*h), spec.output_extent(*w)) {
                    (Some(oh), Some(ow)) => Ok(vec![spec.out_channels, oh, ow]),
                    _ => mismatch("kernel larger than padded input"),
                }
            }
            LayerKind::MaxPool2d { size, stride } => {
                let [c, h, w] = input else {
                    return mismatch("expected rank 3");
                };
                if h < size || w < size {
                    return mismatch("pool window larger than input");
                }
                Ok(vec![*c, (h - size) / stride + 1, (w - size) / stride + 1])
            }
            LayerKind::Relu => Ok(input.to_vec()),
            LayerKind::Flatten => Ok(vec![input.iter().product()]),
            LayerKind::Residual(inner) => {
                let out = sequence_shape(inner, input)?;
                if out != input {
                    return mismatch(&format!("inner layers produce {out:?}"));
                }
                Ok(out)
            }
            LayerKind::Inception(branches) => {
                let mut channels = 0;
                let mut spatial: Option<Vec<usize>> = None;
                for branch in branches {
                    let out = sequence_shape(branch, input)?;
                    let [c, h, w] = out[..] else {
                        return mismatch("branch output is not rank 3");
                    };
                    if spatial.as_ref().is_some_and(|s| s[..] != [h, w]) {
                        return mismatch("branch spatial extents differ");
                    }
                    spatial = Some(vec![h, w]);
                    channels += c;
                }
                let s = spatial.expect("inception has branches");
                Ok(vec![channels, s[0], s[1]])
            }
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.forward_cached(x).map(|(out, _)| out)
    }

    pub(crate) fn forward_cached(&self, x: &Tensor) -> Result<(Tensor, Cache)> {
        let out_shape = self.output_shape(x.shape())?;
        match &self.kind {
            LayerKind::Dense { inputs, outputs } => {
                let xs = x.data();
                let out = (0..*outputs)
                    .map(|o| {
                        let row = &self.weights[o * inputs..(o + 1) * inputs];
                        self.biases[o] + row.iter().zip(xs).map(|(w, v)| w * v).sum::<f64>()
                    })
                    .collect();
                Ok((Tensor::from_parts(out_shape, out), Cache::Input(x.clone())))
            }
            LayerKind::Conv2d(spec) => {
                let out = conv_forward(spec, &self.weights, &self.biases, x, &out_shape);
                Ok((Tensor::from_parts(out_shape, out), Cache::Input(x.clone())))
            }
            LayerKind::MaxPool2d { size, stride } => {
                let (out, argmax) = pool_forward(*size, *stride, x, &out_shape);
                Ok((
                    Tensor::from_parts(out_shape, out),
                    Cache::Pool {
                        input: x.clone(),
                        argmax,
                    },
                ))
            }
            LayerKind::Relu => {
                let out = x.data().iter().map(|&v| v.max(0.0)).collect();
                Ok((Tensor::from_parts(out_shape, out), Cache::Input(x.clone())))
            }
            LayerKind::Flatten => Ok((
                x.clone().reshaped(out_shape),
                Cache::Flatten(x.shape().to_vec()),
            )),
            LayerKind::Residual(inner) => {
                let (mut out, caches) = run_sequence(inner, x)?;
                out.data_mut().iter_mut().zip(x.data()).for_each(|(o, v)| *o += v);
                Ok((out, Cache::Sequence(caches)))
            }
            LayerKind::Inception(branches) => {
                let mut data = Vec::with_capacity(out_shape.iter().product());
                let mut caches = Vec::with_capacity(branches.len());
                let mut channels = Vec::with_capacity(branches.len());
                for branch in branches {
                    let (out, cache) = run_sequence(branch, x)?;
                    channels.push(out.shape()[0]);
                    data.extend_from_slice(out.data());
                    caches.push(cache);
                }
                Ok((
                    Tensor::from_parts(out_shape, data),
                    Cache::Branches { caches, channels },
                ))
            }
        }
    }

    /// Accumulates parameter gradients into `grad` (skipped when frozen) and
    /// returns the gradient with respect to the layer input.
    pub(crate) fn backward(&self, cache: &Cache, grad_out: &Tensor, grad: &mut LayerGrad) -> Tensor {
        match (&self.kind, cache) {
            (LayerKind::Dense { inputs, outputs }, Cache::Input(x)) => {
                let g = grad_out.data();
                let xs = x.data();
                let mut gx = vec![0.0; *inputs];
                for o in 0..*outputs {
                    let row = &self.weights[o * inputs..(o + 1) * inputs];
                    gx.iter_mut().zip(row).for_each(|(a, w)| *a += w * g[o]);
                    if !self.frozen {
                        grad.biases[o] += g[o];
                        grad.weights[o * inputs..(o + 1) * inputs]
                            .iter_mut()
                            .zip(xs)
                            .for_each(|(a, v)| *a += g[o] * v);
                    }
                }
                Tensor::from_parts(x.shape().to_vec(), gx)
            }
            (LayerKind::Conv2d(spec), Cache::Input(x)) => conv_backward(spec, &self.weights, x, grad_out, grad, self.frozen),
            (LayerKind::MaxPool2d { .. }, Cache::Pool { input, argmax }) => {
                let mut gx = vec![0.0; input.len()];
                for (&src, g) in argmax.iter().zip(grad_out.data()) {
                    gx[src] += g;
                }
                Tensor::from_parts(input.shape().to_vec(), gx)
            }
            (LayerKind::Relu, Cache::Input(x)) => {
                let gx = x
                    .data()
                    .iter()
                    .zip(grad_out.data())
                    .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
                    .collect();
                Tensor::from_parts(x.shape().to_vec(), gx)
            }
            (LayerKind::Flatten, Cache::Flatten(shape)) => grad_out.clone().reshaped(shape.clone()),
            (LayerKind::Residual(inner), Cache::Sequence(caches)) => {
                let mut gx = backprop_sequence(inner, caches, grad_out.clone(), &mut grad.children, 0);
                gx.data_mut().iter_mut().zip(grad_out.data()).for_each(|(a, g)| *a += g);
                gx
            }
            (LayerKind::Inception(branches), Cache::Branches { caches, channels }) => {
                let (_, h, w) = grad_out.chw().expect("inception output is rank 3");
                let mut total: Option<Tensor> = None;
                let mut offset = 0;
                for (((branch, bc), &c), bg) in branches.iter().zip(caches).zip(channels).zip(&mut grad.children) {
                    let slice = grad_out.data()[offset * h * w..(offset + c) * h * w].to_vec();
                    offset += c;
                    let g = backprop_sequence(branch, bc, Tensor::from_parts(vec![c, h, w], slice), &mut bg.children, 0);
                    match &mut total {
                        Some(t) => t.data_mut().iter_mut().zip(g.data()).for_each(|(a, b)| *a += b),
                        None => total = Some(g),
                    }
                }
                total.expect("inception has branches")
            }
            _ => unreachable!("cache variant does not match layer kind"),
        }
    }

    /// Distance of the cached forward pass from the nearest non-differentiable
    /// point (ReLU at zero, pooling ties). Infinite for smooth layers.
    pub(crate) fn kink_margin(&self, cache: &Cache) -> f64 {
        match (&self.kind, cache) {
            (LayerKind::Relu, Cache::Input(x)) => x.data().iter().fold(f64::INFINITY, |m, v| m.min(v.abs())),
            (LayerKind::MaxPool2d { size, stride }, Cache::Pool { input, .. }) => pool_margin(*size, *stride, input),
            (LayerKind::Residual(inner), Cache::Sequence(caches)) => sequence_margin(inner, caches),
            (LayerKind::Inception(branches), Cache::Branches { caches, .. }) => branches
                .iter()
                .zip(caches)
                .map(|(b, c)| sequence_margin(b, c))
                .fold(f64::INFINITY, f64::min),
            _ => f64::INFINITY,
        }
    }
}

pub(crate) fn sequence_shape(layers: &[Layer], input: &[usize]) -> Result<Vec<usize>> {
    layers.iter().try_fold(input.to_vec(), |shape, l| l.output_shape(&shape))
}

pub(crate) fn run_sequence(layers: &[Layer], x: &Tensor) -> Result<(Tensor, Vec<Cache>)> {
    let mut caches = Vec::with_capacity(layers.len());
    let mut cur = x.clone();
    for layer in layers {
        let (out, cache) = layer.forward_cached(&cur)?;
        caches.push(cache);
        cur = out;
    }
    Ok((cur, caches))
}

/// Backpropagates through `layers[stop..]`; layers before `stop` are skipped
/// and the returned tensor is the gradient at the input of `layers[stop]`.
pub(crate) fn backprop_sequence(
    layers: &[Layer],
    caches: &[Cache],
    grad_out: Tensor,
    grads: &mut [LayerGrad],
    stop: usize,
) -> Tensor {
    let mut g = grad_out;
    for i in (stop..layers.len()).rev() {
        g = layers[i].backward(&caches[i], &g, &mut grads[i]);
    }
    g
}

pub(crate) fn sequence_margin(layers: &[Layer], caches: &[Cache]) -> f64 {
    layers
        .iter()
        .zip(caches)
        .map(|(l, c)| l.kink_margin(c))
        .fold(f64::INFINITY, f64::min)
}

/// Output positions `o` in `0..out_len` with `0 <= o*stride + offset < in_len`.
fn valid_range(out_len: usize, in_len: usize, offset: isize, stride: usize) -> Range<usize> {
    let s = stride as isize;
    let lo = if offset >= 0 { 0 } else { ((-offset + s - 1) / s) as usize };
    let hi_excl = in_len as isize - offset;
    let hi = if hi_excl <= 0 { 0 } else { ((hi_excl + s - 1) / s) as usize };
    lo.min(out_len)..hi.min(out_len).max(lo.min(out_len))
}

fn conv_forward(spec: &ConvSpec, weights: &[f64], biases: &[f64], x: &Tensor, out_shape: &[usize]) -> Vec<f64> {
    let (cin, h, w) = x.chw().expect("validated by output_shape");
    let (oh, ow) = (out_shape[1], out_shape[2]);
    let k = spec.kernel;
    let s = spec.stride;
    let pad = spec.padding as isize;
    let xs = x.data();
    let mut out = vec![0.0; spec.out_channels * oh * ow];
    for oc in 0..spec.out_channels {
        let plane = &mut out[oc * oh * ow..(oc + 1) * oh * ow];
        plane.fill(biases[oc]);
        for ic in 0..cin {
            let input = &xs[ic * h * w..(ic + 1) * h * w];
            for ky in 0..k {
                let rows = valid_range(oh, h, ky as isize - pad, s);
                for kx in 0..k {
                    let wv = weights[((oc * cin + ic) * k + ky) * k + kx];
                    let cols = valid_range(ow, w, kx as isize - pad, s);
                    for oy in rows.clone() {
                        let iy = (oy * s + ky) - spec.padding;
                        let in_row = &input[iy * w..(iy + 1) * w];
                        let out_row = &mut plane[oy * ow..(oy + 1) * ow];
                        for ox in cols.clone() {
                            out_row[ox] += wv * in_row[ox * s + kx - spec.padding];
                        }
                    }
                }
            }
        }
    }
    out
}

fn conv_backward(spec: &ConvSpec, weights: &[f64], x: &Tensor, grad_out: &Tensor, grad: &mut LayerGrad, frozen: bool) -> Tensor {
    let (cin, h, w) = x.chw().expect("cached input is rank 3");
    let (_, oh, ow) = grad_out.chw().expect("conv output is rank 3");
    let k = spec.kernel;
    let s = spec.stride;
    let pad = spec.padding as isize;
    let xs = x.data();
    let gs = grad_out.data();
    let mut gx = vec![0.0; xs.len()];
    for oc in 0..spec.out_channels {
        let gplane = &gs[oc * oh * ow..(oc + 1) * oh * ow];
        if !frozen {
            grad.biases[oc] += gplane.iter().sum::<f64>();
        }
        for ic in 0..cin {
            let input = &xs[ic * h * w..(ic + 1) * h * w];
            let ginput = &mut gx[ic * h * w..(ic + 1) * h * w];
            for ky in 0..k {
                let rows = valid_range(oh, h, ky as isize - pad, s);
                for kx in 0..k {
                    let widx = ((oc * cin + ic) * k + ky) * k + kx;
                    let wv = weights[widx];
                    let cols = valid_range(ow, w, kx as isize - pad, s);
                    let mut gw = 0.0;
                    for oy in rows.clone() {
                        let iy = (oy * s + ky) - spec.padding;
                        let g_row = &gplane[oy * ow..(oy + 1) * ow];
                        for ox in cols.clone() {
                            let ix = iy * w + ox * s + kx - spec.padding;
                            gw += g_row[ox] * input[ix];
                            ginput[ix] += wv * g_row[ox];
                        }
                    }
                    if !frozen {
                        grad.weights[widx] += gw;
                    }
                }
            }
        }
    }
    Tensor::from_parts(x.shape().to_vec(), gx)
}

fn pool_forward(size: usize, stride: usize, x: &Tensor, out_shape: &[usize]) -> (Vec<f64>, Vec<usize>) {
    let (c, h, w) = x.chw().expect("validated by output_shape");
    let (oh, ow) = (out_shape[1], out_shape[2]);
    let xs = x.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut argmax = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = (f64::NEG_INFINITY, 0);
                for dy in 0..size {
                    for dx in 0..size {
                        let idx = (ch * h + oy * stride + dy) * w + ox * stride + dx;
                        if xs[idx] > best.0 {
                            best = (xs[idx], idx);
                        }
                    }
                }
                out.push(best.0);
                argmax.push(best.1);
            }
        }
    }
    (out, argmax)
}

fn pool_margin(size: usize, stride: usize, x: &Tensor) -> f64 {
    if size == 1 {
        return f64::INFINITY;
    }
    let (c, h, w) = x.chw().expect("cached input is rank 3");
    let (oh, ow) = ((h - size) / stride + 1, (w - size) / stride + 1);
    let xs = x.data();
    let mut margin = f64::INFINITY;
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for dy in 0..size {
                    for dx in 0..size {
                        let v = xs[(ch * h + oy * stride + dy) * w + ox * stride + dx];
                        if v > first {
                            second = first;
                            first = v;
                        } else if v > second {
                            second = v;
                        }
                    }
                }
                margin = margin.min(first - second);
            }
        }
    }
    margin
}
