use serde::{Deserialize, Serialize};

use super::layer::LayerGrad;
use super::loss::{accumulate_sample, check_label, cross_entropy, zero_grads};
use super::network::{prediction_from_logits, Network};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::{ShapeLabel, NUM_CLASSES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 32,
            epochs: 50,
            seed: 0,
            validation_fraction: 0.2,
        }
    }
}

impl TrainConfig {
    /// `learning_rate = 0` is allowed and leaves every parameter unchanged.
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!("learning rate {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid(format!("momentum {} outside [0, 1)", self.momentum)));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::invalid("batch size and epochs must be at least 1"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "validation fraction {} outside (0, 1)",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

/// Inputs with class ordinals.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Vec<Tensor>,
    labels: Vec<usize>,
}

impl Dataset {
    pub fn new(inputs: Vec<Tensor>, labels: Vec<usize>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::invalid("empty dataset"));
        }
        if inputs.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} inputs for {} labels",
                inputs.len(),
                labels.len()
            )));
        }
        if let Some(x) = inputs.iter().find(|x| x.shape() != inputs[0].shape()) {
            return Err(Error::ShapeMismatch(format!(
                "mixed input shapes {:?} and {:?}",
                inputs[0].shape(),
                x.shape()
            )));
        }
        labels.iter().try_for_each(|&y| check_label(y))?;
        Ok(Self { inputs, labels })
    }

    pub fn from_labeled(inputs: Vec<Tensor>, labels: &[ShapeLabel]) -> Result<Self> {
        Self::new(inputs, labels.iter().map(|l| l.ordinal()).collect())
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Tensor] {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossCurve {
    pub records: Vec<EpochRecord>,
}

impl LossCurve {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn train_losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.train_loss).collect()
    }
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub network: Network,
    pub curve: LossCurve,
    /// Ascending sample indices.
    pub train_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
    pub predictions: Vec<usize>,
}

/// Per-class split: `round(fraction * n_class)` samples of each class go to
/// validation. Every present class must keep at least one training sample.
pub fn stratified_split(labels: &[usize], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in 0..NUM_CLASSES {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        SplitMix64::derive(seed, 0x5917 + class as u64).shuffle(&mut members);
        let n_val = ((fraction * members.len() as f64).round() as usize).min(members.len());
        if n_val == members.len() {
            return Err(Error::invalid(format!(
                "class {} has no training samples after the split",
                ShapeLabel::from_ordinal(class).expect("class < NUM_CLASSES")
            )));
        }
        val.extend_from_slice(&members[..n_val]);
        train.extend_from_slice(&members[n_val..]);
    }
    if val.is_empty() {
        return Err(Error::invalid("validation split is empty; raise the fraction or add samples"));
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}

/// Mean loss, accuracy and argmax predictions over `indices`.
pub fn evaluate(net: &Network, data: &Dataset, indices: &[usize]) -> Result<Evaluation> {
    if indices.is_empty() {
        return Err(Error::invalid("nothing to evaluate"));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    let mut predictions = Vec::with_capacity(indices.len());
    for &i in indices {
        let logits = net.forward(&data.inputs[i])?;
        loss += cross_entropy(logits.data(), data.labels[i]);
        let p = prediction_from_logits(logits.data()).label.ordinal();
        correct += usize::from(p == data.labels[i]);
        predictions.push(p);
    }
    let n = indices.len() as f64;
    Ok(Evaluation {
        loss: loss / n,
        accuracy: correct as f64 / n,
        predictions,
    })
}

/// Minibatch SGD with momentum on a stratified training split.
///
/// The epoch training loss is the mean of per-sample losses observed during
/// the epoch, summed in sample-index order.
pub fn train(net: &Network, data: &Dataset, cfg: &TrainConfig) -> Result<TrainRun> {
    cfg.validate()?;
    let (train_idx, val_idx) = stratified_split(&data.labels, cfg.validation_fraction, cfg.seed)?;
    let mut net = net.clone();
    let mut velocity = zero_grads(&net);
    let mut order = train_idx.clone();
    let mut rng = SplitMix64::derive(cfg.seed, 1);
    let mut sample_loss = vec![0.0; data.len()];
    let mut curve = LossCurve::default();

    for epoch in 1..=cfg.epochs {
        rng.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = zero_grads(&net);
            let weight = 1.0 / batch.len() as f64;
            for &i in batch {
                sample_loss[i] = accumulate_sample(&net, &data.inputs[i], data.labels[i], weight, &mut grads)?;
            }
            sgd_step(&mut net, &grads, &mut velocity, cfg);
        }
        let train_loss = train_idx.iter().map(|&i| sample_loss[i]).sum::<f64>() / train_idx.len() as f64;
        let val = evaluate(&net, data, &val_idx)?;
        curve.records.push(EpochRecord {
            epoch,
            train_loss,
            val_loss: val.loss,
            val_accuracy: val.accuracy,
        });
    }
    Ok(TrainRun {
        network: net,
        curve,
        train_indices: train_idx,
        validation_indices: val_idx,
    })
}

fn sgd_step(net: &mut Network, grads: &[LayerGrad], velocity: &mut [LayerGrad], cfg: &TrainConfig) {
    let (lr, mu) = (cfg.learning_rate, cfg.momentum);
    let mut update = |params: &mut [f64], g: &[f64], v: &mut [f64]| {
        for ((p, &g), v) in params.iter_mut().zip(g).zip(v.iter_mut()) {
            *v = mu * *v - lr * g;
            *p += *v;
        }
    };
    for ((layer, g), v) in net.layers_mut().iter_mut().zip(grads).zip(velocity) {
        layer.for_each_trainable(g, v, &mut update);
    }
}
