use super::layer::{run_sequence, sequence_shape, Cache, Layer};
use super::loss::softmax;
use super::tensor::Tensor;
use crate::anthro::ColumnScaler;
use crate::error::{Error, Result};
use crate::{ShapeLabel, NUM_CLASSES};

/// Ordered layer stack mapping one input tensor to five class logits.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    arch: String,
    input_shape: Vec<usize>,
    layers: Vec<Layer>,
    input_scaling: Option<ColumnScaler>,
}

impl Network {
    /// Checks that the layers compose and end in `NUM_CLASSES` logits.
    pub fn new(arch: impl Into<String>, input_shape: Vec<usize>, layers: Vec<Layer>) -> Result<Self> {
        if input_shape.is_empty() || input_shape.contains(&0) {
            return Err(Error::invalid(format!("bad input shape {input_shape:?}")));
        }
        let out = sequence_shape(&layers, &input_shape)?;
        if out != [NUM_CLASSES] {
            return Err(Error::ShapeMismatch(format!(
                "network output {out:?}, expected [{NUM_CLASSES}]"
            )));
        }
        Ok(Self {
            arch: arch.into(),
            input_shape,
            layers,
            input_scaling: None,
        })
    }

    /// Standardizes rank-1 inputs before the first layer.
    pub fn with_input_scaling(mut self, scaler: ColumnScaler) -> Result<Self> {
        if self.input_shape != [scaler.means.len()] || scaler.sds.len() != scaler.means.len() {
            return Err(Error::ShapeMismatch(format!(
                "scaler for {} columns on input {:?}",
                scaler.means.len(),
                self.input_shape
            )));
        }
        self.input_scaling = Some(scaler);
        Ok(self)
    }

    pub fn arch(&self) -> &str {
        &self.arch
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Parameter values may be edited; layer kinds cannot.
    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_scaling(&self) -> Option<&ColumnScaler> {
        self.input_scaling.as_ref()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn frozen_flags(&self) -> Vec<bool> {
        self.layers.iter().map(Layer::is_frozen).collect()
    }

    /// Index of the first top-level layer with anything trainable inside it.
    pub fn first_trainable(&self) -> Option<usize> {
        fn trainable(l: &Layer) -> bool {
            !l.is_frozen() || l.children().any(trainable)
        }
        self.layers.iter().position(trainable)
    }

    fn prepare(&self, x: &Tensor) -> Result<Tensor> {
        if x.shape() != self.input_shape {
            return Err(Error::ShapeMismatch(format!(
                "input {:?}, network expects {:?}",
                x.shape(),
                self.input_shape
            )));
        }
        Ok(match &self.input_scaling {
            Some(s) => Tensor::from_parts(x.shape().to_vec(), s.transform_row(x.data())),
            None => x.clone(),
        })
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.forward_cached(x).map(|(out, _)| out)
    }

    pub(crate) fn forward_cached(&self, x: &Tensor) -> Result<(Tensor, Vec<Cache>)> {
        run_sequence(&self.layers, &self.prepare(x)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: ShapeLabel,
    pub probabilities: Vec<f64>,
}

/// Argmax of the softmax; ties resolve to the lowest ordinal.
pub fn predict(net: &Network, x: &Tensor) -> Result<Prediction> {
    let logits = net.forward(x)?;
    Ok(prediction_from_logits(logits.data()))
}

pub fn prediction_from_logits(logits: &[f64]) -> Prediction {
    let probabilities = softmax(logits);
    let best = probabilities
        .iter()
        .enumerate()
        .fold(0, |best, (i, &p)| if p > probabilities[best] { i } else { best });
    Prediction {
        label: ShapeLabel::from_ordinal(best).expect("network emits one logit per class"),
        probabilities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::layer::LayerKind;
    use crate::rng::SplitMix64;

    #[test]
    fn zero_dense_emits_biases() {
        let layer = Layer::from_parts(
            LayerKind::Dense { inputs: 3, outputs: 5 },
            vec![0.0; 15],
            vec![0.1, -0.2, 0.3, 0.0, 7.0],
            false,
        )
        .unwrap();
        let net = Network::new("t", vec![3], vec![layer]).unwrap();
        let out = net.forward(&Tensor::vector(vec![4.0, -1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(out.data(), &[0.1, -0.2, 0.3, 0.0, 7.0]);
    }

    #[test]
    fn composition_is_checked() {
        let mut rng = SplitMix64::new(0);
        let l = vec![Layer::dense(3, 4, &mut rng).unwrap()];
        assert!(Network::new("t", vec![3], l).is_err());
        let l = vec![Layer::dense(3, 5, &mut rng).unwrap()];
        let net = Network::new("t", vec![3], l).unwrap();
        assert!(net.forward(&Tensor::vector(vec![1.0; 4]).unwrap()).is_err());
    }

    #[test]
    fn prediction_examples() {
        let p = prediction_from_logits(&[0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.label.ordinal(), 4);
        let e = std::f64::consts::E;
        assert!((p.probabilities[4] - e / (4.0 + e)).abs() < 1e-12);
        assert!((p.probabilities[4] - 0.4046).abs() < 1e-4);

        let p = prediction_from_logits(&[2.5; 5]);
        assert_eq!(p.label.ordinal(), 0);
        assert!(p.probabilities.iter().all(|&q| (q - 0.2).abs() < 1e-15));
    }

    #[test]
    fn input_scaling_applies_before_layers() {
        let layer = Layer::from_parts(
            LayerKind::Dense { inputs: 1, outputs: 5 },
            vec![1.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0; 5],
            false,
        )
        .unwrap();
        let net = Network::new("t", vec![1], vec![layer])
            .unwrap()
            .with_input_scaling(ColumnScaler {
                means: vec![10.0],
                sds: vec![2.0],
            })
            .unwrap();
        let out = net.forward(&Tensor::vector(vec![14.0]).unwrap()).unwrap();
        assert_eq!(out.data()[0], 2.0);
    }
}
