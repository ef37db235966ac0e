use std::path::Path;

use serde::{Deserialize, Serialize};

use super::layer::{ConvSpec, Layer, LayerKind};
use super::network::Network;
use crate::anthro::ColumnScaler;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    format_version: u64,
    arch: String,
    input_shape: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_scaling: Option<ColumnScaler>,
    layers: Vec<LayerRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerRecord {
    kind: String,
    params: Vec<usize>,
    frozen: bool,
    weights: Vec<f64>,
    biases: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<LayerRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    branches: Vec<Vec<LayerRecord>>,
}

impl LayerRecord {
    fn from_layer(layer: &Layer) -> Self {
        let (children, branches) = match layer.kind() {
            LayerKind::Residual(inner) => (inner.iter().map(Self::from_layer).collect(), Vec::new()),
            LayerKind::Inception(bs) => (
                Vec::new(),
                bs.iter().map(|b| b.iter().map(Self::from_layer).collect()).collect(),
            ),
            _ => (Vec::new(), Vec::new()),
        };
        Self {
            kind: layer.kind().name().to_string(),
            params: layer.kind().params(),
            frozen: layer.is_frozen(),
            weights: layer.weights().to_vec(),
            biases: layer.biases().to_vec(),
            children,
            branches,
        }
    }

    fn into_layer(self) -> Result<Layer> {
        let bad = |what: String| Error::ShapeMismatch(format!("{} layer: {what}", self.kind));
        let expect_params = |n: usize| {
            if self.params.len() == n {
                Ok(())
            } else {
                Err(bad(format!("expected {n} params, got {:?}", self.params)))
            }
        };
        let p = &self.params;
        let kind = match self.kind.as_str() {
            "dense" => {
                expect_params(2)?;
                LayerKind::Dense {
                    inputs: p[0],
                    outputs: p[1],
                }
            }
            "conv2d" => {
                expect_params(5)?;
                if p[2] == 0 || p[3] == 0 {
                    return Err(bad("zero kernel or stride".into()));
                }
                LayerKind::Conv2d(ConvSpec::new(p[0], p[1], p[2], p[3], p[4]))
            }
            "maxpool2d" => {
                expect_params(2)?;
                if p[0] == 0 || p[1] == 0 {
                    return Err(bad("zero pool size or stride".into()));
                }
                LayerKind::MaxPool2d { size: p[0], stride: p[1] }
            }
            "relu" => {
                expect_params(0)?;
                LayerKind::Relu
            }
            "flatten" => {
                expect_params(0)?;
                LayerKind::Flatten
            }
            "residual" => {
                expect_params(1)?;
                if self.children.len() != p[0] || p[0] == 0 {
                    return Err(bad(format!("declares {} inner layers, has {}", p[0], self.children.len())));
                }
                LayerKind::Residual(self.children.into_iter().map(Self::into_layer).collect::<Result<_>>()?)
            }
            "inception" => {
                expect_params(1)?;
                if self.branches.len() != p[0] || self.branches.iter().any(Vec::is_empty) {
                    return Err(bad(format!("declares {} branches, has {}", p[0], self.branches.len())));
                }
                LayerKind::Inception(
                    self.branches
                        .into_iter()
                        .map(|b| b.into_iter().map(Self::into_layer).collect::<Result<Vec<_>>>())
                        .collect::<Result<_>>()?,
                )
            }
            other => return Err(Error::invalid(format!("unknown layer kind {other:?}"))),
        };
        Layer::from_parts(kind, self.weights, self.biases, self.frozen)
    }
}

impl Network {
    pub fn to_checkpoint_json(&self) -> Result<String> {
        let file = CheckpointFile {
            format_version: CHECKPOINT_VERSION,
            arch: self.arch().to_string(),
            input_shape: self.input_shape().to_vec(),
            input_scaling: self.input_scaling().cloned(),
            layers: self.layers().iter().map(LayerRecord::from_layer).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Rejects version mismatches, inconsistent shapes and non-finite values.
    pub fn from_checkpoint_json(json: &str) -> Result<Self> {
        let file: CheckpointFile = serde_json::from_str(json)?;
        if file.format_version != CHECKPOINT_VERSION {
            return Err(Error::FormatVersion {
                found: file.format_version,
                expected: CHECKPOINT_VERSION,
            });
        }
        let layers = file
            .layers
            .into_iter()
            .map(LayerRecord::into_layer)
            .collect::<Result<Vec<_>>>()?;
        let net = Network::new(file.arch, file.input_shape, layers)?;
        match file.input_scaling {
            Some(s) => {
                if s.means.iter().chain(&s.sds).any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("input scaling".into()));
                }
                net.with_input_scaling(s)
            }
            None => Ok(net),
        }
    }
}

pub fn save_checkpoint(net: &Network, path: &Path) -> Result<()> {
    std::fs::write(path, net.to_checkpoint_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Network> {
    let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Network::from_checkpoint_json(&json)
}
