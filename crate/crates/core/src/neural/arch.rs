use std::fmt;
use std::str::FromStr;

use super::layer::{ConvSpec, Layer};
use super::network::Network;
use super::tensor::Tensor;
use crate::anthro::{ratio_features, RatioSpec, DEFAULT_RATIOS};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::silhouette::{Resample, Resize};
use crate::{BodyMeasurements, Mask, NUM_CLASSES};

/// Side length of the square image input of the convolutional architectures.
pub const IMAGE_SIDE: usize = 32;

/// Reference architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// Ratio features 13 -> 32 -> 5.
    Mlp13,
    /// Strided conv, two residual blocks, pooling, dense head.
    ResCnn,
    /// One inception block with 1x1/3x3/5x5 branches, pooling, dense head.
    IncCnn,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Mlp13, Architecture::ResCnn, Architecture::IncCnn];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Mlp13 => "mlp13",
            Architecture::ResCnn => "rescnn",
            Architecture::IncCnn => "incnn",
        }
    }

    pub fn takes_images(self) -> bool {
        !matches!(self, Architecture::Mlp13)
    }

    pub fn input_shape(self) -> Vec<usize> {
        match self {
            Architecture::Mlp13 => vec![DEFAULT_RATIOS.len()],
            _ => vec![1, IMAGE_SIDE, IMAGE_SIDE],
        }
    }

    /// Glorot-initialized network; weights are a function of `seed` only.
    pub fn build(self, seed: u64) -> Result<Network> {
        let rng = &mut SplitMix64::derive(seed, 0xA4C);
        let layers = match self {
            Architecture::Mlp13 => vec![
                Layer::dense(DEFAULT_RATIOS.len(), 32, rng)?,
                Layer::relu(),
                Layer::dense(32, NUM_CLASSES, rng)?,
            ],
            Architecture::ResCnn => {
                let mut block = || -> Result<Layer> {
                    Layer::residual(vec![
                        Layer::conv2d(ConvSpec::new(8, 8, 3, 1, 1), rng)?,
                        Layer::relu(),
                        Layer::conv2d(ConvSpec::new(8, 8, 3, 1, 1), rng)?,
                    ])
                };
                let (b1, b2) = (block()?, block()?);
                vec![
                    Layer::conv2d(ConvSpec::new(1, 8, 3, 2, 1), rng)?,
                    Layer::relu(),
                    b1,
                    Layer::relu(),
                    b2,
                    Layer::relu(),
                    Layer::max_pool(2, 2)?,
                    Layer::flatten(),
                    Layer::dense(8 * 8 * 8, NUM_CLASSES, rng)?,
                ]
            }
            Architecture::IncCnn => {
                let branches = [(1, 0), (3, 1), (5, 2)]
                    .into_iter()
                    .map(|(k, p)| Ok(vec![Layer::conv2d(ConvSpec::new(1, 4, k, 1, p), rng)?, Layer::relu()]))
                    .collect::<Result<Vec<_>>>()?;
                vec![
                    Layer::inception(branches)?,
                    Layer::max_pool(4, 4)?,
                    Layer::flatten(),
                    Layer::dense(12 * 8 * 8, NUM_CLASSES, rng)?,
                ]
            }
        };
        Network::new(self.name(), self.input_shape(), layers)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown architecture {s:?} (mlp13, rescnn, incnn)")))
    }
}

/// Bilinear downsample of a mask to `IMAGE_SIDE`², values in [0, 1].
pub fn mask_input(mask: &Mask) -> Result<Tensor> {
    let small = mask.to_gray().resize(IMAGE_SIDE, IMAGE_SIDE, Resample::Bilinear)?;
    Tensor::new(vec![1, IMAGE_SIDE, IMAGE_SIDE], small.values().to_vec())
}

/// The default ratio features as a rank-1 tensor.
pub fn ratio_input(m: &BodyMeasurements) -> Result<Tensor> {
    Tensor::vector(ratio_features(m, &RatioSpec::defaults())?.values)
}
