use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::NetConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;

const TENSORS_PER_LAYER: usize = 8;

/// Position of each tensor inside one dilated layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerTensor {
    /// Tap applied to `x[t]`, `residual × 2·gate`.
    ConvCurrent = 0,
    /// Tap applied to `x[t - dilation]`.
    ConvPast = 1,
    GateBias = 2,
    /// Local-conditioning projection, `condition_dim × 2·gate`.
    Condition = 3,
    Residual = 4,
    ResidualBias = 5,
    Skip = 6,
    SkipBias = 7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostTensor {
    Hidden = 0,
    HiddenBias = 1,
    Output = 2,
    OutputBias = 3,
}

/// Shape and Xavier fans of one tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub fan_in: usize,
    pub fan_out: usize,
    pub is_bias: bool,
}

/// Every tensor of the network, flattened in a fixed order derived from the
/// config alone: input embedding, then 8 tensors per layer, then the 4
/// post-skip tensors. Biases are `1 × n` rows. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters<T> {
    pub tensors: Vec<Array2<T>>,
}

pub fn tensor_specs(config: &NetConfig) -> Vec<TensorSpec> {
    let r = config.residual_channels;
    let g2 = 2 * config.gate_channels;
    let g = config.gate_channels;
    let s = config.skip_channels;
    let c = config.output_classes;
    let d = config.condition_dim;
    let k = config.kernel_size;
    let spec = |name: String, rows, cols, fan_in, fan_out, is_bias| TensorSpec {
        name,
        rows,
        cols,
        fan_in,
        fan_out,
        is_bias,
    };
    let mut out = vec![spec("embed".into(), c, r, c, r, false)];
    for l in 0..config.num_layers() {
        let n = |part: &str| format!("layer{l}.{part}");
        out.push(spec(n("conv_current"), r, g2, r * k, g2 * k, false));
        out.push(spec(n("conv_past"), r, g2, r * k, g2 * k, false));
        out.push(spec(n("gate_bias"), 1, g2, 0, 0, true));
        out.push(spec(n("condition"), d, g2, d, g2, false));
        out.push(spec(n("residual"), g, r, g, r, false));
        out.push(spec(n("residual_bias"), 1, r, 0, 0, true));
        out.push(spec(n("skip"), g, s, g, s, false));
        out.push(spec(n("skip_bias"), 1, s, 0, 0, true));
    }
    out.push(spec("post.hidden".into(), s, c, s, c, false));
    out.push(spec("post.hidden_bias".into(), 1, c, 0, 0, true));
    out.push(spec("post.output".into(), c, c, c, c, false));
    out.push(spec("post.output_bias".into(), 1, c, 0, 0, true));
    out
}

impl<T: Real> Parameters<T> {
    pub fn zeros(config: &NetConfig) -> Self {
        Self {
            tensors: tensor_specs(config)
                .iter()
                .map(|s| Array2::zeros((s.rows, s.cols)))
                .collect(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            tensors: self.tensors.iter().map(|t| Array2::zeros(t.raw_dim())).collect(),
        }
    }

    /// Xavier-uniform weights (`U(±sqrt(6 / (fan_in + fan_out)))`), zero biases.
    pub fn xavier(config: &NetConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            tensors: tensor_specs(config)
                .iter()
                .map(|s| {
                    if s.is_bias || s.fan_in + s.fan_out == 0 {
                        return Array2::zeros((s.rows, s.cols));
                    }
                    let limit = (6.0 / (s.fan_in + s.fan_out) as f64).sqrt();
                    Array2::from_shape_simple_fn((s.rows, s.cols), || {
                        T::of(rng.random_range(-limit..limit))
                    })
                })
                .collect(),
        }
    }

    pub fn embed(&self) -> &Array2<T> {
        &self.tensors[0]
    }

    pub fn layer(&self, layer: usize, which: LayerTensor) -> &Array2<T> {
        &self.tensors[1 + layer * TENSORS_PER_LAYER + which as usize]
    }

    pub fn layer_mut(&mut self, layer: usize, which: LayerTensor) -> &mut Array2<T> {
        &mut self.tensors[1 + layer * TENSORS_PER_LAYER + which as usize]
    }

    pub fn post(&self, which: PostTensor) -> &Array2<T> {
        &self.tensors[self.tensors.len() - 4 + which as usize]
    }

    pub fn post_mut(&mut self, which: PostTensor) -> &mut Array2<T> {
        let n = self.tensors.len();
        &mut self.tensors[n - 4 + which as usize]
    }

    pub fn num_layers(&self) -> usize {
        (self.tensors.len() - 5) / TENSORS_PER_LAYER
    }

    pub fn count(&self) -> usize {
        self.tensors.iter().map(|t| t.len()).sum()
    }

    pub fn check_shapes(&self, config: &NetConfig) -> Result<()> {
        let specs = tensor_specs(config);
        if specs.len() != self.tensors.len() {
            return Err(Error::Shape(format!(
                "{} tensors, config expects {}",
                self.tensors.len(),
                specs.len()
            )));
        }
        for (s, t) in specs.iter().zip(&self.tensors) {
            if t.dim() != (s.rows, s.cols) {
                return Err(Error::Shape(format!(
                    "{} is {:?}, config expects ({}, {})",
                    s.name,
                    t.dim(),
                    s.rows,
                    s.cols
                )));
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn cast<U: Real>(&self) -> Parameters<U> {
        Parameters {
            tensors: self
                .tensors
                .iter()
                .map(|t| t.mapv(|v| U::of(v.to_f64_lossy())))
                .collect(),
        }
    }
}
