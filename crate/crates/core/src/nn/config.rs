use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::MU_LAW_CLASSES;

/// Network topology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetConfig {
    pub num_blocks: usize,
    pub layers_per_block: usize,
    pub dilation_base: usize,
    pub residual_channels: usize,
    /// Width of each gate half (filter and gate each have this many channels).
    pub gate_channels: usize,
    pub skip_channels: usize,
    pub output_classes: usize,
    pub condition_dim: usize,
    pub kernel_size: usize,
}

impl NetConfig {
    /// Full-scale topology: 3 blocks of 10 layers (dilations 1..512), 512
    /// residual/gate channels, 256 channels after the skip sum.
    pub fn paper() -> Self {
        Self {
            num_blocks: 3,
            layers_per_block: 10,
            dilation_base: 2,
            residual_channels: 512,
            gate_channels: 512,
            skip_channels: 256,
            output_classes: MU_LAW_CLASSES,
            condition_dim: 79,
            kernel_size: 2,
        }
    }

    /// Single-CPU topology: 2 blocks of 6 layers, 64 channels.
    pub fn desk() -> Self {
        Self {
            num_blocks: 2,
            layers_per_block: 6,
            residual_channels: 64,
            gate_channels: 64,
            skip_channels: 64,
            ..Self::paper()
        }
    }

    /// Gradient-check topology: 1 block of 2 layers, 4 channels.
    pub fn tiny(condition_dim: usize) -> Self {
        Self {
            num_blocks: 1,
            layers_per_block: 2,
            residual_channels: 4,
            gate_channels: 4,
            skip_channels: 4,
            condition_dim,
            ..Self::paper()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.num_blocks,
            self.layers_per_block,
            self.residual_channels,
            self.gate_channels,
            self.skip_channels,
            self.output_classes,
        ];
        if positive.contains(&0) || self.dilation_base < 1 {
            return Err(Error::InvalidArgument(format!("degenerate network config {self:?}")));
        }
        if self.kernel_size != 2 {
            return Err(Error::InvalidArgument(format!(
                "kernel size {} unsupported; dilated layers use two taps",
                self.kernel_size
            )));
        }
        if self.output_classes != MU_LAW_CLASSES {
            return Err(Error::InvalidArgument(format!(
                "output classes must be {MU_LAW_CLASSES}, got {}",
                self.output_classes
            )));
        }
        Ok(())
    }

    pub fn num_layers(&self) -> usize {
        self.num_blocks * self.layers_per_block
    }

    /// Dilation of every layer in execution order.
    pub fn dilations(&self) -> Vec<usize> {
        (0..self.num_blocks)
            .flat_map(|_| (0..self.layers_per_block).map(|i| self.dilation_base.pow(i as u32)))
            .collect()
    }

    /// Number of input positions that can reach one output:
    /// `1 + Σ dilation * (kernel_size - 1)`.
    pub fn receptive_field(&self) -> usize {
        1 + self.dilations().iter().sum::<usize>() * (self.kernel_size - 1)
    }

    /// FNV-1a over the canonical JSON form, used to tag checkpoints.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let hash = json.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        });
        format!("{hash:016x}")
    }
}

/// Optimizer and batching settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Target samples scored per step (the left context is extra).
    pub batch_size_samples: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_steps: u64,
    pub seed: u64,
    /// Steps between development-set evaluations and checkpoint selection.
    pub eval_interval: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            batch_size_samples: 30_000,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_steps: 100_000,
            seed: 0,
            eval_interval: 1000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, net: &NetConfig) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if self.batch_size_samples < net.receptive_field() {
            return Err(Error::InvalidArgument(format!(
                "batch of {} samples is shorter than the receptive field {}",
                self.batch_size_samples,
                net.receptive_field()
            )));
        }
        if self.eval_interval == 0 {
            return Err(Error::InvalidArgument("eval interval must be positive".into()));
        }
        Ok(())
    }
}
