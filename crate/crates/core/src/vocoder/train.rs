use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::analysis::lpc_from_features;
use super::model::ModelMeta;
use super::target::{prepare_target, VariantTag};
use crate::conditioning::{ConditioningMatrix, FeatureFile};
use crate::error::{Error, Result};
use crate::lp::FilterSchedule;
use crate::nn::{
    nll_with_gradient, teacher_forcing_inputs, Adam, Checkpoint, NetConfig, Parameters, TrainConfig,
    WaveNet,
};
use crate::signal::Waveform;

/// Samples per teacher-forced chunk when scoring whole utterances.
pub const EVAL_CHUNK: usize = 8000;

/// Target symbols and conditioning of one utterance.
#[derive(Debug, Clone)]
pub struct TrainingUtterance {
    pub name: String,
    pub symbols: Vec<u8>,
    /// Teacher-forcing inputs (start symbol, then all but the last target).
    pub inputs: Vec<u8>,
    pub condition: ConditioningMatrix<f32>,
}

impl TrainingUtterance {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Builds the variant's target from the waveform and its feature file.
/// Residual targets use the filters and gains stored in the features.
pub fn training_utterance(
    name: &str,
    wave: &Waveform<f64>,
    features: &FeatureFile,
    meta: &ModelMeta,
) -> Result<TrainingUtterance> {
    meta.analysis.check_rate(wave)?;
    let n = wave.len();
    let grid = meta.analysis.grid(n)?;
    let lpc = match meta.variant {
        VariantTag::ExcitNet => Some(lpc_from_features(
            &features.rows.mapv(f64::from),
            &meta.analysis.layout(),
        )?),
        _ => None,
    };
    let schedule = lpc.as_deref().map(|l| FilterSchedule::new(l, &grid));
    let (symbols, _) = prepare_target(
        &wave.samples,
        meta.variant,
        schedule,
        meta.noise_shaping.as_ref(),
        Some(meta.gain(features)),
        meta.analysis.mu,
    )?;
    Ok(TrainingUtterance {
        name: name.to_string(),
        inputs: teacher_forcing_inputs(&symbols.0),
        symbols: symbols.0,
        condition: meta.condition(features, n)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: u64,
    /// Mean batch NLL since the previous evaluation.
    pub train_nll: f64,
    pub dev_nll: f64,
}

/// Teacher-forced mean NLL of whole utterances, computed in chunks that
/// each carry a receptive field of left context.
pub fn teacher_forced_nll(net: &WaveNet<f32>, utterances: &[TrainingUtterance]) -> Result<f64> {
    let ctx_len = net.receptive_field() - 1;
    let mut total = 0.0;
    let mut count = 0usize;
    for u in utterances {
        let mut start = 0;
        while start < u.len() {
            let end = (start + EVAL_CHUNK).min(u.len());
            let ctx = start.min(ctx_len);
            let cond = u.condition.slice(start - ctx, end)?;
            let logits = net.forward(&u.inputs[start - ctx..end], &cond)?;
            let (loss, _) = nll_with_gradient(&logits, &u.symbols[start - ctx..end], ctx)?;
            total += loss as f64 * (end - start) as f64;
            count += end - start;
            start = end;
        }
    }
    if count == 0 {
        return Err(Error::Empty("evaluation utterances"));
    }
    Ok(total / count as f64)
}

fn add_scaled(acc: &mut Parameters<f32>, grads: &Parameters<f32>, w: f32) {
    for (a, g) in acc.tensors.iter_mut().zip(&grads.tensors) {
        a.scaled_add(w, g);
    }
}

/// Single-writer training loop. Every step's batch is drawn from an RNG
/// keyed by `(seed, step)`, so resuming from a checkpoint continues
/// bit-identically.
pub struct Trainer<'a> {
    train: &'a [TrainingUtterance],
    dev: &'a [TrainingUtterance],
    pub net: WaveNet<f32>,
    pub adam: Adam<f32>,
    pub config: TrainConfig,
    pub meta: ModelMeta,
    pub step: u64,
    losses: Vec<f64>,
    curve: Vec<CurvePoint>,
    best: Option<(f64, Checkpoint)>,
    skipped_updates: u64,
}

impl<'a> Trainer<'a> {
    pub fn new(
        train: &'a [TrainingUtterance],
        dev: &'a [TrainingUtterance],
        net_config: NetConfig,
        config: TrainConfig,
        meta: ModelMeta,
    ) -> Result<Self> {
        config.validate(&net_config)?;
        let net = WaveNet::init(net_config, config.seed)?;
        let adam = Adam::new(&net.params, &config);
        Self::assemble(train, dev, net, adam, config, meta, 0)
    }

    /// Continues from a checkpoint that carries optimizer state.
    pub fn resume(
        train: &'a [TrainingUtterance],
        dev: &'a [TrainingUtterance],
        checkpoint: &Checkpoint,
        config: TrainConfig,
    ) -> Result<Self> {
        let adam = checkpoint
            .optimizer
            .clone()
            .ok_or_else(|| Error::Format("checkpoint has no optimizer state to resume".into()))?;
        if checkpoint.seed != config.seed {
            return Err(Error::InvalidArgument(format!(
                "checkpoint was trained with seed {} but config has {}",
                checkpoint.seed, config.seed
            )));
        }
        let net = WaveNet::new(checkpoint.config.clone(), checkpoint.params.clone())?;
        let meta = ModelMeta::from_checkpoint(checkpoint)?;
        Self::assemble(train, dev, net, adam, config, meta, checkpoint.step)
    }

    fn assemble(
        train: &'a [TrainingUtterance],
        dev: &'a [TrainingUtterance],
        net: WaveNet<f32>,
        adam: Adam<f32>,
        config: TrainConfig,
        meta: ModelMeta,
        step: u64,
    ) -> Result<Self> {
        config.validate(&net.config)?;
        if train.iter().all(TrainingUtterance::is_empty) {
            return Err(Error::Empty("training utterances"));
        }
        for u in train.iter().chain(dev) {
            if u.condition.dim() != net.config.condition_dim {
                return Err(Error::Shape(format!(
                    "utterance {} has {}-dim conditioning, network expects {}",
                    u.name,
                    u.condition.dim(),
                    net.config.condition_dim
                )));
            }
        }
        Ok(Self {
            train,
            dev,
            net,
            adam,
            config,
            meta,
            step,
            losses: Vec::new(),
            curve: Vec::new(),
            best: None,
            skipped_updates: 0,
        })
    }

    /// Batch NLL of every step run by this trainer.
    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn curve(&self) -> &[CurvePoint] {
        &self.curve
    }

    pub fn skipped_updates(&self) -> u64 {
        self.skipped_updates
    }

    /// Best development checkpoint so far and its NLL.
    pub fn best(&self) -> Option<(f64, &Checkpoint)> {
        self.best.as_ref().map(|(nll, ck)| (*nll, ck))
    }

    pub fn checkpoint(&self, with_optimizer: bool) -> Result<Checkpoint> {
        Ok(Checkpoint {
            config: self.net.config.clone(),
            step: self.step,
            seed: self.config.seed,
            params: self.net.params.clone(),
            optimizer: with_optimizer.then(|| self.adam.clone()),
            extra: self.meta.to_json()?,
        })
    }

    /// Segments `(utterance, start, len)` scored in step `step`.
    fn draw_batch(&self, step: u64) -> Vec<(usize, usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(step);
        let total: usize = self.train.iter().map(TrainingUtterance::len).sum();
        let mut remaining = self.config.batch_size_samples.min(total);
        let mut out = Vec::new();
        while remaining > 0 {
            let mut pick = rng.random_range(0..total);
            let idx = self
                .train
                .iter()
                .position(|u| {
                    if pick < u.len() {
                        true
                    } else {
                        pick -= u.len();
                        false
                    }
                })
                .expect("pick below total length");
            let len = remaining.min(self.train[idx].len());
            let start = rng.random_range(0..=self.train[idx].len() - len);
            out.push((idx, start, len));
            remaining -= len;
        }
        out
    }

    /// One optimizer step; returns the batch NLL.
    pub fn step_once(&mut self) -> Result<f64> {
        let segments = self.draw_batch(self.step);
        let scored: usize = segments.iter().map(|s| s.2).sum();
        let ctx_len = self.net.receptive_field() - 1;
        let mut grads = self.net.params.zeros_like();
        let mut loss = 0.0f64;
        for &(idx, start, len) in &segments {
            let u = &self.train[idx];
            let ctx = start.min(ctx_len);
            let (a, b) = (start - ctx, start + len);
            let cond = u.condition.slice(a, b)?;
            let (l, g) = self
                .net
                .loss_and_gradients_with_inputs(&u.inputs[a..b], &u.symbols[a..b], &cond, ctx)?;
            let w = len as f32 / scored as f32;
            add_scaled(&mut grads, &g, w);
            loss += l as f64 * len as f64 / scored as f64;
        }
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { step: self.step });
        }
        if !self.adam.update(&mut self.net.params, &grads) {
            log::warn!("non-finite gradient at step {}; update skipped", self.step);
            self.skipped_updates += 1;
        }
        self.step += 1;
        self.losses.push(loss);
        Ok(loss)
    }

    /// Development NLL with the current weights.
    pub fn dev_nll(&self) -> Result<f64> {
        teacher_forced_nll(&self.net, self.dev)
    }

    /// Runs until `max_steps`, evaluating every `eval_interval` steps and
    /// keeping the best development checkpoint. `on_eval` sees each new
    /// curve point.
    pub fn run(&mut self, mut on_eval: impl FnMut(&CurvePoint, &Trainer<'_>)) -> Result<()> {
        let mut since_eval = Vec::new();
        while self.step < self.config.max_steps {
            since_eval.push(self.step_once()?);
            if self.step % self.config.eval_interval == 0 || self.step == self.config.max_steps {
                let train_nll = since_eval.iter().sum::<f64>() / since_eval.len() as f64;
                since_eval.clear();
                let dev_nll = if self.dev.is_empty() {
                    f64::NAN
                } else {
                    self.dev_nll()?
                };
                let point = CurvePoint {
                    step: self.step,
                    train_nll,
                    dev_nll,
                };
                log::info!(
                    "step {}: train NLL {:.4}, dev NLL {:.4}",
                    point.step,
                    point.train_nll,
                    point.dev_nll
                );
                self.curve.push(point);
                let better = match &self.best {
                    None => true,
                    Some((b, _)) => dev_nll < *b,
                };
                if better || dev_nll.is_nan() {
                    self.best = Some((dev_nll, self.checkpoint(false)?));
                }
                on_eval(&point, self);
            }
        }
        Ok(())
    }
}

/// `step,train_nll,dev_nll` lines with a header.
pub fn curve_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("step,train_nll,dev_nll\n");
    for p in curve {
        out.push_str(&format!("{},{:.6},{:.6}\n", p.step, p.train_nll, p.dev_nll));
    }
    out
}

/// Centered moving average with a window of `window` points (shrinking at
/// the ends).
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    let h = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}
