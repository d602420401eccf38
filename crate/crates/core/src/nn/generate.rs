use ndarray::{s, Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{argmax, relu, WaveNet, START_SYMBOL};
use super::params::{LayerTensor, PostTensor};
use crate::conditioning::ConditioningMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::SymbolSequence;

/// How the next symbol is drawn from the predicted distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GenerationMode {
    #[default]
    Sample,
    Argmax,
}

/// Sample-by-sample evaluation of a [`WaveNet`], keeping the last
/// `dilation` inputs of every layer in a ring buffer so each step costs
/// one column of the network.
#[derive(Debug)]
pub struct IncrementalGenerator<'a, T> {
    net: &'a WaveNet<T>,
    condition: &'a ConditioningMatrix<T>,
    dilations: Vec<usize>,
    history: Vec<Array2<T>>,
    /// Conditioning projection of the current run for every layer.
    projections: Vec<Array1<T>>,
    current_run: Option<usize>,
    t: usize,
}

impl<'a, T: Real> IncrementalGenerator<'a, T> {
    pub fn new(net: &'a WaveNet<T>, condition: &'a ConditioningMatrix<T>) -> Result<Self> {
        if condition.dim() != net.config.condition_dim {
            return Err(Error::Shape(format!(
                "condition dim {} but network expects {}",
                condition.dim(),
                net.config.condition_dim
            )));
        }
        let dilations = net.config.dilations();
        let r = net.config.residual_channels;
        Ok(Self {
            net,
            condition,
            history: dilations.iter().map(|&d| Array2::zeros((d, r))).collect(),
            projections: Vec::new(),
            dilations,
            current_run: None,
            t: 0,
        })
    }

    /// Position of the next step.
    pub fn position(&self) -> usize {
        self.t
    }

    fn refresh_projections(&mut self) {
        let run = self.condition.run_of(self.t);
        if self.current_run == Some(run) {
            return;
        }
        let g2 = 2 * self.net.config.gate_channels;
        let rows = self.condition.run_rows();
        self.projections = (0..self.dilations.len())
            .map(|l| {
                if self.condition.dim() == 0 {
                    Array1::zeros(g2)
                } else {
                    rows.row(run)
                        .dot(self.net.params.layer(l, LayerTensor::Condition))
                }
            })
            .collect();
        self.current_run = Some(run);
    }

    /// Logits for position `t` given the symbol preceding it.
    pub fn step(&mut self, input: u8) -> Result<Array1<T>> {
        if self.t >= self.condition.num_samples() {
            return Err(Error::InvalidArgument(
                "generation ran past the conditioning".into(),
            ));
        }
        self.refresh_projections();
        let p = &self.net.params;
        let g = self.net.config.gate_channels;
        let last = self.dilations.len() - 1;
        let mut x = p.embed().row(input as usize).to_owned();
        let mut skip_sum = Array1::<T>::zeros(self.net.config.skip_channels);
        for l in 0..self.dilations.len() {
            let d = self.dilations[l];
            let slot = self.t % d;
            let mut a = x.dot(p.layer(l, LayerTensor::ConvCurrent));
            if self.t >= d {
                a += &self.history[l]
                    .row(slot)
                    .dot(p.layer(l, LayerTensor::ConvPast));
            }
            a += &p.layer(l, LayerTensor::GateBias).row(0);
            a += &self.projections[l];
            let z: Array1<T> = a
                .slice(s![..g])
                .iter()
                .zip(a.slice(s![g..]))
                .map(|(&f, &gt)| f.tanh() * (T::one() / (T::one() + (-gt).exp())))
                .collect();
            skip_sum += &z.dot(p.layer(l, LayerTensor::Skip));
            skip_sum += &p.layer(l, LayerTensor::SkipBias).row(0);
            self.history[l].row_mut(slot).assign(&x);
            if l < last {
                let mut next = z.dot(p.layer(l, LayerTensor::Residual));
                next += &p.layer(l, LayerTensor::ResidualBias).row(0);
                next += &x;
                x = next;
            }
        }
        skip_sum.mapv_inplace(relu);
        let mut hidden = skip_sum.dot(p.post(PostTensor::Hidden));
        hidden += &p.post(PostTensor::HiddenBias).row(0);
        hidden.mapv_inplace(relu);
        let mut logits = hidden.dot(p.post(PostTensor::Output));
        logits += &p.post(PostTensor::OutputBias).row(0);
        self.t += 1;
        Ok(logits)
    }
}

/// Draws a class from softmax(logits) by inverse CDF on one uniform draw.
pub fn sample_class<T: Real, R: Rng>(logits: ArrayView1<'_, T>, rng: &mut R) -> usize {
    let m = logits.fold(T::neg_infinity(), |a, &b| a.max(b)).to_f64_lossy();
    let weights: Vec<f64> = logits
        .iter()
        .map(|v| (v.to_f64_lossy() - m).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Generates one symbol per conditioning row, feeding each output back as
/// the next input. Identical seeds give identical output.
pub fn generate<T: Real>(
    net: &WaveNet<T>,
    condition: &ConditioningMatrix<T>,
    mode: GenerationMode,
    seed: u64,
) -> Result<SymbolSequence> {
    let mut gen = IncrementalGenerator::new(net, condition)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(condition.num_samples());
    let mut input = START_SYMBOL;
    for _ in 0..condition.num_samples() {
        let logits = gen.step(input)?;
        let class = match mode {
            GenerationMode::Sample => sample_class(logits.view(), &mut rng),
            GenerationMode::Argmax => argmax(&logits),
        };
        if !logits.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                index: gen.position() - 1,
            });
        }
        input = class as u8;
        out.push(input);
    }
    Ok(SymbolSequence(out))
}

/// Logits for a fixed input sequence computed one step at a time.
pub fn incremental_logits<T: Real>(
    net: &WaveNet<T>,
    inputs: &[u8],
    condition: &ConditioningMatrix<T>,
) -> Result<Array2<T>> {
    let mut gen = IncrementalGenerator::new(net, condition)?;
    let mut out = Array2::zeros((inputs.len(), net.config.output_classes));
    for (t, &sym) in inputs.iter().enumerate() {
        out.row_mut(t).assign(&gen.step(sym)?);
    }
    Ok(out)
}
