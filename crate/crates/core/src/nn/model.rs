use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};

use super::params::{LayerTensor, Parameters, PostTensor};
use super::NetConfig;
use crate::conditioning::ConditioningMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Symbol fed before the first sample (mu-law code of silence).
pub const START_SYMBOL: u8 = 128;

/// Autoregressive stack of gated, dilated causal convolutions with local
/// conditioning and a skip-sum output head.
///
/// Input symbols enter through a learned embedding (a one-hot vector times a
/// `256 × residual` matrix). Each layer computes
/// `z = tanh(W_f * x + V_f h) ⊙ σ(W_g * x + V_g h)` and feeds
/// `x + 1×1(z)` to the next layer and `1×1(z)` to the skip sum. The summed
/// skips go through ReLU, a 1×1 to 256 channels, ReLU, and a final 1×1 to
/// the class logits.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveNet<T> {
    pub config: NetConfig,
    pub params: Parameters<T>,
}

/// Activations kept from a forward pass for back-propagation.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    pub inputs: Vec<u8>,
    /// Input of every dilated layer.
    layer_inputs: Vec<Array2<T>>,
    tanh: Vec<Array2<T>>,
    sigmoid: Vec<Array2<T>>,
    skip_sum: Array2<T>,
    hidden: Array2<T>,
    pub logits: Array2<T>,
    condition: ConditioningMatrix<T>,
}

/// Residual and skip outputs of one gated layer.
#[derive(Debug, Clone)]
pub struct BlockOutput<T> {
    pub residual: Array2<T>,
    pub skip: Array2<T>,
}

/// Causal two-tap dilated convolution over a `time × channels` input:
/// `out[t] = x[t] W_cur + x[t - dilation] W_past`, zero before the start.
pub fn dilated_causal_conv<T: Real>(
    input: ArrayView2<'_, T>,
    w_current: &Array2<T>,
    w_past: &Array2<T>,
    dilation: usize,
) -> Result<Array2<T>> {
    if dilation == 0 {
        return Err(Error::InvalidArgument("dilation must be at least 1".into()));
    }
    if input.ncols() != w_current.nrows() || w_current.dim() != w_past.dim() {
        return Err(Error::Shape(format!(
            "input {:?} with taps {:?} / {:?}",
            input.dim(),
            w_current.dim(),
            w_past.dim()
        )));
    }
    let n = input.nrows();
    let mut out = input.dot(w_current);
    if dilation < n {
        general_mat_mul(
            T::one(),
            &input.slice(s![..n - dilation, ..]),
            w_past,
            T::one(),
            &mut out.slice_mut(s![dilation.., ..]),
        );
    }
    Ok(out)
}

fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// ReLU that lets NaN through, so a corrupted network fails loudly.
pub(crate) fn relu<T: Real>(x: T) -> T {
    if x < T::zero() {
        T::zero()
    } else {
        x
    }
}

impl<T: Real> WaveNet<T> {
    pub fn new(config: NetConfig, params: Parameters<T>) -> Result<Self> {
        config.validate()?;
        params.check_shapes(&config)?;
        Ok(Self { config, params })
    }

    /// Xavier-initialized network.
    pub fn init(config: NetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let params = Parameters::xavier(&config, seed);
        Ok(Self { config, params })
    }

    pub fn receptive_field(&self) -> usize {
        self.config.receptive_field()
    }

    fn check_condition(&self, n: usize, condition: &ConditioningMatrix<T>) -> Result<()> {
        if condition.num_samples() != n {
            return Err(Error::Shape(format!(
                "{n} input symbols but {} condition rows",
                condition.num_samples()
            )));
        }
        if condition.dim() != self.config.condition_dim {
            return Err(Error::Shape(format!(
                "condition dim {} but network expects {}",
                condition.dim(),
                self.config.condition_dim
            )));
        }
        Ok(())
    }

    /// Pre-activation `conv(x) + bias + V h` of one layer.
    fn gate_preactivation(
        &self,
        layer: usize,
        dilation: usize,
        x: ArrayView2<'_, T>,
        condition: &ConditioningMatrix<T>,
    ) -> Result<Array2<T>> {
        let p = &self.params;
        let mut a = dilated_causal_conv(
            x,
            p.layer(layer, LayerTensor::ConvCurrent),
            p.layer(layer, LayerTensor::ConvPast),
            dilation,
        )?;
        a += p.layer(layer, LayerTensor::GateBias);
        if condition.dim() > 0 {
            let proj = condition
                .run_rows()
                .dot(p.layer(layer, LayerTensor::Condition));
            for r in 0..condition.num_runs() {
                let (start, end) = condition.run_span(r);
                let row = proj.row(r);
                a.slice_mut(s![start..end, ..])
                    .axis_iter_mut(Axis(0))
                    .for_each(|mut v| v += &row);
            }
        }
        Ok(a)
    }

    fn gate(&self, a: &Array2<T>) -> (Array2<T>, Array2<T>) {
        let g = self.config.gate_channels;
        (
            a.slice(s![.., ..g]).mapv(|v| v.tanh()),
            a.slice(s![.., g..]).mapv(sigmoid),
        )
    }

    /// One gated residual layer on its own.
    pub fn gated_residual_block(
        &self,
        layer: usize,
        input: ArrayView2<'_, T>,
        condition: &ConditioningMatrix<T>,
    ) -> Result<BlockOutput<T>> {
        self.check_condition(input.nrows(), condition)?;
        let dilation = self.config.dilations()[layer];
        let a = self.gate_preactivation(layer, dilation, input, condition)?;
        let (th, sg) = self.gate(&a);
        let z = th * sg;
        let p = &self.params;
        let mut residual = z.dot(p.layer(layer, LayerTensor::Residual));
        residual += p.layer(layer, LayerTensor::ResidualBias);
        residual += &input;
        let mut skip = z.dot(p.layer(layer, LayerTensor::Skip));
        skip += p.layer(layer, LayerTensor::SkipBias);
        Ok(BlockOutput { residual, skip })
    }

    /// Forward pass keeping everything needed by [`WaveNet::backward`].
    ///
    /// `inputs[t]` is the symbol preceding the one predicted at `t`; see
    /// [`teacher_forcing_inputs`].
    pub fn forward_cached(
        &self,
        inputs: &[u8],
        condition: &ConditioningMatrix<T>,
    ) -> Result<ForwardCache<T>> {
        let n = inputs.len();
        self.check_condition(n, condition)?;
        let p = &self.params;
        let embed = p.embed();
        let mut x = Array2::zeros((n, self.config.residual_channels));
        for (mut row, &sym) in x.axis_iter_mut(Axis(0)).zip(inputs) {
            row.assign(&embed.row(sym as usize));
        }
        let dilations = self.config.dilations();
        let last = dilations.len() - 1;
        let mut skip_sum = Array2::zeros((n, self.config.skip_channels));
        let mut layer_inputs = Vec::with_capacity(dilations.len());
        let mut tanh = Vec::with_capacity(dilations.len());
        let mut sigm = Vec::with_capacity(dilations.len());
        for (l, &d) in dilations.iter().enumerate() {
            let a = self.gate_preactivation(l, d, x.view(), condition)?;
            let (th, sg) = self.gate(&a);
            let z = &th * &sg;
            general_mat_mul(
                T::one(),
                &z,
                p.layer(l, LayerTensor::Skip),
                T::one(),
                &mut skip_sum,
            );
            skip_sum += p.layer(l, LayerTensor::SkipBias);
            let next = if l < last {
                let mut next = x.clone();
                general_mat_mul(T::one(), &z, p.layer(l, LayerTensor::Residual), T::one(), &mut next);
                next += p.layer(l, LayerTensor::ResidualBias);
                Some(next)
            } else {
                None
            };
            layer_inputs.push(x);
            tanh.push(th);
            sigm.push(sg);
            if let Some(next) = next {
                x = next;
            } else {
                x = Array2::zeros((0, 0));
            }
        }
        let mut hidden = skip_sum.mapv(relu).dot(p.post(PostTensor::Hidden));
        hidden += p.post(PostTensor::HiddenBias);
        hidden.mapv_inplace(relu);
        let mut logits = hidden.dot(p.post(PostTensor::Output));
        logits += p.post(PostTensor::OutputBias);
        Ok(ForwardCache {
            inputs: inputs.to_vec(),
            layer_inputs,
            tanh,
            sigmoid: sigm,
            skip_sum,
            hidden,
            logits,
            condition: condition.clone(),
        })
    }

    /// Class logits, `time × 256`; row `t` parameterizes `p(x[t] | inputs[..=t], h)`.
    pub fn forward(&self, inputs: &[u8], condition: &ConditioningMatrix<T>) -> Result<Array2<T>> {
        Ok(self.forward_cached(inputs, condition)?.logits)
    }

    /// Back-propagates `d loss / d logits` to every parameter.
    pub fn backward(&self, cache: &ForwardCache<T>, dlogits: &Array2<T>) -> Result<Parameters<T>> {
        if dlogits.dim() != cache.logits.dim() {
            return Err(Error::Shape(format!(
                "logit gradient {:?} vs logits {:?}",
                dlogits.dim(),
                cache.logits.dim()
            )));
        }
        let p = &self.params;
        let mut grads = p.zeros_like();
        let n = cache.inputs.len();
        let g = self.config.gate_channels;

        *grads.post_mut(PostTensor::Output) = cache.hidden.t().dot(dlogits);
        *grads.post_mut(PostTensor::OutputBias) = column_sums(dlogits);
        let mut dh = dlogits.dot(&p.post(PostTensor::Output).t());
        Zip::from(&mut dh)
            .and(&cache.hidden)
            .for_each(|d, &h| if h <= T::zero() { *d = T::zero() });
        let y0 = cache.skip_sum.mapv(relu);
        *grads.post_mut(PostTensor::Hidden) = y0.t().dot(&dh);
        *grads.post_mut(PostTensor::HiddenBias) = column_sums(&dh);
        let mut dskip = dh.dot(&p.post(PostTensor::Hidden).t());
        Zip::from(&mut dskip)
            .and(&cache.skip_sum)
            .for_each(|d, &v| if v <= T::zero() { *d = T::zero() });
        let dskip_bias = column_sums(&dskip);

        let dilations = self.config.dilations();
        let last = dilations.len() - 1;
        let mut dx: Array2<T> = Array2::zeros((n, self.config.residual_channels));
        for l in (0..dilations.len()).rev() {
            let d = dilations[l];
            let th = &cache.tanh[l];
            let sg = &cache.sigmoid[l];
            let z = th * sg;
            *grads.layer_mut(l, LayerTensor::Skip) = z.t().dot(&dskip);
            *grads.layer_mut(l, LayerTensor::SkipBias) = dskip_bias.clone();
            let mut dz = dskip.dot(&p.layer(l, LayerTensor::Skip).t());
            if l < last {
                *grads.layer_mut(l, LayerTensor::Residual) = z.t().dot(&dx);
                *grads.layer_mut(l, LayerTensor::ResidualBias) = column_sums(&dx);
                general_mat_mul(
                    T::one(),
                    &dx,
                    &p.layer(l, LayerTensor::Residual).t(),
                    T::one(),
                    &mut dz,
                );
            }
            let mut da = Array2::zeros((n, 2 * g));
            Zip::from(da.slice_mut(s![.., ..g]))
                .and(&dz)
                .and(th)
                .and(sg)
                .for_each(|o, &dz, &t, &s| *o = dz * s * (T::one() - t * t));
            Zip::from(da.slice_mut(s![.., g..]))
                .and(&dz)
                .and(th)
                .and(sg)
                .for_each(|o, &dz, &t, &s| *o = dz * t * s * (T::one() - s));
            *grads.layer_mut(l, LayerTensor::GateBias) = column_sums(&da);
            let x = &cache.layer_inputs[l];
            *grads.layer_mut(l, LayerTensor::ConvCurrent) = x.t().dot(&da);
            let mut dpast = Array2::zeros(p.layer(l, LayerTensor::ConvPast).raw_dim());
            if d < n {
                general_mat_mul(
                    T::one(),
                    &x.slice(s![..n - d, ..]).t(),
                    &da.slice(s![d.., ..]),
                    T::zero(),
                    &mut dpast,
                );
            }
            *grads.layer_mut(l, LayerTensor::ConvPast) = dpast;
            let cond = &cache.condition;
            if cond.dim() > 0 {
                let mut run_sums = Array2::zeros((cond.num_runs(), 2 * g));
                for (r, mut row) in run_sums.axis_iter_mut(Axis(0)).enumerate() {
                    let (start, end) = cond.run_span(r);
                    row.assign(&da.slice(s![start..end, ..]).sum_axis(Axis(0)));
                }
                *grads.layer_mut(l, LayerTensor::Condition) = cond.run_rows().t().dot(&run_sums);
            }
            general_mat_mul(
                T::one(),
                &da,
                &p.layer(l, LayerTensor::ConvCurrent).t(),
                T::one(),
                &mut dx,
            );
            if d < n {
                general_mat_mul(
                    T::one(),
                    &da.slice(s![d.., ..]),
                    &p.layer(l, LayerTensor::ConvPast).t(),
                    T::one(),
                    &mut dx.slice_mut(s![..n - d, ..]),
                );
            }
        }
        let dembed = &mut grads.tensors[0];
        for (row, &sym) in dx.axis_iter(Axis(0)).zip(&cache.inputs) {
            let mut target = dembed.row_mut(sym as usize);
            target += &row;
        }
        Ok(grads)
    }

    /// Mean NLL over `targets[score_from..]` and its parameter gradients.
    pub fn loss_and_gradients(
        &self,
        targets: &[u8],
        condition: &ConditioningMatrix<T>,
        score_from: usize,
    ) -> Result<(T, Parameters<T>)> {
        let inputs = teacher_forcing_inputs(targets);
        self.loss_and_gradients_with_inputs(&inputs, targets, condition, score_from)
    }

    pub fn loss_and_gradients_with_inputs(
        &self,
        inputs: &[u8],
        targets: &[u8],
        condition: &ConditioningMatrix<T>,
        score_from: usize,
    ) -> Result<(T, Parameters<T>)> {
        let cache = self.forward_cached(inputs, condition)?;
        let (loss, dlogits) = nll_with_gradient(&cache.logits, targets, score_from)?;
        let grads = self.backward(&cache, &dlogits)?;
        Ok((loss, grads))
    }
}

impl<T: Real> ForwardCache<T> {
    /// Sign pattern of every ReLU input (skip sum and hidden layer).
    pub fn relu_pattern(&self) -> Vec<bool> {
        self.skip_sum
            .iter()
            .chain(self.hidden.iter())
            .map(|&v| v > T::zero())
            .collect()
    }
}

fn column_sums<T: Real>(m: &Array2<T>) -> Array2<T> {
    m.sum_axis(Axis(0)).insert_axis(Axis(0))
}

/// Autoregressive inputs for teacher forcing: the start symbol followed by
/// all but the last target.
pub fn teacher_forcing_inputs(targets: &[u8]) -> Vec<u8> {
    std::iter::once(START_SYMBOL)
        .chain(targets.iter().copied())
        .take(targets.len())
        .collect()
}

/// Row-wise softmax.
pub fn softmax_rows<T: Real>(logits: &Array2<T>) -> Array2<T> {
    let mut out = logits.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let m = row.fold(T::neg_infinity(), |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let z = row.sum();
        row.mapv_inplace(|v| v / z);
    }
    out
}

fn log_sum_exp<T: Real>(row: ndarray::ArrayView1<'_, T>) -> T {
    let m = row.fold(T::neg_infinity(), |a, &b| a.max(b));
    m + row.fold(T::zero(), |acc, &v| acc + (v - m).exp()).ln()
}

/// Mean negative log-likelihood in nats per sample.
pub fn nll_loss<T: Real>(logits: &Array2<T>, targets: &[u8]) -> Result<T> {
    Ok(nll_with_gradient(logits, targets, 0)?.0)
}

/// Mean NLL over rows `score_from..` and `d loss / d logits`
/// (`(softmax - onehot) / count` on scored rows, zero elsewhere).
pub fn nll_with_gradient<T: Real>(
    logits: &Array2<T>,
    targets: &[u8],
    score_from: usize,
) -> Result<(T, Array2<T>)> {
    if logits.nrows() != targets.len() {
        return Err(Error::Shape(format!(
            "{} logit rows for {} targets",
            logits.nrows(),
            targets.len()
        )));
    }
    if score_from >= targets.len() {
        return Err(Error::InvalidArgument("no scored positions".into()));
    }
    let count = T::of_usize(targets.len() - score_from);
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut total = 0.0f64;
    for t in score_from..targets.len() {
        let row = logits.row(t);
        let lse = log_sum_exp(row);
        let target = targets[t] as usize;
        total += (lse - row[target]).to_f64_lossy();
        let mut g = grad.row_mut(t);
        Zip::from(&mut g)
            .and(&row)
            .for_each(|g, &v| *g = (v - lse).exp() / count);
        g[target] = g[target] - T::one() / count;
    }
    Ok((T::of(total / (targets.len() - score_from) as f64), grad))
}

/// Index of the largest entry.
pub fn argmax<T: Real>(row: &Array1<T>) -> usize {
    row.iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}
