//! Checks shared by the property tests and the acceptance runner. Each
//! returns the measured quantity so callers decide how to report it.
#![allow(dead_code)]

use excitvoc::conditioning::ConditioningMatrix;
use excitvoc::nn::{incremental_logits, teacher_forcing_inputs, NetConfig, WaveNet};
use excitvoc::signal::FrameGrid;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_symbols(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random::<u8>()).collect()
}

/// Frame-rate random features held for `shift` samples each.
pub fn random_condition(rng: &mut ChaCha8Rng, n: usize, dim: usize, shift: usize) -> ConditioningMatrix<f64> {
    if dim == 0 {
        return ConditioningMatrix::empty(n);
    }
    let grid = FrameGrid::new(shift, shift, n).unwrap();
    let frames = Array2::from_shape_simple_fn((grid.num_frames, dim), || rng.random_range(-1.0..1.0));
    ConditioningMatrix::upsample(&frames, &grid, n).unwrap()
}

/// Network with Xavier weights and small random biases so that every
/// tensor carries gradient.
pub fn random_net(config: NetConfig, seed: u64) -> WaveNet<f64> {
    let mut net = WaveNet::<f64>::init(config, seed).unwrap();
    let mut r = rng(seed ^ 0x5eed);
    let specs = excitvoc::nn::tensor_specs(&net.config);
    for (spec, t) in specs.iter().zip(net.params.tensors.iter_mut()) {
        if spec.is_bias {
            t.mapv_inplace(|_| r.random_range(-0.2..0.2));
        }
    }
    net
}

pub struct GradCheck {
    pub max_relative_error: f64,
    pub checked: usize,
    /// Entries whose difference interval crosses a ReLU kink.
    pub skipped: usize,
}

/// Entries whose gradient magnitude is below this are compared against
/// the floor instead of their own size; the central difference carries
/// about 1e-10 absolute round-off at step 1e-5.
pub const GRADCHECK_FLOOR: f64 = 1e-5;
pub const GRADCHECK_STEP: f64 = 1e-5;

/// Backward pass against central differences on the tiny config.
pub fn gradient_check(seed: u64) -> GradCheck {
    let cond_dim = 3;
    let net = random_net(NetConfig::tiny(cond_dim), seed);
    let mut r = rng(seed + 1);
    let n = 32;
    let targets = random_symbols(&mut r, n);
    let inputs = teacher_forcing_inputs(&targets);
    let cond = random_condition(&mut r, n, cond_dim, 8);
    let (_, grads) = net
        .loss_and_gradients_with_inputs(&inputs, &targets, &cond, 0)
        .unwrap();
    let pattern = net.forward_cached(&inputs, &cond).unwrap().relu_pattern();
    // Loss, or None when the ReLU pattern differs from the base point.
    let loss_at = |net: &WaveNet<f64>| {
        let cache = net.forward_cached(&inputs, &cond).unwrap();
        (cache.relu_pattern() == pattern)
            .then(|| excitvoc::nn::nll_loss(&cache.logits, &targets).unwrap())
    };
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut skipped = 0;
    for k in 0..net.params.tensors.len() {
        let len = net.params.tensors[k].len();
        let picks: Vec<usize> = if len <= 2048 {
            (0..len).collect()
        } else {
            (0..512).map(|_| r.random_range(0..len)).collect()
        };
        for idx in picks {
            let orig = net.params.tensors[k].as_slice().unwrap()[idx];
            probe.params.tensors[k].as_slice_mut().unwrap()[idx] = orig + GRADCHECK_STEP;
            let up = loss_at(&probe);
            probe.params.tensors[k].as_slice_mut().unwrap()[idx] = orig - GRADCHECK_STEP;
            let down = loss_at(&probe);
            probe.params.tensors[k].as_slice_mut().unwrap()[idx] = orig;
            let (Some(up), Some(down)) = (up, down) else {
                skipped += 1;
                continue;
            };
            let numeric = (up - down) / (2.0 * GRADCHECK_STEP);
            let analytic = grads.tensors[k].as_slice().unwrap()[idx];
            let denom = analytic.abs().max(numeric.abs()).max(GRADCHECK_FLOOR);
            worst = worst.max((analytic - numeric).abs() / denom);
            checked += 1;
        }
    }
    GradCheck {
        max_relative_error: worst,
        checked,
        skipped,
    }
}

/// Largest |batch - incremental| logit difference over `steps` positions.
pub fn incremental_gap(config: NetConfig, steps: usize, seed: u64) -> f64 {
    let net = random_net(config, seed);
    let mut r = rng(seed + 7);
    let inputs = random_symbols(&mut r, steps);
    let cond = random_condition(&mut r, steps, net.config.condition_dim, 120);
    let batch = net.forward(&inputs, &cond).unwrap();
    let inc = incremental_logits(&net, &inputs, &cond).unwrap();
    batch
        .iter()
        .zip(inc.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Counts logits at positions `< t` that change when the input symbol and
/// the condition row at `t` are replaced. Must be zero.
pub fn causality_violations(config: NetConfig, n: usize, positions: &[usize], seed: u64) -> usize {
    let net = random_net(config, seed);
    let mut r = rng(seed + 3);
    let inputs = random_symbols(&mut r, n);
    let cond = random_condition(&mut r, n, net.config.condition_dim, 1);
    let base = net.forward(&inputs, &cond).unwrap();
    let mut violations = 0;
    for &t in positions {
        let mut inputs2 = inputs.clone();
        inputs2[t] = inputs2[t].wrapping_add(101);
        let mut dense = cond.to_dense();
        dense.row_mut(t).mapv_inplace(|v| -v + 0.5);
        let cond2 = ConditioningMatrix::from_dense(dense);
        let out = net.forward(&inputs2, &cond2).unwrap();
        violations += (0..t)
            .filter(|&s| base.row(s) != out.row(s))
            .count();
        if base.row(t) == out.row(t) {
            // The change must be visible at t itself, or the test is vacuous.
            violations += 1;
        }
    }
    violations
}

/// Input lags that influence the logit at the last position: returns
/// `(changes at lag RF-1, changes at lag RF)`.
pub fn receptive_field_boundary(config: NetConfig, seed: u64) -> (bool, bool) {
    let rf = config.receptive_field();
    let net = random_net(config, seed);
    let mut r = rng(seed + 5);
    let n = rf + 20;
    let t = n - 1;
    let inputs = random_symbols(&mut r, n);
    let cond = random_condition(&mut r, n, net.config.condition_dim, 1);
    let base = net.forward(&inputs, &cond).unwrap();
    let changed = |lag: usize| {
        let mut p = inputs.clone();
        p[t - lag] = p[t - lag].wrapping_add(77);
        let out = net.forward(&p, &cond).unwrap();
        out.row(t) != base.row(t)
    };
    (changed(rf - 1), changed(rf))
}
