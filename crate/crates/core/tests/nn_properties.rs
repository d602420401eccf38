//! Network properties: causality, receptive field, gradients against
//! finite differences, incremental inference and initialization.

mod common;

use common::*;
use excitvoc::conditioning::ConditioningMatrix;
use excitvoc::nn::{
    generate, tensor_specs, Adam, GenerationMode, LayerTensor, NetConfig, Parameters, PostTensor,
    TrainConfig, WaveNet,
};

#[test]
fn gradients_match_central_differences() {
    for seed in [1, 2] {
        let g = gradient_check(seed);
        assert!(g.checked > 3000);
        assert!(g.skipped * 100 < g.checked, "{} kink crossings", g.skipped);
        assert!(g.max_relative_error < 1e-4, "seed {seed}: {}", g.max_relative_error);
    }
}

#[test]
fn desk_network_is_causal() {
    let positions = [0, 1, 63, 126, 127, 300, 599];
    assert_eq!(causality_violations(NetConfig::desk(), 600, &positions, 4), 0);
}

#[test]
fn receptive_field_boundary_is_exact() {
    let mut toy = NetConfig::tiny(2);
    toy.num_blocks = 2;
    toy.layers_per_block = 3;
    assert_eq!(toy.receptive_field(), 15);
    assert_eq!(receptive_field_boundary(toy, 8), (true, false));
    assert_eq!(receptive_field_boundary(NetConfig::desk(), 8), (true, false));
}

#[test]
fn incremental_matches_batch() {
    assert!(incremental_gap(NetConfig::desk(), 1000, 12) < 1e-5);
    let mut wide_cond = NetConfig::tiny(5);
    wide_cond.num_blocks = 2;
    assert!(incremental_gap(wide_cond, 300, 13) < 1e-9);
}

#[test]
fn xavier_variance_matches_fans() {
    let cfg = NetConfig::desk();
    let specs = tensor_specs(&cfg);
    let draws: Vec<Parameters<f64>> = (0..10).map(|s| Parameters::xavier(&cfg, s)).collect();
    for (k, spec) in specs.iter().enumerate() {
        if spec.is_bias {
            assert!(draws.iter().all(|p| p.tensors[k].iter().all(|&v| v == 0.0)));
            continue;
        }
        let values: Vec<f64> = draws.iter().flat_map(|p| p.tensors[k].iter().copied()).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        let target = 2.0 / (spec.fan_in + spec.fan_out) as f64;
        assert!((var / target - 1.0).abs() < 0.2, "{}: {var} vs {target}", spec.name);
    }
}

#[test]
fn zero_loss_gives_zero_gradients() {
    let cfg = NetConfig::tiny(2);
    let mut net = random_net(cfg, 3);
    net.params.post_mut(PostTensor::OutputBias)[[0, 42]] = 1e3;
    let targets = vec![42u8; 40];
    let mut r = rng(3);
    let cond = random_condition(&mut r, 40, 2, 10);
    let (loss, grads) = net.loss_and_gradients(&targets, &cond, 0).unwrap();
    assert_eq!(loss, 0.0);
    assert!(grads.tensors.iter().all(|t| t.iter().all(|&v| v == 0.0)));
}

#[test]
fn unused_parameters_get_zero_gradient() {
    let cfg = NetConfig::tiny(2);
    let mut net = random_net(cfg.clone(), 5);
    let g = cfg.gate_channels;
    net.params
        .layer_mut(0, LayerTensor::GateBias)
        .slice_mut(ndarray::s![.., g..])
        .fill(-1e3);
    let mut r = rng(5);
    let targets = random_symbols(&mut r, 48);
    let cond = random_condition(&mut r, 48, 2, 12);
    let (_, grads) = net.loss_and_gradients(&targets, &cond, 0).unwrap();
    let last = cfg.num_layers() - 1;
    for which in [
        LayerTensor::ConvCurrent,
        LayerTensor::ConvPast,
        LayerTensor::GateBias,
        LayerTensor::Condition,
        LayerTensor::Residual,
        LayerTensor::Skip,
    ] {
        assert!(grads.layer(0, which).iter().all(|&v| v == 0.0), "{which:?}");
    }
    assert!(grads.layer(last, LayerTensor::Residual).iter().all(|&v| v == 0.0));
    assert!(grads.layer(last, LayerTensor::ResidualBias).iter().all(|&v| v == 0.0));
    assert!(grads.layer(last, LayerTensor::Skip).iter().any(|&v| v != 0.0));
}

#[test]
fn zero_gradient_leaves_parameters_and_decays_moments() {
    let cfg = NetConfig::tiny(0);
    let mut params = Parameters::<f64>::xavier(&cfg, 1);
    let mut adam = Adam::new(&params, &TrainConfig::default());
    adam.first_moment.tensors[0].fill(1.0);
    adam.second_moment.tensors[0].fill(1.0);
    let before = params.clone();
    let zero = params.zeros_like();
    assert!(adam.update(&mut params, &zero));
    assert_ne!(params.tensors[0], before.tensors[0]);
    assert_eq!(params.tensors[1..], before.tensors[1..]);
    assert!(adam.first_moment.tensors[0].iter().all(|&v| (v - 0.9).abs() < 1e-15));
    assert!(adam.second_moment.tensors[0].iter().all(|&v| (v - 0.999).abs() < 1e-15));
}

fn train_steps(steps: usize) -> Parameters<f32> {
    let cfg = NetConfig::tiny(2);
    let mut net = WaveNet::<f32>::init(cfg, 21).unwrap();
    let mut r = rng(21);
    let targets = random_symbols(&mut r, 64);
    let cond = random_condition(&mut r, 64, 2, 16).cast::<f32>();
    let train = TrainConfig {
        learning_rate: 1e-3,
        ..TrainConfig::default()
    };
    let mut adam = Adam::new(&net.params, &train);
    for _ in 0..steps {
        let (_, grads) = net.loss_and_gradients(&targets, &cond, 0).unwrap();
        assert!(adam.update(&mut net.params, &grads));
    }
    net.params
}

#[test]
fn training_is_bit_reproducible() {
    let a = train_steps(100);
    let b = train_steps(100);
    assert_eq!(a, b);
    assert_ne!(a, train_steps(99));
}

#[test]
fn forced_class_generates_constant_sequence() {
    let cfg = NetConfig::tiny(0);
    let mut net = WaveNet::<f64>::init(cfg, 2).unwrap();
    net.params.post_mut(PostTensor::OutputBias)[[0, 128]] = 1e3;
    let cond = ConditioningMatrix::empty(200);
    for mode in [GenerationMode::Sample, GenerationMode::Argmax] {
        let out = generate(&net, &cond, mode, 7).unwrap();
        assert!(out.0.iter().all(|&s| s == 128));
    }
}

#[test]
fn generation_is_seed_deterministic() {
    let net = random_net(NetConfig::tiny(3), 30);
    let mut r = rng(30);
    let cond = random_condition(&mut r, 500, 3, 50);
    let a = generate(&net, &cond, GenerationMode::Sample, 1).unwrap();
    let b = generate(&net, &cond, GenerationMode::Sample, 1).unwrap();
    let c = generate(&net, &cond, GenerationMode::Sample, 2).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.0.len(), 500);
}

#[test]
fn generation_reproduces_teacher_forced_argmax() {
    let net = random_net(NetConfig::tiny(3), 31);
    let mut r = rng(31);
    let cond = random_condition(&mut r, 120, 3, 40);
    let generated = generate(&net, &cond, GenerationMode::Argmax, 0).unwrap();
    let inputs = excitvoc::nn::teacher_forcing_inputs(&generated.0);
    let logits = net.forward(&inputs, &cond).unwrap();
    for (t, row) in logits.rows().into_iter().enumerate() {
        assert_eq!(excitvoc::nn::argmax(&row.to_owned()), generated.0[t] as usize);
    }
}
