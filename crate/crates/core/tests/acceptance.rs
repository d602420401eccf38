//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any enforced criterion fails.
//!
//! The trend check on a ten-minute corpus reads `EXCITVOC_CORPUS_DIR` (a
//! directory of 16-bit mono WAV files). Without it the check reports FAIL,
//! runs the same experiment on the bundled recordings for information, and
//! does not fail the process.

mod common;

use std::path::{Path, PathBuf};
use std::time::Instant;

use excitvoc::conditioning::{fit_normalizer, FeatureFile};
use excitvoc::lp::{
    analysis_filter, bandwidth_expand, lpc_from_reflection, lpc_to_lsf, lsf_to_lpc, synthesis_filter,
    FilterSchedule, LpcCoefficients, LsfVector,
};
use excitvoc::metrics::{evaluate, EvalConfig};
use excitvoc::nn::{Checkpoint, GenerationMode, NetConfig, TrainConfig};
use excitvoc::signal::{
    companded, mu_law_encode, mu_law_expand, read_wav, write_wav, FrameGrid, Waveform,
};
use excitvoc::vocoder::synthetic::{speech_like, SpeechLikeConfig};
use excitvoc::vocoder::*;
use rand::Rng;

const DSP_TOL: f64 = 1e-9;
const DSP_BUDGET_S: f64 = 60.0;
const LSF_TOL: f64 = 1e-8;
const LSF_ANALYTIC_TOL: f64 = 1e-10;
const MU_LAW_TOL: f64 = 1.0 / 256.0;
const MU_LAW_GRID: usize = 100_000;
const PAPER_RF: usize = 3070;
const GRAD_TOL: f64 = 1e-4;
const GRAD_BUDGET_S: f64 = 120.0;
const INCREMENTAL_TOL: f64 = 1e-5;
const INCREMENTAL_STEPS: usize = 1000;
const OVERFIT_NLL: f64 = 1.0;
const OVERFIT_MAX_STEPS: u64 = 2000;
const OVERFIT_BUDGET_S: f64 = 600.0;
const SMOOTH_WINDOW: usize = 100;
const TREND_MIN_SECONDS: f64 = 600.0;
const TREND_SEEDS: [u64; 3] = [0, 1, 2];
const INVERSION_SNR_DB: f64 = 30.0;
const HELD_OUT: usize = 20;

const SR: u32 = 16_000;

struct Outcome {
    pass: bool,
    /// A failed unenforced criterion is reported but does not fail the run.
    enforced: bool,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: String) -> Self {
        Self {
            pass,
            enforced: true,
            detail,
        }
    }
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn arctic(name: &str) -> Waveform<f64> {
    read_wav(data(name)).expect("bundled recording")
}

fn analysis_config(sr: u32) -> AnalysisConfig {
    AnalysisConfig {
        sample_rate_hz: sr,
        ..AnalysisConfig::default()
    }
}

fn random_stable(rng: &mut impl Rng, order: usize, max_k: f64) -> LpcCoefficients<f64> {
    let k: Vec<f64> = (0..order).map(|_| rng.random_range(-max_k..max_k)).collect();
    lpc_from_reflection(&k)
}

/// Reflection coefficients that drift by at most `step` per frame, so the
/// schedule changes the way an LP analysis of speech does.
fn drifting_schedule(rng: &mut impl Rng, frames: usize, max_k: f64, step: f64) -> Vec<LpcCoefficients<f64>> {
    let mut k: Vec<f64> = (0..40).map(|_| rng.random_range(-max_k..max_k)).collect();
    (0..frames)
        .map(|_| {
            for v in k.iter_mut() {
                *v = (*v + rng.random_range(-step..step)).clamp(-max_k, max_k);
            }
            bandwidth_expand(&lpc_from_reflection(&k), 0.981).unwrap()
        })
        .collect()
}

fn round_trip_error(x: &[f64], schedule: FilterSchedule<'_, f64>) -> f64 {
    let e = analysis_filter(x, schedule).unwrap();
    let y = synthesis_filter(&e, schedule).unwrap();
    x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn dsp_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(4000..12000);
        let shift = 80;
        let grid = FrameGrid::new(2 * shift, shift, n).unwrap();
        let frames = drifting_schedule(&mut rng, grid.num_frames, 0.9, 0.02);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        worst = worst.max(round_trip_error(&x, FilterSchedule::new(&frames, &grid)));
    }
    let secs = start.elapsed().as_secs_f64();
    let config = analysis_config(SR);
    let mut speech = 0.0f64;
    for name in ["arctic_a0007.wav", "arctic_a0009.wav"] {
        let w = arctic(name);
        let a = analyze_utterance(&w, &config).unwrap();
        speech = speech.max(round_trip_error(&w.samples, a.schedule()));
    }
    Outcome::check(
        worst <= DSP_TOL && speech <= DSP_TOL && secs < DSP_BUDGET_S,
        format!(
            "max |x - y| = {worst:.2e} on 100 random schedules in {secs:.1} s, {speech:.2e} on \
             recorded speech (tol {DSP_TOL:e})"
        ),
    )
}

/// Magnitudes of the sum and difference polynomials at `w`.
fn pq_magnitudes(lpc: &LpcCoefficients<f64>, w: f64) -> (f64, f64) {
    let m = lpc.order();
    let mut c = vec![1.0];
    c.extend(lpc.coeffs.iter().map(|a| -a));
    c.push(0.0);
    let (mut p, mut q) = ((0.0, 0.0), (0.0, 0.0));
    for k in 0..=m + 1 {
        let (s, co) = (-(w * k as f64)).sin_cos();
        let pk = c[k] + c[m + 1 - k];
        let qk = c[k] - c[m + 1 - k];
        p = (p.0 + pk * co, p.1 + pk * s);
        q = (q.0 + qk * co, q.1 + qk * s);
    }
    (p.0.hypot(p.1), q.0.hypot(q.1))
}

fn lsf_correctness() -> Outcome {
    let mut rng = common::rng(12);
    let mut worst = 0.0f64;
    let mut interlace_failures = 0;
    for _ in 0..1000 {
        let lpc = bandwidth_expand(&random_stable(&mut rng, 40, 0.9), 0.981).unwrap();
        let lsf = lpc_to_lsf(&lpc).unwrap();
        let back = lsf_to_lpc(&lsf).unwrap();
        worst = lpc
            .coeffs
            .iter()
            .zip(&back.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(worst, f64::max);
        let w = &lsf.frequencies;
        let ordered = w.windows(2).all(|p| p[0] < p[1]) && w[0] > 0.0 && w[w.len() - 1] < std::f64::consts::PI;
        // each frequency is a root of exactly one of P, Q, alternating
        let owners: Vec<Option<bool>> = w
            .iter()
            .map(|&f| {
                let (p, q) = pq_magnitudes(&lpc, f);
                match (p < 1e-7, q < 1e-7) {
                    (true, false) => Some(true),
                    (false, true) => Some(false),
                    _ => None,
                }
            })
            .collect();
        let alternating = owners.iter().all(Option::is_some) && owners.windows(2).all(|o| o[0] != o[1]);
        if !(ordered && alternating) {
            interlace_failures += 1;
        }
    }
    let third = std::f64::consts::FRAC_PI_3;
    let analytic = lpc_to_lsf(&LpcCoefficients::<f64>::identity(2)).unwrap();
    let analytic_err = (analytic.frequencies[0] - third)
        .abs()
        .max((analytic.frequencies[1] - 2.0 * third).abs());
    let inverse = lsf_to_lpc(&LsfVector::new(vec![third, 2.0 * third]).unwrap()).unwrap();
    let inverse_err = inverse.coeffs.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    Outcome::check(
        worst <= LSF_TOL && interlace_failures == 0 && analytic_err <= LSF_ANALYTIC_TOL && inverse_err <= LSF_ANALYTIC_TOL,
        format!(
            "round trip {worst:.2e} (tol {LSF_TOL:e}), {interlace_failures}/1000 interlacing failures, \
             order-2 case {analytic_err:.1e} / {inverse_err:.1e} (tol {LSF_ANALYTIC_TOL:e})"
        ),
    )
}

fn mu_law_contract() -> Outcome {
    let mu = 255;
    let grid: Vec<f64> = (0..MU_LAW_GRID)
        .map(|i| -1.0 + 2.0 * i as f64 / (MU_LAW_GRID - 1) as f64)
        .collect();
    let neg: Vec<f64> = grid.iter().map(|x| -x).collect();
    let s = mu_law_encode(&grid, mu).unwrap().0;
    let sn = mu_law_encode(&neg, mu).unwrap().0;
    let mut asym = 0;
    let mut on_boundary = 0;
    let mut worst = 0.0f64;
    for (i, &x) in grid.iter().enumerate() {
        let scaled = companded(x, mu) * 256.0;
        if (scaled - scaled.round()).abs() < 1e-9 {
            on_boundary += 1;
        } else if sn[i] != 255 - s[i] || mu_law_expand(sn[i], mu) != -mu_law_expand(s[i], mu) {
            asym += 1;
        }
        let decoded = mu_law_expand(s[i], mu);
        // error in the companded amplitude f(x) = 2u - 1
        let err = 2.0 * (companded(decoded, mu) - companded(x, mu)).abs();
        worst = worst.max(err);
    }
    let monotone = s.windows(2).all(|p| p[0] <= p[1]);
    let decode_monotone = (0..255u8).all(|k| mu_law_expand(k, mu) < mu_law_expand(k + 1, mu));
    Outcome::check(
        asym == 0 && monotone && decode_monotone && worst <= MU_LAW_TOL,
        format!(
            "{asym} odd-symmetry violations ({on_boundary} bin edges skipped), monotone {monotone}/{decode_monotone}, \
             max companded error {worst:.5} (tol 1/256)"
        ),
    )
}

fn causality() -> Outcome {
    let desk = NetConfig::desk();
    let violations = common::causality_violations(desk.clone(), 400, &[0, 1, 63, 126, 200, 399], 21);
    let paper = NetConfig::paper();
    let oracle = 1 + paper.num_blocks * (0..paper.layers_per_block).map(|i| 1usize << i).sum::<usize>();
    let toy = NetConfig {
        num_blocks: 2,
        layers_per_block: 3,
        ..NetConfig::tiny(2)
    };
    let (toy_inside, toy_outside) = common::receptive_field_boundary(toy.clone(), 22);
    let (desk_inside, desk_outside) = common::receptive_field_boundary(desk.clone(), 23);
    Outcome::check(
        violations == 0
            && paper.receptive_field() == PAPER_RF
            && oracle == PAPER_RF
            && toy.receptive_field() == 15
            && toy_inside
            && !toy_outside
            && desk_inside
            && !desk_outside,
        format!(
            "{violations} causality violations on desk; paper RF {} (expected {PAPER_RF}); \
             toy RF {} edge {toy_inside}/{toy_outside}; desk RF {} edge {desk_inside}/{desk_outside}",
            paper.receptive_field(),
            toy.receptive_field(),
            desk.receptive_field()
        ),
    )
}

fn gradient_fidelity() -> Outcome {
    let start = Instant::now();
    let g = common::gradient_check(31);
    let secs = start.elapsed().as_secs_f64();
    let skipped_ok = g.skipped * 100 < g.checked;
    Outcome::check(
        g.max_relative_error < GRAD_TOL && skipped_ok && secs < GRAD_BUDGET_S,
        format!(
            "max relative error {:.2e} (tol {GRAD_TOL:e}) over {} entries, {} at ReLU kinks, {secs:.1} s",
            g.max_relative_error, g.checked, g.skipped
        ),
    )
}

fn incremental_consistency() -> Outcome {
    let gap = common::incremental_gap(NetConfig::desk(), INCREMENTAL_STEPS, 41);
    Outcome::check(
        gap < INCREMENTAL_TOL,
        format!("max |batch - incremental| = {gap:.2e} over {INCREMENTAL_STEPS} steps (tol {INCREMENTAL_TOL:e})"),
    )
}

/// Features, statistics and filters for a set of recordings.
struct Corpus {
    config: AnalysisConfig,
    nsf: NoiseShapingFilter,
    norm: excitvoc::conditioning::NormStats,
    train: Vec<(String, Waveform<f64>, FeatureFile)>,
    dev: Vec<(String, Waveform<f64>, FeatureFile)>,
}

impl Corpus {
    fn build(train: Vec<(String, Waveform<f64>)>, dev: Vec<(String, Waveform<f64>)>, sr: u32) -> Self {
        let config = analysis_config(sr);
        let nsf = fit_noise_shaping_filter(train.iter().map(|(_, w)| w), &config).unwrap();
        let featurize = |set: Vec<(String, Waveform<f64>)>| -> Vec<_> {
            set.into_iter()
                .map(|(n, w)| {
                    let f = utterance_features(&w, &config, &nsf).unwrap();
                    (n, w, f)
                })
                .collect()
        };
        let train = featurize(train);
        let dev = featurize(dev);
        let rows: Vec<_> = train.iter().map(|(_, _, f)| f.rows.mapv(f64::from)).collect();
        let norm = fit_normalizer(&config.layout(), &rows).unwrap();
        Self {
            config,
            nsf,
            norm,
            train,
            dev,
        }
    }

    fn meta(&self, variant: VariantTag, zero_sew_rew: bool) -> ModelMeta {
        ModelMeta {
            variant,
            analysis: self.config.clone(),
            norm: self.norm.clone(),
            noise_shaping: (variant == VariantTag::WnNs).then(|| self.nsf.clone()),
            zero_sew_rew,
        }
    }

    fn utterances(&self, set: &[(String, Waveform<f64>, FeatureFile)], meta: &ModelMeta) -> Vec<TrainingUtterance> {
        set.iter()
            .map(|(n, w, f)| training_utterance(n, w, f, meta).unwrap())
            .collect()
    }

    fn seconds(&self) -> f64 {
        self.train.iter().chain(&self.dev).map(|(_, w, _)| w.duration_secs()).sum()
    }
}

fn training_sanity() -> Outcome {
    let start = Instant::now();
    let full = arctic("arctic_a0007.wav");
    let second = Waveform::new(full.samples[SR as usize..2 * SR as usize].to_vec(), SR).unwrap();
    let corpus = Corpus::build(vec![("a0007_1s".into(), second)], vec![], SR);
    let meta = corpus.meta(VariantTag::ExcitNet, false);
    let utts = corpus.utterances(&corpus.train, &meta);
    let config = TrainConfig {
        learning_rate: 1e-3,
        batch_size_samples: 4000,
        max_steps: OVERFIT_MAX_STEPS,
        seed: 0,
        eval_interval: 100,
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(&utts, &[], NetConfig::desk(), config, meta).unwrap();
    let mut nll = f64::INFINITY;
    let mut trace = Vec::new();
    while trainer.step < OVERFIT_MAX_STEPS {
        trainer.step_once().unwrap();
        if trainer.step % 100 == 0 {
            nll = teacher_forced_nll(&trainer.net, &utts).unwrap();
            trace.push(format!("{}:{nll:.2}", trainer.step));
            if nll < OVERFIT_NLL {
                break;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let smoothed = smooth(trainer.losses(), SMOOTH_WINDOW);
    let h = SMOOTH_WINDOW / 2;
    let samples: Vec<f64> = (h..smoothed.len().saturating_sub(h))
        .step_by(SMOOTH_WINDOW)
        .map(|i| smoothed[i])
        .collect();
    let monotone = samples.windows(2).all(|p| p[1] <= p[0]);
    Outcome::check(
        nll < OVERFIT_NLL && monotone && secs < OVERFIT_BUDGET_S,
        format!(
            "teacher-forced NLL {nll:.3} nat/sample after {} steps (target < {OVERFIT_NLL}), \
             smoothed curve monotone {monotone}, {secs:.0} s [{}]",
            trainer.step,
            trace.join(" ")
        ),
    )
}

/// Trend-experiment budget.
#[derive(Clone, Copy)]
struct Budget {
    steps: u64,
    eval_interval: u64,
    batch: usize,
}

fn train_run(corpus: &Corpus, variant: VariantTag, zero: bool, seed: u64, budget: &Budget) -> (Vec<CurvePoint>, VocoderModel) {
    let meta = corpus.meta(variant, zero);
    let train = corpus.utterances(&corpus.train, &meta);
    let dev = corpus.utterances(&corpus.dev, &meta);
    let config = TrainConfig {
        learning_rate: 1e-3,
        batch_size_samples: budget.batch,
        max_steps: budget.steps,
        seed,
        eval_interval: budget.eval_interval,
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(&train, &dev, NetConfig::desk(), config, meta.clone()).unwrap();
    trainer.run(|_, _| {}).unwrap();
    let model = VocoderModel {
        net: trainer.net.clone(),
        meta,
        step: trainer.step,
    };
    (trainer.curve().to_vec(), model)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Loads `EXCITVOC_CORPUS_DIR`: every tenth file (sorted) is held out.
fn external_corpus() -> Result<Corpus, String> {
    let dir = std::env::var_os("EXCITVOC_CORPUS_DIR").ok_or("EXCITVOC_CORPUS_DIR is not set")?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| format!("{}: {e}", Path::new(&dir).display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    files.sort();
    let waves: Vec<(String, Waveform<f64>)> = files
        .iter()
        .filter_map(|p| read_wav(p).ok().map(|w| (utterance_stem(p), w)))
        .collect();
    let Some(sr) = waves.first().map(|(_, w)| w.sample_rate_hz) else {
        return Err("no readable WAV files".into());
    };
    let waves: Vec<_> = waves.into_iter().filter(|(_, w)| w.sample_rate_hz == sr).collect();
    let total: f64 = waves.iter().map(|(_, w)| w.duration_secs()).sum();
    if total < TREND_MIN_SECONDS || waves.len() < 2 {
        return Err(format!("{total:.0} s of speech at {sr} Hz"));
    }
    let (mut train, mut dev) = (Vec::new(), Vec::new());
    for (i, u) in waves.into_iter().enumerate() {
        if i % 10 == 9 {
            dev.push(u);
        } else {
            train.push(u);
        }
    }
    // a bounded development set keeps evaluation cheap
    let mut dev_secs = 0.0;
    dev.retain(|(_, w)| {
        dev_secs += w.duration_secs();
        dev_secs <= 60.0
    });
    if dev.is_empty() {
        return Err("development split is empty".into());
    }
    Ok(Corpus::build(train, dev, sr))
}

fn bundled_corpus() -> Corpus {
    Corpus::build(
        vec![("arctic_a0007".into(), arctic("arctic_a0007.wav"))],
        vec![("arctic_a0009".into(), arctic("arctic_a0009.wav"))],
        SR,
    )
}

/// Dev NLL with and without SEW/REW, median over seeds at each
/// evaluation step. Returns (holds at every step, description, seed-0
/// ExcitNet model).
fn feature_trend(corpus: &Corpus, budget: &Budget) -> (bool, String, VocoderModel) {
    let mut with = Vec::new();
    let mut without = Vec::new();
    let mut model = None;
    for &seed in &TREND_SEEDS {
        let (curve, m) = train_run(corpus, VariantTag::ExcitNet, false, seed, budget);
        with.push(curve);
        model.get_or_insert(m);
        without.push(train_run(corpus, VariantTag::ExcitNet, true, seed, budget).0);
    }
    let mut holds = true;
    let mut parts = Vec::new();
    for (k, point) in with[0].iter().enumerate() {
        let a = median(with.iter().map(|c| c[k].dev_nll).collect());
        let b = median(without.iter().map(|c| c[k].dev_nll).collect());
        holds &= a <= b;
        parts.push(format!("{}: {a:.3} vs {b:.3}", point.step));
    }
    (holds, parts.join(", "), model.expect("at least one seed"))
}

fn feature_trend_outcome(budget_full: &Budget, budget_bundled: &Budget) -> (Outcome, Corpus, VocoderModel, Budget) {
    match external_corpus() {
        Ok(corpus) => {
            let (holds, desc, model) = feature_trend(&corpus, budget_full);
            let secs = corpus.seconds();
            let outcome = Outcome::check(
                holds,
                format!("{secs:.0} s corpus, median dev NLL with vs without SEW/REW at steps [{desc}]"),
            );
            (outcome, corpus, model, *budget_full)
        }
        Err(reason) => {
            let corpus = bundled_corpus();
            let (holds, desc, model) = feature_trend(&corpus, budget_bundled);
            let outcome = Outcome {
                pass: false,
                enforced: false,
                detail: format!(
                    "needs >= {TREND_MIN_SECONDS:.0} s of speech, unavailable ({reason}); on the bundled \
                     {:.1} s the trend {} [median dev NLL with vs without SEW/REW at steps {desc}]",
                    corpus.seconds(),
                    if holds { "holds" } else { "does not hold" }
                ),
            };
            (outcome, corpus, model, *budget_bundled)
        }
    }
}

fn variant_ordering(corpus: &Corpus, excitnet: &VocoderModel, budget: &Budget) -> Outcome {
    let (_, wn) = train_run(corpus, VariantTag::Wn, false, TREND_SEEDS[0], budget);
    let (name, wave, features) = &corpus.dev[0];
    // at most three seconds keeps generation time bounded
    let frames = features.rows.nrows().min(3 * corpus.config.sample_rate_hz as usize / corpus.config.shift_samples().unwrap());
    let clip = FeatureFile {
        rows: features.rows.slice(ndarray::s![..frames, ..]).to_owned(),
        gains: features.gains.clone(),
    };
    let eval = EvalConfig::default();
    let mut lsd = Vec::new();
    for (variant, model) in [(VariantTag::ExcitNet, excitnet), (VariantTag::Wn, &wn)] {
        let out = model.synthesize(variant, &clip, 0, GenerationMode::Sample).unwrap();
        let reference = Waveform::new(wave.samples[..out.len().min(wave.len())].to_vec(), wave.sample_rate_hz).unwrap();
        lsd.push(evaluate(name, &reference, &out, &eval).unwrap().lsd_db);
    }
    Outcome {
        pass: lsd[0] <= lsd[1],
        enforced: false,
        detail: format!(
            "informative: copy-synthesis LSD on {name} after {} steps, EXCITNET {:.2} dB vs WN {:.2} dB",
            budget.steps, lsd[0], lsd[1]
        ),
    }
}

/// Inverts every variant's target on each held-out utterance; returns the
/// worst SNR per variant.
fn inversion_snr(held: &[Waveform<f64>], nsf: &NoiseShapingFilter, config: &AnalysisConfig) -> [f64; 3] {
    let mut worst = [f64::INFINITY; 3];
    for w in held {
        let f = utterance_features(w, config, nsf).unwrap();
        let lpc = lpc_from_features(&f.rows.mapv(f64::from), &config.layout()).unwrap();
        let grid = config.grid(w.len()).unwrap();
        let schedule = FilterSchedule::new(&lpc, &grid);
        for v in VariantTag::ALL {
            let gain = f.gains[v.gain_slot()];
            let (symbols, g) = prepare_target(&w.samples, v, Some(schedule), Some(nsf), Some(gain), config.mu).unwrap();
            let y = reconstruct(&symbols, v, g, Some(schedule), Some(nsf), config.mu).unwrap();
            let slot = v.gain_slot();
            worst[slot] = worst[slot].min(snr_db(&w.samples, &y));
        }
    }
    worst
}

/// Held-out utterances from two corpora, each scored with the
/// noise-shaping filter fitted on that corpus's training split.
fn pipeline_identity() -> Outcome {
    let config = analysis_config(SR);
    let synth_train: Vec<Waveform<f64>> = (0..5).map(|s| speech_like(&SpeechLikeConfig::new(SR, 1.0), s)).collect();
    let synth_held: Vec<Waveform<f64>> = (0..HELD_OUT as u64 - 1)
        .map(|s| speech_like(&SpeechLikeConfig::new(SR, 1.0), 1000 + s))
        .collect();
    let synth_nsf = fit_noise_shaping_filter(&synth_train, &config).unwrap();
    let a = inversion_snr(&synth_held, &synth_nsf, &config);
    let real_nsf = fit_noise_shaping_filter([&arctic("arctic_a0007.wav")], &config).unwrap();
    let b = inversion_snr(&[arctic("arctic_a0009.wav")], &real_nsf, &config);
    let worst: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
    let all = worst.iter().all(|&s| s > INVERSION_SNR_DB);
    Outcome::check(
        all,
        format!(
            "minimum inversion SNR over {} held-out utterances ({} synthetic, 1 recorded): \
             WN {:.1} dB, WN_NS {:.1} dB, EXCITNET {:.1} dB (threshold {INVERSION_SNR_DB} dB)",
            synth_held.len() + 1,
            synth_held.len(),
            worst[0],
            worst[1],
            worst[2]
        ),
    )
}

fn determinism() -> Outcome {
    let waves: Vec<(String, Waveform<f64>)> = (0..3)
        .map(|s| (format!("u{s}"), speech_like(&SpeechLikeConfig::new(SR, 0.5), 70 + s)))
        .collect();
    let a = Corpus::build(waves.clone(), waves[2..].to_vec(), SR);
    let b = Corpus::build(waves.clone(), waves[2..].to_vec(), SR);
    let analyze_same = a.nsf == b.nsf
        && a.norm.to_json().unwrap() == b.norm.to_json().unwrap()
        && a.train.iter().zip(&b.train).all(|(x, y)| x.2.to_bytes() == y.2.to_bytes());

    let budget = Budget {
        steps: 6,
        eval_interval: 3,
        batch: 800,
    };
    let checkpoint = |c: &Corpus| {
        let (_, m) = train_run(c, VariantTag::ExcitNet, false, 9, &budget);
        let ck = Checkpoint {
            config: m.net.config.clone(),
            step: m.step,
            seed: 9,
            params: m.net.params.clone(),
            optimizer: None,
            extra: m.meta.to_json().unwrap(),
        };
        ck.to_bytes().unwrap()
    };
    let ck_a = checkpoint(&a);
    let train_same = ck_a == checkpoint(&b);

    let model = VocoderModel::from_checkpoint(&Checkpoint::from_bytes(&ck_a).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let features = &a.dev[0].2;
    let render = |seed: u64, file: &str| {
        let w = model.synthesize(VariantTag::ExcitNet, features, seed, GenerationMode::Sample).unwrap();
        let path = dir.path().join(file);
        write_wav(&w, &path).unwrap();
        std::fs::read(path).unwrap()
    };
    let first = render(4, "a.wav");
    let synth_same = first == render(4, "b.wav");
    let seed_matters = first != render(5, "c.wav");
    Outcome::check(
        analyze_same && train_same && synth_same && seed_matters,
        format!(
            "analyze {analyze_same}, train {train_same}, synthesize {synth_same} byte-identical; \
             other seed differs {seed_matters}"
        ),
    )
}

/// Criteria named in `EXCITVOC_ACCEPTANCE_ONLY` (comma-separated ids), or
/// all of them.
fn selected(id: &str) -> bool {
    match std::env::var("EXCITVOC_ACCEPTANCE_ONLY") {
        Ok(list) => list.split(',').any(|s| s.trim() == id),
        Err(_) => true,
    }
}

fn main() {
    let total = Instant::now();
    let mut failed_enforced = 0;
    let mut report = |id: &str, title: &str, o: Outcome, secs: f64| {
        let status = if o.pass { "PASS" } else { "FAIL" };
        let note = if o.enforced { "" } else { " (not enforced)" };
        println!("{status} [{id}] {title}{note}: {} ({secs:.1} s)", o.detail);
        if !o.pass && o.enforced {
            failed_enforced += 1;
        }
    };
    macro_rules! run {
        ($id:expr, $title:expr, $f:expr) => {{
            if selected($id) {
                let t = Instant::now();
                let o = $f;
                report($id, $title, o, t.elapsed().as_secs_f64());
            }
        }};
    }

    run!("1", "analysis/synthesis filter round trip", dsp_round_trip());
    run!("2", "LSF conversion", lsf_correctness());
    run!("3", "mu-law contract", mu_law_contract());
    run!("4", "network causality and receptive field", causality());
    run!("5", "gradient fidelity", gradient_fidelity());
    run!("6", "incremental generation consistency", incremental_consistency());
    run!("7", "training sanity on 1 s of speech", training_sanity());

    // 9 reuses the models trained for 8
    if selected("8") || selected("9") {
        let t = Instant::now();
        let full = Budget {
            steps: 1000,
            eval_interval: 250,
            batch: 4000,
        };
        let bundled = Budget {
            steps: 200,
            eval_interval: 50,
            batch: 4000,
        };
        let (trend, corpus, excitnet, budget) = feature_trend_outcome(&full, &bundled);
        report("8", "SEW/REW lower development NLL", trend, t.elapsed().as_secs_f64());
        let t = Instant::now();
        let o = variant_ordering(&corpus, &excitnet, &budget);
        report("9", "EXCITNET vs WN copy-synthesis LSD", o, t.elapsed().as_secs_f64());
    }

    run!("10", "target inversion identity", pipeline_identity());
    run!("11", "determinism", determinism());

    println!("acceptance finished in {:.0} s", total.elapsed().as_secs_f64());
    if failed_enforced > 0 {
        std::process::exit(1);
    }
}
