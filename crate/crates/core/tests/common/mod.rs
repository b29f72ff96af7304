//! Independent oracles and proptest strategies shared by the property and
//! acceptance targets.
#![allow(dead_code)]

use nna::dataio::{self, build_curriculum, Sample, Scenario};
use nna::encoder::{dynamic_threshold, Encoder, EncoderConfig};
use nna::engine::{average_forgetting, run_curriculum, RunOptions};
use nna::plasticity::{
    clamp, evolve_beta, update_gen, update_inel, update_mse, update_oja, ClampMode, Learner, Modulation, MuScope,
    Rule, RuleConfig,
};
use nna::transfer;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const RULE_TOL: f64 = 1e-9;
pub const FORGETTING_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct RuleCase {
    pub config: RuleConfig,
    pub outputs: usize,
    pub inputs: usize,
    pub weights: Vec<f64>,
    pub lr: f64,
    pub x_e: Vec<f64>,
    pub x_m: Vec<f64>,
}

fn rule_strategy() -> impl Strategy<Value = Rule> {
    prop_oneof![Just(Rule::Gen), Just(Rule::Oja), Just(Rule::Mse), Just(Rule::Inel)]
}

fn clamp_strategy() -> impl Strategy<Value = ClampMode> {
    prop_oneof![Just(ClampMode::Symmetric), Just(ClampMode::Positive), Just(ClampMode::None)]
}

pub fn rule_config() -> impl Strategy<Value = RuleConfig> {
    (
        rule_strategy(),
        (-2.0..2.0f64, -1.0..1.0f64, 0.0..2.0f64, 1e-4..1.0f64),
        clamp_strategy(),
        0.1..3.0f64,
        any::<bool>(),
        prop_oneof![Just(MuScope::Layer), Just(MuScope::PerNeuron)],
        prop_oneof![Just(Modulation::PerRow), Just(Modulation::Global)],
    )
        .prop_map(|(rule, (b1, b2, b3, lr0), clamp_mode, clamp_bound, filtered_mse, scope, modulation)| RuleConfig {
            rule,
            // the inelastic window is only meaningful for β1 >= 0
            beta1: if rule == Rule::Inel { b1.abs() * 2.0 } else { b1 },
            beta2: b2,
            beta3: b3,
            lr0,
            clamp_mode,
            clamp_bound,
            filtered_mse,
            inel_mu_scope: scope,
            modulation,
            init_scale: 0.0,
            init_seed: 0,
        })
}

pub fn rule_case() -> impl Strategy<Value = RuleCase> {
    (rule_config(), 1usize..5, 1usize..7).prop_flat_map(|(config, outputs, inputs)| {
        let x_e = prop::collection::vec(prop_oneof![Just(0.0), 0.0..3.0f64], inputs);
        let x_m = prop_oneof![
            (0..outputs).prop_map(move |l| {
                let mut v = vec![0.0; outputs];
                v[l] = 1.0;
                v
            }),
            prop::collection::vec(-1.0..1.0f64, outputs),
        ];
        (
            Just(config),
            Just(outputs),
            Just(inputs),
            prop::collection::vec(-2.0..2.0f64, outputs * inputs),
            1e-4..1.0f64,
            x_e,
            x_m,
        )
            .prop_map(|(config, outputs, inputs, weights, lr, x_e, x_m)| RuleCase {
                config,
                outputs,
                inputs,
                weights,
                lr,
                x_e,
                x_m,
            })
    })
}

impl RuleCase {
    pub fn learner(&self) -> Learner {
        Learner::from_parts(self.config.clone(), self.outputs, self.inputs, self.weights.clone(), Some(self.lr))
            .unwrap()
    }
}

fn first_argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..v.len() {
        if v[k] > v[best] {
            best = k;
        }
    }
    best
}

/// Per-synapse scalar form of every rule, written from the formulas alone.
pub fn scalar_delta(cfg: &RuleConfig, w: &[f64], outputs: usize, lr: f64, x_e: &[f64], x_m: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x_e.len();
    let mut x_o = vec![0.0; outputs];
    for j in 0..outputs {
        let mut a = 0.0;
        for i in 0..n {
            a += w[j * n + i] * x_e[i];
        }
        x_o[j] = if a > 0.0 { a.tanh() } else { 0.0 };
    }
    let m_total: f64 = x_m.iter().sum();
    let layer_mu: f64 = w.iter().sum::<f64>() / w.len() as f64;
    let skip = matches!(cfg.rule, Rule::Mse | Rule::Inel) && cfg.filtered_mse && first_argmax(&x_o) == first_argmax(x_m);
    let mut dw = vec![0.0; outputs * n];
    for j in 0..outputs {
        let m = match cfg.modulation {
            Modulation::PerRow => x_m[j],
            Modulation::Global => m_total,
        };
        let row_mu: f64 = w[j * n..(j + 1) * n].iter().sum::<f64>() / n as f64;
        for i in 0..n {
            let wij = w[j * n + i];
            dw[j * n + i] = match cfg.rule {
                Rule::Gen => lr * m * (x_e[i] - cfg.beta1) * (x_o[j] - cfg.beta2),
                Rule::Oja => lr * m * (x_e[i] * x_o[j] - cfg.beta1 * x_o[j] * x_o[j] * wij),
                Rule::Mse if skip => 0.0,
                Rule::Mse => lr * (x_m[j] - x_o[j]) * x_e[i],
                Rule::Inel if skip => 0.0,
                Rule::Inel => {
                    let mu = if cfg.inel_mu_scope == MuScope::Layer { layer_mu } else { row_mu };
                    let k = if 1.0 - cfg.beta1 * (wij - mu).abs() >= 0.0 { 1.0 } else { 0.0 };
                    k * lr * (x_m[j] - x_o[j]) * x_e[i]
                }
            };
        }
    }
    (x_o, dw)
}

fn scalar_clamp(w: f64, mode: ClampMode, c: f64) -> f64 {
    match mode {
        ClampMode::Symmetric => w.max(-c).min(c),
        ClampMode::Positive => w.max(0.0).min(c),
        ClampMode::None => w,
    }
}

fn close(a: &[f64], b: &[f64], tol: f64, what: &str) -> Result<(), TestCaseError> {
    prop_assert_eq!(a.len(), b.len());
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        prop_assert!((x - y).abs() <= tol, "{} differs at {}: {} vs {}", what, k, x, y);
    }
    Ok(())
}

/// The dense update and a full learner step both agree with the scalar oracle.
pub fn check_rule_oracle(case: &RuleCase) -> Result<(), TestCaseError> {
    let learner = case.learner();
    let w0 = learner.weights().to_vec();
    let (x_o, want) = scalar_delta(&case.config, &w0, case.outputs, case.lr, &case.x_e, &case.x_m);
    let got = match case.config.rule {
        Rule::Gen => update_gen(&learner, &case.x_e, &x_o, &case.x_m),
        Rule::Oja => update_oja(&learner, &case.x_e, &x_o, &case.x_m),
        Rule::Mse => update_mse(&learner, &case.x_e, &x_o, &case.x_m),
        Rule::Inel => update_inel(&learner, &case.x_e, &x_o, &case.x_m),
    };
    close(&got, &want, RULE_TOL, "ΔW")?;

    let mut stepped = learner.clone();
    let out = stepped.apply_step(&case.x_e, &case.x_m).unwrap();
    close(&out, &x_o, RULE_TOL, "x_o")?;
    let next: Vec<f64> = w0
        .iter()
        .zip(&want)
        .map(|(w, d)| scalar_clamp(w + d, case.config.clamp_mode, case.config.clamp_bound))
        .collect();
    close(stepped.weights(), &next, RULE_TOL, "W'")?;
    let lr = (case.lr + case.config.lr0 * case.config.beta3) / (1.0 + case.config.beta3);
    prop_assert!((stepped.lr() - lr).abs() <= RULE_TOL);
    Ok(())
}

/// Weights stay inside the clamp range after every step of a short stream.
pub fn check_clamp_invariant(case: &RuleCase, steps: usize) -> Result<(), TestCaseError> {
    let mut l = case.learner();
    let (mode, c) = (case.config.clamp_mode, case.config.clamp_bound);
    for s in 0..steps {
        let x_e: Vec<f64> = case.x_e.iter().map(|v| v * (1.0 + s as f64 * 0.37)).collect();
        l.apply_step(&x_e, &case.x_m).unwrap();
        for &w in l.weights() {
            match mode {
                ClampMode::Symmetric => prop_assert!(w.abs() <= c),
                ClampMode::Positive => prop_assert!((0.0..=c).contains(&w)),
                ClampMode::None => prop_assert!(w.is_finite()),
            }
        }
    }
    let mut copy = l.weights().to_vec();
    clamp(&mut copy, mode, c);
    prop_assert_eq!(copy.as_slice(), l.weights());
    Ok(())
}

/// `lr0` is a fixed point, and iterates approach it monotonically.
pub fn check_evolve_beta(lr: f64, lr0: f64, beta3: f64) -> Result<(), TestCaseError> {
    prop_assert!((evolve_beta(lr0, lr0, beta3).unwrap() - lr0).abs() <= 1e-12 * lr0.abs().max(1.0));
    let mut cur = lr;
    let mut gap = (cur - lr0).abs();
    for _ in 0..50 {
        let next = evolve_beta(cur, lr0, beta3).unwrap();
        let g = (next - lr0).abs();
        prop_assert!(g <= gap + 1e-15, "gap grew {} -> {}", gap, g);
        // contraction by 1/(1+β3) without overshoot
        prop_assert!((next - lr0 - (cur - lr0) / (1.0 + beta3)).abs() <= 1e-15);
        cur = next;
        gap = g;
    }
    if beta3 > 0.0 {
        prop_assert!(gap < (lr - lr0).abs() || lr == lr0);
    }
    Ok(())
}

pub fn encoder_input() -> impl Strategy<Value = (u64, usize, usize, f64, Vec<f32>)> {
    (any::<u64>(), 2usize..20, 8usize..120, 0.05..0.9f64).prop_flat_map(|(seed, a, k, rho)| {
        (Just(seed), Just(a), Just(k), Just(rho), prop::collection::vec(0.0..1.0f32, a))
    })
}

pub fn encoder(seed: u64, input_dim: usize, expansion_dim: usize, density: f64, cutoff: f64) -> Encoder {
    Encoder::build(EncoderConfig {
        input_dim,
        expansion_dim,
        cutoff,
        density,
        weight_seed: seed,
        threshold_enabled: true,
        bypass: false,
    })
    .unwrap()
}

/// Adding a constant to every projection leaves the thresholded code unchanged.
pub fn check_shift_invariance(z: &[f64], shift: f64, k: f64) -> Result<(), TestCaseError> {
    let mut a = z.to_vec();
    let mut b: Vec<f64> = z.iter().map(|v| v + shift).collect();
    dynamic_threshold(&mut a, k);
    dynamic_threshold(&mut b, k);
    let scale = z.iter().fold(1.0f64, |m, v| m.max(v.abs())) + shift.abs();
    close(&a, &b, 1e-9 * scale, "shifted code")
}

/// Raising the cutoff never activates more units.
pub fn check_k_monotone(z: &[f64], k1: f64, k2: f64) -> Result<(), TestCaseError> {
    let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
    let mut a = z.to_vec();
    let mut b = z.to_vec();
    dynamic_threshold(&mut a, lo);
    dynamic_threshold(&mut b, hi);
    for (x, y) in a.iter().zip(&b) {
        prop_assert!(*y <= *x + 1e-12);
        if *y > 0.0 {
            prop_assert!(*x > 0.0);
        }
    }
    Ok(())
}

/// `W·(a·u + b·v) = a·W·u + b·W·v`.
pub fn check_linearity(enc: &Encoder, u: &[f32], v: &[f32], a: f32, b: f32) -> Result<(), TestCaseError> {
    let mix: Vec<f32> = u.iter().zip(v).map(|(x, y)| a * x + b * y).collect();
    let zm = enc.project(&mix).unwrap();
    let zu = enc.project(u).unwrap();
    let zv = enc.project(v).unwrap();
    for ((m, x), y) in zm.iter().zip(&zu).zip(&zv) {
        let want = f64::from(a) * x + f64::from(b) * y;
        prop_assert!((m - want).abs() <= 1e-6 * (1.0 + want.abs()), "{} vs {}", m, want);
    }
    Ok(())
}

/// Nested-loop average forgetting, straight from the definition.
pub fn forgetting_oracle(a: &[Vec<f64>], i: usize) -> f64 {
    let mut total = 0.0;
    for j in 1..i {
        let mut best = f64::NEG_INFINITY;
        for l in j..i {
            if a[l - 1][j - 1] > best {
                best = a[l - 1][j - 1];
            }
        }
        total += best - a[i - 1][j - 1];
    }
    total / (i - 1) as f64
}

pub fn accuracy_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..8).prop_flat_map(|t| {
        prop::collection::vec(prop::collection::vec(0.0..=1.0f64, t), t).prop_map(move |mut m| {
            // lower-triangular: a[l][j] defined for j <= l
            for (l, row) in m.iter_mut().enumerate() {
                row.truncate(l + 1);
            }
            m
        })
    })
}

pub fn check_forgetting(a: &[Vec<f64>]) -> Result<(), TestCaseError> {
    for i in 2..=a.len() {
        let got = average_forgetting(a, i).unwrap();
        let want = forgetting_oracle(a, i);
        prop_assert!((got - want).abs() <= FORGETTING_TOL, "F_{} = {} vs {}", i, got, want);
    }
    Ok(())
}

/// Two runs of the same seeded synthetic curriculum are bit-identical.
pub fn check_run_determinism(seed: u64, rule: Rule, scenario: Scenario) -> Result<(), TestCaseError> {
    let split = dataio::synthetic::blob_split(4, 30, 10, 12, 0.2, seed).unwrap();
    let run = || {
        let enc = encoder(seed, 12, 80, 0.3, 0.5);
        let cfg = RuleConfig {
            rule,
            beta1: if rule == Rule::Inel { 5.0 } else { 0.1 },
            lr0: 0.05,
            beta3: 0.1,
            init_scale: 0.01,
            init_seed: seed,
            ..RuleConfig::default()
        };
        let learner = Learner::new(cfg, 4, 80).unwrap();
        let parts = nna::dataio::consecutive_groups(4, 2);
        let parts = if scenario == Scenario::SingleTask { vec![(0..4).collect()] } else { parts };
        let cur = build_curriculum(&split, scenario, &parts, 1.0, seed).unwrap();
        let (res, l) = run_curriculum(enc, learner, cur, &split.train, &split.test, RunOptions::default()).unwrap();
        (res, l.weights().to_vec())
    };
    let (a, wa) = run();
    let (b, wb) = run();
    prop_assert_eq!(&a.accuracy_matrix, &b.accuracy_matrix);
    prop_assert_eq!(&a.online_accuracy, &b.online_accuracy);
    prop_assert_eq!(a.final_accuracy, b.final_accuracy);
    prop_assert_eq!(wa, wb);
    Ok(())
}

/// Participation ratio of a point cloud via the trace/Frobenius identity.
pub fn eigen_oracle(samples: &[Sample]) -> f64 {
    let n = samples.len();
    let d = samples[0].features.len();
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, &x) in mean.iter_mut().zip(&s.features) {
            *m += f64::from(x) / n as f64;
        }
    }
    let mut c = vec![vec![0.0; d]; d];
    for s in samples {
        for a in 0..d {
            for b in 0..d {
                c[a][b] += (f64::from(s.features[a]) - mean[a]) * (f64::from(s.features[b]) - mean[b]);
            }
        }
    }
    let tr: f64 = (0..d).map(|a| c[a][a]).sum();
    let fro: f64 = c.iter().flatten().map(|v| v * v).sum();
    tr * tr / fro
}

pub fn point_cloud() -> impl Strategy<Value = Vec<Sample>> {
    (2usize..6, 6usize..30).prop_flat_map(|(d, n)| {
        prop::collection::vec(prop::collection::vec(-3.0..3.0f32, d), n)
            .prop_map(|rows| rows.into_iter().map(|f| Sample::new(f, 0)).collect())
    })
}

fn rotate(samples: &[Sample], theta: f64, p: usize, q: usize, scale: f64) -> Vec<Sample> {
    samples
        .iter()
        .map(|s| {
            let mut f: Vec<f64> = s.features.iter().map(|&x| f64::from(x)).collect();
            let (a, b) = (f[p], f[q]);
            f[p] = theta.cos() * a - theta.sin() * b;
            f[q] = theta.sin() * a + theta.cos() * b;
            Sample::new(f.into_iter().map(|v| (v * scale) as f32).collect(), s.label)
        })
        .collect()
}

/// Eigen dimension matches the trace/Frobenius oracle and ignores rotations
/// and uniform scaling.
pub fn check_eigen_dimension(samples: &[Sample], theta: f64, scale: f64) -> Result<(), TestCaseError> {
    let e = transfer::eigen_dimension(samples).unwrap();
    if e.degenerate {
        return Ok(());
    }
    let want = eigen_oracle(samples);
    prop_assert!((e.value - want).abs() <= 1e-8 * want, "{} vs oracle {}", e.value, want);
    let d = samples[0].features.len();
    let turned = rotate(samples, theta, 0, d - 1, scale);
    let t = transfer::eigen_dimension(&turned).unwrap();
    // f32 storage of the rotated points limits agreement
    prop_assert!((t.value - e.value).abs() <= 1e-4 * e.value, "{} vs {}", t.value, e.value);
    Ok(())
}

/// Uniformly scaling every feature leaves centroid cosine distances unchanged.
pub fn check_cosine_scaling(samples: &[Sample], scale: f32) -> Result<(), TestCaseError> {
    let Ok(a) = transfer::self_cosine_distance_matrix(samples) else {
        return Ok(());
    };
    let scaled: Vec<Sample> = samples
        .iter()
        .map(|s| Sample::new(s.features.iter().map(|x| x * scale).collect(), s.label))
        .collect();
    let b = transfer::self_cosine_distance_matrix(&scaled).unwrap();
    prop_assert!((a.min - b.min).abs() <= 1e-5 && (a.max - b.max).abs() <= 1e-5);
    Ok(())
}

pub fn labelled_cloud() -> impl Strategy<Value = Vec<Sample>> {
    (1usize..6, 2usize..4, 4usize..20).prop_flat_map(|(d, classes, n)| {
        prop::collection::vec((prop::collection::vec(0.0..3.0f32, d), 0..classes), n)
            .prop_map(|rows| rows.into_iter().map(|(f, l)| Sample::new(f, l)).collect())
    })
}

/// NNAF write then read is bit-exact.
pub fn check_nnaf_roundtrip(samples: &[Sample]) -> Result<(), TestCaseError> {
    let classes = samples.iter().map(|s| s.label + 1).max().unwrap_or(1);
    let mut bytes = Vec::new();
    dataio::write_features(&mut bytes, samples, classes).unwrap();
    let back = dataio::read_features(&bytes).unwrap();
    prop_assert_eq!(back.class_count, classes);
    prop_assert_eq!(back.samples.len(), samples.len());
    for (a, b) in back.samples.iter().zip(samples) {
        prop_assert_eq!(a.label, b.label);
        let ab: Vec<u32> = a.features.iter().map(|x| x.to_bits()).collect();
        let bb: Vec<u32> = b.features.iter().map(|x| x.to_bits()).collect();
        prop_assert_eq!(ab, bb);
    }
    Ok(())
}

/// Run `check` on `cases` generated inputs; `Err` carries the minimal failure.
pub fn run_cases<S: Strategy>(
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, check).map_err(|e| e.to_string())
}
