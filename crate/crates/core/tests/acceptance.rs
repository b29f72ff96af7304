//! Acceptance criteria, one line each.
//!
//! Dataset criteria look for MNIST-style directories under `NNA_DATA_DIR` or
//! the workspace `data/` directory. A criterion whose data is not present is
//! reported as UNAVAILABLE; every other criterion must PASS.
//!
//! ```text
//! cargo test --release -p nna --test acceptance -- --nocapture
//! ```
//! Search trajectories and reports land in `$CARGO_TARGET_TMPDIR/acceptance`.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use common::*;
use nna::cli::{ablate, Toggle};
use nna::config::{EvalSplit, ExperimentConfig};
use nna::dataio::{DatasetKind, DatasetSplit, Scenario};
use nna::hpo::{run_search, ConfigSpace, SearchOptions, SearchResult};
use nna::plasticity::{Rule, RuleConfig};
use nna::transfer;
use proptest::prelude::*;

const SEARCH_SEED: u64 = 20_240_611;
const HOLDOUT: usize = 10_000;

#[derive(PartialEq)]
enum Status {
    Pass,
    Fail,
    Unavailable,
}

struct Board {
    rows: Vec<(String, Status, String)>,
    log: std::fs::File,
}

impl Board {
    fn new(dir: &Path) -> Self {
        std::fs::create_dir_all(dir).unwrap();
        Board {
            rows: Vec::new(),
            log: std::fs::File::create(dir.join("acceptance.txt")).unwrap(),
        }
    }

    fn record(&mut self, name: &str, status: Status, detail: String) {
        let tag = match status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Unavailable => "UNAVAILABLE",
        };
        let line = format!("[{tag}] {name}: {detail}\n");
        // bypass the harness capture so the lines always show
        let _ = std::io::stdout().write_all(line.as_bytes());
        let _ = self.log.write_all(line.as_bytes());
        self.rows.push((name.to_string(), status, detail));
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.record(name, if ok { Status::Pass } else { Status::Fail }, detail);
    }
}

fn data_root() -> Option<PathBuf> {
    std::env::var_os("NNA_DATA_DIR")
        .map(PathBuf::from)
        .or_else(|| Some(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")))
        .filter(|p| p.is_dir())
}

fn dataset_dir(kind: DatasetKind) -> Option<PathBuf> {
    let root = data_root()?;
    let dir = root.join(kind.default_dir());
    dir.is_dir().then_some(dir)
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn base(kind: DatasetKind, scenario: Scenario) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind, scenario, RuleConfig::default());
    c.seed = SEARCH_SEED;
    c.holdout = HOLDOUT;
    c.trace_every = 0;
    c
}

/// The searched config scored on the real test split.
fn on_test(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.holdout = 0;
    c.evaluate_on = EvalSplit::Test;
    c.trace_every = 0;
    c.repetitions = 1;
    c
}

fn in_scenario(cfg: &ExperimentConfig, scenario: Scenario, repetitions: usize) -> ExperimentConfig {
    let mut c = on_test(cfg);
    c.scenario = scenario;
    c.repetitions = repetitions;
    c
}

fn search(
    base: &ExperimentConfig,
    space: &ConfigSpace,
    split: &DatasetSplit,
    budget: usize,
    out: &Path,
) -> nna::Result<SearchResult> {
    let options = SearchOptions {
        budget,
        seed: base.seed,
        jobs: jobs(),
        ..SearchOptions::default()
    };
    let t = Instant::now();
    let r = run_search(base, space, split, &options)?;
    r.write_to(out)?;
    let _ = std::io::stdout().write_all(
        format!("  search of {budget} trials took {:.0}s -> {}\n", t.elapsed().as_secs_f64(), out.display()).as_bytes(),
    );
    Ok(r)
}

/// Best completed trial per rule; lowest index wins ties.
fn best_per_rule(r: &SearchResult) -> BTreeMap<Rule, ExperimentConfig> {
    let mut best: BTreeMap<Rule, (f64, usize, ExperimentConfig)> = BTreeMap::new();
    for t in r.trials.iter().filter(|t| t.completed()) {
        let e = best.entry(t.config.rule.rule).or_insert((f64::NEG_INFINITY, usize::MAX, t.config.clone()));
        if t.accuracy > e.0 || (t.accuracy == e.0 && t.trial_index < e.1) {
            *e = (t.accuracy, t.trial_index, t.config.clone());
        }
    }
    best.into_iter().map(|(k, v)| (k, v.2)).collect()
}

fn final_accuracy(cfg: &ExperimentConfig, split: &DatasetSplit) -> nna::Result<(f64, f64)> {
    let (rec, _) = cfg.run_once(split, 0)?;
    Ok((rec.result.final_accuracy, rec.wall_seconds))
}

fn forgetting(cfg: &ExperimentConfig, split: &DatasetSplit) -> nna::Result<Vec<f64>> {
    let (rec, _) = cfg.run_once(split, 0)?;
    Ok(rec.result.avg_forgetting_per_task.iter().skip(1).map(|f| f.unwrap_or(f64::NAN)).collect())
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target
}

fn property_suites(b: &mut Board) {
    let mut failures = Vec::new();
    let mut note = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };
    note("rule oracles", run_cases(1000, rule_case(), |c| check_rule_oracle(&c)));
    note("clamp invariant", run_cases(1000, rule_case(), |c| check_clamp_invariant(&c, 5)));
    note(
        "evolve_beta",
        run_cases(1000, (1e-5..1.0f64, 1e-5..1.0f64, 0.0..5.0f64), |(a, b, c)| check_evolve_beta(a, b, c)),
    );
    note(
        "shift invariance",
        run_cases(1000, (prop::collection::vec(-50.0..50.0f64, 2..200), -100.0..100.0f64, -1.0..3.0f64), |(z, s, k)| {
            check_shift_invariance(&z, s, k)
        }),
    );
    note(
        "k monotonicity",
        run_cases(1000, (prop::collection::vec(-50.0..50.0f64, 2..200), -1.0..4.0f64, -1.0..4.0f64), |(z, a, c)| {
            check_k_monotone(&z, a, c)
        }),
    );
    note("forgetting oracle", run_cases(1000, accuracy_matrix(), |a| check_forgetting(&a)));
    note(
        "run determinism",
        run_cases(12, (any::<u64>(), 0usize..4, 0usize..3), |(seed, r, s)| {
            let sc = [Scenario::SingleTask, Scenario::TaskIncremental, Scenario::ClassIncremental][s];
            check_run_determinism(seed, Rule::ALL[r], sc)
        }),
    );
    let ok = failures.is_empty();
    let detail = if ok {
        "rule oracles (1e-9), clamp, evolve_beta, shift, k, forgetting (1e-12), determinism".to_string()
    } else {
        failures.join("; ")
    };
    b.check("property suites", ok, detail);
}

fn transfer_metrics(b: &mut Board) {
    let table = [
        (DatasetKind::Mnist, 30.69),
        (DatasetKind::FashionMnist, 7.91),
        (DatasetKind::Emnist, 27.09),
        (DatasetKind::Cifar10, 132.60),
    ];
    for (kind, want) in table {
        let name = format!("eigen dimension {} ≈ {want} ±10%", kind.name());
        let Some(dir) = dataset_dir(kind) else {
            let status = if kind == DatasetKind::Emnist { "not loaded (optional)" } else { "dataset not present" };
            b.record(&name, Status::Unavailable, status.into());
            continue;
        };
        match nna::dataio::load_dataset(kind, &dir).and_then(|d| transfer::eigen_dimension(&d.train)) {
            Ok(e) => b.check(&name, within(e.value, want, 0.10), format!("{:.2}", e.value)),
            Err(e) => b.check(&name, false, e.to_string()),
        }
    }
    let name = "MNIST self cosine (min, max) ≈ (0.073, 0.55) ±15%";
    match dataset_dir(DatasetKind::Mnist) {
        None => b.record(name, Status::Unavailable, "dataset not present".into()),
        Some(dir) => match nna::dataio::load_dataset(DatasetKind::Mnist, &dir)
            .and_then(|d| transfer::self_cosine_distance_matrix(&d.train))
        {
            Ok(c) => b.check(
                name,
                within(c.min, 0.073, 0.15) && within(c.max, 0.55, 0.15),
                format!("({:.4}, {:.4})", c.min, c.max),
            ),
            Err(e) => b.check(name, false, e.to_string()),
        },
    }
}

/// MNIST criteria that hang off the single-task and class-incremental searches.
fn mnist(b: &mut Board, out: &Path) -> nna::Result<()> {
    let names = [
        "single-task MNIST MSE ≥ 95.0% in ≤ 10 min",
        "rule ordering: |MSE − INEL| ≤ 1, both ≥ OJA + 15, OJA ≥ GEN + 20",
        "task-IL Split-MNIST MSE ≥ 99.0% over 5 seeds",
        "class-IL Split-MNIST with ST MSE config in [19, 26]%",
        "class-IL Split-MNIST INEL search (300 trials) ≥ 60%",
        "CIL-optimised INEL forgets less than ST config at every i ≥ 2",
        "ablation: threshold disabled ≤ 50%",
        "ablation: encoder bypass in [85, 93]% and below full model",
    ];
    let Some(dir) = dataset_dir(DatasetKind::Mnist) else {
        for n in names {
            b.record(n, Status::Unavailable, "dataset not present".into());
        }
        return Ok(());
    };
    let st_base = base(DatasetKind::Mnist, Scenario::SingleTask);
    let val = st_base.load_data(&dir)?;
    let full = on_test(&st_base).load_data(&dir)?;

    let st = search(&st_base, &ConfigSpace::default(), &val, 200, &out.join("mnist_st"))?;
    let best = best_per_rule(&st);
    let mut test_acc = BTreeMap::new();
    let mut mse_wall = f64::NAN;
    for (rule, cfg) in &best {
        let (acc, wall) = final_accuracy(&on_test(cfg), &full)?;
        if *rule == Rule::Mse {
            mse_wall = wall;
        }
        test_acc.insert(*rule, acc);
    }
    let get = |r: Rule| test_acc.get(&r).copied().unwrap_or(f64::NAN);
    let (mse, inel, oja, gen) = (get(Rule::Mse), get(Rule::Inel), get(Rule::Oja), get(Rule::Gen));
    b.check(names[0], mse >= 0.95 && mse_wall <= 600.0, format!("{} in {:.0}s", pct(mse), mse_wall));
    b.check(
        names[1],
        (mse - inel).abs() <= 0.01 && mse.min(inel) >= oja + 0.15 && oja >= gen + 0.20,
        format!("MSE {} INEL {} OJA {} GEN {}", pct(mse), pct(inel), pct(oja), pct(gen)),
    );

    let mse_cfg = best.get(&Rule::Mse).cloned().expect("search produced an MSE trial");
    let til = in_scenario(&mse_cfg, Scenario::TaskIncremental, 5);
    let (report, _) = til.run_all(&full, jobs())?;
    report.write_to(&out.join("task_il"), "report")?;
    b.check(
        names[2],
        report.summary.mean >= 0.99,
        format!("{} ± {}", pct(report.summary.mean), pct(report.summary.std)),
    );

    let cil_st = in_scenario(&mse_cfg, Scenario::ClassIncremental, 1);
    let (cil_st_acc, _) = final_accuracy(&cil_st, &full)?;
    b.check(names[3], (0.19..=0.26).contains(&cil_st_acc), pct(cil_st_acc));

    let cil_base = base(DatasetKind::Mnist, Scenario::ClassIncremental);
    let cil = search(&cil_base, &ConfigSpace::default().only_rule(Rule::Inel), &val, 300, &out.join("mnist_cil_inel"))?;
    let cil_best = cil.best().expect("a completed CIL trial").config.clone();
    let cil_cfg = on_test(&cil_best);
    let (cil_acc, _) = final_accuracy(&cil_cfg, &full)?;
    b.check(names[4], cil_acc >= 0.60, pct(cil_acc));

    // both in class-IL on the test split; the ST config is the best single-task INEL trial
    let inel_st = best.get(&Rule::Inel).cloned().expect("search produced an INEL trial");
    let f_cil = forgetting(&cil_cfg, &full)?;
    let f_st = forgetting(&in_scenario(&inel_st, Scenario::ClassIncremental, 1), &full)?;
    let lower = f_cil.len() == f_st.len() && f_cil.iter().zip(&f_st).all(|(a, b)| a < b);
    b.check(names[5], lower, format!("CIL {:.3?} vs ST {:.3?}", f_cil, f_st));

    let rows = ablate(&on_test(&inel_st), &full, &[Toggle::NoThreshold, Toggle::BypassEncoder], jobs())?;
    let (full_acc, no_thr, bypass) = (rows[0].mean, rows[1].mean, rows[2].mean);
    b.check(names[6], no_thr <= 0.50, format!("{} (full {})", pct(no_thr), pct(full_acc)));
    b.check(
        names[7],
        (0.85..=0.93).contains(&bypass) && bypass < full_acc,
        format!("{} (full {})", pct(bypass), pct(full_acc)),
    );
    Ok(())
}

fn fashion(b: &mut Board, out: &Path) -> nna::Result<()> {
    let name = "single-task F-MNIST MSE ≥ 83.0%";
    let Some(dir) = dataset_dir(DatasetKind::FashionMnist) else {
        b.record(name, Status::Unavailable, "dataset not present".into());
        return Ok(());
    };
    let st_base = base(DatasetKind::FashionMnist, Scenario::SingleTask);
    let val = st_base.load_data(&dir)?;
    let full = on_test(&st_base).load_data(&dir)?;
    let r = search(&st_base, &ConfigSpace::default().only_rule(Rule::Mse), &val, 48, &out.join("fmnist_st_mse"))?;
    let best = r.best().expect("a completed trial").config.clone();
    let (acc, _) = final_accuracy(&on_test(&best), &full)?;
    b.check(name, acc >= 0.83, pct(acc));
    Ok(())
}

#[test]
fn acceptance() {
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let mut b = Board::new(&out);
    let t = Instant::now();

    property_suites(&mut b);
    transfer_metrics(&mut b);
    if let Err(e) = fashion(&mut b, &out) {
        b.check("F-MNIST criteria", false, e.to_string());
    }
    if let Err(e) = mnist(&mut b, &out) {
        b.check("MNIST criteria", false, e.to_string());
    }

    let failed: Vec<&str> = b.rows.iter().filter(|r| r.1 == Status::Fail).map(|r| r.0.as_str()).collect();
    let passed = b.rows.iter().filter(|r| r.1 == Status::Pass).count();
    let missing = b.rows.iter().filter(|r| r.1 == Status::Unavailable).count();
    let summary = format!(
        "acceptance: {passed} passed, {} failed, {missing} unavailable in {:.0}s\n",
        failed.len(),
        t.elapsed().as_secs_f64()
    );
    let _ = std::io::stdout().write_all(summary.as_bytes());
    let _ = b.log.write_all(summary.as_bytes());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
