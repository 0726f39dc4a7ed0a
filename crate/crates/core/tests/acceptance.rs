//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tplab::interp::{run_suite, HookConfig};
use tplab::lang::{enumerate_methods, parse_source, Type};
use tplab::learn::eval::{cv_splits, EvalReport};
use tplab::learn::forest::train_forest;
use tplab::learn::{smote, CvConfig, Dataset, ForestConfig, RowOrigin};
use tplab::metrics::Granularity;
use tplab::mutation::{
    evaluate_matrix, generate_mutants, EvalOptions, MatrixMode, Outcome, PairVerdict, Replacement, Verdict,
};
use tplab::pipeline::{analyze_corpus, cmd_correlate, cmd_predict, predict, time_corpus, RunOptions, Scenario};
use tplab::stats::{correlate_rows, kendall_tau_b, spearman, CorrelationMethod, EXACT_MAX_N};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn sequential() -> RunOptions {
    RunOptions { step_budget: tplab::interp::DEFAULT_STEP_BUDGET, seed: 42, workers: Some(1) }
}

fn stack_distance_bfs() -> Check {
    let mut pairs = 0;
    for p in common::corpus().projects {
        let log = run_suite(&p.program, HookConfig::default());
        let bfs = common::bfs_distances(&p.program);
        ensure(log.traces.len() == bfs.len(), format!("{}: pair sets differ", p.manifest.project_id))?;
        for (key, r) in &log.traces {
            ensure(
                bfs.get(key) == Some(&r.min_stack_distance),
                format!("{}: {} / {} recorded {} vs bfs {:?}", p.manifest.project_id, r.method_id, r.test_id, r.min_stack_distance, bfs.get(key)),
            )?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs match"))
}

fn figure1() -> Check {
    let p = common::corpus().projects.into_iter().find(|p| p.manifest.project_id == "figure1").unwrap();
    let log = run_suite(&p.program, HookConfig::default());
    let d = log.method_distance(&p.program, "M8").map_err(|e| e.to_string())?;
    ensure(d == 3, format!("d(M8) = {d}"))?;
    Ok("d(M8) = 3".into())
}

fn mutant_cardinality() -> Check {
    let cases: [(Type, &str, Vec<Replacement>); 7] = [
        (Type::Void, "let x = 1;", vec![Replacement::EmptyBody]),
        (Type::Bool, "return 1 < 2;", vec![Replacement::ReturnBool(false), Replacement::ReturnBool(true)]),
        (Type::Int, "return 7;", vec![Replacement::ReturnInt(0), Replacement::ReturnInt(1)]),
        (Type::Float, "return 2.5;", vec![Replacement::ReturnFloat(0.0), Replacement::ReturnFloat(0.1)]),
        (Type::Str, "return \"s\";", vec![Replacement::ReturnStr(String::new()), Replacement::ReturnStr("A".into())]),
        (Type::Arr, "return [1];", vec![Replacement::ReturnEmptyArr]),
        (Type::Ref, "return box(1);", vec![Replacement::ReturnNull]),
    ];
    for (ty, body, expected) in cases {
        let program = parse_source("t", &format!("fn f() -> {ty} {{ {body} }}")).map_err(|e| e.to_string())?;
        let info = &enumerate_methods(&program)[0];
        let got: Vec<Replacement> =
            generate_mutants(info).map_err(|e| e.to_string())?.into_iter().map(|m| m.replacement).collect();
        ensure(got == expected, format!("{ty}: {got:?}"))?;
    }
    let mut counts = BTreeMap::new();
    for p in common::corpus().projects {
        for m in tplab::mutation::program_mutants(&p.program) {
            *counts.entry(p.program.functions[m.method].return_type).or_insert(0usize) += 1;
        }
        for info in enumerate_methods(&p.program) {
            if tplab::lang::mutation_eligible(&info) {
                let n = generate_mutants(&info).map_err(|e| e.to_string())?.len();
                let want = if matches!(info.return_type, Type::Void | Type::Arr | Type::Ref) { 1 } else { 2 };
                ensure(n == want, format!("{}: {n} mutants", info.method_id))?;
            }
        }
    }
    Ok(format!("7 types exact; corpus mutants by type {counts:?}"))
}

fn pseudo_tested_oracle() -> Check {
    let (mut methods, mut pairs) = (0, 0);
    for p in common::corpus().projects {
        let id = &p.manifest.project_id;
        let log = run_suite(&p.program, HookConfig::default());
        let matrix = evaluate_matrix(&p.program, &log, MatrixMode::Full, EvalOptions::default()).map_err(|e| e.to_string())?;
        let verdicts: BTreeMap<usize, _> =
            matrix.classify_methods().map_err(|e| e.to_string())?.into_iter().map(|v| (v.method, v)).collect();
        for (m, kills) in common::body_replacement_kills(&p).into_iter().enumerate() {
            let name = &p.program.functions[m].name;
            match (kills, verdicts.get(&m)) {
                (Some(kills), Some(v)) if log.is_covered(m) => {
                    let expected = if kills.is_empty() { Verdict::IneffectivelyTested } else { Verdict::EffectivelyTested };
                    ensure(v.verdict == expected, format!("{id}::{name}: {:?} vs oracle {expected:?}", v.verdict))?;
                    for t in log.covering_tests(m) {
                        let want = if kills.contains(&t) { PairVerdict::Effective } else { PairVerdict::Ineffective };
                        ensure(v.pairs.get(&t) == Some(&want), format!("{id}::{name} pair {t}"))?;
                        pairs += 1;
                    }
                    let all_ineffective = v.pairs.values().all(|x| *x == PairVerdict::Ineffective);
                    ensure(all_ineffective == (v.verdict == Verdict::IneffectivelyTested), format!("{id}::{name}: conjunction"))?;
                    methods += 1;
                }
                (_, None) if !log.is_covered(m) || !tplab::lang::mutation_eligible(&enumerate_methods(&p.program)[m]) => {}
                (_, v) => return Err(format!("{id}::{name}: unexpected verdict {v:?}")),
            }
        }
    }
    Ok(format!("{methods} methods and {pairs} pairs match the re-run oracle"))
}

fn mode_agreement() -> Check {
    let (mut full_rows, mut early_rows) = (0, 0);
    for p in common::corpus().projects {
        let id = &p.manifest.project_id;
        let log = run_suite(&p.program, HookConfig::default());
        let full = evaluate_matrix(&p.program, &log, MatrixMode::Full, EvalOptions::default()).map_err(|e| e.to_string())?;
        let early =
            evaluate_matrix(&p.program, &log, MatrixMode::EarlyAbort, EvalOptions::default()).map_err(|e| e.to_string())?;
        let (fs, es) = (full.mutant_status(), early.mutant_status());
        ensure(fs == es, format!("{id}: mutant status differs"))?;
        let mut early_verdict: BTreeMap<usize, bool> = BTreeMap::new();
        for m in &early.mutants {
            *early_verdict.entry(m.method).or_insert(true) &= es[&m.mutant_id] == Outcome::Survived;
        }
        for v in full.classify_methods().map_err(|e| e.to_string())? {
            let ineffective = v.verdict == Verdict::IneffectivelyTested;
            ensure(early_verdict.get(&v.method) == Some(&ineffective), format!("{id}::{}: verdict differs", v.method_id))?;
        }
        ensure(full.rows.len() >= early.rows.len(), format!("{id}: full has fewer rows"))?;
        full_rows += full.rows.len();
        early_rows += early.rows.len();
    }
    Ok(format!("statuses and verdicts agree; rows full {full_rows} >= early-abort {early_rows}"))
}

fn correlation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst, mut worst_p, mut exact_cases, mut vectors) = (0.0f64, 0.0f64, 0, 0);
    while vectors < 200 {
        let n = if vectors % 2 == 0 { rng.gen_range(3..=EXACT_MAX_N) } else { rng.gen_range(9..60) };
        let levels = rng.gen_range(2..12);
        let x: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..levels))).collect();
        let y: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..levels))).collect();
        let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
        if constant(&x) || constant(&y) {
            continue;
        }
        vectors += 1;
        let s = spearman(&x, &y).map_err(|e| e.to_string())?;
        let k = kendall_tau_b(&x, &y).map_err(|e| e.to_string())?;
        worst = worst.max((s.coefficient - common::spearman_oracle(&x, &y)).abs());
        worst = worst.max((k.coefficient - common::kendall_oracle(&x, &y)).abs());
        if n <= EXACT_MAX_N {
            exact_cases += 1;
            worst_p = worst_p.max((s.p_value - common::exact_p(&x, &y, common::spearman_oracle)).abs());
            worst_p = worst_p.max((k.p_value - common::exact_p(&x, &y, common::kendall_oracle)).abs());
        }
    }
    ensure(worst <= 1e-9, format!("coefficient error {worst:e}"))?;
    ensure(worst_p <= 0.02, format!("exact p error {worst_p}"))?;

    let monotone = common::corpus().projects.into_iter().find(|p| p.manifest.project_id == "monotone").unwrap();
    let a = tplab::pipeline::analyze_project(&monotone.program, &sequential()).map_err(|e| e.to_string())?;
    let rows = correlate_rows("monotone", &a.method_rows);
    let get = |m| rows.iter().find(|r| r.method == m).unwrap().result.clone().map_err(|e| e.to_string());
    let (s, k) = (get(CorrelationMethod::Spearman)?, get(CorrelationMethod::KendallTauB)?);
    ensure(s.coefficient >= 0.5 && s.p_value < 0.05, format!("monotone spearman {} p {}", s.coefficient, s.p_value))?;
    Ok(format!(
        "200 vectors max error {worst:.1e}; {exact_cases} exact p max error {worst_p:.4}; monotone spearman {:.3} (p {:.1e}), kendall {:.3}",
        s.coefficient, s.p_value, k.coefficient
    ))
}

/// Two informative features plus noise; class given by a linear boundary.
fn separable(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let ineffective = i % 4 == 0;
        let (a, b): (f64, f64) = (rng.gen(), rng.gen());
        let shift = if ineffective { 2.0 } else { 0.0 };
        rows.push(vec![a + shift, b + shift, rng.gen()]);
        labels.push(u8::from(ineffective));
    }
    Dataset::from_rows(rows, labels).unwrap()
}

/// Overlapping classes so the tree grows deep.
fn noisy(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n {
        let x: Vec<f64> = (0..4).map(|c| if c == 3 { f64::from(rng.gen_range(0..3)) } else { rng.gen() }).collect();
        let p = (x[0] + 0.5 * x[1]) / 1.5;
        labels.push(u8::from(rng.gen::<f64>() < p));
        rows.push(x);
    }
    Dataset::from_rows(rows, labels).unwrap()
}

fn learner() -> Check {
    let config = CvConfig { folds: 10, repeats: 1, ..CvConfig::default() };
    let report = tplab::learn::cross_validate(&separable(200, 1), &config, 3).map_err(|e| e.to_string())?;
    let f = report.weighted.f_score;
    ensure(f >= 0.95, format!("separable CV weighted F {f}"))?;

    let mut trees = 0;
    for (n, seed) in [(20, 1), (75, 2), (150, 3), (200, 4)] {
        let data = noisy(n, seed);
        let model = train_forest(&data, &ForestConfig::single_tree(), 0).map_err(|e| e.to_string())?;
        let rows: Vec<usize> = (0..data.len()).collect();
        let oracle = common::greedy_cart(&data, &rows);
        ensure(common::to_cart(&model.trees[0]) == oracle, format!("{n} rows: tree differs from oracle"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.5..3.0)).collect();
            let got = model.predict_row(&x).map_err(|e| e.to_string())?.class;
            ensure(got == common::cart_predict(&oracle, &x, model.minority_class), format!("{n} rows: prediction differs"))?;
        }
        trees += 1;
    }

    let corpus = common::corpus();
    let options = RunOptions { workers: None, ..sequential() };
    let analyses = analyze_corpus(&corpus, &options).map_err(|e| e.to_string())?;
    let scenarios = Scenario::grid(None, None, None);
    let mut docs = Vec::new();
    for workers in [1, 4, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        let (doc, importance) =
            pool.install(|| predict(&analyses, &scenarios, &corpus.settings, 42)).map_err(|e| e.to_string())?;
        docs.push((serde_json::to_string_pretty(&doc).unwrap(), format!("{importance:?}")));
    }
    ensure(docs[0] == docs[1] && docs[1] == docs[2], "eval report differs across runs or worker counts")?;
    Ok(format!("separable CV F {f:.3}; {trees} single trees equal the CART oracle; report identical for 1/4/4 workers"))
}

fn smote_contract() -> Check {
    let mut checked = 0;
    for (minority, majority, ratio) in [(10, 40, 1.0), (3, 50, 0.5), (7, 30, 1.0), (12, 13, 1.0)] {
        let mut rng = ChaCha8Rng::seed_from_u64(minority as u64);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..minority + majority {
            let one_hot = i % 3;
            let mut row: Vec<f64> = (0..4).map(|_| rng.gen_range(-5.0..5.0)).collect();
            row.extend((0..3).map(|c| f64::from(u8::from(c == one_hot))));
            rows.push(row);
            labels.push(u8::from(i < minority));
        }
        let mut data = Dataset::from_rows(rows, labels).unwrap();
        data.numeric_columns = 4;
        let out = smote(&data, 5, ratio, 9).map_err(|e| e.to_string())?;
        let target = tplab::learn::smote::smote_target(majority, ratio).max(minority);
        ensure(out.class_counts()[1] == target, format!("minority {} vs target {target}", out.class_counts()[1]))?;
        for (row, origin) in out.rows.iter().zip(&out.origins) {
            let RowOrigin::Synthetic { seed, neighbor } = *origin else { continue };
            let (a, b) = (&data.rows[seed], &data.rows[neighbor]);
            let mut u = None;
            for c in 0..4 {
                ensure(row[c] >= a[c].min(b[c]) && row[c] <= a[c].max(b[c]), "value outside parent range")?;
                if a[c] != b[c] {
                    let uc = (row[c] - a[c]) / (b[c] - a[c]);
                    ensure(u.map_or(true, |u: f64| (u - uc).abs() < 1e-9), "not a single convex combination")?;
                    u.get_or_insert(uc);
                }
            }
            ensure(row[4..] == a[4..], "one-hot columns not copied from seed")?;
            checked += 1;
        }
    }

    let analyses = analyze_corpus(&common::corpus(), &sequential()).map_err(|e| e.to_string())?;
    let mut pooled = Dataset::default();
    for a in &analyses {
        let d = Dataset::from_features(&a.project_id, a.rows(Granularity::Pair));
        if pooled.rows.is_empty() {
            pooled = d;
        } else {
            pooled.append(&d).map_err(|e| e.to_string())?;
        }
    }
    let config = CvConfig { smote: true, ..CvConfig::default() };
    let mut splits = 0;
    for s in cv_splits(&pooled, &config, 42).into_iter().flatten() {
        ensure(s.test.origins.iter().all(|o| !o.is_synthetic()), "synthetic row in a test fold")?;
        splits += 1;
    }
    Ok(format!("{checked} synthetic rows verified; {splits} oversampled folds with clean test parts"))
}

fn metric_identity(reports: &[&EvalReport]) -> Check {
    for r in reports {
        let (p, rc, f) = common::weighted_from_counts(r.confusion_matrix.0);
        let w = &r.weighted;
        ensure(
            w.precision == p && w.recall == rc && w.f_score == f,
            format!("{}: {:?} vs ({p}, {rc}, {f})", r.project_id, w),
        )?;
    }
    Ok(format!("{} reports exact", reports.len()))
}

fn cost_ordering() -> Check {
    let t = time_corpus(&common::corpus(), &sequential(), 20).map_err(|e| e.to_string())?;
    let stages = t.stages();
    for w in stages.windows(2) {
        let (a, b) = (w[0].1.as_secs_f64(), w[1].1.as_secs_f64());
        ensure(a <= b * 1.1, format!("{} {a:.4}s > {} {b:.4}s", w[0].0, w[1].0))?;
    }
    Ok(stages.iter().map(|(s, d)| format!("{s} {:.1}ms", d.as_secs_f64() * 1e3)).collect::<Vec<_>>().join(" <= "))
}

fn main() {
    let mut results: Vec<(&str, Check)> = vec![
        ("stack distance equals BFS oracle", stack_distance_bfs()),
        ("figure1 d(M8) = 3", figure1()),
        ("mutant cardinality per return type", mutant_cardinality()),
        ("pseudo-tested verdicts equal re-run oracle", pseudo_tested_oracle()),
        ("early-abort and full modes agree", mode_agreement()),
        ("correlation oracles and monotone corpus", correlation()),
        ("learner sanity and determinism", learner()),
        ("SMOTE contract", smote_contract()),
    ];

    let tmp = tempfile::tempdir().expect("temp dir");
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
    let start = Instant::now();
    let end_to_end = pool.install(|| -> Result<tplab::pipeline::EvalDocument, String> {
        let corpus = common::corpus();
        let analyses = analyze_corpus(&corpus, &sequential()).map_err(|e| e.to_string())?;
        cmd_correlate(&analyses, tmp.path()).map_err(|e| e.to_string())?;
        let scenarios = Scenario::grid(None, None, None);
        cmd_predict(&analyses, &scenarios, &corpus.settings, 42, tmp.path()).map_err(|e| e.to_string())
    });
    let elapsed = start.elapsed().as_secs_f64();

    results.push((
        "metric identity on every report",
        end_to_end.as_ref().map_err(Clone::clone).and_then(|doc| {
            let reports: Vec<&EvalReport> =
                doc.scenarios.iter().flat_map(|s| s.projects.iter().chain(std::iter::once(&s.pooled))).collect();
            metric_identity(&reports)
        }),
    ));
    results.push(("cost ordering", cost_ordering()));
    results.push((
        "end-to-end under 60 s single-threaded",
        end_to_end.and_then(|doc| {
            ensure(doc.scenarios.len() == 8, format!("{} scenarios", doc.scenarios.len()))?;
            ensure(elapsed < 60.0, format!("{elapsed:.1}s"))?;
            Ok(format!("{elapsed:.2}s for run, full matrix, correlate and 8 scenarios"))
        }),
    ));

    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
