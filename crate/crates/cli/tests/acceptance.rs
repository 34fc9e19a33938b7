//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! fails. Runs without the libtest harness so the lines print in order.

mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use support::gen::{random_table, Expr, GenTable, ProgramGen};
use support::{ngram, oracle};
use tdcomp_core::decompose::{
    augment_antonym, augment_dataset, build_pseudo_dataset, classify_skeleton, instantiate_template,
};
use tdcomp_core::eval::tokenize;
use tdcomp_core::fusion::{init_model, loss, loss_and_gradients, Bag};
use tdcomp_core::pipeline::{read_json, Layout, Metrics};
use tdcomp_core::program::{skeleton, type_check, ExecError, Type};
use tdcomp_core::solve::answer_subquestion;
use tdcomp_core::synthesis::{
    featurize, hinge, train_selector, Features, SelectorConfig, SelectorExample, StatementContext,
};
use tdcomp_core::table::load_table;
use tdcomp_core::{
    bleu4, execute, generate_synthetic_corpus, parse_program, print_program, Coverage, DecompositionType,
    FusionInput, PipelineConfig, Program, RuntimeValue, Statement, SyntheticConfig, Table,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Outcome + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core_table(g: &GenTable) -> Table {
    Table::from_raw("gen", None, &g.header(), &g.raw_rows()).expect("generated tables are well formed")
}

/// A random program of one of the three result shapes.
fn random_program(g: &GenTable, rng: &mut ChaCha8Rng) -> Expr {
    let depth = rng.random_range(1..=4);
    let roll = rng.random_range(0..10);
    let mut pg = ProgramGen { t: g, rng };
    match roll {
        0..=5 => pg.boolean(depth),
        6 | 7 => pg.number(depth),
        _ => pg.rows(depth),
    }
}

fn agrees(core: &Result<RuntimeValue, ExecError>, reference: &Result<oracle::Val, oracle::Fault>) -> bool {
    use oracle::{Fault, Val};
    match (core, reference) {
        (Ok(RuntimeValue::Bool(a)), Ok(Val::Bool(b))) => a == b,
        (Ok(RuntimeValue::Number(a)), Ok(Val::Num(b))) => a.to_bits() == b.to_bits() || a == b,
        (Ok(RuntimeValue::Text(a)), Ok(Val::Text(b))) => a == b,
        (Ok(RuntimeValue::RowSet(a)), Ok(Val::Rows(b))) => a == b,
        (Err(ExecError::HopAmbiguous { .. }), Err(Fault::Ambiguous)) => true,
        (Err(ExecError::EmptyAggregate { .. }), Err(Fault::Empty)) => true,
        (Err(ExecError::MissingCell { .. }), Err(Fault::Missing)) => true,
        _ => false,
    }
}

fn executor_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut errors = 0;
    for i in 0..1000 {
        let g = random_table(&mut rng);
        let e = random_program(&g, &mut rng);
        let t = core_table(&g);
        let expected = oracle::eval(&e, &g);
        errors += usize::from(expected.is_err());
        let got = parse_program(&e.text()).map_err(|err| err.to_string()).map(|p| execute(&p, &t));
        let ok = matches!(&got, Ok(r) if agrees(r, &expected));
        if !ok && mismatches.len() < 3 {
            mismatches.push(format!("#{i} {}: core {got:?}, reference {expected:?}", e.text()));
        } else if !ok {
            mismatches.push(String::new());
        }
    }
    let elapsed = start.elapsed();
    ensure(mismatches.is_empty(), || {
        format!("{} mismatches; first: {}", mismatches.len(), mismatches[..3.min(mismatches.len())].join(" | "))
    })?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 programs, 0 mismatches ({errors} runtime errors agreed), {elapsed:.2?}"))
}

fn parser_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut failures = Vec::new();
    for _ in 0..1000 {
        let g = random_table(&mut rng);
        let e = random_program(&g, &mut rng);
        let text = e.text();
        let spaced = e.spaced_text(&mut rng);
        let ok = match (parse_program(&text), parse_program(&spaced)) {
            (Ok(p), Ok(q)) => {
                let printed = print_program(&p);
                printed == text && parse_program(&printed).as_ref() == Ok(&p) && p == q
            }
            _ => false,
        };
        if !ok {
            failures.push(spaced);
        }
    }
    ensure(failures.is_empty(), || {
        format!("{} failures; first: {:?}", failures.len(), failures.first())
    })?;
    Ok("1000 programs (canonical and spaced), 0 failures".into())
}

fn venues_example() -> Outcome {
    let path = support::repo_root().join("data/mini/tables/venues.csv");
    let t = load_table(&path, "venues").map_err(|e| e.to_string())?;
    let src = "eq{max{all_rows;attendance};hop{filter_eq{all_rows;venue;firhill};attendance}}";
    let z = parse_program(src).map_err(|e| e.to_string())?;
    let ty = type_check(&z, &t).map_err(|e| e.to_string())?;
    ensure(ty == Type::Bool, || format!("type {ty}"))?;
    let v = execute(&z, &t).map_err(|e| e.to_string())?;
    ensure(v == RuntimeValue::Bool(true), || format!("evaluates to {v:?}"))?;
    let c = classify_skeleton(&skeleton(&z));
    ensure(c == DecompositionType::Superlative, || format!("classified {c}"))?;
    let s = Statement::new("venues-s", "venues", "firhill had the highest attendance", Some(true));
    let subs = instantiate_template(&s, &z, c).map_err(|e| e.to_string())?;
    ensure(subs.len() == 2, || format!("{} sub-questions", subs.len()))?;
    let answers: Vec<String> = subs
        .iter()
        .map(|q| answer_subquestion(q, &t).unwrap_or_else(|e| format!("error: {e}")))
        .collect();
    ensure(answers.iter().all(|a| a == "9500"), || format!("answers {answers:?}"))?;
    let texts: Vec<&str> = subs.iter().map(|q| q.text.as_str()).collect();
    Ok(format!("Bool, true, superlative, {texts:?} -> {answers:?}"))
}

fn contains_op(e: &Expr, name: &str) -> bool {
    match e {
        Expr::Op(n, args) => *n == name || args.iter().any(|a| contains_op(a, name)),
        _ => false,
    }
}

/// Statements whose label-consistent candidates all use `only` and whose
/// inconsistent ones never do.
fn separable_corpus(rng: &mut ChaCha8Rng) -> Vec<SelectorExample> {
    let mut out = Vec::new();
    while out.len() < 40 {
        let g = random_table(rng);
        let t = core_table(&g);
        let label = rng.random_bool(0.5);
        let s = Statement::new("sep", "gen", "there is only one red row and it has 3", Some(label));
        let ctx = StatementContext::new(&s, &t);
        let (want_pos, want_neg) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for _ in 0..500 {
            if pos.len() == want_pos && neg.len() == want_neg {
                break;
            }
            let depth = rng.random_range(1..=3);
            let e = ProgramGen { t: &g, rng: &mut *rng }.boolean(depth);
            let side = if contains_op(&e, "only") { &mut pos } else { &mut neg };
            let want = if contains_op(&e, "only") { want_pos } else { want_neg };
            if side.len() < want {
                side.push(featurize(&ctx, &parse_program(&e.text()).expect("generated text parses")));
            }
        }
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let mut candidates: Vec<(Features, bool)> = pos.into_iter().map(|f| (f, label)).collect();
        candidates.extend(neg.into_iter().map(|f| (f, !label)));
        out.push(SelectorExample { label, candidates });
    }
    out
}

/// Brute force: some feature is active on every consistent candidate and on
/// no inconsistent one.
fn separating_feature(data: &[SelectorExample]) -> Option<String> {
    let keys: BTreeSet<&String> = data.iter().flat_map(|ex| ex.candidates.iter().flat_map(|(f, _)| f.keys())).collect();
    keys.into_iter()
        .find(|k| {
            data.iter().all(|ex| {
                ex.candidates
                    .iter()
                    .all(|(f, e)| (f.get(*k).copied().unwrap_or(0.0) > 0.0) == (*e == ex.label))
            })
        })
        .cloned()
}

fn hinge_cases() -> Outcome {
    let a = hinge(0.9, 0.3, 0.2);
    ensure(a == 0.0, || format!("hinge(0.9,0.3,0.2) = {a}"))?;
    let b = hinge(0.7, 0.8, 0.2);
    ensure((b - 0.3).abs() < 1e-12, || format!("hinge(0.7,0.8,0.2) = {b}"))?;
    for s in [0.0, 0.25, 0.5, 1.0] {
        let g = hinge(s, s, 0.2);
        ensure(g == 0.2, || format!("hinge({s},{s},0.2) = {g}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let data = separable_corpus(&mut rng);
    let key = separating_feature(&data).ok_or("constructed corpus is not separable")?;
    let cfg = SelectorConfig {
        epochs: 50,
        seed: 4,
        ..SelectorConfig::default()
    };
    let (_, trace) = train_selector(&data, &cfg).map_err(|e| e.to_string())?;
    let last = trace.last().copied().unwrap_or(f64::NAN);
    ensure(last == 0.0 && trace.len() <= 50, || format!("loss {last} after {} epochs", trace.len()))?;
    Ok(format!("0, {b:.15}, gamma; corpus separated by {key}, loss 0 after {} epochs", trace.len()))
}

fn augmentation() -> Outcome {
    let corpus = generate_synthetic_corpus(
        &SyntheticConfig {
            n: 1200,
            rows: 6,
            cols: 4,
            seed: 5,
            mixture: Default::default(),
            per_table: 5,
        },
        [1.0, 0.0, 0.0],
    )
    .map_err(|e| e.to_string())?;
    let tables: BTreeMap<String, Table> = corpus.tables.iter().map(|t| (t.id.clone(), t.clone())).collect();
    let triples: Vec<(&Table, &Statement, &Program)> = corpus
        .statements
        .iter()
        .zip(&corpus.gold)
        .map(|(s, g)| (&tables[&s.table_id], s, &g.program))
        .collect();
    let (pseudo, _) = build_pseudo_dataset(&triples, &BTreeSet::new());
    ensure(pseudo.len() >= 500, || format!("only {} pseudo samples", pseudo.len()))?;
    let base = &pseudo[..500];
    let augmented = augment_dataset(base, &tables, 1, 8);
    let mut bad_labels = 0;
    for s in &augmented {
        if execute(&s.program, &tables[&s.table_id]) != Ok(RuntimeValue::Bool(s.label)) {
            bad_labels += 1;
        }
    }
    let (mut eligible, mut restored) = (0, 0);
    for s in base {
        let t = &tables[&s.table_id];
        if let Some(once) = augment_antonym(s, t) {
            eligible += 1;
            let back = augment_antonym(&once, t);
            if back.is_some_and(|b| b.statement == s.statement && b.program == s.program) {
                restored += 1;
            }
        }
    }
    ensure(bad_labels == 0, || format!("{bad_labels} of {} labels disagree with execution", augmented.len()))?;
    ensure(eligible > 0 && restored == eligible, || format!("antonym restored {restored} of {eligible}"))?;
    Ok(format!(
        "{} samples, all labels match execution; antonym twice restores {restored}/{eligible}",
        augmented.len()
    ))
}

fn random_words(rng: &mut ChaCha8Rng, n: usize) -> String {
    const VOCAB: &[&str] = &["firhill", "attendance", "max", "9500", "true", "false", "row", "venue", "less", "is"];
    (0..n).map(|_| VOCAB[rng.random_range(0..VOCAB.len())]).collect::<Vec<_>>().join(" ")
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_err(numeric: &[f64], analytic: &[f64]) -> f64 {
    let diff: Vec<f64> = numeric.iter().zip(analytic).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(numeric).max(norm(analytic)).max(1e-12)
}

fn gradient_check() -> Outcome {
    const H: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut worst = [0.0f64; 3];
    for k in 0..20 {
        let batch: Vec<(FusionInput, bool)> = (0..rng.random_range(1..=4))
            .map(|_| {
                let n = rng.random_range(2..8);
                let st = Bag::new(&random_words(&mut rng, n));
                let evidence = (0..rng.random_range(1..=3))
                    .map(|_| {
                        let n = rng.random_range(1..5);
                        Bag::new(&random_words(&mut rng, n))
                    })
                    .collect();
                (FusionInput { st, evidence }, rng.random_bool(0.5))
            })
            .collect();
        let mut m = init_model(5, batch.iter().map(|(x, _)| x), k, 0.5);
        for w in m.w.iter_mut() {
            *w = rng.random_range(-1.0..1.0);
        }
        m.b = rng.random_range(-0.5..0.5);
        let (_, g) = loss_and_gradients(&m, &batch);

        let central = |m: &mut tdcomp_core::FusionModel, get: &dyn Fn(&mut tdcomp_core::FusionModel) -> &mut f64| {
            let orig = *get(m);
            *get(m) = orig + H;
            let up = loss(m, &batch);
            *get(m) = orig - H;
            let down = loss(m, &batch);
            *get(m) = orig;
            (up - down) / (2.0 * H)
        };
        let num_w: Vec<f64> = (0..m.w.len()).map(|i| central(&mut m, &move |m| &mut m.w[i])).collect();
        let num_b = central(&mut m, &|m| &mut m.b);
        let rows: Vec<u32> = m.encoder.keys().copied().collect();
        let (mut num_e, mut ana_e) = (Vec::new(), Vec::new());
        for r in rows {
            for j in 0..m.d {
                num_e.push(central(&mut m, &move |m| &mut m.encoder.get_mut(&r).expect("row")[j]));
                ana_e.push(g.encoder.get(&r).map_or(0.0, |v| v[j]));
            }
        }
        let errs = [rel_err(&num_w, &g.w), rel_err(&[num_b], &[g.b]), rel_err(&num_e, &ana_e)];
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
    }
    ensure(worst.iter().all(|e| *e < 1e-4), || format!("worst relative errors W/b/encoder {worst:?}"))?;
    Ok(format!("20 batches, worst relative error W {:.1e}, b {:.1e}, encoder {:.1e}", worst[0], worst[1], worst[2]))
}

fn synthetic_config(out: &Path) -> Result<PipelineConfig, String> {
    let path = support::repo_root().join("configs/synthetic.json");
    let mut cfg = PipelineConfig::load(&path).map_err(|e| e.to_string())?;
    cfg.output_dir = out.to_path_buf();
    Ok(cfg)
}

fn ablation(metrics: &mut Option<Metrics>) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = synthetic_config(dir.path())?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let start = Instant::now();
    pool.install(|| tdcomp_core::run_all(&cfg)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let m: Metrics = read_json(&Layout { root: cfg.output() }.metrics()).map_err(|e| e.to_string())?;
    let gain = m.ablation_gain_points;
    let test = m.no_evidence.test.map(|_| ());
    *metrics = Some(m.clone());
    let n = m.statements;
    ensure(n == 2000, || format!("{n} statements"))?;
    let held_out = m.dataset.get(&tdcomp_core::table::Split::Test).map_or(0, |s| s.sentences);
    ensure(held_out == 500, || format!("held-out split has {held_out} statements"))?;
    ensure(test.is_some(), || "no test accuracy".into())?;
    let gain = gain.ok_or("no ablation gain")?;
    let (with, without) = (m.with_evidence.test.unwrap_or(0.0), m.no_evidence.test.unwrap_or(0.0));
    ensure(gain >= 3.0, || format!("gain {gain:.2} points ({:.1} vs {:.1})", 100.0 * with, 100.0 * without))?;
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "test accuracy {:.1} vs {:.1}, gain {gain:.2} points, {elapsed:.1?} on one thread",
        100.0 * with,
        100.0 * without
    ))
}

fn bleu_cases() -> Outcome {
    let corpus = ["what is the maximum attendance ?", "how many rows have venue equal to firhill ?"];
    fn toks<'a>(v: &[&'a str]) -> Vec<Vec<&'a str>> {
        v.iter().map(|s| tokenize(s)).collect()
    }
    let same = bleu4(&toks(&corpus), &toks(&corpus)).map_err(|e| e.to_string())?;
    ensure(same == 1.0, || format!("identical corpora {same}"))?;
    let disjoint = bleu4(&toks(&["a b c d"]), &toks(&["e f g h"])).map_err(|e| e.to_string())?;
    ensure(disjoint == 0.0, || format!("disjoint corpora {disjoint}"))?;
    let off = bleu4(&toks(&["a b c d e"]), &toks(&["a b c d f"])).map_err(|e| e.to_string())?;
    let expected = 0.668740304976422;
    ensure((off - expected).abs() < 1e-9, || format!("one word off {off}"))?;
    let reference = ngram::corpus_bleu4(&["a b c d e"], &["a b c d f"]);
    ensure((off - reference).abs() < 1e-12, || format!("reference {reference}, core {off}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let words = ["a", "b", "c", "d", "the", "of"];
    let sentence = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(3..9);
        (0..n).map(|_| words[rng.random_range(0..words.len())]).collect::<Vec<_>>().join(" ")
    };
    for _ in 0..200 {
        let k = rng.random_range(1..4);
        let hyps: Vec<String> = (0..k).map(|_| sentence(&mut rng)).collect();
        let refs: Vec<String> = (0..k).map(|_| sentence(&mut rng)).collect();
        let h: Vec<&str> = hyps.iter().map(String::as_str).collect();
        let r: Vec<&str> = refs.iter().map(String::as_str).collect();
        let core = bleu4(&toks(&h), &toks(&r)).map_err(|e| e.to_string())?;
        let brute = ngram::corpus_bleu4(&h, &r);
        ensure((core - brute).abs() < 1e-12, || format!("{h:?} vs {r:?}: core {core}, reference {brute}"))?;
    }
    Ok(format!("1.0, 0.0, {off:.15}; 200 random corpora agree with the reference"))
}

fn coverage_round_trip(metrics: &Option<Metrics>) -> Outcome {
    let cov = metrics.as_ref().ok_or("pipeline run unavailable")?.coverage;
    let json = serde_json::to_string(&cov).map_err(|e| e.to_string())?;
    let value: serde_json::Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    let keys: Vec<&str> = value.as_object().ok_or("not an object")?.keys().map(String::as_str).collect();
    let mut want = Coverage::COLUMNS.to_vec();
    want.sort_unstable();
    ensure(keys == want, || format!("columns {keys:?}"))?;
    let back: Coverage = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    let bits = |c: &Coverage| c.values().map(f64::to_bits);
    ensure(bits(&back) == bits(&cov), || format!("{cov:?} became {back:?}"))?;
    let v = cov.values();
    Ok(format!(
        "train {:.1} val {:.1} test {:.1} simple {:.1} complex {:.1}, round trip exact",
        v[0], v[1], v[2], v[3], v[4]
    ))
}

fn run_cli_twice(name: &str, config: &str, root: &Path) -> Result<(), String> {
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = root.join(format!("{name}-{run}"));
        let config = config.replace("@OUT@", &out.display().to_string());
        let path = root.join(format!("{name}-{run}.json"));
        std::fs::write(&path, config).map_err(|e| e.to_string())?;
        let status = Command::new(env!("CARGO_BIN_EXE_tdcomp"))
            .args(["all", "--config"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            format!("{name} run {run}: {}", String::from_utf8_lossy(&status.stderr))
        })?;
        let layout = Layout { root: out };
        let read = |p: std::path::PathBuf| std::fs::read(&p).map_err(|e| format!("{}: {e}", p.display()));
        outputs.push((read(layout.report_json())?, read(layout.report_text())?));
    }
    ensure(outputs[0] == outputs[1], || format!("{name}: report files differ between runs"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mini = support::mini_config(Path::new("@OUT@"));
    run_cli_twice("mini", &mini, dir.path())?;
    let synthetic = serde_json::json!({
        "output_dir": "@OUT@",
        "data": {"synthetic": {"n": 200, "rows": 6, "cols": 4}},
        "seeds": {"corpus": 3, "selector": 4, "augment": 5, "fusion": 6},
        "fusion": {"d": 16, "lr": 0.3, "epochs": 5, "batch": 16}
    })
    .to_string();
    run_cli_twice("synthetic", &synthetic, dir.path())?;
    Ok("report.json and report.txt byte-identical across two runs (mini and synthetic)".into())
}

fn main() {
    let mut metrics = None;
    let criteria: Vec<Criterion> = vec![
        ("executor matches reference interpreter", Box::new(executor_oracle)),
        ("parser round trip", Box::new(parser_round_trip)),
        ("worked superlative example", Box::new(venues_example)),
        ("margin loss and selector training", Box::new(hinge_cases)),
        ("augmentation preserves labels", Box::new(augmentation)),
        ("fusion gradient check", Box::new(gradient_check)),
        ("evidence ablation", Box::new(|| ablation(&mut metrics))),
        ("bleu-4", Box::new(bleu_cases)),
    ];
    let mut failed = 0;
    let mut report = |i: usize, name: &str, r: Outcome| {
        match r {
            Ok(msg) => println!("PASS {i:>2} {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {i:>2} {name}: {msg}");
            }
        }
    };
    let guard = |f: Box<dyn FnOnce() -> Outcome + '_>| {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        })
    };
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        report(i + 1, name, guard(f));
    }
    report(9, "coverage report", guard(Box::new(|| coverage_round_trip(&metrics))));
    report(10, "reruns are byte-identical", guard(Box::new(determinism)));
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
