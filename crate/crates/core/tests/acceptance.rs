//! Acceptance suite. Runs every criterion, prints one PASS/FAIL/SKIP line
//! each, and exits non-zero if any criterion fails.
//!
//! Set `MARE_SMARTDATA_DIR` to a directory holding the native-format
//! SmartData splits (`train.jsonl`, `dev.jsonl`, `test.jsonl`, `schema.json`)
//! and a `VERSION` file reading `v3` to run the corpus statistics criterion.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mare::artifact::Model;
use mare::assembler::{assemble, AssemblyConfig};
use mare::corpus::{binary_subset, corpus_stats, read_corpus_file, Attribute, Document, LabelDef, Relation, RoleDef, Schema, Span};
use mare::crf::{self, forward_log_partition, nll_and_gradient, viterbi, CrfModel, FeatureVector, Potentials, TrainConfig};
use mare::eval::{self, evaluate, match_relations, relation_matches, relations_by_doc, EvalConfig, RelationsByDoc, Strategy};
use mare::pipeline::{predict_corpus, predictions_by_doc, PredictOptions};
use mare::span::{self, attention_weights, span_representation, SpanLabel, SpanModel, SpanTrainConfig};
use mare::synth::{generate, SynthConfig};
use mare::tagscheme::{decode, encode, flatten_relations, LabeledAttribute};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::{Fail, Pass, Skip};

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

// ---------------------------------------------------------------- oracles

/// Gold `(label, start, end, role)` multiset, built straight from relations.
fn gold_multiset(doc: &Document) -> Vec<(String, usize, usize, String)> {
    let mut v: Vec<_> = doc
        .relations
        .iter()
        .flat_map(|r| r.attributes.iter().map(move |a| (r.label.clone(), a.span.start, a.span.end, a.role.clone())))
        .collect();
    v.sort();
    v
}

fn brute_score(p: &Potentials, path: &[usize]) -> f64 {
    let mut s = p.start[path[0]] + p.end[path[p.n - 1]];
    for t in 0..p.n {
        s += p.emissions[t * p.k + path[t]];
        if t > 0 {
            s += p.transitions[path[t - 1] * p.k + path[t]];
        }
    }
    s
}

/// Every tag path of length `n` over `k` tags, in lexicographic order.
fn all_paths(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = k.pow(n as u32);
    (0..total).map(move |mut code| {
        let mut path = vec![0; n];
        for t in (0..n).rev() {
            path[t] = code % k;
            code /= k;
        }
        path
    })
}

fn random_potentials(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Potentials {
    let mut draw = |len: usize| (0..len).map(|_| rng.random_range(-3.0..3.0)).collect::<Vec<f64>>();
    Potentials {
        n,
        k,
        emissions: draw(n * k),
        transitions: draw(k * k),
        start: draw(k),
        end: draw(k),
    }
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Relation multiset key: label plus sorted attributes.
fn relation_key(r: &Relation) -> (String, Vec<Attribute>) {
    let mut a = r.attributes.clone();
    a.sort();
    (r.label.clone(), a)
}

fn same_relations(a: &[Relation], b: &[Relation]) -> bool {
    let mut x: Vec<_> = a.iter().map(relation_key).collect();
    let mut y: Vec<_> = b.iter().map(relation_key).collect();
    x.sort();
    y.sort();
    x == y
}

// ------------------------------------------------------------- criteria

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let cfg = SynthConfig {
        document_count: 1000,
        shared_span_probability: 0.0,
        same_label_pair_probability: 0.5,
        multi_relation_probability: 0.5,
        max_value_tokens: 3,
        seed: 101,
        ..SynthConfig::default()
    };
    let schema = cfg.schema().unwrap();
    let docs = generate(&cfg).unwrap();
    let mut exact = 0;
    let mut conflicted = 0;
    for d in &docs {
        let (tags, report) = encode(d, &schema);
        if !report.is_conflict_free() {
            conflicted += 1;
            continue;
        }
        let decoded: Vec<_> = decode(&tags, &schema)
            .into_iter()
            .map(|la| (la.label, la.attribute.span.start, la.attribute.span.end, la.attribute.role))
            .collect();
        if decoded == gold_multiset(d) {
            exact += 1;
        }
    }
    let elapsed = started.elapsed();
    check(
        conflicted == 0 && exact == docs.len() && elapsed < Duration::from_secs(5),
        format!("{exact}/{} documents round-trip, {conflicted} conflicted, {}", docs.len(), secs(elapsed)),
    )
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst_score = 0.0f64;
    let mut worst_logz = 0.0f64;
    let mut path_mismatch = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=6);
        let k = rng.random_range(1..=8);
        let p = random_potentials(&mut rng, n, k);
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut scores = Vec::new();
        for path in all_paths(n, k) {
            let s = brute_score(&p, &path);
            scores.push(s);
            if best.as_ref().is_none_or(|(b, _)| s > *b) {
                best = Some((s, path));
            }
        }
        let (best_score, best_path) = best.unwrap();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let logz = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
        let (path, score) = viterbi(&p);
        if path != best_path {
            path_mismatch += 1;
        }
        worst_score = worst_score.max((score - best_score).abs());
        worst_logz = worst_logz.max((forward_log_partition(&p) - logz).abs());
    }
    let elapsed = started.elapsed();
    check(
        path_mismatch == 0 && worst_score <= 1e-9 && worst_logz <= 1e-6 && elapsed < Duration::from_secs(30),
        format!(
            "500 instances: {path_mismatch} path mismatches, max score err {worst_score:.1e}, max logZ err {worst_logz:.1e}, {}",
            secs(elapsed)
        ),
    )
}

fn crf_gradient_instance(rng: &mut ChaCha8Rng) -> f64 {
    let k = rng.random_range(2..=5);
    let n = rng.random_range(1..=6);
    let mut model = CrfModel::zeros((0..k).map(|i| format!("t{i}")).collect(), "fp".into(), TrainConfig::default());
    let features: Vec<FeatureVector> = (0..n)
        .map(|_| {
            let mut ids: Vec<u32> = (0..rng.random_range(1..=4)).map(|_| rng.random_range(0..12)).collect();
            ids.sort();
            ids.dedup();
            FeatureVector(ids)
        })
        .collect();
    for id in 0..12 {
        for x in model.emission.row_mut(id) {
            *x = rng.random_range(-1.0..1.0);
        }
    }
    for group in [&mut model.transitions, &mut model.start, &mut model.end] {
        for x in group.iter_mut() {
            *x = rng.random_range(-1.0..1.0);
        }
    }
    let gold: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let (_, grad) = nll_and_gradient(&model, &features, &gold).unwrap();
    let loss = |m: &CrfModel| nll_and_gradient(m, &features, &gold).unwrap().0;
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for id in 0..12u32 {
        for t in 0..k {
            let mut plus = model.clone();
            plus.emission.row_mut(id)[t] += eps;
            let mut minus = model.clone();
            minus.emission.row_mut(id)[t] -= eps;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * eps);
            let a = grad.emission.get(&id).map_or(0.0, |r| r[t]);
            worst = worst.max(relative_error(a, fd));
        }
    }
    type Group = fn(&mut CrfModel) -> &mut Vec<f64>;
    let groups: [(Group, &Vec<f64>); 3] = [
        (|m| &mut m.transitions, &grad.transitions),
        (|m| &mut m.start, &grad.start),
        (|m| &mut m.end, &grad.end),
    ];
    for (get, analytic) in groups {
        for i in 0..analytic.len() {
            let mut plus = model.clone();
            get(&mut plus)[i] += eps;
            let mut minus = model.clone();
            get(&mut minus)[i] -= eps;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * eps);
            worst = worst.max(relative_error(analytic[i], fd));
        }
    }
    worst
}

fn span_gradient_instance(rng: &mut ChaCha8Rng) -> f64 {
    let vocab = rng.random_range(2..=6);
    let dim = rng.random_range(1..=4);
    let labels = rng.random_range(1..=3);
    let mut model = SpanModel::zeros(
        (0..labels).map(|i| SpanLabel { label: format!("L{i}"), role: "R".into() }).collect(),
        (0..vocab).map(|i| format!("w{i}")).collect(),
        dim,
        "fp".into(),
        SpanTrainConfig::default(),
    );
    model.context_window = rng.random_range(0..=2);
    for group in model.parameters_mut() {
        for x in group.iter_mut() {
            *x = rng.random_range(-1.0..1.0);
        }
    }
    let n = rng.random_range(1..=6);
    let ids: Vec<usize> = (0..n).map(|_| rng.random_range(0..=vocab)).collect();
    let spans = span::enumerate_spans(n, rng.random_range(1..=4));
    let targets: Vec<Vec<f64>> = spans
        .iter()
        .map(|_| (0..labels).map(|_| if rng.random_bool(0.3) { 1.0 } else { 0.0 }).collect())
        .collect();
    let (_, g) = model.loss_and_gradient(&ids, &spans, &targets);
    let analytic = [g.embeddings, g.attention, g.head, g.bias];
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for (group, values) in analytic.iter().enumerate() {
        for (i, &a) in values.iter().enumerate() {
            let mut plus = model.clone();
            plus.parameters_mut()[group][i] += eps;
            let mut minus = model.clone();
            minus.parameters_mut()[group][i] -= eps;
            let fd = (plus.loss_and_gradient(&ids, &spans, &targets).0 - minus.loss_and_gradient(&ids, &spans, &targets).0)
                / (2.0 * eps);
            worst = worst.max(relative_error(a, fd));
        }
    }
    worst
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let crf_worst = (0..60).map(|_| crf_gradient_instance(&mut rng)).fold(0.0, f64::max);
    let span_worst = (0..60).map(|_| span_gradient_instance(&mut rng)).fold(0.0, f64::max);
    check(
        crf_worst < 1e-4 && span_worst < 1e-4,
        format!("60 CRF instances max rel err {crf_worst:.1e}; 60 span instances max rel err {span_worst:.1e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut sum_err = 0.0f64;
    let mut shift_err = 0.0f64;
    let mut width_one_exact = true;
    let mut hull_violations = 0;
    let mut oracle_err = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(1..=10);
        let d = rng.random_range(1..=6);
        let c: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
        let m: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let start = rng.random_range(0..n);
        let end = rng.random_range(start + 1..=n);
        let s = Span::new(start, end);

        let scores: Vec<f64> = c[start..end].iter().map(|ck| ck.iter().zip(&m).map(|(x, y)| x * y).sum()).collect();
        let w = attention_weights(&scores);
        sum_err = sum_err.max((w.iter().sum::<f64>() - 1.0).abs());
        let shift = rng.random_range(-50.0..50.0);
        let shifted = attention_weights(&scores.iter().map(|x| x + shift).collect::<Vec<_>>());
        shift_err = shift_err.max(w.iter().zip(&shifted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));

        let rep = span_representation(&c, s, &m);
        // two-step oracle: plain exponentials, then the weighted sum
        let exps: Vec<f64> = scores.iter().map(|a| a.exp()).collect();
        let z: f64 = exps.iter().sum();
        for j in 0..d {
            let expected: f64 = (start..end).map(|k| exps[k - start] / z * c[k][j]).sum();
            oracle_err = oracle_err.max((expected - rep[j]).abs());
            let lo = (start..end).map(|k| c[k][j]).fold(f64::INFINITY, f64::min);
            let hi = (start..end).map(|k| c[k][j]).fold(f64::NEG_INFINITY, f64::max);
            if rep[j] < lo - 1e-9 || rep[j] > hi + 1e-9 {
                hull_violations += 1;
            }
        }
        let one = span_representation(&c, Span::new(start, start + 1), &m);
        width_one_exact &= one == c[start];
    }
    check(
        sum_err <= 1e-9 && shift_err <= 1e-9 && width_one_exact && hull_violations == 0 && oracle_err <= 1e-9,
        format!(
            "1000 spans: weight-sum err {sum_err:.1e}, shift err {shift_err:.1e}, width-1 exact {width_one_exact}, \
             hull violations {hull_violations}, oracle err {oracle_err:.1e}"
        ),
    )
}

fn assembler_rate(ambiguity: f64, via_tags: bool) -> (usize, usize) {
    let cfg = SynthConfig {
        document_count: 1000,
        same_label_pair_probability: 0.5,
        shared_span_probability: 0.5,
        multi_relation_probability: 0.5,
        ambiguity_probability: ambiguity,
        seed: 505,
        ..SynthConfig::default()
    };
    let schema = cfg.schema().unwrap();
    let assembly = AssemblyConfig::with_width(cfg.relation_width);
    let docs = generate(&cfg).unwrap();
    let exact = docs
        .iter()
        .filter(|d| {
            let flat: Vec<LabeledAttribute> = if via_tags {
                decode(&encode(d, &schema).0, &schema)
            } else {
                flatten_relations(d)
            };
            let out: Vec<Relation> = assemble(&flat, &schema, &assembly).iter().map(|r| r.to_relation()).collect();
            same_relations(&out, &d.relations)
        })
        .count();
    (exact, docs.len())
}

fn criterion_5() -> Outcome {
    let (clean, n) = assembler_rate(0.0, false);
    let (clean_tags, _) = assembler_rate(0.0, true);
    let (ambiguous, _) = assembler_rate(0.005, false);
    check(
        clean == n && clean_tags == n && ambiguous * 100 >= n * 99,
        format!(
            "gold attributes {clean}/{n}, tag-decoded attributes {clean_tags}/{n}, with ambiguity {ambiguous}/{n}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let train_cfg = SynthConfig {
        document_count: 2000,
        seed: 11,
        ..SynthConfig::default()
    };
    let test_cfg = SynthConfig {
        document_count: 300,
        seed: 12,
        id_prefix: "heldout".into(),
        ..SynthConfig::default()
    };
    let schema = train_cfg.schema().unwrap();
    let train = generate(&train_cfg).unwrap();
    let test = generate(&test_cfg).unwrap();
    let gold = relations_by_doc(&test);
    let limit = Duration::from_secs(15 * 60);
    let mut lines = Vec::new();
    let mut ok = true;
    for name in ["seq", "span"] {
        let started = Instant::now();
        let model = match name {
            "seq" => Model::Crf(crf::train(&train, &schema, &TrainConfig::default()).unwrap()),
            _ => Model::Span(span::train(&train, &schema, &SpanTrainConfig::default()).unwrap()),
        };
        let records = predict_corpus(&model, &schema, &test, &PredictOptions::default()).unwrap();
        let elapsed = started.elapsed();
        let f1 = eval::score_mre(&predictions_by_doc(&records), &gold, &schema).f1;
        ok &= f1 >= 0.90 && elapsed < limit;
        lines.push(format!("{name} MRE F1 {f1:.4} in {}", secs(elapsed)));
    }
    check(ok, lines.join("; "))
}

fn eval_schema() -> Schema {
    Schema::new(vec![
        LabelDef::new(
            "Accident",
            vec![
                RoleDef::new("Trigger", true).trigger(),
                RoleDef::new("Location", true),
                RoleDef::new("Delay", false),
            ],
        ),
        LabelDef::new(
            "Disaster",
            vec![
                RoleDef::new("Trigger", true).trigger(),
                RoleDef::new("Location", true),
                RoleDef::new("Kind", true),
            ],
        ),
    ])
    .unwrap()
}

fn rel(label: &str, attrs: &[(usize, usize, &str)]) -> Relation {
    Relation::new(label, attrs.iter().map(|&(s, e, r)| Attribute::new(s, e, r)).collect())
}

fn criterion_7() -> Outcome {
    let schema = eval_schema();
    // d1: two gold accidents; predictions reproduce one exactly, one with
    // a missing optional, plus a spurious accident.
    // d2: a disaster (three mandatory roles), predicted with a wrong Kind.
    let gold: RelationsByDoc = BTreeMap::from([
        (
            "d1".to_string(),
            vec![
                rel("Accident", &[(0, 1, "Trigger"), (2, 3, "Location"), (4, 5, "Delay")]),
                rel("Accident", &[(10, 11, "Trigger"), (12, 13, "Location")]),
            ],
        ),
        (
            "d2".to_string(),
            vec![rel("Disaster", &[(0, 1, "Trigger"), (2, 3, "Location"), (4, 5, "Kind")])],
        ),
    ]);
    let pred: RelationsByDoc = BTreeMap::from([
        (
            "d1".to_string(),
            vec![
                rel("Accident", &[(0, 1, "Trigger"), (2, 3, "Location")]),
                rel("Accident", &[(10, 11, "Trigger"), (12, 13, "Location")]),
                rel("Accident", &[(20, 21, "Trigger")]),
            ],
        ),
        (
            "d2".to_string(),
            vec![rel("Disaster", &[(0, 1, "Trigger"), (2, 3, "Location"), (6, 7, "Kind")])],
        ),
    ]);
    // hand counts
    // AR: pred triples 4 + 3 = 8 (d1: 0,2,10,12,20 -> 5; d2: 3), gold 5 + 3 = 8, TP d1 4 + d2 2 = 6
    // Cl: pred 4, gold 3, TP 3
    // MRE: TP 2 (both d1 accidents), CRE: TP 1
    // BRE: binary docs = {d1}; pred 3, gold 2, TP 2
    let expected: [(Strategy, f64, f64); 5] = [
        (Strategy::Ar, 6.0 / 8.0, 6.0 / 8.0),
        (Strategy::Cl, 3.0 / 4.0, 3.0 / 3.0),
        (Strategy::Mre, 2.0 / 4.0, 2.0 / 3.0),
        (Strategy::Cre, 1.0 / 4.0, 1.0 / 3.0),
        (Strategy::Bre, 2.0 / 3.0, 2.0 / 2.0),
    ];
    let report = evaluate(&pred, &gold, &schema, &EvalConfig::default());
    let mut worst = 0.0f64;
    for (s, p, r) in expected {
        let got = report.get(s).unwrap();
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        worst = worst.max((got.precision - p).abs()).max((got.recall - r).abs()).max((got.f1 - f).abs());
    }

    // implication chain per matched instance
    let mut chain_ok = true;
    for id in gold.keys() {
        let (p, g) = (&pred[id], &gold[id]);
        for &(pi, gi) in &match_relations(Strategy::Cre, p, g, &schema) {
            chain_ok &= relation_matches(Strategy::Mre, &p[pi], &g[gi], &schema);
        }
        for &(pi, gi) in &match_relations(Strategy::Mre, p, g, &schema) {
            chain_ok &= relation_matches(Strategy::Cl, &p[pi], &g[gi], &schema);
        }
    }

    // all-binary fixture
    let binary_gold: RelationsByDoc = BTreeMap::from([("d1".to_string(), gold["d1"].clone())]);
    let binary_pred: RelationsByDoc = BTreeMap::from([("d1".to_string(), pred["d1"].clone())]);
    let bre = eval::score_bre(&binary_pred, &binary_gold, &schema);
    let mre = eval::score_mre(&binary_pred, &binary_gold, &schema);

    check(
        worst <= 1e-9 && chain_ok && bre == mre,
        format!("max deviation from hand counts {worst:.1e}, implication chain {chain_ok}, BRE == MRE on binary fixture {}", bre == mre),
    )
}

fn criterion_8() -> Outcome {
    let Some(dir) = std::env::var_os("MARE_SMARTDATA_DIR").map(PathBuf::from) else {
        return Skip("MARE_SMARTDATA_DIR not set; the SmartData v3 corpus is not bundled".into());
    };
    let version = std::fs::read_to_string(dir.join("VERSION")).unwrap_or_default();
    if version.trim() != "v3" {
        return Skip(format!("corpus version `{}` is not v3", version.trim()));
    }
    let schema = match Schema::load(dir.join("schema.json")) {
        Ok(s) => s,
        Err(e) => return Fail(format!("cannot load schema: {e}")),
    };
    let mut splits = Vec::new();
    for name in ["train", "dev", "test"] {
        match read_corpus_file(dir.join(format!("{name}.jsonl"))) {
            Ok(docs) => splits.push(docs),
            Err(e) => return Fail(format!("cannot load {name}: {e}")),
        }
    }
    let stats: Vec<_> = splits.iter().map(|s| corpus_stats(s, &schema)).collect();
    let total = stats[1..].iter().fold(stats[0].clone(), |acc, s| acc.merge(s));
    let docs: Vec<usize> = stats.iter().map(|s| s.document_count).collect();
    let rels: Vec<usize> = stats.iter().map(|s| s.relation_count).collect();
    let binary = binary_subset(&splits[0], &schema).len();
    let ok = docs == [1864, 228, 230]
        && rels == [1007, 129, 128]
        && total.entity_count == 19_116
        && total.document_count == 2_322
        && total.word_count == 141_344
        && total.multi_trigger_relation_count == 78
        && binary == 1_717;
    check(
        ok,
        format!(
            "documents {docs:?}, relations {rels:?}, entities {}, words {}, multi-trigger {}, binary subset {binary}",
            total.entity_count, total.word_count, total.multi_trigger_relation_count
        ),
    )
}

fn criterion_9() -> Outcome {
    let schema = eval_schema();
    let gold: RelationsByDoc = BTreeMap::from([(
        "d".to_string(),
        vec![rel("Accident", &[(0, 1, "Trigger"), (2, 3, "Location")])],
    )]);
    let pred = gold.clone();
    let full = evaluate(&pred, &gold, &schema, &EvalConfig::default());
    let table = full.table("Span Lab.");
    let lines: Vec<&str> = table.lines().collect();
    let header: Vec<&str> = lines[0].split('|').map(str::trim).collect();
    let rows: Vec<&str> = lines[2..].iter().map(|l| l.split('|').next().unwrap().split_whitespace().last().unwrap()).collect();
    let trig = evaluate(
        &pred,
        &gold,
        &schema,
        &EvalConfig {
            strategies: vec![Strategy::Ar, Strategy::Mre],
            exclude_triggers: true,
        },
    );
    let trig_header: Vec<String> = trig.table("Span Lab. without Trigger").lines().next().unwrap().split('|').map(|s| s.trim().to_string()).collect();
    let json: serde_json::Value = serde_json::from_str(&full.to_json()).unwrap();
    let order: Vec<&str> = json["scores"].as_array().unwrap().iter().map(|s| s["strategy"].as_str().unwrap()).collect();
    let ok = header[1..] == ["AR", "Cl", "MRE", "CRE", "BRE"]
        && rows == ["F1", "P", "R"]
        && trig_header[1..] == ["AR", "MRE"]
        && order == ["AR", "Cl", "MRE", "CRE", "BRE"];
    check(
        ok,
        "report renders strategy columns x F1/P/R rows; published transformer-based F1 scores are not reproduced at this scale".into(),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("tag codec round trip", criterion_1),
        ("dynamic programming vs brute force", criterion_2),
        ("gradient checks", criterion_3),
        ("span pooling math", criterion_4),
        ("assembler oracle", criterion_5),
        ("end-to-end learning", criterion_6),
        ("metric strategy fixtures", criterion_7),
        ("SmartData statistics", criterion_8),
        ("report shape", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Fail(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("[{tag}] {id}: {name}: {detail}");
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
