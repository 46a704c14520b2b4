//! Acceptance suite. Each criterion runs against its time budget and prints
//! one PASS/FAIL line; any failure makes the process exit non-zero.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::time::{Duration, Instant};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use secrev_core::client::stub::FnClient;
use secrev_core::client::ChatRequest;
use secrev_core::metrics::{bleu4, classification_report, combine, secure_bleu, FieldWeights};
use secrev_core::pipeline::{embedding_match, split_dataset, CweDescription, Evidence, KeywordMatcher, SplitSizes, WordVectorTable};
use secrev_core::rarg::Rarg;
use secrev_core::retrieval::{bm25_score, CorpusStats, Template, TemplateStore};
use secrev_core::sa_loss::{build_weight_mask, sa_loss, TokenLogProbs, DEFAULT_ALPHA, DEFAULT_BETA};
use secrev_core::text::normalize_text;
use secrev_core::{CodeDiff, DatasetEntry, KeywordDictionary, ReviewComment, ReviewField, SecurityType, Source, Split};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn rng(label: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5ec0_0000 + label)
}

// 1. worked combination and the exact-match security type term

fn worked_example() -> Check {
    let final_score = combine(17.57, 6.67, 0.5);
    ensure!((final_score - 12.12).abs() <= 0.005, "combined score {final_score}");

    let dict = KeywordDictionary::builtin();
    let weights = FieldWeights::default();
    let reference = ReviewComment::new(
        SecurityType::InputValidation,
        "User input reaches the query unchecked, a sql injection.",
        "A sql injection exposes every row.",
        "Bind parameters to prevent sql injection.",
    )
    .unwrap();
    let pred = ReviewComment::new(
        SecurityType::Concurrency,
        reference.description(),
        reference.impact(),
        reference.advice(),
    )
    .unwrap();
    let r = secure_bleu(&pred, &reference, &dict, &weights).map_err(|e| e.to_string())?;
    ensure!(r.per_field_bleu["st"] == 0.0, "security type term {}", r.per_field_bleu["st"]);
    let text_only: f64 = ReviewField::TEXT.iter().map(|&f| weights.bleu().get(f) * r.per_field_bleu[f.key()]).sum();
    ensure!(r.score_bleu == text_only, "score_bleu {} vs text fields alone {}", r.score_bleu, text_only);
    Ok(format!("12.12 vs {final_score:.4}; mismatched type adds 0 (score_bleu {:.2})", r.score_bleu))
}

// 2. identical predictions score 100, a Non-Issue prediction scores 0

const FILLER: &[&str] = &[
    "the", "value", "function", "return", "variable", "rename", "loop", "refactor", "please", "this",
    "method", "should", "call", "constant", "here", "nit", "typo", "maybe", "extract", "helper", "test",
    "naming", "indent", "comment", "unused", "import", "simplify", "why", "not", "list",
];

fn filler(rng: &mut ChaCha8Rng, len: std::ops::Range<usize>) -> Vec<String> {
    let n = rng.random_range(len);
    (0..n).map(|_| FILLER.choose(rng).unwrap().to_string()).collect()
}

fn field_text(rng: &mut ChaCha8Rng, phrases: &[String]) -> String {
    let mut words = filler(rng, 3..10);
    let at = rng.random_range(0..=words.len());
    words.insert(at, phrases.choose(rng).unwrap().clone());
    words.join(" ")
}

fn metric_identity() -> Check {
    let dict = KeywordDictionary::builtin();
    let weights = FieldWeights::default();
    let mut rng = rng(2);
    let n = 150;
    for i in 0..n {
        let ty = *SecurityType::ISSUES.choose(&mut rng).unwrap();
        let phrases = dict.keywords(ty);
        let c = ReviewComment::new(ty, field_text(&mut rng, phrases), field_text(&mut rng, phrases), field_text(&mut rng, phrases))
            .unwrap();
        let same = secure_bleu(&c, &c, &dict, &weights).map_err(|e| e.to_string())?;
        ensure!((same.final_score - 100.0).abs() <= 1e-6, "comment {i}: SecureBLEU {}", same.final_score);
        let b = bleu4(&c.render(), &c.render());
        ensure!((b - 100.0).abs() <= 1e-6, "comment {i}: BLEU-4 {b}");
        let none = secure_bleu(&ReviewComment::non_issue(), &c, &dict, &weights).map_err(|e| e.to_string())?;
        ensure!(none.final_score == 0.0, "comment {i}: Non-Issue prediction scored {}", none.final_score);
    }
    Ok(format!("{n} generated comments"))
}

// 3. macro metrics against a brute-force oracle

fn oracle_report(pairs: &[(usize, usize)]) -> [f64; 4] {
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    for k in 0..8 {
        let tp = pairs.iter().filter(|&&(a, b)| a == k && b == k).count() as f64;
        let predicted = pairs.iter().filter(|&&(a, _)| a == k).count() as f64;
        let actual = pairs.iter().filter(|&&(_, b)| b == k).count() as f64;
        let prec = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let rec = if actual > 0.0 { tp / actual } else { 0.0 };
        p += prec;
        r += rec;
        f += if prec + rec > 0.0 { 2.0 * prec * rec / (prec + rec) } else { 0.0 };
    }
    let acc = pairs.iter().filter(|(a, b)| a == b).count() as f64 / pairs.len() as f64;
    [100.0 * p / 8.0, 100.0 * r / 8.0, 100.0 * f / 8.0, 100.0 * acc]
}

fn detection_oracle() -> Check {
    let mut rng = rng(3);
    for s in 0..1000 {
        let n = rng.random_range(1..=200);
        // skewed labels so some classes go unpredicted or unseen
        let skew = rng.random_range(1..=8);
        let pairs: Vec<(usize, usize)> = (0..n).map(|_| (rng.random_range(0..skew.max(2)), rng.random_range(0..8))).collect();
        let typed: Vec<_> = pairs.iter().map(|&(a, b)| (SecurityType::ALL[a], SecurityType::ALL[b])).collect();
        let got = classification_report(&typed).map_err(|e| e.to_string())?;
        let want = oracle_report(&pairs);
        for (name, g, w) in [("precision", got.precision, want[0]), ("recall", got.recall, want[1]), ("f1", got.f1, want[2]), ("accuracy", got.accuracy, want[3])] {
            ensure!((g - w).abs() <= 1e-9, "sample {s}: {name} {g} vs {w}");
        }
    }
    Ok("1000 samples".into())
}

// 4. BM25 scores and rankings against a naive scorer

type Doc = (String, SecurityType, Vec<String>);

fn naive_score(query: &[String], doc: &[String], part: &[&Doc]) -> f64 {
    let n = part.len() as f64;
    let avg = part.iter().map(|d| d.2.len()).sum::<usize>() as f64 / n;
    let (k1, b) = (1.2, 0.75);
    let mut s = 0.0;
    for q in query {
        let f = doc.iter().filter(|t| *t == q).count() as f64;
        if f == 0.0 {
            continue;
        }
        let df = part.iter().filter(|d| d.2.contains(q)).count() as f64;
        let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
        s += idf * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * (doc.len() as f64 / avg)));
    }
    s
}

fn bm25_oracle() -> Check {
    let mut rng = rng(4);
    let mut compared = 0;
    for c in 0..500 {
        let vocab = rng.random_range(1..=50);
        let n_docs = rng.random_range(1..=20);
        let mut ids: Vec<usize> = (0..100).collect();
        ids.shuffle(&mut rng);
        let docs: Vec<Doc> = (0..n_docs)
            .map(|i| {
                let len = rng.random_range(1..=12);
                let words = (0..len).map(|_| format!("w{}", rng.random_range(0..vocab))).collect();
                (format!("t{:03}", ids[i]), SecurityType::ISSUES[rng.random_range(0..3)], words)
            })
            .collect();
        let templates = docs
            .iter()
            .map(|(id, ty, words)| {
                let comment = ReviewComment::new(*ty, "d", "i", "a").unwrap();
                Template::new(id.clone(), CodeDiff::new(format!("+ {}", words.join(" "))).unwrap(), comment).unwrap()
            })
            .collect();
        let store = TemplateStore::build(templates).map_err(|e| e.to_string())?;
        let ty = SecurityType::ISSUES[rng.random_range(0..3)];
        let query: Vec<String> = (0..rng.random_range(1..8)).map(|_| format!("w{}", rng.random_range(0..vocab))).collect();
        let k = rng.random_range(1..=n_docs + 2);
        let part: Vec<&Doc> = docs.iter().filter(|d| d.1 == ty).collect();
        let got = store.retrieve_tokens(&query, ty, k).map_err(|e| e.to_string())?;
        if part.is_empty() {
            ensure!(got.is_empty(), "corpus {c}: hits from an empty partition");
            continue;
        }
        let stats = CorpusStats::from_docs(part.iter().map(|d| d.2.as_slice()));
        let mut want: Vec<(String, f64)> = part.iter().map(|d| (d.0.clone(), naive_score(&query, &d.2, &part))).collect();
        for (d, (_, w)) in part.iter().zip(&want) {
            let s = bm25_score(&query, &d.2, &stats, store.params());
            ensure!((s - w).abs() <= 1e-9, "corpus {c}: bm25_score {s} vs {w}");
        }
        want.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        want.truncate(k);
        let got_ids: Vec<&str> = got.iter().map(|h| h.template.id.as_str()).collect();
        let want_ids: Vec<&str> = want.iter().map(|w| w.0.as_str()).collect();
        ensure!(got_ids == want_ids, "corpus {c}: ranking {got_ids:?} vs {want_ids:?}");
        compared += 1;
    }
    Ok(format!("500 corpora, {compared} with a non-empty partition"))
}

// 5. the similarity threshold is strict

fn threshold_semantics() -> Check {
    // unit probe vector; each anchor has norm 100 and first coordinate 71, 70 or 69
    let mut table = WordVectorTable::new(6);
    let rows: [(&str, [f64; 6]); 4] = [
        ("probe", [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ("gadget", [71.0, 70.0, 7.0, 3.0, 1.0, 0.0]),
        ("widget", [70.0, 71.0, 7.0, 3.0, 1.0, 0.0]),
        ("sprocket", [69.0, 72.0, 7.0, 2.0, 1.0, 1.0]),
    ];
    for (w, v) in rows {
        table.insert(w, v.to_vec()).map_err(|e| e.to_string())?;
    }
    let anchor = |w: &str, ty| CweDescription { cwe_id: "CWE-557".into(), text: w.into(), mapped_type: ty };
    let anchors = [
        anchor("gadget", SecurityType::Concurrency),
        anchor("widget", SecurityType::InputValidation),
        anchor("sprocket", SecurityType::StateManagement),
    ];
    let hits = embedding_match("e", "probe", &anchors, &table, 0.70);
    ensure!(hits.len() == 1, "{} candidates kept", hits.len());
    ensure!(hits[0].matched_type == SecurityType::Concurrency, "kept {:?}", hits[0].matched_type);
    let Evidence::Embedding { similarity, .. } = hits[0].evidence else {
        return Err("wrong evidence kind".into());
    };
    ensure!((similarity - 0.71).abs() < 1e-12, "similarity {similarity}");
    Ok("0.71 kept; 0.70 and 0.69 rejected".into())
}

// 6. secure-aware loss algebra

fn random_set(rng: &mut ChaCha8Rng, n: usize) -> BTreeSet<usize> {
    let p = rng.random::<f64>();
    (0..n).filter(|_| rng.random::<f64>() < p).collect()
}

fn sa_loss_algebra() -> Check {
    let mut rng = rng(6);
    let cases = 2000;
    for c in 0..cases {
        let n = rng.random_range(1..=200);
        let iv = random_set(&mut rng, n);
        let ist = random_set(&mut rng, n);

        // dyadic logprobs make every summation order exact
        let lp: Vec<f64> = (0..n).map(|_| -(rng.random_range(0..20_000) as f64) / 1024.0).collect();
        let plain = -lp.iter().sum::<f64>();
        let zero = build_weight_mask(n, &iv, &ist, 0.0, 0.0).map_err(|e| e.to_string())?;
        let got = sa_loss(&TokenLogProbs::new(lp).unwrap(), &zero).map_err(|e| e.to_string())?;
        ensure!(got == plain, "case {c}: zero coefficients {got} vs plain {plain}");

        let l = -5.0 * rng.random::<f64>();
        let mask = build_weight_mask(n, &iv, &ist, DEFAULT_ALPHA, DEFAULT_BETA).map_err(|e| e.to_string())?;
        let got = sa_loss(&TokenLogProbs::new(vec![l; n]).unwrap(), &mask).map_err(|e| e.to_string())?;
        let want = -(n as f64 + DEFAULT_ALPHA * iv.len() as f64 + DEFAULT_BETA * ist.len() as f64) * l;
        ensure!((got - want).abs() <= 1e-12, "case {c}: uniform {got} vs {want}");

        let only_v = iv.difference(&ist).count() as f64;
        let only_s = ist.difference(&iv).count() as f64;
        let both = iv.intersection(&ist).count() as f64;
        let identity = n as f64 + DEFAULT_ALPHA * only_v + DEFAULT_BETA * only_s + (DEFAULT_ALPHA + DEFAULT_BETA) * both;
        ensure!(mask.total() == identity, "case {c}: mask sum {} vs {identity}", mask.total());
    }
    Ok(format!("{cases} randomized cases with alpha {DEFAULT_ALPHA}, beta {DEFAULT_BETA}"))
}

// 7. two-stage review never changes the type

fn rarg_type_invariance() -> Check {
    let mut rng = rng(7);
    let mut with_template = 0;
    for i in 0..200 {
        let types: Vec<usize> = (0..rng.random_range(0..30)).map(|_| rng.random_range(0..7)).collect();
        let templates = types
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let ty = SecurityType::ISSUES[t];
                let diff = CodeDiff::new(format!("+tok{} tok{t} shared", j % 5)).unwrap();
                Template::new(format!("t{j:03}"), diff, ReviewComment::new(ty, "d", "i", "a").unwrap()).unwrap()
            })
            .collect();
        let store = TemplateStore::build(templates).map_err(|e| e.to_string())?;
        let first = *SecurityType::ALL.choose(&mut rng).unwrap();
        let second = *SecurityType::ISSUES.choose(&mut rng).unwrap();
        let client = FnClient(move |r: &ChatRequest| {
            let ty = if r.user.contains("Reference review") { second } else { first };
            Ok(if ty.is_issue() { common::review_text(ty, "the change") } else { ReviewComment::non_issue().render() })
        });
        let diff = CodeDiff::new(format!("+tok{} shared", i % 7)).unwrap();
        let trace = Rarg::new(&client).review(&diff, &store).map_err(|e| format!("review {i}: {e}"))?;
        ensure!(
            trace.final_comment.security_type() == trace.initial_comment.security_type(),
            "review {i}: {} became {}",
            trace.initial_comment.security_type(),
            trace.final_comment.security_type()
        );
        if let Some(id) = &trace.retrieved_template_id {
            let t = store.templates().iter().find(|t| &t.id == id).ok_or("unknown template id")?;
            ensure!(t.security_type == trace.predicted_type, "review {i}: template {id} has type {}", t.security_type);
            with_template += 1;
        }
    }
    Ok(format!("200 reviews, {with_template} with a retrieved template"))
}

// 8. planted keyword recall and complement silence

fn inflections(word: &str) -> Vec<String> {
    let base = normalize_text(word);
    let mut out = vec![word.to_string()];
    for suffix in ["s", "es", "ed", "ing", "d"] {
        let v = format!("{word}{suffix}");
        if normalize_text(&v) == base {
            out.push(v);
        }
    }
    out
}

fn planted_corpus() -> Check {
    let dict = KeywordDictionary::builtin();
    let stems: HashSet<String> = dict.iter().flat_map(|(_, e)| e.keywords.iter().flat_map(|k| normalize_text(k))).collect();
    for w in FILLER {
        ensure!(!stems.contains(&normalize_text(w)[0]), "filler word {w} is a keyword stem");
    }
    let phrases: Vec<(SecurityType, String)> =
        dict.iter().flat_map(|(t, e)| e.keywords.iter().map(move |k| (t, k.clone()))).collect();
    let matcher = KeywordMatcher::new(&dict);
    let mut rng = rng(8);
    let (mut planted, mut inflected) = (0, 0);
    for i in 0..1000 {
        let mut words = filler(&mut rng, 0..12);
        let mut want = Vec::new();
        for _ in 0..rng.random_range(1..4) {
            let (ty, phrase) = phrases.choose(&mut rng).unwrap();
            let variant: Vec<String> = phrase.split(' ').map(|w| inflections(w).choose(&mut rng).unwrap().clone()).collect();
            inflected += usize::from(variant.join(" ") != *phrase);
            let mut text = variant.join(" ");
            if rng.random_bool(0.3) {
                text = text.to_uppercase();
            }
            let at = rng.random_range(0..=words.len());
            words.insert(at, format!("{text},"));
            want.push(*ty);
        }
        let comment = words.join(" ");
        let found: HashSet<SecurityType> = matcher.match_comment("c", &comment).iter().map(|c| c.matched_type).collect();
        for ty in want {
            ensure!(found.contains(&ty), "comment {i}: {ty} not found in {comment:?}");
            planted += 1;
        }
    }
    for i in 0..1000 {
        let comment = filler(&mut rng, 1..30).join(" ");
        let hits = matcher.match_comment("c", &comment);
        ensure!(hits.is_empty(), "complement comment {i} matched {:?}", hits[0].matched_type);
    }
    Ok(format!("{planted} planted phrases ({inflected} inflected) recovered; 1000 complement comments silent"))
}

// 9. stratified split

const TYPE_COUNTS: [usize; 8] = [532, 412, 819, 795, 292, 740, 499, 585];

fn split_stratification() -> Check {
    let mut entries = Vec::new();
    for (t, &count) in TYPE_COUNTS.iter().enumerate() {
        let ty = SecurityType::ALL[t];
        for k in 0..count {
            let comment = if ty.is_issue() { ReviewComment::new(ty, "d", "i", "a").unwrap() } else { ReviewComment::non_issue() };
            entries.push(DatasetEntry {
                id: format!("x{:05}", (k * 8 + t) * 7919 % 100_000),
                diff: CodeDiff::new(format!("+line {k}")).unwrap(),
                raw_comment: None,
                comment: Some(comment),
                security_type: ty,
                source: if ty.is_issue() { Source::Keyword } else { Source::NonIssue },
                split: None,
            });
        }
    }
    let total = entries.len();
    ensure!(total == 4674, "synthetic set has {total} entries");
    let input_ids: BTreeSet<String> = entries.iter().map(|e| e.id.clone()).collect();
    ensure!(input_ids.len() == total, "synthetic ids collide");
    let sizes = [4074usize, 300, 300];
    let (out, _) = split_dataset(entries, SplitSizes::new(sizes[0], sizes[1], sizes[2]), 17).map_err(|e| e.to_string())?;
    let output_ids: BTreeSet<String> = out.iter().map(|e| e.id.clone()).collect();
    ensure!(out.len() == total && output_ids == input_ids, "output is not a permutation of the input");
    let mut worst: f64 = 0.0;
    for (s, split) in Split::ALL.iter().enumerate() {
        let members: Vec<&DatasetEntry> = out.iter().filter(|e| e.split == Some(*split)).collect();
        ensure!(members.len() == sizes[s], "{split} has {} entries", members.len());
        for (t, &count) in TYPE_COUNTS.iter().enumerate() {
            let got = members.iter().filter(|e| e.security_type.index() == t).count() as f64;
            let quota = count as f64 * sizes[s] as f64 / total as f64;
            worst = worst.max((got - quota).abs());
            ensure!((got - quota).abs() <= 1.0, "{split}/{}: {got} vs quota {quota:.3}", SecurityType::ALL[t]);
        }
    }
    ensure!(out.iter().all(|e| e.split.is_some()), "unassigned entry");
    Ok(format!("max deviation from quota {worst:.3} entries"))
}

// 10. command-line determinism

fn cli_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let refs = common::dataset(64);
    let data = common::write_jsonl(&d.join("ref.jsonl"), &refs);
    let preds = common::write_jsonl(&d.join("pred.jsonl"), &common::predictions(&refs));
    let tpl = common::write_jsonl(&d.join("templates.jsonl"), &common::templates());
    let (url, _) = common::serve(common::review_stub);
    let key = [("SECREV_API_KEY", "stub-key")];
    let mut compared = 0;
    for cmd in ["eval", "mask", "review"] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = d.join(format!("{cmd}-{run}.out"));
            let o = common::p(&out);
            let args: Vec<&str> = match cmd {
                "eval" => vec!["--seed", "5", "eval", "--pred", common::p(&preds), "--ref", common::p(&data), "--out", o],
                "mask" => vec!["--seed", "5", "mask", "--input", common::p(&data), "--out", o],
                _ => vec!["--seed", "5", "--concurrency", "4", "review", "--templates", common::p(&tpl), "--input", common::p(&data), "--out", o, "--base-url", &url],
            };
            let r = common::secrev(&args, &key);
            ensure!(r.code == 0, "{cmd} exited {}: {}", r.code, r.stderr);
            outputs.push((fs::read(&out).map_err(|e| e.to_string())?, r.stdout));
        }
        ensure!(!outputs[0].0.is_empty(), "{cmd} wrote nothing");
        ensure!(outputs[0] == outputs[1], "{cmd} output differs between runs");
        compared += 1;
    }
    Ok(format!("{compared} commands byte-identical across two runs"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 10] = [
        ("worked SecureBLEU combination", Duration::from_secs(1), worked_example),
        ("metric identities", Duration::from_secs(5), metric_identity),
        ("detection metrics oracle", Duration::from_secs(10), detection_oracle),
        ("BM25 oracle", Duration::from_secs(10), bm25_oracle),
        ("similarity threshold", Duration::from_secs(1), threshold_semantics),
        ("SA-loss algebra", Duration::from_secs(5), sa_loss_algebra),
        ("review type invariance", Duration::from_secs(10), rarg_type_invariance),
        ("planted keyword recall", Duration::from_secs(10), planted_corpus),
        ("split stratification", Duration::from_secs(5), split_stratification),
        ("CLI determinism", Duration::from_secs(30), cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(_) if elapsed > *budget => (false, format!("over budget: {elapsed:.2?} > {budget:?}")),
            Ok(d) => (true, d),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} criterion {:>2} {name}: {detail} [{elapsed:.2?} / {budget:?}]",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
