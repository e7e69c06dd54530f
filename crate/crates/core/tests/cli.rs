mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sumeval::harness::{load_results, score_groups, write_corpus, ResultBody, DEFAULT_PAIRS};
use sumeval::metaeval::{correlation_report, CorrelationReport, ReportConfig};
use sumeval::model::Similarity;
use sumeval::{EvalConfig, RefineConfig};

fn sumeval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumeval"))
        .args(args)
        .env_remove("SUMEVAL_CACHE_DIR")
        .env_remove("SUMEVAL_API_KEY")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn eval_replay_is_byte_identical_and_feeds_metaeval() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus_path, cache) = (dir.path().join("patents.jsonl"), dir.path().join("cache"));
    let corpus = common::fixture_corpus();
    write_corpus(&corpus_path, &corpus).unwrap();
    let cfg = EvalConfig {
        similarity: Similarity::Rouge1F1,
        ..EvalConfig::default()
    };
    common::record_eval(&cache, &cfg, &corpus);

    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = sumeval(&[
            "eval",
            s(&corpus_path),
            "--sim",
            "rouge",
            "--tau",
            "0.6",
            "--strict-replay",
            "--replay-dir",
            s(&cache),
            "--seed",
            "7",
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(out.join("results.jsonl")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    let results = load_results(dir.path().join("a/results.jsonl")).unwrap();
    assert_eq!(results.len(), 10);
    for r in &results {
        let ResultBody::Report(report) = &r.result else {
            panic!("expected report")
        };
        assert!(report.scores_match_diagnostics());
    }

    let meta_out = dir.path().join("meta");
    let o = sumeval(&[
        "metaeval",
        s(&dir.path().join("a/results.jsonl")),
        "--corpus",
        s(&corpus_path),
        "--granularity",
        "summary",
        "--iterations",
        "2000",
        "--seed",
        "3",
        "--out",
        s(&meta_out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("coverage~relevance"), "{table}");

    let stored: CorrelationReport =
        serde_json::from_str(&fs::read_to_string(meta_out.join("correlations.json")).unwrap())
            .unwrap();
    let pairs: Vec<_> = DEFAULT_PAIRS
        .iter()
        .map(|(m, d)| (*m, d.to_string()))
        .collect();
    let groups = score_groups(&results, &corpus, "patents", "rouge", &pairs).unwrap();
    let cfg = ReportConfig {
        iterations: 2000,
        seed: 3,
        granularity: sumeval::metaeval::GranularityChoice::Summary,
    };
    assert_eq!(stored, correlation_report(&groups, &cfg));
}

#[test]
fn refine_replay() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus_path, cache) = (dir.path().join("c.jsonl"), dir.path().join("cache"));
    let corpus = common::fixture_corpus();
    write_corpus(&corpus_path, &corpus).unwrap();
    let rcfg = RefineConfig {
        t_cov: 0.9,
        t_cons: 0.9,
        max_iters: 2,
    };
    common::record_refine(&cache, &EvalConfig::default(), &rcfg, &corpus);
    let out = dir.path().join("out");
    let o = sumeval(&[
        "refine",
        s(&corpus_path),
        "--tcov",
        "0.9",
        "--tcons",
        "0.9",
        "--max-iters",
        "2",
        "--strict-replay",
        "--replay-dir",
        s(&cache),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = load_results(out.join("results.jsonl")).unwrap();
    assert_eq!(results.len(), 10);
    assert!(results
        .iter()
        .all(|r| matches!(r.result, ResultBody::Trace(_))));
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"t_cov\": 0.9"), "{manifest}");
}

#[test]
fn invalid_tau_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("c.jsonl");
    write_corpus(&corpus_path, &common::fixture_corpus()).unwrap();
    let o = sumeval(&["eval", s(&corpus_path), "--tau", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("InvalidConfig"));
}

#[test]
fn strict_replay_with_empty_cache_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("c.jsonl");
    write_corpus(&corpus_path, &common::fixture_corpus()).unwrap();
    let o = sumeval(&[
        "eval",
        s(&corpus_path),
        "--strict-replay",
        "--replay-dir",
        s(&dir.path().join("empty")),
        "--out",
        s(&dir.path().join("out")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ReplayMiss"));
    assert!(!dir.path().join("out/results.jsonl").exists());
}

#[test]
fn stats_and_cache_commands() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("c.jsonl");
    let corpus = common::fixture_corpus();
    write_corpus(&corpus_path, &corpus).unwrap();

    let o = sumeval(&["stats", s(&corpus_path), "--json"]);
    assert!(o.status.success());
    let stats: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stats["documents"], 5);
    assert_eq!(stats["systems"], 2);

    let cache = dir.path().join("cache");
    common::record_eval(&cache, &EvalConfig::default(), &corpus[..1]);
    let o = sumeval(&["cache", "inspect", "--replay-dir", s(&cache)]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("entries  4"));
    let o = sumeval(&["cache", "clear", "--replay-dir", s(&cache)]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("removed 4 entries"));

    let o = sumeval(&["cache", "inspect"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_corpus_lists_every_bad_line() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("c.jsonl");
    fs::write(
        &corpus_path,
        "{\"doc_id\":\"d\",\"system_id\":\"s\",\"document\":\"x\",\"summary\":\"y\"}\nnot json\n{\"doc_id\":\"d\",\"system_id\":\"s\",\"document\":\"x\",\"summary\":\"y\"}\n",
    )
    .unwrap();
    let o = sumeval(&["stats", s(&corpus_path)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("line 3"), "{err}");
}
