//! Command-line front end. [`run`] returns the process exit code: 0 on
//! success, 1 for invalid input or configuration, 2 when the backend or the
//! replay cache fails.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluator::Evaluator;
use crate::gateway::{
    Gateway, HttpBackend, HttpBackendConfig, ResponseCache, StubEmbedder, CACHE_DIR_ENV,
    DEFAULT_BACKEND_URL, DEFAULT_IN_FLIGHT, DEFAULT_MAX_OUTPUT_TOKENS, DEFAULT_MODEL,
};
use crate::harness::{
    canonical_dimension, corpus_stats, load_corpus, load_manifest, load_results, persist_results,
    score_groups, CorpusId, CorpusRecord, MetricName, ResultBody, ResultRecord, RunManifest,
    DEFAULT_PAIRS, MANIFEST_FILE,
};
use crate::metaeval::{correlation_report, GranularityChoice, ReportConfig, DEFAULT_ITERATIONS};
use crate::model::{EvalConfig, QuestionRange, RefineConfig, Similarity};
use crate::refiner::refine_loop;
use crate::textmetrics::Embedder;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_BACKEND: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sumeval",
    version,
    about = "QA-based summary evaluation and refinement"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Chat-completions base URL (up to the version segment).
    #[arg(long, global = true, default_value = DEFAULT_BACKEND_URL)]
    backend_url: String,

    #[arg(long, global = true, default_value = DEFAULT_MODEL)]
    model: String,

    /// Answer similarity measure: empm, rouge or cossim.
    #[arg(long, global = true, default_value = "empm")]
    sim: Similarity,

    #[arg(long, global = true, default_value_t = 0.6)]
    tau: f64,

    /// Document question count range, MIN:MAX.
    #[arg(long, global = true, default_value = "6:12")]
    doc_questions: QuestionRange,

    /// Summary question count range, MIN:MAX.
    #[arg(long, global = true, default_value = "4:10")]
    sum_questions: QuestionRange,

    /// Score only the k most important questions.
    #[arg(long, global = true)]
    top_k: Option<u32>,

    /// Response cache directory (defaults to $SUMEVAL_CACHE_DIR).
    #[arg(long, global = true)]
    replay_dir: Option<PathBuf>,

    /// Serve only from the cache; a miss is an error.
    #[arg(long, global = true)]
    strict_replay: bool,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Maximum concurrent records and backend requests.
    #[arg(long, global = true, default_value_t = DEFAULT_IN_FLIGHT)]
    concurrency: usize,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 1e-10)]
    temperature: f64,

    #[arg(long, global = true, default_value_t = DEFAULT_MAX_OUTPUT_TOKENS)]
    max_tokens: u32,

    /// Embedding source for cossim.
    #[arg(long, global = true, value_enum, default_value_t = EmbedderChoice::Stub)]
    embedder: EmbedderChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmbedderChoice {
    /// Hashed character trigrams; offline and deterministic.
    Stub,
    /// The backend's embeddings endpoint.
    Live,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score every summary in a corpus.
    Eval { corpus: PathBuf },
    /// Run the feedback-driven refinement loop on every summary.
    Refine {
        corpus: PathBuf,
        #[arg(long, default_value_t = 0.60)]
        tcov: f64,
        #[arg(long, default_value_t = 0.73)]
        tcons: f64,
        #[arg(long, default_value_t = 3)]
        max_iters: u32,
    },
    /// Correlate persisted scores with the corpus's human judgments.
    Metaeval {
        results: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Dataset label in the report; defaults to the corpus file stem.
        #[arg(long)]
        dataset: Option<String>,
        /// metric=dimension, repeatable; e.g. coverage=relevance.
        #[arg(long = "pair")]
        pairs: Vec<String>,
        #[arg(long, default_value = "auto")]
        granularity: GranularityChoice,
        #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
        iterations: usize,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Word-count and size statistics for a corpus.
    Stats {
        corpus: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Inspect or clear the response cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Debug, Subcommand)]
enum CacheAction {
    Inspect {
        /// List every key.
        #[arg(long)]
        keys: bool,
    },
    Clear,
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            if e.is_backend_failure() {
                EXIT_BACKEND
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Eval { corpus } => eval(g, corpus),
        Command::Refine {
            corpus,
            tcov,
            tcons,
            max_iters,
        } => {
            let rcfg = RefineConfig {
                t_cov: *tcov,
                t_cons: *tcons,
                max_iters: *max_iters,
            };
            refine(g, corpus, rcfg)
        }
        Command::Metaeval {
            results,
            corpus,
            dataset,
            pairs,
            granularity,
            iterations,
            json,
        } => {
            let cfg = ReportConfig {
                iterations: *iterations,
                seed: g.seed,
                granularity: *granularity,
            };
            metaeval(g, results, corpus, dataset.as_deref(), pairs, cfg, *json)
        }
        Command::Stats { corpus, json } => {
            let stats = corpus_stats(&load_corpus(corpus)?)?;
            if *json {
                println!("{}", serde_json::to_string_pretty(&stats)?);
            } else {
                print!("{stats}");
            }
            Ok(())
        }
        Command::Cache { action } => {
            let dir = cache_dir(g).ok_or_else(|| {
                Error::invalid(
                    "replay_dir",
                    format!("pass --replay-dir or set {CACHE_DIR_ENV}"),
                )
            })?;
            let cache = ResponseCache::new(dir);
            match action {
                CacheAction::Inspect { keys } => {
                    let all = cache.keys()?;
                    println!("dir      {}", cache.dir().display());
                    println!("entries  {}", all.len());
                    if *keys {
                        for k in all {
                            println!("{}", k.hex());
                        }
                    }
                }
                CacheAction::Clear => println!("removed {} entries", cache.clear()?),
            }
            Ok(())
        }
    }
}

fn cache_dir(g: &GlobalArgs) -> Option<PathBuf> {
    g.replay_dir.clone().or_else(|| {
        std::env::var_os(CACHE_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    })
}

fn eval_config(g: &GlobalArgs) -> Result<EvalConfig> {
    let cfg = EvalConfig {
        tau: g.tau,
        similarity: g.sim,
        doc_question_range: g.doc_questions,
        summary_question_range: g.sum_questions,
        top_k: g.top_k,
        temperature: g.temperature,
        random_seed: g.seed,
    };
    cfg.validate()?;
    if g.concurrency == 0 {
        return Err(Error::invalid("concurrency", "must be positive"));
    }
    Ok(cfg)
}

fn gateway(g: &GlobalArgs) -> Result<Gateway> {
    let http = Arc::new(HttpBackend::new(HttpBackendConfig::new(
        g.backend_url.clone(),
    )));
    let embedder: Arc<dyn Embedder> = match g.embedder {
        EmbedderChoice::Stub => Arc::new(StubEmbedder),
        EmbedderChoice::Live => http.clone(),
    };
    let mut b = Gateway::builder()
        .embedder(Some(embedder))
        .model(g.model.clone())
        .backend_id(g.backend_url.clone())
        .max_output_tokens(g.max_tokens)
        .in_flight(g.concurrency)
        .strict_replay(g.strict_replay);
    if !g.strict_replay {
        b = b.backend(http);
    }
    if let Some(dir) = cache_dir(g) {
        b = b.cache_dir(dir);
    }
    b.build()
}

fn out_dir(g: &GlobalArgs) -> PathBuf {
    g.out
        .clone()
        .unwrap_or_else(|| PathBuf::from("sumeval-out"))
}

/// Runs `f` over every record on a pool of `--concurrency` threads. The
/// first failure aborts the run.
fn for_each_record<F>(g: &GlobalArgs, records: &[CorpusRecord], f: F) -> Result<Vec<ResultRecord>>
where
    F: Fn(&CorpusRecord) -> Result<ResultRecord> + Send + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(g.concurrency)
        .build()
        .map_err(|e| Error::invalid("concurrency", e.to_string()))?;
    pool.install(|| records.par_iter().map(&f).collect())
}

fn finish(g: &GlobalArgs, manifest: &RunManifest, results: &[ResultRecord]) -> Result<()> {
    let paths = persist_results(manifest, results, out_dir(g))?;
    println!(
        "wrote {} results to {}",
        results.len(),
        paths.results.display()
    );
    Ok(())
}

fn eval(g: &GlobalArgs, corpus_path: &Path) -> Result<()> {
    let cfg = eval_config(g)?;
    let records = load_corpus(corpus_path)?;
    let gw = gateway(g)?;
    let manifest = RunManifest::new(
        "eval",
        cfg.clone(),
        None,
        gw.backend_id(),
        gw.model(),
        CorpusId::of_file(corpus_path)?,
    );
    let evaluator = Evaluator::new(&gw, cfg)?;
    let results = for_each_record(g, &records, |r| {
        let report = evaluator.evaluate(&r.document_text()?, &r.summary_text()?)?;
        log::info!(
            "{}/{}: coverage {:.3} consistency {:.3}",
            r.doc_id,
            r.system_id,
            report.coverage_score,
            report.consistency_score
        );
        Ok(ResultRecord {
            manifest_id: manifest.id.clone(),
            doc_id: r.doc_id.clone(),
            system_id: r.system_id.clone(),
            result: ResultBody::Report(report),
        })
    })?;
    finish(g, &manifest, &results)
}

fn refine(g: &GlobalArgs, corpus_path: &Path, rcfg: RefineConfig) -> Result<()> {
    let cfg = eval_config(g)?;
    rcfg.validate()?;
    let records = load_corpus(corpus_path)?;
    let gw = gateway(g)?;
    let manifest = RunManifest::new(
        "refine",
        cfg.clone(),
        Some(rcfg.clone()),
        gw.backend_id(),
        gw.model(),
        CorpusId::of_file(corpus_path)?,
    );
    let results = for_each_record(g, &records, |r| {
        let trace = refine_loop(&r.document_text()?, r.summary_text()?, &cfg, &rcfg, &gw)
            .map_err(|f| f.error)?;
        log::info!(
            "{}/{}: {} summaries, {:?}",
            r.doc_id,
            r.system_id,
            trace.summaries.len(),
            trace.termination
        );
        Ok(ResultRecord {
            manifest_id: manifest.id.clone(),
            doc_id: r.doc_id.clone(),
            system_id: r.system_id.clone(),
            result: ResultBody::Trace(trace),
        })
    })?;
    finish(g, &manifest, &results)
}

fn parse_pair(s: &str) -> Result<(MetricName, String)> {
    let (metric, dim) = s
        .split_once('=')
        .ok_or_else(|| Error::invalid("pair", format!("expected metric=dimension, got {s:?}")))?;
    let dim = canonical_dimension(dim)
        .ok_or_else(|| Error::invalid("pair", format!("unknown dimension {dim:?}")))?;
    Ok((metric.parse()?, dim.to_string()))
}

fn metaeval(
    g: &GlobalArgs,
    results_path: &Path,
    corpus_path: &Path,
    dataset: Option<&str>,
    pairs: &[String],
    cfg: ReportConfig,
    json: bool,
) -> Result<()> {
    let pairs: Vec<(MetricName, String)> = if pairs.is_empty() {
        DEFAULT_PAIRS
            .iter()
            .map(|(m, d)| (*m, d.to_string()))
            .collect()
    } else {
        pairs.iter().map(|p| parse_pair(p)).collect::<Result<_>>()?
    };
    let results = load_results(results_path)?;
    let corpus = load_corpus(corpus_path)?;
    let manifest_path = results_path.with_file_name(MANIFEST_FILE);
    let measure = if manifest_path.exists() {
        load_manifest(&manifest_path)?
            .eval_config
            .similarity
            .to_string()
    } else {
        "unknown".to_string()
    };
    let dataset = dataset.map(str::to_string).unwrap_or_else(|| {
        corpus_path
            .file_stem()
            .map_or("corpus".into(), |s| s.to_string_lossy().into_owned())
    });
    let groups = score_groups(&results, &corpus, &dataset, &measure, &pairs)?;
    if groups.is_empty() {
        return Err(Error::InvalidValue(
            "no result has a matching human score for the requested dimensions".into(),
        ));
    }
    let report = correlation_report(&groups, &cfg);
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{report}");
    }
    if let Some(dir) = &g.out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("correlations.json");
        fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
            .map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
