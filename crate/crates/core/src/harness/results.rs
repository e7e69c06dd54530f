use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::corpus::CorpusRecord;
use super::write_atomic;
use crate::error::{Error, Result};
use crate::metaeval::{CorrelationGroup, Granularity, ScoreMatrix, ScoreRow};
use crate::model::{EvalConfig, EvaluationReport, RefineConfig, RefinementTrace};

pub const RESULTS_FILE: &str = "results.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusId {
    pub path: String,
    pub sha256: String,
}

impl CorpusId {
    pub fn of_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Digest of every other field except `timestamp`; identical runs share it.
    pub id: String,
    pub command: String,
    pub eval_config: EvalConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_config: Option<RefineConfig>,
    pub backend: String,
    pub model: String,
    pub corpus: CorpusId,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub toolkit_version: String,
    pub seed: u64,
}

impl RunManifest {
    pub fn new(
        command: impl Into<String>,
        eval_config: EvalConfig,
        refine_config: Option<RefineConfig>,
        backend: impl Into<String>,
        model: impl Into<String>,
        corpus: CorpusId,
    ) -> Self {
        let seed = eval_config.random_seed;
        let mut m = Self {
            id: String::new(),
            command: command.into(),
            eval_config,
            refine_config,
            backend: backend.into(),
            model: model.into(),
            corpus,
            timestamp: 0,
            toolkit_version: env!("CARGO_PKG_VERSION").into(),
            seed,
        };
        m.id = m.content_id();
        m.timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        m
    }

    fn content_id(&self) -> String {
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        let obj = v.as_object_mut().expect("manifest is an object");
        obj.remove("id");
        obj.remove("timestamp");
        let canonical = serde_json::to_vec(&v).expect("value serializes");
        hex::encode(Sha256::digest(&canonical))[..16].to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultBody {
    Report(EvaluationReport),
    Trace(RefinementTrace),
}

impl ResultBody {
    /// The report describing the final summary, if it was evaluated.
    pub fn final_report(&self) -> Option<&EvaluationReport> {
        match self {
            ResultBody::Report(r) => Some(r),
            ResultBody::Trace(t) if t.final_evaluated => t.reports.last(),
            ResultBody::Trace(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub manifest_id: String,
    pub doc_id: String,
    pub system_id: String,
    pub result: ResultBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersistedPaths {
    pub results: PathBuf,
    pub manifest: PathBuf,
}

/// Writes the results file sorted by (doc_id, system_id) and the manifest
/// beside it. Both files are replaced atomically.
pub fn persist_results(
    manifest: &RunManifest,
    records: &[ResultRecord],
    out_dir: impl AsRef<Path>,
) -> Result<PersistedPaths> {
    let out_dir = out_dir.as_ref();
    if let Some(r) = records.iter().find(|r| r.manifest_id != manifest.id) {
        return Err(Error::InvalidValue(format!(
            "result ({}, {}) belongs to manifest {}, not {}",
            r.doc_id, r.system_id, r.manifest_id, manifest.id
        )));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut sorted: Vec<&ResultRecord> = records.iter().collect();
    sorted.sort_by(|a, b| (&a.doc_id, &a.system_id).cmp(&(&b.doc_id, &b.system_id)));
    let mut body = String::new();
    for r in sorted {
        body.push_str(&serde_json::to_string(r)?);
        body.push('\n');
    }
    let results = out_dir.join(RESULTS_FILE);
    let manifest_path = out_dir.join(MANIFEST_FILE);
    write_atomic(&results, body.as_bytes())?;
    let mut mjson = serde_json::to_string_pretty(manifest)?;
    mjson.push('\n');
    write_atomic(&manifest_path, mjson.as_bytes())?;
    Ok(PersistedPaths {
        results,
        manifest: manifest_path,
    })
}

pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| {
                Error::InvalidValue(format!("{}: record {}: {e}", path.display(), i + 1))
            })
        })
        .collect()
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<RunManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Which stored metric score a correlation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Coverage,
    Consistency,
}

impl MetricName {
    pub fn score(self, report: &EvaluationReport) -> f64 {
        match self {
            MetricName::Coverage => report.coverage_score,
            MetricName::Consistency => report.consistency_score,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricName::Coverage => "coverage",
            MetricName::Consistency => "consistency",
        }
    }
}

impl std::str::FromStr for MetricName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "coverage" | "cov" => Ok(Self::Coverage),
            "consistency" | "cons" => Ok(Self::Consistency),
            _ => Err(Error::invalid("metric", format!("unknown metric {s:?}"))),
        }
    }
}

/// Metric/human-dimension pairs correlated when none are given.
pub const DEFAULT_PAIRS: [(MetricName, &str); 4] = [
    (MetricName::Coverage, "coverage"),
    (MetricName::Coverage, "relevance"),
    (MetricName::Consistency, "consistency"),
    (MetricName::Consistency, "accuracy"),
];

/// Joins results with corpus human scores into one summary-level matrix
/// per (metric, dimension) pair. Pairs whose dimension no record carries
/// are skipped; records without an evaluated final summary are left out.
pub fn score_groups(
    results: &[ResultRecord],
    corpus: &[CorpusRecord],
    dataset: &str,
    measure: &str,
    pairs: &[(MetricName, String)],
) -> Result<Vec<CorrelationGroup>> {
    let human: HashMap<(&str, &str), &CorpusRecord> = corpus
        .iter()
        .map(|r| ((r.doc_id.as_str(), r.system_id.as_str()), r))
        .collect();
    let mut groups = Vec::new();
    for (metric, dimension) in pairs {
        let mut rows = Vec::new();
        for r in results {
            let Some(report) = r.result.final_report() else {
                continue;
            };
            let Some(rec) = human.get(&(r.doc_id.as_str(), r.system_id.as_str())) else {
                continue;
            };
            let Some(&h) = rec.human.get(dimension) else {
                continue;
            };
            rows.push(ScoreRow {
                item_id: r.doc_id.clone(),
                system_id: r.system_id.clone(),
                metric_score: metric.score(report),
                human_score: h,
            });
        }
        if rows.is_empty() {
            continue;
        }
        groups.push(CorrelationGroup {
            dataset: dataset.into(),
            dimension: format!("{}~{}", metric.name(), dimension),
            measure: measure.into(),
            matrix: ScoreMatrix::new(rows, Granularity::SummaryLevel)?,
        });
    }
    Ok(groups)
}
