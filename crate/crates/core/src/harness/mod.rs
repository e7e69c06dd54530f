//! Corpus ingestion, corpus statistics and results persistence.

mod corpus;
mod results;

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

pub use corpus::{
    canonical_dimension, corpus_stats, load_corpus, parse_corpus, write_corpus, CorpusRecord,
    CorpusStats, MeanStd, DIMENSIONS,
};
pub use results::{
    load_manifest, load_results, persist_results, score_groups, CorpusId, MetricName,
    PersistedPaths, ResultBody, ResultRecord, RunManifest, DEFAULT_PAIRS, MANIFEST_FILE,
    RESULTS_FILE,
};

use crate::error::{Error, Result};

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(
        ".{name}.{}.{}.tmp",
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
