use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::write_atomic;
use crate::error::{CorpusReject, Error, Result};
use crate::model::{word_count, DocumentText, SummaryText};

/// Canonical human-score dimensions.
pub const DIMENSIONS: [&str; 8] = [
    "coverage",
    "consistency",
    "coherence",
    "fluency",
    "relevance",
    "accuracy",
    "clarity",
    "overall",
];

/// Maps a dimension name or common abbreviation to its canonical form.
pub fn canonical_dimension(name: &str) -> Option<&'static str> {
    let key = name.trim().to_lowercase().replace(['_', '-'], " ");
    let canon = match key.as_str() {
        "coverage" | "cov" => "coverage",
        "consistency" | "cons" | "con" | "factual consistency" | "factuality" => "consistency",
        "coherence" | "coh" => "coherence",
        "fluency" | "flu" => "fluency",
        "relevance" | "rel" => "relevance",
        "accuracy" | "acc" => "accuracy",
        "clarity" | "clar" | "cla" => "clarity",
        "overall" | "ovr" | "overall quality" => "overall",
        _ => return None,
    };
    Some(canon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub doc_id: String,
    pub document: String,
    pub system_id: String,
    pub summary: String,
    /// Human scores keyed by canonical dimension.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub human: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
}

impl CorpusRecord {
    pub fn key(&self) -> (&str, &str) {
        (&self.doc_id, &self.system_id)
    }

    pub fn document_text(&self) -> Result<DocumentText> {
        DocumentText::new(self.doc_id.clone(), self.document.clone())
    }

    pub fn summary_text(&self) -> Result<SummaryText> {
        SummaryText::new(
            self.system_id.clone(),
            self.doc_id.clone(),
            self.summary.clone(),
        )
    }
}

fn parse_line(line: &str) -> std::result::Result<CorpusRecord, String> {
    let mut rec: CorpusRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    for (field, value) in [
        ("doc_id", &rec.doc_id),
        ("document", &rec.document),
        ("system_id", &rec.system_id),
        ("summary", &rec.summary),
    ] {
        if value.trim().is_empty() {
            return Err(format!("field `{field}` is empty"));
        }
    }
    let mut human = BTreeMap::new();
    for (dim, score) in std::mem::take(&mut rec.human) {
        let canon = canonical_dimension(&dim)
            .ok_or_else(|| format!("unknown human-score dimension {dim:?}"))?;
        if !score.is_finite() {
            return Err(format!("human score for {dim:?} is not finite"));
        }
        if human.insert(canon.to_string(), score).is_some() {
            return Err(format!("dimension {canon:?} given more than once"));
        }
    }
    rec.human = human;
    Ok(rec)
}

/// Parses line-delimited records. Blank lines are skipped; every bad line
/// is reported, not just the first.
pub fn parse_corpus(reader: impl BufRead) -> Result<Vec<CorpusRecord>> {
    let mut records = Vec::new();
    let mut rejects = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                rejects.push(CorpusReject::Parse {
                    line: line_no,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(rec) => {
                if !seen.insert((rec.doc_id.clone(), rec.system_id.clone())) {
                    rejects.push(CorpusReject::DuplicateKey {
                        line: line_no,
                        doc_id: rec.doc_id,
                        system_id: rec.system_id,
                    });
                } else {
                    records.push(rec);
                }
            }
            Err(reason) => rejects.push(CorpusReject::Parse {
                line: line_no,
                reason,
            }),
        }
    }
    if rejects.is_empty() {
        Ok(records)
    } else {
        Err(Error::CorpusRejected(rejects))
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<CorpusRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(BufReader::new(file))
}

pub fn write_corpus(path: impl AsRef<Path>, records: &[CorpusRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                mean: 0.0,
                std: 0.0,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub records: usize,
    pub documents: usize,
    pub systems: usize,
    /// Over distinct documents (first occurrence of each doc_id).
    pub document_words: MeanStd,
    /// Over all records.
    pub summary_words: MeanStd,
    pub dimensions: Vec<String>,
}

pub fn corpus_stats(records: &[CorpusRecord]) -> Result<CorpusStats> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut docs = HashSet::new();
    let mut doc_words = Vec::new();
    for r in records {
        if docs.insert(r.doc_id.as_str()) {
            doc_words.push(word_count(&r.document) as f64);
        }
    }
    let summary_words: Vec<f64> = records
        .iter()
        .map(|r| word_count(&r.summary) as f64)
        .collect();
    let systems: BTreeSet<&str> = records.iter().map(|r| r.system_id.as_str()).collect();
    let dimensions: BTreeSet<&String> = records.iter().flat_map(|r| r.human.keys()).collect();
    Ok(CorpusStats {
        records: records.len(),
        documents: docs.len(),
        systems: systems.len(),
        document_words: MeanStd::of(&doc_words),
        summary_words: MeanStd::of(&summary_words),
        dimensions: dimensions.into_iter().cloned().collect(),
    })
}

impl std::fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "records    {}", self.records)?;
        writeln!(f, "documents  {}", self.documents)?;
        writeln!(f, "systems    {}", self.systems)?;
        writeln!(
            f,
            "doc words  {:.1} ({:.1})",
            self.document_words.mean, self.document_words.std
        )?;
        writeln!(
            f,
            "sum words  {:.1} ({:.1})",
            self.summary_words.mean, self.summary_words.std
        )?;
        let dims = if self.dimensions.is_empty() {
            "-".to_string()
        } else {
            self.dimensions.join(", ")
        };
        writeln!(f, "dimensions {dims}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(doc: &str, sys: &str, document: &str) -> String {
        serde_json::json!({"doc_id": doc, "system_id": sys, "document": document, "summary": "s"})
            .to_string()
    }

    #[test]
    fn three_valid_lines() {
        let text = [
            line("d1", "a", "x"),
            line("d1", "b", "x"),
            line("d2", "a", "y"),
        ]
        .join("\n");
        assert_eq!(parse_corpus(text.as_bytes()).unwrap().len(), 3);
    }

    #[test]
    fn duplicate_and_missing_field_reported_together() {
        let text = [
            line("d1", "a", "x"),
            line("d1", "a", "x"),
            r#"{"doc_id":"d2","system_id":"a","summary":"s"}"#.to_string(),
        ]
        .join("\n");
        let Err(Error::CorpusRejected(rejects)) = parse_corpus(text.as_bytes()) else {
            panic!("expected rejection")
        };
        assert_eq!(rejects.len(), 2);
        assert!(matches!(
            &rejects[0],
            CorpusReject::DuplicateKey { line: 2, .. }
        ));
        match &rejects[1] {
            CorpusReject::Parse { line, reason } => {
                assert_eq!(*line, 3);
                assert!(reason.contains("document"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn human_aliases_normalized() {
        let text = r#"{"doc_id":"d","system_id":"s","document":"x","summary":"y","human":{"Acc":4,"Coh":3.5,"factual_consistency":1}}"#;
        let recs = parse_corpus(text.as_bytes()).unwrap();
        let keys: Vec<&str> = recs[0].human.keys().map(String::as_str).collect();
        assert_eq!(keys, ["accuracy", "coherence", "consistency"]);
        let bad =
            r#"{"doc_id":"d","system_id":"s","document":"x","summary":"y","human":{"vibes":1}}"#;
        assert!(parse_corpus(bad.as_bytes()).is_err());
    }

    #[test]
    fn population_std() {
        let ten = ["w"; 10].join(" ");
        let twenty = vec!["w"; 20].join(" ");
        let recs = parse_corpus(
            [
                line("d1", "a", &ten),
                line("d2", "a", &twenty),
                line("d2", "b", &twenty),
            ]
            .join("\n")
            .as_bytes(),
        )
        .unwrap();
        let s = corpus_stats(&recs).unwrap();
        assert_eq!(s.documents, 2);
        assert_eq!(s.systems, 2);
        assert_eq!(
            s.document_words,
            MeanStd {
                mean: 15.0,
                std: 5.0
            }
        );
        assert_eq!(corpus_stats(&recs[..1]).unwrap().document_words.std, 0.0);
        assert!(matches!(corpus_stats(&[]), Err(Error::EmptyCorpus)));
    }
}
