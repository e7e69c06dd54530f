//! Shared domain types. Everything here is an immutable value once built.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::textmetrics;

/// Whitespace-delimited token count after NFC normalization.
pub fn word_count(text: &str) -> usize {
    text.nfc().collect::<String>().split_whitespace().count()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentText {
    pub id: String,
    pub text: String,
    pub word_count: usize,
}

impl DocumentText {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::InvalidValue("document text is empty".into()));
        }
        Ok(Self {
            id: id.into(),
            word_count: word_count(&text),
            text,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryText {
    pub id: String,
    pub source_id: String,
    pub text: String,
    /// Refinement iteration that produced this text; 0 for the initial summary.
    pub generation: u32,
}

impl SummaryText {
    pub fn new(
        id: impl Into<String>,
        source_id: impl Into<String>,
        text: impl Into<String>,
    ) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::InvalidValue("summary text is empty".into()));
        }
        Ok(Self {
            id: id.into(),
            source_id: source_id.into(),
            text,
            generation: 0,
        })
    }

    /// The next generation of this summary with revised text.
    pub fn revised(&self, text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::EmptyRevision);
        }
        Ok(Self {
            id: self.id.clone(),
            source_id: self.source_id.clone(),
            text,
            generation: self.generation + 1,
        })
    }
}

/// A generated question; rank 1 is the most important.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankedQuestion {
    pub rank: u32,
    pub question: String,
}

impl RankedQuestion {
    pub fn new(rank: u32, question: impl Into<String>) -> Self {
        Self {
            rank,
            question: question.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionOrigin {
    FromDocument,
    FromSummary,
}

impl QuestionOrigin {
    pub fn label(self) -> &'static str {
        match self {
            QuestionOrigin::FromDocument => "document",
            QuestionOrigin::FromSummary => "summary",
        }
    }
}

/// Q_d or Q_s. Ranks are unique and run 1..=len in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionSet {
    pub origin: QuestionOrigin,
    pub questions: Vec<RankedQuestion>,
}

impl QuestionSet {
    pub fn new(origin: QuestionOrigin, questions: Vec<RankedQuestion>) -> Result<Self> {
        if questions.is_empty() {
            return Err(Error::EmptyQuestionSet(origin.label()));
        }
        for (i, q) in questions.iter().enumerate() {
            if q.rank as usize != i + 1 {
                return Err(Error::InvalidValue(format!(
                    "question ranks must be contiguous from 1; position {} has rank {}",
                    i + 1,
                    q.rank
                )));
            }
        }
        Ok(Self { origin, questions })
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RankedQuestion> {
        self.questions.iter()
    }
}

/// An extracted answer. `Unanswerable` is a closed variant; downstream code
/// never inspects answer strings for the sentinel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Substantive(String),
    Unanswerable,
}

impl Answer {
    /// Builds a substantive answer, mapping blank text to `Unanswerable`.
    pub fn substantive(text: impl Into<String>) -> Self {
        let text = text.into();
        if text.trim().is_empty() {
            Answer::Unanswerable
        } else {
            Answer::Substantive(text)
        }
    }

    pub fn is_substantive(&self) -> bool {
        matches!(self, Answer::Substantive(_))
    }

    pub fn text(&self) -> Option<&str> {
        match self {
            Answer::Substantive(t) => Some(t),
            Answer::Unanswerable => None,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Substantive(t) => f.write_str(t),
            Answer::Unanswerable => f.write_str("UNANSWERABLE"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub question: RankedQuestion,
    pub answer: Answer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerSource {
    FromSummary,
    FromDocument,
}

/// A_s or A_d: one record per input question, in question order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerSet {
    pub source: AnswerSource,
    pub records: Vec<AnswerRecord>,
}

impl AnswerSet {
    pub fn substantive_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.answer.is_substantive())
            .count()
    }
}

/// A fact whose summary answer failed the similarity threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyTriplet {
    pub question: RankedQuestion,
    pub summary_answer: String,
    pub document_answer: Answer,
    pub similarity: f64,
}

/// Counts needed to recompute both scores of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// |Q_d| after truncation and any top-k restriction.
    pub doc_question_count: usize,
    /// n_a, the number of Q_d questions answered by the summary.
    pub answered_count: usize,
    /// |Q_s| after dropping empty pairs and any top-k restriction.
    pub summary_question_count: usize,
    /// s_i for each summary fact, in rank order.
    pub fact_similarities: Vec<f64>,
    pub tau: f64,
    pub top_k: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub fn coverage_score(&self) -> f64 {
        coverage_ratio(self.answered_count, self.doc_question_count)
    }

    pub fn consistency_score(&self) -> f64 {
        textmetrics::mean_gated(&self.fact_similarities, self.tau)
    }
}

/// n_a / |Q_d|; 0 for an empty question set.
pub fn coverage_ratio(answered: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        answered as f64 / total as f64
    }
}

/// (score_cov, score_cons, F_cov, F_cons) plus the counts behind the scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub coverage_score: f64,
    pub consistency_score: f64,
    pub coverage_feedback: Vec<RankedQuestion>,
    pub consistency_feedback: Vec<ConsistencyTriplet>,
    pub diagnostics: Diagnostics,
}

impl EvaluationReport {
    /// True when both stored scores are bit-identical to the values
    /// recomputed from the diagnostics.
    pub fn scores_match_diagnostics(&self) -> bool {
        self.coverage_score.to_bits() == self.diagnostics.coverage_score().to_bits()
            && self.consistency_score.to_bits() == self.diagnostics.consistency_score().to_bits()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Similarity {
    #[default]
    #[serde(rename = "empm")]
    Empm,
    #[serde(rename = "rouge")]
    Rouge1F1,
    #[serde(rename = "cossim")]
    Cosine,
}

impl Similarity {
    pub fn name(self) -> &'static str {
        match self {
            Similarity::Empm => "empm",
            Similarity::Rouge1F1 => "rouge",
            Similarity::Cosine => "cossim",
        }
    }
}

impl fmt::Display for Similarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Similarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "empm" => Ok(Similarity::Empm),
            "rouge" | "rouge1" | "rouge-1" => Ok(Similarity::Rouge1F1),
            "cossim" | "cosine" => Ok(Similarity::Cosine),
            other => Err(Error::invalid(
                "similarity",
                format!("unknown measure `{other}`"),
            )),
        }
    }
}

/// Inclusive range of question counts requested from the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRange {
    pub min: u32,
    pub max: u32,
}

impl QuestionRange {
    pub const fn new(min: u32, max: u32) -> Self {
        Self { min, max }
    }

    fn check(&self, field: &'static str) -> Result<()> {
        if self.min < 1 {
            return Err(Error::invalid(field, "minimum must be at least 1"));
        }
        if self.min > self.max {
            return Err(Error::invalid(
                field,
                format!("min {} > max {}", self.min, self.max),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for QuestionRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.min, self.max)
    }
}

impl FromStr for QuestionRange {
    type Err = Error;

    /// Parses `MIN:MAX` (a `-` separator is also accepted).
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .or_else(|| s.split_once('-'))
            .ok_or_else(|| Error::InvalidValue(format!("expected MIN:MAX, got `{s}`")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidValue(format!("expected MIN:MAX, got `{s}`")))
        };
        Ok(Self {
            min: parse(lo)?,
            max: parse(hi)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Similarity threshold; facts need s_i > tau to count.
    pub tau: f64,
    pub similarity: Similarity,
    pub doc_question_range: QuestionRange,
    pub summary_question_range: QuestionRange,
    pub top_k: Option<u32>,
    pub temperature: f64,
    pub random_seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tau: 0.6,
            similarity: Similarity::Empm,
            doc_question_range: QuestionRange::new(6, 12),
            summary_question_range: QuestionRange::new(4, 10),
            top_k: None,
            temperature: 1e-10,
            random_seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::invalid(
                "tau",
                format!("{} is outside (0, 1)", self.tau),
            ));
        }
        self.doc_question_range.check("doc_question_range")?;
        self.summary_question_range
            .check("summary_question_range")?;
        if let Some(k) = self.top_k {
            if k == 0 {
                return Err(Error::invalid("top_k", "must be positive"));
            }
            if k > self.doc_question_range.max {
                return Err(Error::invalid(
                    "top_k",
                    format!(
                        "{k} exceeds doc_question_range max {}",
                        self.doc_question_range.max
                    ),
                ));
            }
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::invalid(
                "temperature",
                "must be finite and non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub t_cov: f64,
    pub t_cons: f64,
    pub max_iters: u32,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            t_cov: 0.60,
            t_cons: 0.73,
            max_iters: 3,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.t_cov) {
            return Err(Error::invalid(
                "t_cov",
                format!("{} is outside [0, 1]", self.t_cov),
            ));
        }
        if !(0.0..=1.0).contains(&self.t_cons) {
            return Err(Error::invalid(
                "t_cons",
                format!("{} is outside [0, 1]", self.t_cons),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    Coverage,
    Consistency,
}

/// Natural-language feedback rendered from structured evaluation feedback.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackText {
    pub kind: FeedbackKind,
    pub body: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ThresholdsMet,
    MaxItersReached,
}

/// S(0)..S(i) with one report per evaluation and one feedback text per
/// refinement edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementTrace {
    pub summaries: Vec<SummaryText>,
    pub reports: Vec<EvaluationReport>,
    pub feedback: Vec<FeedbackText>,
    pub termination: Termination,
    /// False when the returned summary was produced by the last allowed
    /// refinement and never evaluated.
    pub final_evaluated: bool,
}

impl RefinementTrace {
    /// The summary the loop returns: the last one in the trace.
    pub fn final_summary(&self) -> &SummaryText {
        self.summaries
            .last()
            .expect("trace always holds the initial summary")
    }
}
