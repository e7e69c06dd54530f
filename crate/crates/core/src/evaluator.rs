//! Coverage and factual-consistency scoring with structured feedback.
//!
//! Coverage asks questions generated from the document against the summary:
//! `score_cov = n_a / |Q_d|`, and the unanswered questions form `F_cov`.
//!
//! Consistency generates question/answer pairs from the summary, re-answers
//! the questions from the document, and averages the similarities that clear
//! the threshold: `score_cons = (1/|Q_s|) Σ 1(s_i > τ)·s_i`. Facts with
//! `s_i <= τ` form `F_cons`. Ranks never weight either score; they only drive
//! top-k restriction and feedback order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateway::prompts::format_question_list;
use crate::gateway::{parse_answer_list, parse_qa_block, Gateway, QaPair, TemplateId};
use crate::model::{
    coverage_ratio, Answer, AnswerSet, AnswerSource, ConsistencyTriplet, Diagnostics, DocumentText,
    EvalConfig, EvaluationReport, QuestionOrigin, QuestionRange, QuestionSet, RankedQuestion,
    SummaryText,
};
use crate::textmetrics::{answer_similarity, mean_gated};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub score: f64,
    pub answered: Vec<(RankedQuestion, String)>,
    /// F_cov, in rank order.
    pub unanswered: Vec<RankedQuestion>,
    pub notes: Vec<String>,
}

impl CoverageResult {
    fn from_parts(
        answered: Vec<(RankedQuestion, String)>,
        unanswered: Vec<RankedQuestion>,
        notes: Vec<String>,
    ) -> Self {
        let score = coverage_ratio(answered.len(), answered.len() + unanswered.len());
        Self {
            score,
            answered,
            unanswered,
            notes,
        }
    }

    pub fn question_count(&self) -> usize {
        self.answered.len() + self.unanswered.len()
    }
}

/// One summary fact checked against the document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fact {
    pub question: RankedQuestion,
    pub summary_answer: String,
    pub document_answer: Answer,
    pub similarity: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyResult {
    pub score: f64,
    pub tau: f64,
    pub facts: Vec<Fact>,
    /// F_cons: every fact with similarity <= tau.
    pub triplets: Vec<ConsistencyTriplet>,
    pub notes: Vec<String>,
}

impl ConsistencyResult {
    fn from_facts(facts: Vec<Fact>, tau: f64, notes: Vec<String>) -> Self {
        let sims: Vec<f64> = facts.iter().map(|f| f.similarity).collect();
        let triplets = facts
            .iter()
            .filter(|f| !f.passed)
            .map(|f| ConsistencyTriplet {
                question: f.question.clone(),
                summary_answer: f.summary_answer.clone(),
                document_answer: f.document_answer.clone(),
                similarity: f.similarity,
            })
            .collect();
        Self {
            score: mean_gated(&sims, tau),
            tau,
            facts,
            triplets,
            notes,
        }
    }
}

/// Restriction of a result to questions ranked `<= k`, with the score and
/// feedback recomputed over what remains.
pub trait TopK: Sized {
    fn top_k(&self, k: u32) -> Self;
}

impl TopK for CoverageResult {
    fn top_k(&self, k: u32) -> Self {
        let answered = self
            .answered
            .iter()
            .filter(|(q, _)| q.rank <= k)
            .cloned()
            .collect();
        let unanswered = self
            .unanswered
            .iter()
            .filter(|q| q.rank <= k)
            .cloned()
            .collect();
        Self::from_parts(answered, unanswered, self.notes.clone())
    }
}

impl TopK for ConsistencyResult {
    fn top_k(&self, k: u32) -> Self {
        let facts = self
            .facts
            .iter()
            .filter(|f| f.question.rank <= k)
            .cloned()
            .collect();
        Self::from_facts(facts, self.tau, self.notes.clone())
    }
}

pub fn topk_filter<T: TopK>(result: &T, k: u32) -> T {
    result.top_k(k)
}

/// Q_s with the paired summary answers A_s.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryQa {
    pub questions: QuestionSet,
    pub answers: AnswerSet,
    pub notes: Vec<String>,
}

/// Runs the evaluation prompts through a [`Gateway`] under one config.
pub struct Evaluator<'g> {
    gateway: &'g Gateway,
    config: EvalConfig,
}

impl<'g> Evaluator<'g> {
    pub fn new(gateway: &'g Gateway, config: EvalConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { gateway, config })
    }

    pub fn config(&self) -> &EvalConfig {
        &self.config
    }

    fn generate_pairs(
        &self,
        text: &str,
        range: QuestionRange,
        origin: QuestionOrigin,
    ) -> Result<Vec<QaPair>> {
        let raw = self.gateway.complete_template(
            TemplateId::QaGeneration,
            &[("text", text), ("n_range", &range.to_string())],
            self.config.temperature,
        )?;
        match parse_qa_block(&raw) {
            Err(Error::NoParsableQa) => Err(Error::EmptyQuestionSet(origin.label())),
            other => other,
        }
    }

    fn fit_to_range(
        mut pairs: Vec<QaPair>,
        range: QuestionRange,
        origin: QuestionOrigin,
        notes: &mut Vec<String>,
    ) -> Vec<QaPair> {
        let n = pairs.len();
        if n > range.max as usize {
            notes.push(format!(
                "{} questions: {n} returned, truncated to top {}",
                origin.label(),
                range.max
            ));
            pairs.truncate(range.max as usize);
        } else if n < range.min as usize {
            notes.push(format!(
                "{} questions: {n} returned, fewer than requested minimum {}",
                origin.label(),
                range.min
            ));
        }
        pairs
    }

    /// Q_d. Generated answers are discarded.
    pub fn generate_document_questions(
        &self,
        doc: &DocumentText,
    ) -> Result<(QuestionSet, Vec<String>)> {
        let origin = QuestionOrigin::FromDocument;
        let range = self.config.doc_question_range;
        let pairs = self.generate_pairs(&doc.text, range, origin)?;
        let mut notes = Vec::new();
        let pairs = Self::fit_to_range(pairs, range, origin, &mut notes);
        let questions = QuestionSet::new(origin, pairs.into_iter().map(|p| p.question).collect())?;
        Ok((questions, notes))
    }

    pub fn coverage_evaluate(
        &self,
        doc: &DocumentText,
        summary: &SummaryText,
    ) -> Result<CoverageResult> {
        let (q_d, notes) = self.generate_document_questions(doc)?;
        let list = format_question_list(q_d.iter().map(|q| q.question.as_str()));
        let raw = self.gateway.complete_template(
            TemplateId::CoverageAnswerExtraction,
            &[("summary", &summary.text), ("questions", &list)],
            self.config.temperature,
        )?;
        let answers = parse_answer_list(&raw, &q_d, AnswerSource::FromSummary)?;
        let mut answered = Vec::new();
        let mut unanswered = Vec::new();
        for rec in answers.records {
            match rec.answer {
                Answer::Substantive(text) => answered.push((rec.question, text)),
                Answer::Unanswerable => unanswered.push(rec.question),
            }
        }
        Ok(CoverageResult::from_parts(answered, unanswered, notes))
    }

    /// (Q_s, A_s). Pairs with an empty answer are dropped and the remaining
    /// ranks closed up.
    pub fn generate_summary_qa(&self, summary: &SummaryText) -> Result<SummaryQa> {
        let origin = QuestionOrigin::FromSummary;
        let range = self.config.summary_question_range;
        let pairs = self.generate_pairs(&summary.text, range, origin)?;
        let mut notes = Vec::new();
        let (kept, dropped): (Vec<_>, Vec<_>) =
            pairs.into_iter().partition(|p| !p.answer.trim().is_empty());
        for p in &dropped {
            log::debug!(
                "dropping summary question without answer: {}",
                p.question.question
            );
            notes.push(format!(
                "summary question {} dropped: empty answer ({})",
                p.question.rank, p.question.question
            ));
        }
        let kept: Vec<QaPair> = kept
            .into_iter()
            .enumerate()
            .map(|(i, p)| QaPair {
                question: RankedQuestion::new(i as u32 + 1, p.question.question),
                ..p
            })
            .collect();
        let kept = Self::fit_to_range(kept, range, origin, &mut notes);
        let questions =
            QuestionSet::new(origin, kept.iter().map(|p| p.question.clone()).collect())?;
        let answers = AnswerSet {
            source: AnswerSource::FromSummary,
            records: kept
                .into_iter()
                .map(|p| crate::model::AnswerRecord {
                    question: p.question,
                    answer: Answer::Substantive(p.answer),
                })
                .collect(),
        };
        Ok(SummaryQa {
            questions,
            answers,
            notes,
        })
    }

    pub fn consistency_evaluate(
        &self,
        doc: &DocumentText,
        summary: &SummaryText,
    ) -> Result<ConsistencyResult> {
        let SummaryQa {
            questions,
            answers,
            notes,
        } = self.generate_summary_qa(summary)?;
        let list = format_question_list(questions.iter().map(|q| q.question.as_str()));
        let raw = self.gateway.complete_template(
            TemplateId::ConsistencyAnswerExtraction,
            &[("document", &doc.text), ("questions", &list)],
            self.config.temperature,
        )?;
        let doc_answers = parse_answer_list(&raw, &questions, AnswerSource::FromDocument)?;
        let tau = self.config.tau;
        let mut facts = Vec::with_capacity(questions.len());
        for (s_rec, d_rec) in answers.records.into_iter().zip(doc_answers.records) {
            let summary_answer = s_rec.answer.text().unwrap_or_default().to_string();
            let similarity = match &d_rec.answer {
                Answer::Unanswerable => 0.0,
                Answer::Substantive(d) => answer_similarity(
                    &summary_answer,
                    d,
                    self.config.similarity,
                    self.gateway.embedder(),
                )?,
            };
            facts.push(Fact {
                question: s_rec.question,
                summary_answer,
                document_answer: d_rec.answer,
                similarity,
                passed: similarity > tau,
            });
        }
        Ok(ConsistencyResult::from_facts(facts, tau, notes))
    }

    /// Both dimensions, run concurrently. Either one failing fails the call.
    pub fn evaluate(&self, doc: &DocumentText, summary: &SummaryText) -> Result<EvaluationReport> {
        let (coverage, consistency) = std::thread::scope(|s| {
            let cons = s.spawn(|| self.consistency_evaluate(doc, summary));
            let cov = self.coverage_evaluate(doc, summary);
            (cov, cons.join().expect("consistency evaluation panicked"))
        });
        let (mut coverage, mut consistency) = (coverage?, consistency?);
        if let Some(k) = self.config.top_k {
            coverage = coverage.top_k(k);
            consistency = consistency.top_k(k);
        }
        Ok(assemble_report(coverage, consistency, self.config.top_k))
    }
}

/// Builds the four-tuple report plus diagnostics from the two results.
pub fn assemble_report(
    coverage: CoverageResult,
    consistency: ConsistencyResult,
    top_k: Option<u32>,
) -> EvaluationReport {
    let mut notes = coverage.notes;
    notes.extend(consistency.notes);
    let diagnostics = Diagnostics {
        doc_question_count: coverage.answered.len() + coverage.unanswered.len(),
        answered_count: coverage.answered.len(),
        summary_question_count: consistency.facts.len(),
        fact_similarities: consistency.facts.iter().map(|f| f.similarity).collect(),
        tau: consistency.tau,
        top_k,
        notes,
    };
    EvaluationReport {
        coverage_score: coverage.score,
        consistency_score: consistency.score,
        coverage_feedback: coverage.unanswered,
        consistency_feedback: consistency.triplets,
        diagnostics,
    }
}
