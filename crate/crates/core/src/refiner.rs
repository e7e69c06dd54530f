//! Threshold-gated iterative refinement.
//!
//! Each round evaluates the current summary. If both scores reach their
//! thresholds the loop stops; otherwise coverage feedback is built when
//! coverage is below threshold, else consistency feedback, and the summary
//! is revised with the matching prompt. After `max_iters` revisions the last
//! summary is returned unevaluated.

use std::fmt;

use crate::error::{Error, Result};
use crate::evaluator::Evaluator;
use crate::gateway::{Gateway, TemplateId};
use crate::model::{
    Answer, ConsistencyTriplet, DocumentText, EvalConfig, EvaluationReport, FeedbackKind,
    FeedbackText, RankedQuestion, RefineConfig, RefinementTrace, SummaryText, Termination,
};

/// Instruction substituted for the correct answer when the document does
/// not support a claim at all.
pub const UNSUPPORTED_CLAIM_LINE: &str =
    "Not stated in the source document; remove this unsupported claim from the summary.";

/// Numbered list of the unanswered questions, most important first.
pub fn construct_coverage_feedback(f_cov: &[RankedQuestion]) -> Result<FeedbackText> {
    if f_cov.is_empty() {
        return Err(Error::EmptyFeedback);
    }
    let mut sorted: Vec<&RankedQuestion> = f_cov.iter().collect();
    sorted.sort_by_key(|q| q.rank);
    let body = sorted
        .iter()
        .enumerate()
        .map(|(i, q)| format!("{}. {}", i + 1, q.question))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(FeedbackText {
        kind: FeedbackKind::Coverage,
        body,
    })
}

/// `Question:` / `Correct Answer:` blocks, one per inconsistent fact.
pub fn construct_consistency_feedback(f_cons: &[ConsistencyTriplet]) -> Result<FeedbackText> {
    if f_cons.is_empty() {
        return Err(Error::EmptyFeedback);
    }
    let mut sorted: Vec<&ConsistencyTriplet> = f_cons.iter().collect();
    sorted.sort_by_key(|t| t.question.rank);
    let body = sorted
        .iter()
        .map(|t| {
            let correct = match &t.document_answer {
                Answer::Substantive(a) => a.as_str(),
                Answer::Unanswerable => UNSUPPORTED_CLAIM_LINE,
            };
            format!(
                "Question: {}\nCorrect Answer: {}",
                t.question.question, correct
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n");
    Ok(FeedbackText {
        kind: FeedbackKind::Consistency,
        body,
    })
}

/// S(i+1) = R(D, S(i), F̃(i)).
pub fn refine_step(
    doc: &DocumentText,
    summary: &SummaryText,
    feedback: &FeedbackText,
    temperature: f64,
    gateway: &Gateway,
) -> Result<SummaryText> {
    if feedback.body.trim().is_empty() {
        return Err(Error::EmptyFeedback);
    }
    let template = match feedback.kind {
        FeedbackKind::Coverage => TemplateId::CoverageRefine,
        FeedbackKind::Consistency => TemplateId::ConsistencyRefine,
    };
    let raw = gateway.complete_template(
        template,
        &[
            ("document", &doc.text),
            ("summary", &summary.text),
            ("feedback", &feedback.body),
        ],
        temperature,
    )?;
    summary.revised(raw.trim())
}

/// Generates S(0) for documents that have no summary yet.
pub fn initial_summarize(
    doc: &DocumentText,
    id: impl Into<String>,
    temperature: f64,
    gateway: &Gateway,
) -> Result<SummaryText> {
    let raw = gateway.complete_template(
        TemplateId::InitialSummary,
        &[("document", &doc.text)],
        temperature,
    )?;
    if raw.trim().is_empty() {
        return Err(Error::EmptyRevision);
    }
    SummaryText::new(id, doc.id.clone(), raw.trim())
}

/// A refinement loop that failed part-way; `trace` holds everything up to
/// the failing step.
#[derive(Debug)]
pub struct RefineFailure {
    pub trace: RefinementTrace,
    pub error: Error,
}

impl fmt::Display for RefineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "refinement failed after {} summaries: {}",
            self.trace.summaries.len(),
            self.error
        )
    }
}

impl std::error::Error for RefineFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Which feedback, if any, a report calls for.
pub fn select_feedback(report: &EvaluationReport, cfg: &RefineConfig) -> Option<FeedbackKind> {
    if report.coverage_score >= cfg.t_cov && report.consistency_score >= cfg.t_cons {
        None
    } else if report.coverage_score < cfg.t_cov {
        Some(FeedbackKind::Coverage)
    } else {
        Some(FeedbackKind::Consistency)
    }
}

fn build_feedback(report: &EvaluationReport, kind: FeedbackKind) -> Result<FeedbackText> {
    match kind {
        FeedbackKind::Coverage => construct_coverage_feedback(&report.coverage_feedback),
        FeedbackKind::Consistency => construct_consistency_feedback(&report.consistency_feedback),
    }
}

pub fn refine_loop(
    doc: &DocumentText,
    initial: SummaryText,
    ecfg: &EvalConfig,
    rcfg: &RefineConfig,
    gateway: &Gateway,
) -> std::result::Result<RefinementTrace, RefineFailure> {
    let mut trace = RefinementTrace {
        summaries: vec![initial],
        reports: Vec::new(),
        feedback: Vec::new(),
        termination: Termination::MaxItersReached,
        final_evaluated: false,
    };
    macro_rules! attempt {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(error) => return Err(RefineFailure { trace, error }),
            }
        };
    }
    attempt!(rcfg.validate());
    let evaluator = attempt!(Evaluator::new(gateway, ecfg.clone()));

    let mut i = 0;
    while i < rcfg.max_iters {
        let current = trace.summaries.last().expect("non-empty").clone();
        let report = attempt!(evaluator.evaluate(doc, &current));
        let kind = select_feedback(&report, rcfg);
        trace.reports.push(report);
        let Some(kind) = kind else {
            trace.termination = Termination::ThresholdsMet;
            trace.final_evaluated = true;
            return Ok(trace);
        };
        let feedback = attempt!(build_feedback(trace.reports.last().unwrap(), kind));
        let next = attempt!(refine_step(
            doc,
            &current,
            &feedback,
            ecfg.temperature,
            gateway
        ));
        trace.feedback.push(feedback);
        trace.summaries.push(next);
        i += 1;
    }
    Ok(trace)
}
