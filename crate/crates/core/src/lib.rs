//! Reference-free evaluation of long-document summaries.
//!
//! Summaries are scored on two dimensions through LLM question answering:
//!
//! - **coverage**: the fraction of key questions generated from the source
//!   document that the summary can answer;
//! - **factual consistency**: the thresholded mean similarity between answers
//!   stated by the summary and answers extracted from the source.
//!
//! Both dimensions emit structured feedback (unanswered questions and
//! inconsistent fact triplets) which [`refiner`] turns into revision prompts.
//! [`metaeval`] holds the rank statistics used to validate a metric against
//! human judgments, and [`harness`] the corpus/results file formats.

pub mod cli;
pub mod error;
pub mod evaluator;
pub mod gateway;
pub mod harness;
pub mod metaeval;
pub mod model;
pub mod refiner;
pub mod textmetrics;

pub use error::{Error, Result};
pub use evaluator::Evaluator;
pub use gateway::Gateway;
pub use model::{
    Answer, AnswerRecord, AnswerSet, ConsistencyTriplet, Diagnostics, DocumentText, EvalConfig,
    EvaluationReport, FeedbackKind, FeedbackText, QuestionOrigin, QuestionRange, QuestionSet,
    RankedQuestion, RefineConfig, RefinementTrace, Similarity, SummaryText, Termination,
};
