//! Parsers for the line-oriented completion formats:
//!
//! ```text
//! Question [Rank]: <question_text>
//! Answer: <answer_text>
//! ```
//!
//! and, for answer extraction,
//!
//! ```text
//! Question: <question_text>
//! Answer: <answer_text | "UNANSWERABLE">
//! ```
//!
//! Both tolerate prose around the pairs, blank lines, markdown emphasis and
//! list markers in front of the labels.

use std::sync::OnceLock;

use regex::Regex;

use crate::error::{Error, Result};
use crate::model::{Answer, AnswerRecord, AnswerSet, AnswerSource, QuestionSet, RankedQuestion};
use crate::textmetrics::tokenize;

fn ranked_question_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i)^[\s>*#\-]*Question\s*\[\s*(\d+)\s*\]\s*\**\s*[:.]\s*\**\s*(.*?)\s*\**\s*$",
        )
        .unwrap()
    })
}

fn question_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^[\s>*#\-]*(?:\d+[.)]\s*)?Question(?:\s*\[?\s*\d+\s*\]?)?\s*\**\s*:\s*\**\s*(.*?)\s*\**\s*$")
            .unwrap()
    })
}

fn answer_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^[\s>*#\-]*Answer\s*\**\s*:\s*\**\s*(.*?)\s*\**\s*$").unwrap()
    })
}

/// One generated question with its answer. The answer is empty when the
/// completion was cut off before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaPair {
    pub question: RankedQuestion,
    pub answer: String,
}

/// Extracts `Question [k]:` / `Answer:` pairs.
///
/// Output is sorted by the stated rank (stable, so the first of several
/// equal ranks stays first) and then renumbered 1..=n.
pub fn parse_qa_block(raw: &str) -> Result<Vec<QaPair>> {
    let mut pairs: Vec<(u64, String, Option<String>)> = Vec::new();
    for line in raw.lines() {
        if let Some(c) = ranked_question_re().captures(line) {
            let rank = c[1].parse::<u64>().unwrap_or(u64::MAX);
            let text = c[2].trim().to_string();
            if !text.is_empty() {
                pairs.push((rank, text, None));
            }
        } else if let Some(c) = answer_re().captures(line) {
            if let Some(last) = pairs.last_mut() {
                if last.2.is_none() {
                    last.2 = Some(c[1].trim().to_string());
                }
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::NoParsableQa);
    }
    pairs.sort_by_key(|p| p.0);
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(i, (_, q, a))| QaPair {
            question: RankedQuestion::new(i as u32 + 1, q),
            answer: a.unwrap_or_default(),
        })
        .collect())
}

/// Renders pairs in the generation output format; inverse of
/// [`parse_qa_block`] on well-formed input.
pub fn format_qa_block(pairs: &[QaPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&format!(
            "Question [{}]: {}\n",
            p.question.rank, p.question.question
        ));
        out.push_str(&format!("Answer: {}\n", p.answer));
    }
    out
}

/// True when an answer string denotes the UNANSWERABLE sentinel.
pub fn is_unanswerable(answer: &str) -> bool {
    let cleaned: String = answer
        .trim()
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect();
    cleaned.is_empty() || cleaned == "unanswerable"
}

fn normalize_question(q: &str) -> String {
    tokenize(q).tokens.join(" ")
}

/// Aligns an answer-extraction completion to `questions`.
///
/// Pairs are matched by normalized question text first; questions left over
/// take the parsed pair at their own position if that pair is still unused.
/// Anything still unmatched is `Unanswerable`.
pub fn parse_answer_list(
    raw: &str,
    questions: &QuestionSet,
    source: AnswerSource,
) -> Result<AnswerSet> {
    let mut parsed: Vec<(Option<String>, String)> = Vec::new();
    let mut pending_question: Option<String> = None;
    for line in raw.lines() {
        if let Some(c) = question_re().captures(line) {
            pending_question = Some(c[1].trim().to_string());
        } else if let Some(c) = answer_re().captures(line) {
            parsed.push((pending_question.take(), c[1].trim().to_string()));
        }
    }
    if parsed.is_empty() && !questions.is_empty() {
        return Err(Error::NoParsableQa);
    }

    let keys: Vec<Option<String>> = parsed
        .iter()
        .map(|(q, _)| q.as_deref().map(normalize_question))
        .collect();
    let mut used = vec![false; parsed.len()];
    let mut assigned: Vec<Option<usize>> = vec![None; questions.len()];

    for (qi, q) in questions.iter().enumerate() {
        let want = normalize_question(&q.question);
        if let Some(pi) =
            (0..parsed.len()).find(|&pi| !used[pi] && keys[pi].as_ref() == Some(&want))
        {
            used[pi] = true;
            assigned[qi] = Some(pi);
        }
    }
    for qi in 0..questions.len() {
        if assigned[qi].is_none() && qi < parsed.len() && !used[qi] {
            used[qi] = true;
            assigned[qi] = Some(qi);
        }
    }

    let records = questions
        .iter()
        .zip(assigned)
        .map(|(q, pi)| {
            let answer = match pi {
                Some(pi) if !is_unanswerable(&parsed[pi].1) => {
                    Answer::Substantive(parsed[pi].1.clone())
                }
                _ => Answer::Unanswerable,
            };
            AnswerRecord {
                question: q.clone(),
                answer,
            }
        })
        .collect();
    Ok(AnswerSet { source, records })
}
