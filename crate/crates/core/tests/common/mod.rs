//! Shared fixtures: a deterministic stand-in LLM, fixture corpora and
//! independent reference implementations used as test oracles.
#![allow(dead_code)]

pub mod oracles;
pub mod parser_cases;

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use sumeval::gateway::{CompletionBackend, CompletionRequest, DEFAULT_BACKEND_URL, DEFAULT_MODEL};
use sumeval::harness::CorpusRecord;
use sumeval::model::QuestionRange;
use sumeval::refiner::UNSUPPORTED_CLAIM_LINE;
use sumeval::{DocumentText, EvalConfig, Gateway, Result, SummaryText};

/// Fixture texts are lines of `question => answer`; other lines are prose
/// the fake model ignores.
pub fn facts_text(facts: &[(&str, &str)]) -> String {
    facts
        .iter()
        .map(|(q, a)| format!("{q} => {a}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn parse_facts(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(" => "))
        .map(|(q, a)| (q.trim().to_string(), a.trim().to_string()))
        .collect()
}

fn lookup<'a>(facts: &'a [(String, String)], q: &str) -> Option<&'a str> {
    facts
        .iter()
        .find(|(fq, _)| fq == q)
        .map(|(_, a)| a.as_str())
}

/// Text between `"{start}\n"` and the next `"\n\n{end}"`.
fn section<'a>(prompt: &'a str, start: &str, end: &str) -> &'a str {
    let head = format!("{start}\n");
    let from = prompt
        .find(&head)
        .unwrap_or_else(|| panic!("no {start:?} in prompt"))
        + head.len();
    let rest = &prompt[from..];
    let to = rest.find(&format!("\n\n{end}")).unwrap_or(rest.len());
    &rest[..to]
}

/// Strips the `1. ` prefixes of a rendered question list.
fn question_list(block: &str) -> Vec<String> {
    block
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| match l.split_once(". ") {
            Some((n, q)) if n.chars().all(|c| c.is_ascii_digit()) => q.to_string(),
            _ => l.to_string(),
        })
        .collect()
}

fn answer_block(questions: &[String], facts: &[(String, String)]) -> String {
    questions
        .iter()
        .map(|q| {
            format!(
                "Question: {q}\nAnswer: {}",
                lookup(facts, q).unwrap_or("UNANSWERABLE")
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn render_facts(facts: &[(String, String)]) -> String {
    facts
        .iter()
        .map(|(q, a)| format!("{q} => {a}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Answers every prompt from the `q => a` lines in its inputs:
///
/// - question generation lists the text's facts in order;
/// - answer extraction looks questions up in the summary or document;
/// - coverage revision appends the document's answers to the missing questions;
/// - consistency revision overwrites (or drops) the listed facts.
#[derive(Default)]
pub struct ScriptedLlm {
    pub blank_revisions: bool,
    /// Cap on facts a coverage revision adds.
    pub max_additions: Option<usize>,
    pub calls: AtomicUsize,
}

impl ScriptedLlm {
    pub fn respond(&self, prompt: &str) -> String {
        let task = prompt.lines().nth(1).unwrap_or_default();
        if task.starts_with("Generate questions") {
            let facts = parse_facts(section(prompt, "Text T:", "Output Format"));
            return facts
                .iter()
                .enumerate()
                .map(|(i, (q, a))| format!("Question [{}]: {q}\nAnswer: {a}", i + 1))
                .collect::<Vec<_>>()
                .join("\n");
        }
        if task.starts_with("Extract answers") {
            let facts = parse_facts(section(prompt, "Summary S:", "Questions Q_d:"));
            let qs = question_list(section(prompt, "Questions Q_d:", "Output Format"));
            return answer_block(&qs, &facts);
        }
        if task.starts_with("Extract ground truth") {
            let facts = parse_facts(section(prompt, "Document D:", "Questions Q_s:"));
            let qs = question_list(section(prompt, "Questions Q_s:", "Output Format"));
            return answer_block(&qs, &facts);
        }
        if task.starts_with("Revise the summary to address") {
            if self.blank_revisions {
                return "  \n".into();
            }
            let doc = parse_facts(section(prompt, "Document D:", "Initial Summary S:"));
            let mut summary = parse_facts(section(
                prompt,
                "Initial Summary S:",
                "Missing Information F_cov:",
            ));
            let missing = question_list(section(
                prompt,
                "Missing Information F_cov:",
                "Output Format",
            ));
            let cap = self.max_additions.unwrap_or(missing.len());
            for q in missing.into_iter().take(cap) {
                if let Some(a) = lookup(&doc, &q) {
                    summary.push((q.clone(), a.to_string()));
                }
            }
            return render_facts(&summary);
        }
        if task.starts_with("Revise the summary to ensure") {
            if self.blank_revisions {
                return String::new();
            }
            let mut summary = parse_facts(section(
                prompt,
                "Initial Summary S:",
                "Ground Truth Facts F_cons:",
            ));
            let fb = section(
                prompt,
                "Ground Truth Facts F_cons:",
                "Ground Truth Facts Format",
            );
            for block in fb.split("\n\n") {
                let mut lines = block.lines();
                let q = lines
                    .next()
                    .and_then(|l| l.strip_prefix("Question: "))
                    .unwrap_or_default();
                let a = lines
                    .next()
                    .and_then(|l| l.strip_prefix("Correct Answer: "))
                    .unwrap_or_default();
                if a == UNSUPPORTED_CLAIM_LINE {
                    summary.retain(|(fq, _)| fq != q);
                } else if let Some(slot) = summary.iter_mut().find(|(fq, _)| fq == q) {
                    slot.1 = a.to_string();
                }
            }
            return render_facts(&summary);
        }
        if task.starts_with("Summarize the following document.") || prompt.starts_with("Summarize")
        {
            let doc = parse_facts(prompt);
            return render_facts(&doc[..doc.len().min(2)]);
        }
        panic!("unrecognised prompt:\n{prompt}");
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl CompletionBackend for ScriptedLlm {
    fn complete(&self, request: &CompletionRequest) -> Result<String> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(self.respond(&request.prompt))
    }
}

pub fn scripted() -> Arc<ScriptedLlm> {
    Arc::new(ScriptedLlm::default())
}

/// Gateway answering from `llm` with no cache.
pub fn live_gateway(llm: Arc<ScriptedLlm>) -> Gateway {
    Gateway::builder().backend(llm).build().unwrap()
}

/// Gateway that records `llm`'s answers into `dir` under the identity the
/// CLI uses by default, so a later strict replay run hits every key.
pub fn recording_gateway(llm: Arc<ScriptedLlm>, dir: &Path) -> Gateway {
    Gateway::builder()
        .backend(llm)
        .cache_dir(dir)
        .model(DEFAULT_MODEL)
        .backend_id(DEFAULT_BACKEND_URL)
        .build()
        .unwrap()
}

const QUESTIONS: [&str; 8] = [
    "Who filed the patent?",
    "When was it granted?",
    "Where is the lab?",
    "What does the device measure?",
    "How is it powered?",
    "Why was it redesigned?",
    "What material is the casing?",
    "Who funded the work?",
];

/// Ten records over five documents and two systems. `full` states every
/// fact of its document, with one wrong answer on odd documents; `brief`
/// states the first `3 + d % 3` facts.
pub fn fixture_corpus() -> Vec<CorpusRecord> {
    let mut out = Vec::new();
    for d in 0..5usize {
        let doc_facts: Vec<(String, String)> = QUESTIONS[..7]
            .iter()
            .enumerate()
            .map(|(i, q)| (q.to_string(), format!("value {} of doc {d}", i + 1)))
            .collect();
        let document = format!(
            "Report number {d}.\n{}\nEnd of report.",
            render_facts(&doc_facts)
        );
        let mut full = doc_facts.clone();
        if d % 2 == 1 {
            full[1].1 = "sometime in spring".into();
        }
        let brief = doc_facts[..3 + d % 3].to_vec();
        for (system, facts, rel) in [
            ("full", &full, 4.0 + (d % 2) as f64),
            ("brief", &brief, 1.0 + d as f64 / 2.0),
        ] {
            let mut human = std::collections::BTreeMap::new();
            human.insert("relevance".to_string(), rel);
            human.insert(
                "consistency".to_string(),
                if system == "full" && d % 2 == 1 {
                    2.0
                } else {
                    5.0
                },
            );
            out.push(CorpusRecord {
                doc_id: format!("doc{d}"),
                document: document.clone(),
                system_id: system.into(),
                summary: render_facts(facts),
                human,
                split: None,
            });
        }
    }
    out
}

/// Question ranges wide enough that fixtures of any size fit.
pub fn loose_config() -> EvalConfig {
    EvalConfig {
        doc_question_range: QuestionRange::new(1, 12),
        summary_question_range: QuestionRange::new(1, 12),
        ..EvalConfig::default()
    }
}

pub fn doc_facts(n: usize) -> Vec<(String, String)> {
    (1..=n)
        .map(|i| {
            (
                format!("What is item {i}?"),
                format!("value {i} of the record"),
            )
        })
        .collect()
}

pub fn document(n: usize) -> DocumentText {
    DocumentText::new("doc", format!("Record.\n{}", render_facts(&doc_facts(n)))).unwrap()
}

pub fn summary(facts: &[(String, String)]) -> SummaryText {
    let text = if facts.is_empty() {
        "A summary stating nothing.".into()
    } else {
        render_facts(facts)
    };
    SummaryText::new("sys", "doc", text).unwrap()
}

/// Summary stating doc facts `1..=n` with the answers of `wrong` replaced
/// by something unrelated.
pub fn summary_of(doc_n: usize, n: usize, wrong: &[usize]) -> SummaryText {
    let mut facts = doc_facts(doc_n);
    facts.truncate(n);
    for &w in wrong {
        facts[w - 1].1 = "nothing known here".into();
    }
    summary(&facts)
}

/// Evaluates every record through a recording gateway so that a strict
/// replay of the same command finds every completion in `cache`.
pub fn record_eval(cache: &Path, cfg: &EvalConfig, corpus: &[CorpusRecord]) {
    let gw = recording_gateway(scripted(), cache);
    let ev = sumeval::Evaluator::new(&gw, cfg.clone()).unwrap();
    for r in corpus {
        ev.evaluate(&r.document_text().unwrap(), &r.summary_text().unwrap())
            .unwrap();
    }
}

pub fn record_refine(
    cache: &Path,
    cfg: &EvalConfig,
    rcfg: &sumeval::RefineConfig,
    corpus: &[CorpusRecord],
) {
    let gw = recording_gateway(scripted(), cache);
    for r in corpus {
        sumeval::refiner::refine_loop(
            &r.document_text().unwrap(),
            r.summary_text().unwrap(),
            cfg,
            rcfg,
            &gw,
        )
        .unwrap();
    }
}
