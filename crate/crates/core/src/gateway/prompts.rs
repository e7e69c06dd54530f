//! Prompt templates. Placeholders are `{name}`; rendering substitutes them and
//! does nothing else.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    QaGeneration,
    CoverageAnswerExtraction,
    ConsistencyAnswerExtraction,
    CoverageRefine,
    ConsistencyRefine,
    /// Plain summarization request used only when no initial summary exists.
    InitialSummary,
}

const QA_GENERATION: &str = "\
Task
Generate questions that capture key information in the given text, extract corresponding answers, and rank questions by importance.

Requirements
- Generate n questions (n = {n_range})
- Use diverse question types: What, When, Where, Who, How, Why
- Focus on key information, not trivial details
- Rank by importance (Rank 1 = most important)

Input
Text T:
{text}

Output Format
Question [Rank]: <question_text>
Answer: <answer_text>
...
";

const COVERAGE_ANSWER_EXTRACTION: &str = "\
Task
Extract answers to the given questions from the summary. If a question cannot be answered, respond with \"UNANSWERABLE\".

Requirements
- Extract concise, accurate answers
- Base answers only on information explicitly present in the summary
- Return \"UNANSWERABLE\" if information is insufficient or absent
- Do not infer or generate information beyond what is stated

Input
Summary S:
{summary}

Questions Q_d:
{questions}

Output Format
Question: <question_text>
Answer: <answer_text | \"UNANSWERABLE\">
...
";

const CONSISTENCY_ANSWER_EXTRACTION: &str = "\
Task
Extract ground truth answers to the given questions from the source document for verifying summary consistency.

Requirements
- Extract accurate answers based solely on the document
- Provide concise but complete answers
- Return \"UNANSWERABLE\" if information is not present in the document
- Do not add information beyond what is explicitly stated

Input
Document D:
{document}

Questions Q_s:
{questions}

Output Format
Question: <question_text>
Answer: <answer_text | \"UNANSWERABLE\">
...
";

const COVERAGE_REFINE: &str = "\
Task
Revise the summary to address key questions from the source document that are not adequately covered.

Context
Your initial summary does not sufficiently cover some important information from the source document.

Requirements
- Address all the questions listed below in your revised summary
- Maintain conciseness and readability
- Ensure all added information is accurate and from the source document
- Preserve the quality of existing content while adding missing information

Input
Document D:
{document}

Initial Summary S:
{summary}

Missing Information F_cov:
{feedback}

Output Format
<revised_summary>
";

const CONSISTENCY_REFINE: &str = "\
Task
Revise the summary to ensure factual consistency with the source document by correcting inaccurate or inconsistent statements.

Context
Your initial summary contains some facts that do not align with information in the source document.

Requirements
- Ensure all facts align with the ground truth answers provided below
- Correct any inaccurate or inconsistent statements
- Maintain the overall structure and readability of the summary
- Do not add or remove information beyond what is necessary for consistency

Input
Document D:
{document}

Initial Summary S:
{summary}

Ground Truth Facts F_cons:
{feedback}

Ground Truth Facts Format
Question: <question_text>
Correct Answer: <ground_truth_answer>
...

Output Format
<revised_summary>
";

const INITIAL_SUMMARY: &str = "\
Summarize the following document.

{document}
";

impl TemplateId {
    pub const ALL: [TemplateId; 6] = [
        TemplateId::QaGeneration,
        TemplateId::CoverageAnswerExtraction,
        TemplateId::ConsistencyAnswerExtraction,
        TemplateId::CoverageRefine,
        TemplateId::ConsistencyRefine,
        TemplateId::InitialSummary,
    ];

    pub fn body(self) -> &'static str {
        match self {
            TemplateId::QaGeneration => QA_GENERATION,
            TemplateId::CoverageAnswerExtraction => COVERAGE_ANSWER_EXTRACTION,
            TemplateId::ConsistencyAnswerExtraction => CONSISTENCY_ANSWER_EXTRACTION,
            TemplateId::CoverageRefine => COVERAGE_REFINE,
            TemplateId::ConsistencyRefine => CONSISTENCY_REFINE,
            TemplateId::InitialSummary => INITIAL_SUMMARY,
        }
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(self) -> Vec<&'static str> {
        let mut names = Vec::new();
        for seg in Segments::new(self.body()) {
            if let Segment::Slot(name) = seg {
                if !names.contains(&name) {
                    names.push(name);
                }
            }
        }
        names
    }
}

enum Segment<'a> {
    Literal(&'a str),
    Slot(&'a str),
}

/// Splits a body into literal text and `{identifier}` slots. Braces that do
/// not enclose an identifier are literal.
struct Segments<'a> {
    rest: &'a str,
}

impl<'a> Segments<'a> {
    fn new(body: &'a str) -> Self {
        Self { rest: body }
    }
}

impl<'a> Iterator for Segments<'a> {
    type Item = Segment<'a>;

    fn next(&mut self) -> Option<Segment<'a>> {
        if self.rest.is_empty() {
            return None;
        }
        let mut search_from = 0;
        while let Some(off) = self.rest[search_from..].find('{') {
            let open = search_from + off;
            if let Some(len) = self.rest[open + 1..].find('}') {
                let name = &self.rest[open + 1..open + 1 + len];
                if !name.is_empty() && name.chars().all(|c| c.is_ascii_lowercase() || c == '_') {
                    if open > 0 {
                        let lit = &self.rest[..open];
                        self.rest = &self.rest[open..];
                        return Some(Segment::Literal(lit));
                    }
                    self.rest = &self.rest[len + 2..];
                    return Some(Segment::Slot(name));
                }
            }
            search_from = open + 1;
        }
        let lit = self.rest;
        self.rest = "";
        Some(Segment::Literal(lit))
    }
}

/// Fills every placeholder of `template` from `slots`.
pub fn render_prompt(template: TemplateId, slots: &BTreeMap<&str, String>) -> Result<String> {
    let mut out = String::with_capacity(template.body().len());
    for seg in Segments::new(template.body()) {
        match seg {
            Segment::Literal(s) => out.push_str(s),
            Segment::Slot(name) => {
                let value = slots
                    .get(name)
                    .ok_or_else(|| Error::MissingSlot(name.to_string()))?;
                out.push_str(value);
            }
        }
    }
    Ok(out)
}

/// Convenience wrapper over [`render_prompt`] for literal slot lists.
pub fn render(template: TemplateId, slots: &[(&str, &str)]) -> Result<String> {
    let map = slots.iter().map(|(k, v)| (*k, v.to_string())).collect();
    render_prompt(template, &map)
}

/// Numbered question list used in the answer-extraction prompts.
pub fn format_question_list<'a>(questions: impl IntoIterator<Item = &'a str>) -> String {
    questions
        .into_iter()
        .enumerate()
        .map(|(i, q)| format!("{}. {}", i + 1, q))
        .collect::<Vec<_>>()
        .join("\n")
}
