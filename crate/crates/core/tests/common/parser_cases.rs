//! Completion texts as models actually return them, with the pairs the
//! parsers must recover.

use sumeval::gateway::{parse_answer_list, parse_qa_block};
use sumeval::model::{AnswerSource, QuestionOrigin};
use sumeval::{Answer, Error, QuestionSet, RankedQuestion};

pub enum Expect {
    /// Generated pairs in final rank order.
    Qa(Vec<(&'static str, &'static str)>),
    /// Extracted answers for the given questions; `None` is UNANSWERABLE.
    Answers(&'static [&'static str], Vec<Option<&'static str>>),
    NoQa,
    NoAnswers(&'static [&'static str]),
}

pub struct Case {
    pub name: &'static str,
    pub raw: &'static str,
    pub expect: Expect,
}

fn qa(name: &'static str, raw: &'static str, pairs: &[(&'static str, &'static str)]) -> Case {
    Case {
        name,
        raw,
        expect: Expect::Qa(pairs.to_vec()),
    }
}

fn ans(
    name: &'static str,
    raw: &'static str,
    questions: &'static [&'static str],
    answers: &[Option<&'static str>],
) -> Case {
    Case {
        name,
        raw,
        expect: Expect::Answers(questions, answers.to_vec()),
    }
}

const WHO_WHEN: &[&str] = &["Who built it?", "When was it built?"];
const THREE: &[&str] = &["Who built it?", "When was it built?", "Why was it built?"];

pub fn cases() -> Vec<Case> {
    vec![
        qa(
            "well_formed",
            "Question [1]: Who built it?\nAnswer: Ada\nQuestion [2]: When?\nAnswer: 1843\nQuestion [3]: Where?\nAnswer: London",
            &[("Who built it?", "Ada"), ("When?", "1843"), ("Where?", "London")],
        ),
        qa(
            "reordered_ranks",
            "Question [3]: Where?\nAnswer: London\nQuestion [1]: Who built it?\nAnswer: Ada\nQuestion [2]: When?\nAnswer: 1843",
            &[("Who built it?", "Ada"), ("When?", "1843"), ("Where?", "London")],
        ),
        qa(
            "prose_padded",
            "Sure! Here are the questions, ranked:\n\nQuestion [1]: Who built it?\nAnswer: Ada\n\nQuestion [2]: When?\nAnswer: 1843\n\nLet me know if you need more.",
            &[("Who built it?", "Ada"), ("When?", "1843")],
        ),
        qa(
            "markdown_bold",
            "**Question [1]:** Who built it?\n**Answer:** Ada\n**Question [2]:** When?\n**Answer:** 1843",
            &[("Who built it?", "Ada"), ("When?", "1843")],
        ),
        qa(
            "list_markers",
            "- Question [1]: Who built it?\n  - Answer: Ada\n* Question [2]: When?\n* Answer: 1843",
            &[("Who built it?", "Ada"), ("When?", "1843")],
        ),
        qa(
            "blank_lines",
            "\n\nQuestion [1]: Who built it?\n\nAnswer: Ada\n\n\nQuestion [2]: When?\n\nAnswer: 1843\n",
            &[("Who built it?", "Ada"), ("When?", "1843")],
        ),
        qa(
            "truncated_before_answer",
            "Question [1]: Who built it?\nAnswer: Ada\nQuestion [2]: When?",
            &[("Who built it?", "Ada"), ("When?", "")],
        ),
        qa(
            "truncated_mid_question",
            "Question [1]: Who built it?\nAnswer: Ada\nQuestion [2]: Why did th",
            &[("Who built it?", "Ada"), ("Why did th", "")],
        ),
        qa(
            "lowercase_labels",
            "question [1]: Who built it?\nanswer: Ada",
            &[("Who built it?", "Ada")],
        ),
        qa(
            "spaced_brackets",
            "Question [ 2 ] : When?\nAnswer : 1843\nQuestion [ 1 ] : Who built it?\nAnswer : Ada",
            &[("Who built it?", "Ada"), ("When?", "1843")],
        ),
        qa(
            "duplicate_ranks_stable",
            "Question [1]: First?\nAnswer: a\nQuestion [1]: Second?\nAnswer: b",
            &[("First?", "a"), ("Second?", "b")],
        ),
        qa(
            "rank_gaps_renumbered",
            "Question [9]: Last?\nAnswer: c\nQuestion [1]: First?\nAnswer: a\nQuestion [5]: Middle?\nAnswer: b",
            &[("First?", "a"), ("Middle?", "b"), ("Last?", "c")],
        ),
        qa(
            "heading_markers",
            "### Question [1]: Who built it?\nAnswer: Ada",
            &[("Who built it?", "Ada")],
        ),
        qa(
            "quoted",
            "> Question [1]: Who built it?\n> Answer: Ada",
            &[("Who built it?", "Ada")],
        ),
        qa(
            "colon_in_answer",
            "Question [1]: What ratio?\nAnswer: Ratio: 3:1",
            &[("What ratio?", "Ratio: 3:1")],
        ),
        qa(
            "crlf",
            "Question [1]: Who built it?\r\nAnswer: Ada\r\nQuestion [2]: When?\r\nAnswer: 1843\r\n",
            &[("Who built it?", "Ada"), ("When?", "1843")],
        ),
        qa(
            "prose_between_pairs",
            "Question [1]: Who built it?\nAnswer: Ada\nThis concerns the inventor.\nQuestion [2]: When?\nAnswer: 1843",
            &[("Who built it?", "Ada"), ("When?", "1843")],
        ),
        qa(
            "stray_leading_answer",
            "Answer: stray\nQuestion [1]: Who built it?\nAnswer: Ada",
            &[("Who built it?", "Ada")],
        ),
        qa(
            "period_separator",
            "Question [1]. Who built it?\nAnswer: Ada",
            &[("Who built it?", "Ada")],
        ),
        qa(
            "reverse_ten",
            "Question [10]: q10?\nAnswer: a10\nQuestion [9]: q9?\nAnswer: a9\nQuestion [8]: q8?\nAnswer: a8\nQuestion [7]: q7?\nAnswer: a7\nQuestion [6]: q6?\nAnswer: a6\nQuestion [5]: q5?\nAnswer: a5\nQuestion [4]: q4?\nAnswer: a4\nQuestion [3]: q3?\nAnswer: a3\nQuestion [2]: q2?\nAnswer: a2\nQuestion [1]: q1?\nAnswer: a1",
            &[
                ("q1?", "a1"),
                ("q2?", "a2"),
                ("q3?", "a3"),
                ("q4?", "a4"),
                ("q5?", "a5"),
                ("q6?", "a6"),
                ("q7?", "a7"),
                ("q8?", "a8"),
                ("q9?", "a9"),
                ("q10?", "a10"),
            ],
        ),
        Case { name: "empty_completion", raw: "", expect: Expect::NoQa },
        Case { name: "refusal", raw: "I'm sorry, I can't help with that.", expect: Expect::NoQa },
        Case { name: "answers_only", raw: "Answer: Ada\nAnswer: 1843", expect: Expect::NoQa },
        ans(
            "answers_well_formed",
            "Question: Who built it?\nAnswer: Ada\nQuestion: When was it built?\nAnswer: 1843",
            WHO_WHEN,
            &[Some("Ada"), Some("1843")],
        ),
        ans(
            "answers_reordered",
            "Question: When was it built?\nAnswer: 1843\nQuestion: Who built it?\nAnswer: Ada",
            WHO_WHEN,
            &[Some("Ada"), Some("1843")],
        ),
        ans(
            "answers_unanswerable_spellings",
            "Question: Who built it?\nAnswer: **Unanswerable.**\nQuestion: When was it built?\nAnswer: \"UNANSWERABLE\"\nQuestion: Why was it built?\nAnswer: unanswerable",
            THREE,
            &[None, None, None],
        ),
        ans(
            "answers_numbered_labels",
            "1. Question: Who built it?\nAnswer: Ada\nQuestion 2: When was it built?\nAnswer: 1843",
            WHO_WHEN,
            &[Some("Ada"), Some("1843")],
        ),
        ans(
            "answers_truncated",
            "Here you go.\nQuestion: Who built it?\nAnswer: Ada\nQuestion: When was",
            THREE,
            &[Some("Ada"), None, None],
        ),
        ans(
            "answers_positional_fallback",
            "Question: Who constructed it?\nAnswer: Ada\nQuestion: In what year?\nAnswer: 1843",
            WHO_WHEN,
            &[Some("Ada"), Some("1843")],
        ),
        Case {
            name: "answers_none_parsable",
            raw: "The summary does not discuss these topics.",
            expect: Expect::NoAnswers(WHO_WHEN),
        },
    ]
}

fn question_set(items: &[&str]) -> QuestionSet {
    QuestionSet::new(
        QuestionOrigin::FromDocument,
        items
            .iter()
            .enumerate()
            .map(|(i, q)| RankedQuestion::new(i as u32 + 1, *q))
            .collect(),
    )
    .unwrap()
}

/// Ok when the parsers recover exactly what the case expects.
pub fn check(case: &Case) -> Result<(), String> {
    match &case.expect {
        Expect::Qa(want) => {
            let got = parse_qa_block(case.raw).map_err(|e| e.to_string())?;
            let got: Vec<(u32, &str, &str)> = got
                .iter()
                .map(|p| {
                    (
                        p.question.rank,
                        p.question.question.as_str(),
                        p.answer.as_str(),
                    )
                })
                .collect();
            let want: Vec<(u32, &str, &str)> = want
                .iter()
                .enumerate()
                .map(|(i, (q, a))| (i as u32 + 1, *q, *a))
                .collect();
            if got == want {
                Ok(())
            } else {
                Err(format!("got {got:?}, want {want:?}"))
            }
        }
        Expect::Answers(questions, want) => {
            let set = question_set(questions);
            let got = parse_answer_list(case.raw, &set, AnswerSource::FromSummary)
                .map_err(|e| e.to_string())?;
            let got: Vec<Option<&str>> = got
                .records
                .iter()
                .map(|r| match &r.answer {
                    Answer::Substantive(s) => Some(s.as_str()),
                    Answer::Unanswerable => None,
                })
                .collect();
            if &got == want {
                Ok(())
            } else {
                Err(format!("got {got:?}, want {want:?}"))
            }
        }
        Expect::NoQa => match parse_qa_block(case.raw) {
            Err(Error::NoParsableQa) => Ok(()),
            other => Err(format!("expected NoParsableQA, got {other:?}")),
        },
        Expect::NoAnswers(questions) => {
            match parse_answer_list(
                case.raw,
                &question_set(questions),
                AnswerSource::FromSummary,
            ) {
                Err(Error::NoParsableQa) => Ok(()),
                other => Err(format!("expected NoParsableQA, got {other:?}")),
            }
        }
    }
}
