//! A reader that knows the answers. It makes end-to-end runs testable
//! without a trained model: answerability is `+GOLD_MARGIN` exactly when the
//! path holds every gold paragraph and the last one contains the answer.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::tokenize;
use crate::error::Result;
use crate::pipeline::ReasoningPath;

use super::{
    AnswerKind, ClassLogits, PathLayout, Reader, ReaderOutput, Segment, DEFAULT_MAX_SPAN_LEN,
};

pub const GOLD_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldAnswer {
    /// Supporting paragraph ids, in chain order.
    pub paragraph_ids: Vec<String>,
    pub answers: Vec<String>,
    pub kind: AnswerKind,
}

impl GoldAnswer {
    /// Kind inferred from the first answer.
    pub fn new(paragraph_ids: Vec<String>, answers: Vec<String>) -> Self {
        let kind = answers
            .first()
            .map_or(AnswerKind::Span, |a| AnswerKind::infer(a));
        GoldAnswer {
            paragraph_ids,
            answers,
            kind,
        }
    }
}

/// Gold answers keyed by question text.
#[derive(Debug, Clone, Default)]
pub struct GoldTable {
    entries: HashMap<String, GoldAnswer>,
}

impl GoldTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, question: impl Into<String>, gold: GoldAnswer) {
        self.entries.insert(question.into(), gold);
    }

    pub fn get(&self, question: &str) -> Option<&GoldAnswer> {
        self.entries.get(question)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(String, GoldAnswer)> for GoldTable {
    fn from_iter<I: IntoIterator<Item = (String, GoldAnswer)>>(iter: I) -> Self {
        GoldTable {
            entries: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GoldReader<'a> {
    gold: &'a GoldTable,
}

impl<'a> GoldReader<'a> {
    pub fn new(gold: &'a GoldTable) -> Self {
        GoldReader { gold }
    }
}

/// First occurrence of any answer's tokens inside the last paragraph, as
/// layout positions.
fn locate(layout: &PathLayout, step: usize, answers: &[String]) -> Option<(usize, usize)> {
    let start = layout.paragraph_start(step)?;
    let len = layout.segments[start..]
        .iter()
        .take_while(|&&s| s == Segment::Paragraph(step))
        .count();
    let para = &layout.tokens[start..start + len];
    answers.iter().find_map(|a| {
        let needle = tokenize(a);
        if needle.is_empty() || needle.len() > para.len() {
            return None;
        }
        para.windows(needle.len())
            .position(|w| w == needle.as_slice())
            .map(|i| (start + i, start + i + needle.len() - 1))
    })
}

impl Reader for GoldReader<'_> {
    fn read(&self, path: &ReasoningPath) -> Result<ReaderOutput> {
        let layout = PathLayout::new(path);
        let n = layout.len();
        let refuse = || {
            ReaderOutput::new(
                ClassLogits::new(0.0, 0.0, 0.0, GOLD_MARGIN),
                vec![0.0; n],
                vec![0.0; n],
                &layout,
                DEFAULT_MAX_SPAN_LEN,
            )
        };
        let Some(gold) = self.gold.get(&path.question) else {
            return refuse();
        };
        let complete = !path.is_empty() && gold.paragraph_ids.iter().all(|id| path.contains(id));
        if !complete {
            return refuse();
        }
        match gold.kind {
            AnswerKind::Yes | AnswerKind::No => {
                let (yes, no) = if gold.kind == AnswerKind::Yes {
                    (GOLD_MARGIN, 0.0)
                } else {
                    (0.0, GOLD_MARGIN)
                };
                ReaderOutput::new(
                    ClassLogits::new(0.0, yes, no, 0.0),
                    vec![0.0; n],
                    vec![0.0; n],
                    &layout,
                    DEFAULT_MAX_SPAN_LEN,
                )
            }
            AnswerKind::Span => {
                let Some((s, e)) = locate(&layout, path.len() - 1, &gold.answers) else {
                    return refuse();
                };
                let mut start = vec![-1.0; n];
                let mut end = vec![-1.0; n];
                start[0] = 0.0;
                end[0] = 0.0;
                start[s] = 0.0;
                end[e] = 0.0;
                ReaderOutput::new(
                    ClassLogits::new(GOLD_MARGIN, 0.0, 0.0, 0.0),
                    start,
                    end,
                    &layout,
                    DEFAULT_MAX_SPAN_LEN.max(e - s + 1),
                )
            }
        }
    }
}
