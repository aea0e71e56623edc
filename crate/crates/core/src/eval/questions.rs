//! Question files: one JSON object per line.
//!
//! ```json
//! {"id": "q1", "question": "...", "answers": ["..."], "gold_paragraphs": ["art#0"], "fixed_steps": 2}
//! ```
//!
//! Only `id` and `question` are required.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{GoldAnswer, GoldTable};
use crate::pipeline::GoldExample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub question: String,
    #[serde(default)]
    pub answers: Vec<String>,
    /// Supporting paragraph ids in retrieval order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_paragraphs: Option<Vec<String>>,
    /// Run exactly this many steps instead of stopping dynamically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    /// Number of supporting paragraphs, if known; defaults to the gold count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hops: Option<usize>,
}

impl QuestionRecord {
    pub fn hops(&self) -> Option<usize> {
        self.hops
            .or_else(|| self.gold_paragraphs.as_ref().map(Vec::len))
    }

    pub fn gold_example(&self) -> Option<GoldExample> {
        Some(GoldExample {
            id: self.id.clone(),
            question: self.question.clone(),
            gold_paragraphs: self.gold_paragraphs.clone()?,
            answers: self.answers.clone(),
            dataset: self.dataset.clone(),
        })
    }
}

pub fn read_questions<R: BufRead>(source: R) -> Result<Vec<QuestionRecord>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: QuestionRecord = serde_json::from_str(&line).map_err(|e| Error::Ingest {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_questions<W: Write>(questions: &[QuestionRecord], mut out: W) -> Result<()> {
    for q in questions {
        serde_json::to_writer(&mut out, q)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Gold table for the questions that list answers and gold paragraphs.
pub fn gold_table(questions: &[QuestionRecord]) -> GoldTable {
    questions
        .iter()
        .filter(|q| !q.answers.is_empty())
        .filter_map(|q| {
            let ids = q.gold_paragraphs.clone()?;
            Some((q.question.clone(), GoldAnswer::new(ids, q.answers.clone())))
        })
        .collect()
}
