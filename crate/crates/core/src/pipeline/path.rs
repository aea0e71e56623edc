use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Paragraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathStatus {
    Active,
    Answered,
    Exhausted,
}

/// The question plus the paragraphs selected so far, in selection order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReasoningPath {
    pub question: String,
    pub steps: Vec<Paragraph>,
    pub status: PathStatus,
}

impl ReasoningPath {
    pub fn new(question: impl Into<String>) -> Self {
        ReasoningPath {
            question: question.into(),
            steps: Vec::new(),
            status: PathStatus::Active,
        }
    }

    /// A copy of this path with `paragraph` appended.
    pub fn extended(&self, paragraph: &Paragraph) -> Self {
        let mut next = self.clone();
        next.steps.push(paragraph.clone());
        next
    }

    pub fn contains(&self, paragraph_id: &str) -> bool {
        self.steps.iter().any(|p| p.id == paragraph_id)
    }

    pub fn paragraph_ids(&self) -> Vec<String> {
        self.steps.iter().map(|p| p.id.clone()).collect()
    }

    pub fn last(&self) -> Option<&Paragraph> {
        self.steps.last()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn question_tokens(&self) -> Vec<String> {
        tokenize(&self.question)
    }

    /// Question tokens, then each step's title and paragraph tokens.
    pub fn tokens(&self) -> Vec<String> {
        let mut out = self.question_tokens();
        for p in &self.steps {
            out.extend(tokenize(&p.title));
            out.extend(p.tokens.iter().cloned());
        }
        out
    }

    pub fn state(&self) -> PathState {
        PathState {
            question: self.question.clone(),
            paragraph_ids: self.paragraph_ids(),
            status: self.status,
        }
    }
}

/// Id-only snapshot of a path, for logs and trace files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathState {
    pub question: String,
    pub paragraph_ids: Vec<String>,
    pub status: PathStatus,
}
