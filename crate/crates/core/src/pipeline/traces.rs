//! Supervision records for the three model roles, generated along gold
//! reasoning chains. With augmentation, each step also gets a polluted
//! variant: the highest-ranked non-gold hit is appended first, and the oracle
//! derives the query that recovers the same target from there.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize_with_offsets, Corpus, Paragraph};
use crate::error::{Error, Result};
use crate::models::AnswerKind;
use crate::oracle::{build_oracle_query, OracleQuery};
use crate::search::InvertedIndex;

use super::{PathState, ReasoningPath};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldExample {
    pub id: String,
    pub question: String,
    /// Supporting paragraph ids in the order they should be retrieved.
    pub gold_paragraphs: Vec<String>,
    pub answers: Vec<String>,
    #[serde(default)]
    pub dataset: Option<String>,
}

impl GoldExample {
    pub fn kind(&self) -> AnswerKind {
        self.answers
            .first()
            .map_or(AnswerKind::Span, |a| AnswerKind::infer(a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceConfig {
    /// Step cap per dataset name.
    pub max_steps_by_dataset: BTreeMap<String, usize>,
    /// Step cap for examples without a listed dataset.
    pub default_max_steps: usize,
    pub augment_nongold: bool,
    pub reranker_candidates: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            max_steps_by_dataset: [("hotpotqa".to_string(), 3), ("squad".to_string(), 2)].into(),
            default_max_steps: 3,
            augment_nongold: false,
            reranker_candidates: 5,
        }
    }
}

impl TraceConfig {
    fn max_steps(&self, dataset: Option<&str>) -> usize {
        dataset
            .and_then(|d| self.max_steps_by_dataset.get(&d.to_lowercase()))
            .copied()
            .unwrap_or(self.default_max_steps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "label", rename_all = "snake_case")]
pub enum ReaderLabel {
    Span {
        paragraph_id: String,
        /// Byte offsets into the paragraph text.
        start: usize,
        end: usize,
        text: String,
    },
    Yes,
    No,
    NoAnswer,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingTrace {
    pub example_id: String,
    /// 1-based index of the gold paragraph this trace retrieves.
    pub step: usize,
    /// Whether a non-gold paragraph was appended before this step.
    pub polluted: bool,
    pub path_state: PathState,
    pub oracle_query: OracleQuery,
    pub candidates: Vec<String>,
    pub gold_flags: Vec<bool>,
    /// What the reader should say once the target is appended.
    pub reader_label: ReaderLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum SkipReason {
    /// The gold paragraph at this step shares no token with the path.
    Untrainable {
        step: usize,
    },
    ExceedsStepCap {
        steps: usize,
        cap: usize,
    },
    UnknownParagraph {
        paragraph_id: String,
    },
    AnswerNotFound,
    NoGold,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TraceBatch {
    pub traces: Vec<TrainingTrace>,
    pub skipped: Vec<(String, SkipReason)>,
}

fn final_label(example: &GoldExample, last: &Paragraph) -> Option<ReaderLabel> {
    match example.kind() {
        AnswerKind::Yes => Some(ReaderLabel::Yes),
        AnswerKind::No => Some(ReaderLabel::No),
        AnswerKind::Span => {
            let spans = tokenize_with_offsets(&last.text);
            let hay: Vec<&str> = spans.iter().map(|s| s.token.as_str()).collect();
            example.answers.iter().find_map(|a| {
                let needle = crate::corpus::tokenize(a);
                if needle.is_empty() || needle.len() > hay.len() {
                    return None;
                }
                let i = hay
                    .windows(needle.len())
                    .position(|w| w == needle.as_slice())?;
                let (start, end) = (spans[i].range.start, spans[i + needle.len() - 1].range.end);
                Some(ReaderLabel::Span {
                    paragraph_id: last.id.clone(),
                    start,
                    end,
                    text: last.text[start..end].to_string(),
                })
            })
        }
    }
}

struct Tracer<'a> {
    index: &'a InvertedIndex,
    config: &'a TraceConfig,
    gold: HashSet<&'a str>,
}

impl Tracer<'_> {
    /// The first `reranker_candidates` hits of `oq` not already on `path`.
    fn candidates(&self, path: &ReasoningPath, oq: &OracleQuery) -> Result<Vec<String>> {
        let k = (self.config.reranker_candidates + path.len()).min(self.index.n_paragraphs());
        Ok(self
            .index
            .search_topk(&oq.query, k)?
            .into_iter()
            .map(|h| h.paragraph_id)
            .filter(|id| !path.contains(id))
            .take(self.config.reranker_candidates)
            .collect())
    }

    fn trace(
        &self,
        example: &GoldExample,
        step: usize,
        polluted: bool,
        path: &ReasoningPath,
        oracle_query: OracleQuery,
        label: ReaderLabel,
    ) -> Result<TrainingTrace> {
        let candidates = self.candidates(path, &oracle_query)?;
        let gold_flags = candidates
            .iter()
            .map(|c| self.gold.contains(c.as_str()))
            .collect();
        Ok(TrainingTrace {
            example_id: example.id.clone(),
            step,
            polluted,
            path_state: path.state(),
            oracle_query,
            candidates,
            gold_flags,
            reader_label: label,
        })
    }
}

fn example_traces(
    corpus: &Corpus,
    index: &InvertedIndex,
    example: &GoldExample,
    config: &TraceConfig,
) -> Result<std::result::Result<Vec<TrainingTrace>, SkipReason>> {
    let n = example.gold_paragraphs.len();
    if n == 0 {
        return Ok(Err(SkipReason::NoGold));
    }
    let cap = config.max_steps(example.dataset.as_deref());
    if n > cap {
        return Ok(Err(SkipReason::ExceedsStepCap { steps: n, cap }));
    }
    let mut gold = Vec::with_capacity(n);
    for id in &example.gold_paragraphs {
        match corpus.paragraph(id) {
            Some(p) => gold.push(p),
            None => {
                return Ok(Err(SkipReason::UnknownParagraph {
                    paragraph_id: id.clone(),
                }))
            }
        }
    }
    let Some(answer_label) = final_label(example, gold[n - 1]) else {
        return Ok(Err(SkipReason::AnswerNotFound));
    };
    let tracer = Tracer {
        index,
        config,
        gold: example.gold_paragraphs.iter().map(String::as_str).collect(),
    };

    let mut traces = Vec::new();
    let mut path = ReasoningPath::new(&example.question);
    for (i, &target) in gold.iter().enumerate() {
        let label = if i + 1 == n {
            answer_label.clone()
        } else {
            ReaderLabel::NoAnswer
        };
        let oq = match build_oracle_query(index, &path.tokens(), target) {
            Ok(oq) => oq,
            Err(Error::Untrainable(_)) => return Ok(Err(SkipReason::Untrainable { step: i + 1 })),
            Err(e) => return Err(e),
        };
        let gold_trace = tracer.trace(example, i + 1, false, &path, oq, label.clone())?;

        if config.augment_nongold && i + 2 <= cap {
            let distractor = gold_trace
                .candidates
                .iter()
                .find(|c| !tracer.gold.contains(c.as_str()))
                .and_then(|id| corpus.paragraph(id));
            if let Some(d) = distractor {
                let polluted = path.extended(d);
                let oq = build_oracle_query(index, &polluted.tokens(), target)?;
                let t = tracer.trace(example, i + 1, true, &polluted, oq, label)?;
                traces.push(gold_trace);
                traces.push(t);
                path = path.extended(target);
                continue;
            }
        }
        traces.push(gold_trace);
        path = path.extended(target);
    }
    Ok(Ok(traces))
}

/// Traces for every example, in example order. Examples that cannot be
/// traced are listed in [`TraceBatch::skipped`] instead.
pub fn generate_training_traces(
    corpus: &Corpus,
    index: &InvertedIndex,
    examples: &[GoldExample],
    config: &TraceConfig,
) -> Result<TraceBatch> {
    if config.reranker_candidates == 0 || config.default_max_steps == 0 {
        return Err(Error::InvalidArgument(
            "trace step cap and candidate count must be positive".into(),
        ));
    }
    let per_example: Vec<_> = examples
        .par_iter()
        .map(|ex| example_traces(corpus, index, ex, config))
        .collect::<Result<_>>()?;
    let mut batch = TraceBatch::default();
    for (ex, r) in examples.iter().zip(per_example) {
        match r {
            Ok(traces) => batch.traces.extend(traces),
            Err(reason) => {
                log::warn!("skipping trace example {}: {:?}", ex.id, reason);
                batch.skipped.push((ex.id.clone(), reason));
            }
        }
    }
    Ok(batch)
}
