//! The iterative loop: from the current reasoning path, retrieve with the
//! retriever's query, let the reader try every retrieved extension, answer
//! if the best one clears the stop threshold, and otherwise extend the path
//! with the reranker's favourite. Also training-trace generation.

mod path;
mod traces;

pub use path::{PathState, PathStatus, ReasoningPath};
pub use traces::{
    generate_training_traces, GoldExample, ReaderLabel, SkipReason, TraceBatch, TraceConfig,
    TrainingTrace,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Corpus, Paragraph};
use crate::error::{Error, Result};
use crate::models::{answer_text, pick_answer, AnswerKind, ModelBundle, PathLayout};
use crate::search::{InvertedIndex, Query, SearchHit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineConfig {
    /// Most paragraphs a path may hold.
    pub k_cap: usize,
    pub docs_per_step: usize,
    /// Answer once the best answerability is strictly above this.
    pub stop_threshold: f64,
    /// How many of the top retrieved paragraphs the reranker scores.
    pub reranker_candidates: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k_cap: 5,
            docs_per_step: 50,
            stop_threshold: 0.0,
            reranker_candidates: 5,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_cap == 0 || self.docs_per_step == 0 || self.reranker_candidates == 0 {
            return Err(Error::InvalidArgument(
                "k_cap, docs_per_step and reranker_candidates must be positive".into(),
            ));
        }
        if !self.stop_threshold.is_finite() {
            return Err(Error::InvalidArgument(
                "stop threshold must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// What a step may do with the reader's verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMode {
    /// Answer if the threshold is cleared, otherwise extend.
    Dynamic,
    /// Always extend; the reader is not consulted.
    Extend,
    /// Always answer with the best candidate, whatever its answerability.
    Answer,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnswerRecord {
    pub kind: AnswerKind,
    pub text: String,
    pub answerability: f64,
    /// Paragraph ids of the path the answer was read from.
    pub path_snapshot: Vec<String>,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateRead {
    pub paragraph_id: String,
    pub kind: AnswerKind,
    pub answerability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    EmptyQuery,
    NoResults,
    Cap,
}

impl std::fmt::Display for HaltReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HaltReason::EmptyQuery => "empty query",
            HaltReason::NoResults => "no results",
            HaltReason::Cap => "step cap reached",
        })
    }
}

/// One loop iteration, as written to the run log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepOutcome {
    pub step: usize,
    pub query_used: Query,
    /// Positive-scoring hits not already on the path, best first.
    pub retrieved: Vec<SearchHit>,
    pub reads: Vec<CandidateRead>,
    /// Highest-answerability read, whether or not it was accepted.
    pub best_read: Option<AnswerRecord>,
    pub reranker_scores: Vec<(String, f64)>,
    pub answer: Option<AnswerRecord>,
    pub chosen_paragraph: Option<String>,
    pub halt: Option<HaltReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Answered(AnswerRecord),
    /// Answer taken at the last step of a fixed-step run.
    Forced(AnswerRecord),
    Exhausted {
        reason: HaltReason,
        /// Highest-answerability read seen during the run.
        best_guess: Option<AnswerRecord>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub question: String,
    pub outcome: RunOutcome,
    pub steps: Vec<StepOutcome>,
    pub final_path: PathState,
    pub paragraphs_retrieved_total: usize,
}

impl RunResult {
    /// The answer to score: the emitted one, or the best guess of an
    /// exhausted run.
    pub fn prediction(&self) -> Option<&AnswerRecord> {
        match &self.outcome {
            RunOutcome::Answered(a) | RunOutcome::Forced(a) => Some(a),
            RunOutcome::Exhausted { best_guess, .. } => best_guess.as_ref(),
        }
    }

    pub fn steps_used(&self) -> usize {
        self.steps.len()
    }
}

pub struct Pipeline<'a> {
    pub index: &'a InvertedIndex,
    pub corpus: &'a Corpus,
    pub models: &'a ModelBundle<'a>,
    pub config: PipelineConfig,
}

impl<'a> Pipeline<'a> {
    pub fn new(
        index: &'a InvertedIndex,
        corpus: &'a Corpus,
        models: &'a ModelBundle<'a>,
        config: PipelineConfig,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Pipeline {
            index,
            corpus,
            models,
            config,
        })
    }

    /// One iteration from an active path. Returns the next path (extended,
    /// answered, or exhausted) and what happened.
    pub fn step(
        &self,
        path: &ReasoningPath,
        mode: StepMode,
    ) -> Result<(ReasoningPath, StepOutcome)> {
        if path.status != PathStatus::Active {
            return Err(Error::InvalidArgument("step on a finished path".into()));
        }
        let step_no = path.len() + 1;
        let mut outcome = StepOutcome {
            step: step_no,
            query_used: self.models.retriever.query(path)?,
            retrieved: Vec::new(),
            reads: Vec::new(),
            best_read: None,
            reranker_scores: Vec::new(),
            answer: None,
            chosen_paragraph: None,
            halt: None,
        };
        let mut next = path.clone();
        if outcome.query_used.is_empty() {
            outcome.halt = Some(HaltReason::EmptyQuery);
            next.status = PathStatus::Exhausted;
            return Ok((next, outcome));
        }
        outcome.retrieved = self
            .index
            .search_topk(&outcome.query_used, self.config.docs_per_step)?
            .into_iter()
            .filter(|h| h.score > 0.0 && !path.contains(&h.paragraph_id))
            .collect();
        if outcome.retrieved.is_empty() {
            outcome.halt = Some(HaltReason::NoResults);
            next.status = PathStatus::Exhausted;
            return Ok((next, outcome));
        }
        let candidates: Vec<&Paragraph> = outcome
            .retrieved
            .iter()
            .map(|h| {
                self.corpus
                    .paragraph(&h.paragraph_id)
                    .ok_or_else(|| Error::UnknownParagraph(h.paragraph_id.clone()))
            })
            .collect::<Result<_>>()?;

        if mode != StepMode::Extend {
            let answers: Vec<AnswerRecord> = candidates
                .par_iter()
                .map(|&c| self.read_extension(path, c, step_no))
                .collect::<Result<_>>()?;
            outcome.reads = answers
                .iter()
                .zip(&outcome.retrieved)
                .map(|(a, h)| CandidateRead {
                    paragraph_id: h.paragraph_id.clone(),
                    kind: a.kind,
                    answerability: a.answerability,
                })
                .collect();
            // retrieval order breaks ties
            let best = answers
                .into_iter()
                .reduce(|b, a| {
                    if a.answerability > b.answerability {
                        a
                    } else {
                        b
                    }
                })
                .expect("non-empty candidates");
            let accept =
                mode == StepMode::Answer || best.answerability > self.config.stop_threshold;
            outcome.best_read = Some(best.clone());
            if accept {
                let last = best.path_snapshot.last().expect("extension path");
                next.steps
                    .push(self.corpus.paragraph(last).expect("read candidate").clone());
                next.status = PathStatus::Answered;
                outcome.answer = Some(best);
                return Ok((next, outcome));
            }
        }

        let shortlist = &candidates[..candidates.len().min(self.config.reranker_candidates)];
        let scores: Vec<f64> = shortlist
            .par_iter()
            .map(|&c| self.models.reranker.score(path, c))
            .collect::<Result<_>>()?;
        let (chosen, _) = shortlist
            .iter()
            .zip(&scores)
            .reduce(|best, cur| {
                if cur.1 > best.1 || (cur.1 == best.1 && cur.0.id < best.0.id) {
                    cur
                } else {
                    best
                }
            })
            .expect("non-empty shortlist");
        outcome.reranker_scores = shortlist
            .iter()
            .map(|c| c.id.clone())
            .zip(scores.iter().copied())
            .collect();
        outcome.chosen_paragraph = Some(chosen.id.clone());
        next.steps.push((*chosen).clone());
        Ok((next, outcome))
    }

    fn read_extension(
        &self,
        path: &ReasoningPath,
        candidate: &Paragraph,
        step: usize,
    ) -> Result<AnswerRecord> {
        let ext = path.extended(candidate);
        let out = self.models.reader.read(&ext)?;
        let (kind, answerability) = pick_answer(&out);
        let layout = PathLayout::new(&ext);
        Ok(AnswerRecord {
            kind,
            text: answer_text(&ext, &layout, &out, kind),
            answerability,
            path_snapshot: ext.paragraph_ids(),
            step,
        })
    }

    /// Runs with dynamic stopping until an answer clears the threshold or the
    /// path holds `k_cap` paragraphs.
    pub fn run_question(&self, question: &str) -> Result<RunResult> {
        self.run(question, |_| StepMode::Dynamic, self.config.k_cap)
    }

    /// Extends for `k - 1` steps and answers at step `k`, whatever the
    /// reader's confidence.
    pub fn run_fixed(&self, question: &str, k: usize) -> Result<RunResult> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "fixed step count must be positive".into(),
            ));
        }
        self.run(
            question,
            |s| {
                if s == k {
                    StepMode::Answer
                } else {
                    StepMode::Extend
                }
            },
            k,
        )
    }

    fn run(
        &self,
        question: &str,
        mode_at: impl Fn(usize) -> StepMode,
        cap: usize,
    ) -> Result<RunResult> {
        let mut path = ReasoningPath::new(question);
        let mut steps: Vec<StepOutcome> = Vec::new();
        let mut best_guess: Option<AnswerRecord> = None;
        let mut outcome = None;
        while path.len() < cap {
            let mode = mode_at(path.len() + 1);
            let (next, step) = self.step(&path, mode)?;
            path = next;
            if let Some(read) = &step.best_read {
                if best_guess
                    .as_ref()
                    .map_or(true, |g| read.answerability > g.answerability)
                {
                    best_guess = Some(read.clone());
                }
            }
            if let Some(answer) = &step.answer {
                outcome = Some(if mode == StepMode::Answer {
                    RunOutcome::Forced(answer.clone())
                } else {
                    RunOutcome::Answered(answer.clone())
                });
            } else if let Some(reason) = step.halt {
                outcome = Some(RunOutcome::Exhausted {
                    reason,
                    best_guess: best_guess.clone(),
                });
            }
            steps.push(step);
            if outcome.is_some() {
                break;
            }
        }
        let outcome = outcome.unwrap_or_else(|| {
            path.status = PathStatus::Exhausted;
            RunOutcome::Exhausted {
                reason: HaltReason::Cap,
                best_guess,
            }
        });
        let paragraphs_retrieved_total = steps.iter().map(|s| s.retrieved.len()).sum();
        Ok(RunResult {
            question: question.to_string(),
            outcome,
            steps,
            final_path: path.state(),
            paragraphs_retrieved_total,
        })
    }
}
