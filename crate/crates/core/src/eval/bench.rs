//! Benchmark runs over question files and the reports built from them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::Result;
use crate::models::ModelBundle;
use crate::pipeline::{Pipeline, PipelineConfig, RunOutcome, RunResult};
use crate::search::InvertedIndex;

use super::{exact_match, unigram_f1, QuestionRecord};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionEval {
    pub id: String,
    /// `None` when the question has no gold answers.
    pub em: Option<f64>,
    pub f1: Option<f64>,
    pub prediction: String,
    pub status: &'static str,
    pub steps_used: usize,
    pub paragraphs_retrieved_total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hops: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    /// Means over the questions that have gold answers.
    pub em: f64,
    pub f1: f64,
    pub per_question: Vec<QuestionEval>,
    /// Questions run for statistics only, for lack of gold answers.
    pub unscored: usize,
}

impl EvalResult {
    fn from_evals(per_question: Vec<QuestionEval>) -> Self {
        let scored: Vec<&QuestionEval> = per_question.iter().filter(|q| q.em.is_some()).collect();
        let mean = |f: fn(&QuestionEval) -> f64| {
            if scored.is_empty() {
                0.0
            } else {
                scored.iter().map(|q| f(q)).sum::<f64>() / scored.len() as f64
            }
        };
        let em = mean(|q| q.em.unwrap());
        let f1 = mean(|q| q.f1.unwrap());
        let unscored = per_question.len() - scored.len();
        EvalResult {
            em,
            f1,
            per_question,
            unscored,
        }
    }

    /// How many questions stopped after each step count.
    pub fn step_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for q in &self.per_question {
            *h.entry(q.steps_used).or_default() += 1;
        }
        h
    }

    /// Step histograms keyed by the questions' hop counts.
    pub fn step_histogram_by_hops(&self) -> BTreeMap<usize, BTreeMap<usize, usize>> {
        let mut h: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
        for q in &self.per_question {
            if let Some(hops) = q.hops {
                *h.entry(hops).or_default().entry(q.steps_used).or_default() += 1;
            }
        }
        h
    }

    pub fn mean_paragraphs_retrieved(&self) -> f64 {
        if self.per_question.is_empty() {
            return 0.0;
        }
        self.per_question
            .iter()
            .map(|q| q.paragraphs_retrieved_total)
            .sum::<usize>() as f64
            / self.per_question.len() as f64
    }
}

fn status(run: &RunResult) -> &'static str {
    match run.outcome {
        RunOutcome::Answered(_) => "answered",
        RunOutcome::Forced(_) => "forced",
        RunOutcome::Exhausted { .. } => "exhausted",
    }
}

fn score(q: &QuestionRecord, run: &RunResult) -> Result<QuestionEval> {
    let prediction = run.prediction().map(|a| a.text.clone()).unwrap_or_default();
    let (em, f1) = if q.answers.is_empty() {
        (None, None)
    } else {
        (
            Some(exact_match(&prediction, &q.answers)?),
            Some(unigram_f1(&prediction, &q.answers)?),
        )
    };
    Ok(QuestionEval {
        id: q.id.clone(),
        em,
        f1,
        prediction,
        status: status(run),
        steps_used: run.steps_used(),
        paragraphs_retrieved_total: run.paragraphs_retrieved_total,
        hops: q.hops(),
    })
}

/// How a question is run: its own fixed-step override, or the policy given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Dynamic,
    Fixed(usize),
}

/// Runs every question (concurrently) and scores the predictions.
/// Per-question `fixed_steps` overrides take precedence over `policy`.
pub fn evaluate(
    pipeline: &Pipeline<'_>,
    questions: &[QuestionRecord],
    policy: Policy,
) -> Result<(EvalResult, Vec<RunResult>)> {
    let runs: Vec<RunResult> = questions
        .par_iter()
        .map(
            |q| match q.fixed_steps.map(Policy::Fixed).unwrap_or(policy) {
                Policy::Dynamic => pipeline.run_question(&q.question),
                Policy::Fixed(k) => pipeline.run_fixed(&q.question, k),
            },
        )
        .collect::<Result<_>>()?;
    let evals = questions
        .iter()
        .zip(&runs)
        .map(|(q, r)| score(q, r))
        .collect::<Result<Vec<_>>>()?;
    let result = EvalResult::from_evals(evals);
    if result.unscored > 0 {
        log::warn!(
            "{} questions have no gold answers and were not scored",
            result.unscored
        );
    }
    Ok((result, runs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetRow {
    pub docs_per_step: usize,
    pub mean_paragraphs_retrieved: f64,
    pub em: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyRow {
    /// `None` for dynamic stopping.
    pub fixed_steps: Option<usize>,
    pub em: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    /// Extra `docs_per_step` settings to sweep; empty skips the sweep.
    pub budgets: Vec<usize>,
    /// Compare dynamic stopping against fixed 1..=k step runs; 0 skips it.
    pub compare_fixed_up_to: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkReport {
    pub config: PipelineConfig,
    pub result: EvalResult,
    #[serde(skip)]
    pub runs: Vec<RunResult>,
    pub step_histogram: BTreeMap<usize, usize>,
    pub step_histogram_by_hops: BTreeMap<usize, BTreeMap<usize, usize>>,
    pub budget_sweep: Vec<BudgetRow>,
    pub policies: Vec<PolicyRow>,
}

pub fn run_benchmark(
    index: &InvertedIndex,
    corpus: &Corpus,
    models: &ModelBundle<'_>,
    config: PipelineConfig,
    questions: &[QuestionRecord],
    options: &BenchOptions,
) -> Result<BenchmarkReport> {
    let pipeline = Pipeline::new(index, corpus, models, config)?;
    let (result, runs) = evaluate(&pipeline, questions, Policy::Dynamic)?;

    let mut budget_sweep = Vec::new();
    for &docs in &options.budgets {
        let p = Pipeline::new(
            index,
            corpus,
            models,
            PipelineConfig {
                docs_per_step: docs,
                ..config
            },
        )?;
        let (r, _) = evaluate(&p, questions, Policy::Dynamic)?;
        budget_sweep.push(BudgetRow {
            docs_per_step: docs,
            mean_paragraphs_retrieved: r.mean_paragraphs_retrieved(),
            em: r.em,
            f1: r.f1,
        });
    }

    let mut policies = Vec::new();
    if options.compare_fixed_up_to > 0 {
        policies.push(PolicyRow {
            fixed_steps: None,
            em: result.em,
            f1: result.f1,
        });
        for k in 1..=options.compare_fixed_up_to {
            let (r, _) = evaluate(&pipeline, questions, Policy::Fixed(k))?;
            policies.push(PolicyRow {
                fixed_steps: Some(k),
                em: r.em,
                f1: r.f1,
            });
        }
    }

    Ok(BenchmarkReport {
        config,
        step_histogram: result.step_histogram(),
        step_histogram_by_hops: result.step_histogram_by_hops(),
        result,
        runs,
        budget_sweep,
        policies,
    })
}

impl BenchmarkReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let r = &self.result;
        let _ = writeln!(
            s,
            "questions: {} ({} unscored)\nEM {:.2}  F1 {:.2}",
            r.per_question.len(),
            r.unscored,
            100.0 * r.em,
            100.0 * r.f1
        );
        let _ = writeln!(s, "\nsteps used:");
        for (steps, n) in &self.step_histogram {
            let _ = writeln!(s, "  {steps}: {n}");
        }
        if !self.step_histogram_by_hops.is_empty() {
            let _ = writeln!(s, "\nsteps used by hop count:");
            for (hops, h) in &self.step_histogram_by_hops {
                let row: Vec<String> = h.iter().map(|(k, v)| format!("{k}:{v}")).collect();
                let _ = writeln!(s, "  {hops}-hop  {}", row.join("  "));
            }
        }
        if !self.budget_sweep.is_empty() {
            let _ = writeln!(s, "\ndocs/step  paragraphs  EM      F1");
            for b in &self.budget_sweep {
                let _ = writeln!(
                    s,
                    "{:>9}  {:>10.1}  {:>6.2}  {:>6.2}",
                    b.docs_per_step,
                    b.mean_paragraphs_retrieved,
                    100.0 * b.em,
                    100.0 * b.f1
                );
            }
        }
        if !self.policies.is_empty() {
            let _ = writeln!(s, "\npolicy    EM      F1");
            for p in &self.policies {
                let name = p
                    .fixed_steps
                    .map_or("dynamic".to_string(), |k| format!("fixed-{k}"));
                let _ = writeln!(
                    s,
                    "{:<8}  {:>6.2}  {:>6.2}",
                    name,
                    100.0 * p.em,
                    100.0 * p.f1
                );
            }
        }
        s
    }
}
