//! Answer metrics, question files, synthetic benchmarks, and benchmark
//! reports.

mod bench;
mod metrics;
mod questions;
pub mod synth;

pub use bench::{
    evaluate, run_benchmark, BenchOptions, BenchmarkReport, BudgetRow, EvalResult, Policy,
    PolicyRow, QuestionEval,
};
pub use metrics::{exact_match, normalize_answer, unigram_f1};
pub use questions::{gold_table, read_questions, write_questions, QuestionRecord};
