//! Generate a planted 1/2/3-hop benchmark, run the pipeline with oracle
//! queries, the gold reader and the baseline reranker, and print the report.
//!
//!     cargo run --release --example synthetic_benchmark [seed]

use hopqa::eval::{gold_table, run_benchmark, synth, BenchOptions};
use hopqa::models::{ModelContext, ModelManifest};
use hopqa::pipeline::PipelineConfig;
use hopqa::search::InvertedIndex;

fn main() -> hopqa::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let bench = synth::generate(&synth::SynthConfig {
        seed,
        ..Default::default()
    })?;
    let index = InvertedIndex::build(&bench.corpus)?;
    println!(
        "{} paragraphs, {} articles, {} questions",
        index.n_paragraphs(),
        index.n_articles(),
        bench.questions.len()
    );

    let gold = gold_table(&bench.questions);
    let models = ModelManifest::default().build(ModelContext {
        index: &index,
        corpus: &bench.corpus,
        gold: Some(&gold),
    })?;
    let options = BenchOptions {
        budgets: vec![10, 50, 100],
        compare_fixed_up_to: 5,
    };
    let report = run_benchmark(
        &index,
        &bench.corpus,
        &models,
        PipelineConfig::default(),
        &bench.questions,
        &options,
    )?;
    print!("{}", report.summary());

    let mut by_hops = std::collections::BTreeMap::<usize, (usize, f64)>::new();
    for q in &report.result.per_question {
        let e = by_hops.entry(q.hops.unwrap_or(0)).or_default();
        e.0 += 1;
        e.1 += q.em.unwrap_or(0.0);
    }
    println!("\nexact match by hop count:");
    for (hops, (n, em)) in by_hops {
        println!(
            "  {hops}-hop  {:.1}%  ({n} questions)",
            100.0 * em / n as f64
        );
    }
    Ok(())
}
