//! Turn a gold reasoning chain into per-step supervision: the oracle query,
//! the retrieval candidates with gold flags, and the reader label. With
//! `--augment` a second, polluted trace is added where the path allows it.
//!
//!     cargo run --example training_traces [--augment]

use hopqa::corpus::ingest_corpus;
use hopqa::eval::read_questions;
use hopqa::pipeline::{generate_training_traces, TraceConfig};
use hopqa::search::InvertedIndex;

fn main() -> hopqa::Result<()> {
    let corpus = ingest_corpus(include_str!("data/toad_corpus.jsonl").as_bytes())?;
    let index = InvertedIndex::build(&corpus)?;
    let examples: Vec<_> = read_questions(include_str!("data/toad_questions.jsonl").as_bytes())?
        .iter()
        .filter_map(|q| q.gold_example())
        .collect();
    let config = TraceConfig {
        augment_nongold: std::env::args().any(|a| a == "--augment"),
        ..Default::default()
    };
    let batch = generate_training_traces(&corpus, &index, &examples, &config)?;
    for t in &batch.traces {
        println!(
            "\n{} step {}{}: path {:?}",
            t.example_id,
            t.step,
            if t.polluted { " (polluted)" } else { "" },
            t.path_state.paragraph_ids
        );
        println!(
            "  oracle query {:?} -> {} at rank {}",
            t.oracle_query.query.terms(),
            t.oracle_query.target_id,
            t.oracle_query.achieved_rank
        );
        for (c, g) in t.candidates.iter().zip(&t.gold_flags) {
            println!("  {} {c}", if *g { "*" } else { " " });
        }
        println!("  reader label {}", serde_json::to_string(&t.reader_label)?);
    }
    for (id, why) in &batch.skipped {
        println!("skipped {id}: {why:?}");
    }
    Ok(())
}
