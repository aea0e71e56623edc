//! Build the rank-minimizing query for one hop of a two-hop question, with
//! per-span importances, then measure oracle recall on a synthetic benchmark.
//!
//!     cargo run --release --example dynamic_oracle

use hopqa::corpus::ingest_corpus;
use hopqa::eval::synth;
use hopqa::oracle::{build_oracle_query, oracle_recall_curve, OracleExample};
use hopqa::pipeline::ReasoningPath;
use hopqa::search::InvertedIndex;

const QUESTION: &str =
    "How many copies were sold of the book whose character the toad Ingerophrynus gollum is named after?";

fn main() -> hopqa::Result<()> {
    let corpus = ingest_corpus(include_str!("data/toad_corpus.jsonl").as_bytes())?;
    let index = InvertedIndex::build(&corpus)?;

    let hop1 = ReasoningPath::new(QUESTION);
    let hop2 = hop1.extended(corpus.paragraph("ingerophrynus_gollum#0").unwrap());
    for (path, target) in [(&hop1, "ingerophrynus_gollum#0"), (&hop2, "lotr#1")] {
        let target = corpus.paragraph(target).unwrap();
        let oracle = build_oracle_query(&index, &path.tokens(), target)?;
        println!("\npath {:?} -> target {}", path.paragraph_ids(), target.id);
        for span in &oracle.spans {
            println!(
                "  {:>4}  {}",
                span.importance.map_or("-".into(), |i| i.to_string()),
                span.tokens.join(" ")
            );
        }
        println!(
            "  query {:?} ranks the target #{} ({} rank evaluations)",
            oracle.query.terms(),
            oracle.achieved_rank,
            oracle.rank_evaluations
        );
    }

    let bench = synth::generate(&synth::SynthConfig {
        questions: vec![(2, 100), (3, 100)],
        ..Default::default()
    })?;
    let index = InvertedIndex::build(&bench.corpus)?;
    let mut examples = Vec::new();
    for q in &bench.questions {
        let gold = q.gold_paragraphs.as_deref().unwrap_or_default();
        let mut path = ReasoningPath::new(&q.question);
        for id in gold {
            examples.push(OracleExample {
                path_tokens: path.tokens(),
                target_id: id.clone(),
            });
            path = path.extended(bench.corpus.paragraph(id).unwrap());
        }
    }
    let curve = oracle_recall_curve(&index, &bench.corpus, &examples, &[1, 5, 10, 50])?;
    println!(
        "\noracle recall over {} hops ({} untrainable):",
        curve.examples, curve.untrainable
    );
    for (k, r) in curve.ks.iter().zip(&curve.recall) {
        println!("  top-{k:<3} {:.1}%", 100.0 * r);
    }
    Ok(())
}
