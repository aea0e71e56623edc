//! Answer a two-hop question step by step: oracle retriever, gold reader and
//! the lexical reranker. Prints what each step retrieved, read and chose.
//!
//!     cargo run --example gollum_pipeline [--fixed K]

use hopqa::corpus::ingest_corpus;
use hopqa::eval::{gold_table, read_questions};
use hopqa::models::{ModelContext, ModelManifest};
use hopqa::pipeline::{Pipeline, PipelineConfig, RunOutcome, RunResult};
use hopqa::search::InvertedIndex;

fn main() -> hopqa::Result<()> {
    let corpus = ingest_corpus(include_str!("data/toad_corpus.jsonl").as_bytes())?;
    let questions = read_questions(include_str!("data/toad_questions.jsonl").as_bytes())?;
    let index = InvertedIndex::build(&corpus)?;
    let gold = gold_table(&questions);
    let models = ModelManifest::default().build(ModelContext {
        index: &index,
        corpus: &corpus,
        gold: Some(&gold),
    })?;
    let config = PipelineConfig {
        docs_per_step: 5,
        ..Default::default()
    };
    let pipeline = Pipeline::new(&index, &corpus, &models, config)?;

    let args: Vec<String> = std::env::args().collect();
    let fixed = args
        .iter()
        .position(|a| a == "--fixed")
        .and_then(|i| args.get(i + 1))
        .and_then(|k| k.parse().ok());
    let question = &questions[0].question;
    println!("Q: {question}");
    let run = match fixed {
        Some(k) => pipeline.run_fixed(question, k)?,
        None => pipeline.run_question(question)?,
    };
    show(&run);
    Ok(())
}

fn show(run: &RunResult) {
    for s in &run.steps {
        println!("\nstep {}  query {:?}", s.step, s.query_used.terms());
        for (hit, read) in s.retrieved.iter().zip(&s.reads) {
            println!(
                "  {:<24} score {:>6.2}  answerability {:>6.1}",
                hit.paragraph_id, hit.score, read.answerability
            );
        }
        if let Some(a) = &s.answer {
            println!("  -> answer {:?} from {:?}", a.text, a.path_snapshot);
        } else if let Some(p) = &s.chosen_paragraph {
            println!("  -> extend with {p}");
        }
    }
    println!();
    match &run.outcome {
        RunOutcome::Answered(a) => println!("answered after {} steps: {}", a.step, a.text),
        RunOutcome::Forced(a) => println!("forced answer at step {}: {:?}", a.step, a.text),
        RunOutcome::Exhausted { reason, best_guess } => {
            println!(
                "gave up ({reason}); best guess {:?}",
                best_guess.as_ref().map(|a| &a.text)
            )
        }
    }
}
