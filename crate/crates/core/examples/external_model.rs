//! Plug a model that lives in another process into the pipeline. The
//! manifest below swaps the lexical reranker for a python script speaking
//! the JSON-lines protocol; the retriever and reader stay oracle and gold.
//!
//!     cargo run --example external_model          (needs python3 on PATH)

use hopqa::corpus::ingest_corpus;
use hopqa::eval::{gold_table, read_questions};
use hopqa::models::{ModelContext, ModelManifest};
use hopqa::pipeline::{Pipeline, PipelineConfig};
use hopqa::search::InvertedIndex;

/// Scores a candidate by how many of its words also appear in the question.
const RERANKER: &str = r#"
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    q = set(req["question"].lower().split())
    words = (req["candidate"]["title"] + " " + req["candidate"]["text"]).lower().split()
    print(json.dumps({"score": float(sum(w in q for w in words))}), flush=True)
"#;

fn main() -> hopqa::Result<()> {
    let corpus = ingest_corpus(include_str!("data/toad_corpus.jsonl").as_bytes())?;
    let questions = read_questions(include_str!("data/toad_questions.jsonl").as_bytes())?;
    let index = InvertedIndex::build(&corpus)?;
    let gold = gold_table(&questions);

    let manifest = ModelManifest::from_json(
        &serde_json::json!({
            "retriever": {"kind": "oracle"},
            "reader": {"kind": "gold"},
            "reranker": {"kind": "external", "command": ["python3", "-c", RERANKER]},
        })
        .to_string(),
    )?;
    let models = manifest.build(ModelContext {
        index: &index,
        corpus: &corpus,
        gold: Some(&gold),
    })?;
    let pipeline = Pipeline::new(&index, &corpus, &models, PipelineConfig::default())?;
    let run = pipeline.run_question(&questions[0].question)?;
    for s in &run.steps {
        println!("step {} reranker scores {:?}", s.step, s.reranker_scores);
    }
    println!("prediction: {:?}", run.prediction().map(|a| &a.text));
    Ok(())
}
