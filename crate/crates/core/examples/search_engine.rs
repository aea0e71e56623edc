//! Index a small corpus, run a few queries, and show where the combined
//! paragraph + article score puts each hit. Ends with a save/load round trip.
//!
//!     cargo run --example search_engine [query words...]

use hopqa::corpus::ingest_corpus;
use hopqa::search::{load_index, save_index, InvertedIndex, Query, ScoringParams};

fn main() -> hopqa::Result<()> {
    let corpus = ingest_corpus(include_str!("data/toad_corpus.jsonl").as_bytes())?;
    let index = InvertedIndex::build(&corpus)?;
    println!(
        "{} paragraphs in {} articles, {} terms, mean length {:.1}",
        index.n_paragraphs(),
        index.n_articles(),
        index.vocabulary_size(),
        index.avg_doc_length()
    );

    let args: Vec<String> = std::env::args().skip(1).collect();
    let queries = if args.is_empty() {
        vec![
            "tolkien copies".to_string(),
            "gollum toad".to_string(),
            "true toads malaysia".to_string(),
        ]
    } else {
        vec![args.join(" ")]
    };
    for text in &queries {
        let query = Query::parse(text);
        println!("\nquery {:?} -> terms {:?}", text, query.terms());
        for hit in index.search_topk(&query, 5)? {
            let para = index.score_paragraph(&hit.paragraph_id, &query)?;
            let article = corpus
                .paragraph(&hit.paragraph_id)
                .map(|p| p.article_id.as_str())
                .unwrap_or("?");
            let art = index.score_article(article, &query)?;
            println!(
                "  #{} {:<24} {:>7.3}  (paragraph {:.3} + article {:.3})",
                hit.rank, hit.paragraph_id, hit.score, para, art
            );
        }
    }

    // a paragraph that matches nothing gets the sentinel rank
    let q = Query::parse("frogs");
    println!(
        "\nrank of lotr#1 for \"frogs\": {} (sentinel {})",
        index.rank_of("lotr#1", &q)?,
        index.not_retrieved_rank()
    );

    let mut bytes = Vec::new();
    save_index(&index, &corpus, &mut bytes)?;
    let (_, reloaded) = load_index(bytes.as_slice(), ScoringParams::default())?;
    let q = Query::parse("tolkien copies");
    assert_eq!(reloaded.search_topk(&q, 5)?, index.search_topk(&q, 5)?);
    println!(
        "saved index is {} bytes and reloads to identical rankings",
        bytes.len()
    );
    Ok(())
}
