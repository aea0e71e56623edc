//! Carry paragraph ids from one corpus snapshot to a later revision of the
//! same article, where text was split, edited or removed.
//!
//!     cargo run --example corpus_mapping

use hopqa::corpus::{map_paragraph_to_article, Corpus, CorpusRecord};

fn records(article: &str, title: &str, texts: &[&str]) -> Vec<CorpusRecord> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| CorpusRecord {
            article_id: article.into(),
            title: title.into(),
            order: i as u64,
            text: t.to_string(),
        })
        .collect()
}

fn main() -> hopqa::Result<()> {
    let old = Corpus::from_records(records(
        "lotr",
        "The Lord of the Rings",
        &[
            "The Lord of the Rings is an epic fantasy novel by the English writer J. R. R. Tolkien. \
             It began as a sequel to The Hobbit and grew into a much larger work.",
            "The novel has sold more than 150 million copies, which puts it among the best-selling books.",
            "An early radio adaptation was broadcast in 1955.",
        ],
    ))?;
    let new = Corpus::from_records(records(
        "lotr",
        "The Lord of the Rings",
        &[
            "The Lord of the Rings is an epic high fantasy novel by the English author J. R. R. Tolkien.",
            "It began as a sequel to The Hobbit and grew into a much larger work.",
            "With over 150 million copies sold, it is one of the best-selling books ever written.",
            "Film adaptations followed between 2001 and 2003.",
        ],
    ))?;
    let target = new.article("lotr").unwrap();
    for p in old.paragraphs() {
        let v = map_paragraph_to_article(p, &new, target)?;
        println!(
            "{:<8} recall {:>5.1}%  lcs {:>5.1}%  -> {}",
            p.id,
            100.0 * v.unigram_recall,
            100.0 * v.lcs_coverage,
            if v.matched {
                v.target_paragraph_ids.join(" + ")
            } else {
                "unmatched".into()
            }
        );
    }
    Ok(())
}
