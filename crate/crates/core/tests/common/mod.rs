#![allow(dead_code)]

use hopqa::corpus::{Corpus, CorpusRecord};
use hopqa::models::{GoldAnswer, GoldTable};

pub fn corpus(records: &[(&str, &str, &[&str])]) -> Corpus {
    Corpus::from_records(records.iter().flat_map(|(id, title, texts)| {
        texts.iter().enumerate().map(move |(i, t)| CorpusRecord {
            article_id: id.to_string(),
            title: title.to_string(),
            order: i as u64,
            text: t.to_string(),
        })
    }))
    .unwrap()
}

pub const TOAD_QUESTION: &str =
    "How many copies were sold of the book whose character the toad Ingerophrynus gollum is named after?";

/// A small corpus around a toad named after a Tolkien character.
pub fn toad_corpus() -> Corpus {
    corpus(&[
        (
            "ingerophrynus",
            "Ingerophrynus",
            &["Ingerophrynus is a genus of true toads from Southeast Asia. One species described in 2007 \
               honours Gollum, a creature invented by J. R. R. Tolkien."],
        ),
        (
            "ingerophrynus_gollum",
            "Ingerophrynus gollum",
            &["Ingerophrynus gollum, known as Gollum's toad, is a true toad species from Malaysia. \
               Its name refers to a character of The Lord of the Rings, the book by J. R. R. Tolkien."],
        ),
        (
            "lotr",
            "The Lord of the Rings",
            &[
                "The Lord of the Rings is an epic fantasy novel by the English writer J. R. R. Tolkien.",
                "The novel has sold more than 150 million copies, which puts it among the best-selling books.",
            ],
        ),
        (
            "hobbit",
            "The Hobbit",
            &["The Hobbit is a fantasy book for children by J. R. R. Tolkien, published in 1937. \
               It sold millions of copies."],
        ),
        (
            "toad",
            "Toad",
            &["Toad is a common name for frogs with dry, leathery skin and short legs. Many toads are true toads."],
        ),
        (
            "malaysia",
            "Malaysia",
            &["Malaysia is a country in Southeast Asia with rainforests that hold many frog species."],
        ),
        (
            "bestsellers",
            "List of best-selling books",
            &["This list counts books that sold more than 100 million copies, such as several novels."],
        ),
    ])
}

pub fn toad_gold() -> GoldTable {
    let mut g = GoldTable::new();
    g.insert(
        TOAD_QUESTION,
        GoldAnswer::new(
            vec!["ingerophrynus_gollum#0".into(), "lotr#1".into()],
            vec!["150 million copies".into()],
        ),
    );
    g
}
