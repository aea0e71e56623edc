//! Line-delimited index file.
//!
//! ```text
//! hopqa-index/1                                   magic line
//! {"params":{..},"paragraphs":N,"terms":T}        header
//! {"article_id":..,"title":..,"order":..,"text":..}   N corpus records
//! {"term":..,"postings":[[doc,tf],..],"article_postings":[[doc,tf],..]}   T term records
//! ```
//!
//! Corpus records come in ascending paragraph id order; `doc` in postings is
//! the position of the paragraph (or article) in that order.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{InvertedIndex, Posting, ScoringParams};
use crate::corpus::{Corpus, CorpusRecord};
use crate::error::{Error, Result};

pub const INDEX_MAGIC: &str = "hopqa-index";
pub const INDEX_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    params: ScoringParams,
    paragraphs: usize,
    articles: usize,
    terms: usize,
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    term: String,
    postings: Vec<(u32, u32)>,
    article_postings: Vec<(u32, u32)>,
}

pub fn save_index<W: Write>(index: &InvertedIndex, corpus: &Corpus, mut out: W) -> Result<()> {
    if corpus.paragraphs().len() != index.n_paragraphs() {
        return Err(Error::InvalidArgument(
            "corpus does not match the index".into(),
        ));
    }
    writeln!(out, "{INDEX_MAGIC}/{INDEX_VERSION}")?;
    let (terms, postings, article_postings) = index.raw_parts();
    let header = Header {
        params: index.params(),
        paragraphs: index.n_paragraphs(),
        articles: index.n_articles(),
        terms: terms.len(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for rec in corpus.to_records() {
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    for (i, term) in terms.iter().enumerate() {
        let rec = TermRecord {
            term: term.clone(),
            postings: postings[i].iter().map(|p| (p.doc, p.tf)).collect(),
            article_postings: article_postings[i].iter().map(|p| (p.doc, p.tf)).collect(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Loads an index file. Fails if it was built with parameters other than
/// `expected`.
pub fn load_index<R: BufRead>(
    source: R,
    expected: ScoringParams,
) -> Result<(Corpus, InvertedIndex)> {
    let mut lines = source.lines();
    let mut next = |what: &str| -> Result<String> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::IndexFormat(format!("unexpected end of file reading {what}")))
    };

    let magic = next("magic")?;
    let want = format!("{INDEX_MAGIC}/{INDEX_VERSION}");
    if magic.trim_end() != want {
        return Err(Error::IndexFormat(format!(
            "bad magic line `{magic}`, expected `{want}`"
        )));
    }
    let header: Header = serde_json::from_str(&next("header")?)?;
    if header.params != expected {
        return Err(Error::ParamsMismatch {
            found: header.params,
            expected,
        });
    }

    let mut records = Vec::with_capacity(header.paragraphs);
    for _ in 0..header.paragraphs {
        let rec: CorpusRecord = serde_json::from_str(&next("corpus record")?)?;
        records.push(rec);
    }
    let corpus = Corpus::from_records(records)?;
    if corpus.paragraphs().len() != header.paragraphs || corpus.articles().len() != header.articles
    {
        return Err(Error::IndexFormat(
            "corpus counts disagree with header".into(),
        ));
    }

    let n_para = header.paragraphs as u32;
    let n_art = header.articles as u32;
    let mut terms = Vec::with_capacity(header.terms);
    let mut postings = Vec::with_capacity(header.terms);
    let mut article_postings = Vec::with_capacity(header.terms);
    for _ in 0..header.terms {
        let rec: TermRecord = serde_json::from_str(&next("term record")?)?;
        let p = checked_postings(&rec.term, rec.postings, n_para)?;
        let a = checked_postings(&rec.term, rec.article_postings, n_art)?;
        terms.push(rec.term);
        postings.push(p);
        article_postings.push(a);
    }
    let index =
        InvertedIndex::from_raw_parts(header.params, &corpus, terms, postings, article_postings);
    if index.vocabulary_size() != header.terms {
        return Err(Error::IndexFormat("duplicate term records".into()));
    }
    Ok((corpus, index))
}

fn checked_postings(term: &str, raw: Vec<(u32, u32)>, bound: u32) -> Result<Vec<Posting>> {
    let ok =
        raw.iter().all(|&(d, tf)| d < bound && tf > 0) && raw.windows(2).all(|w| w[0].0 < w[1].0);
    if !ok {
        return Err(Error::IndexFormat(format!("invalid postings for `{term}`")));
    }
    Ok(raw
        .into_iter()
        .map(|(doc, tf)| Posting { doc, tf })
        .collect())
}
