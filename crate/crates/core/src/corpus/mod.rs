//! Paragraph-granular corpus storage.
//!
//! Paragraphs are stored sorted by id, so the dense paragraph index used by
//! the search engine orders exactly like the ids do. Articles keep their
//! member paragraphs in document order.

mod mapping;
mod tokenize;

pub use mapping::{
    map_paragraph, map_paragraph_to_article, MappingVerdict, LCS_THRESHOLD_PERCENT,
    UNIGRAM_THRESHOLD_PERCENT,
};
pub use tokenize::{is_normalized, tokenize, tokenize_with_offsets, TokenSpan};

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One line of the corpus input format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub article_id: String,
    pub title: String,
    pub order: u64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paragraph {
    pub id: String,
    pub article_id: String,
    pub title: String,
    pub order: u64,
    pub text: String,
    pub tokens: Vec<String>,
}

impl Paragraph {
    pub fn new(article_id: &str, title: &str, order: u64, text: &str) -> Self {
        Paragraph {
            id: paragraph_id(article_id, order),
            article_id: article_id.to_string(),
            title: title.to_string(),
            order,
            text: text.to_string(),
            tokens: tokenize(text),
        }
    }
}

pub fn paragraph_id(article_id: &str, order: u64) -> String {
    format!("{article_id}#{order}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Article {
    pub article_id: String,
    pub title: String,
    /// Concatenation of member paragraph tokens in document order.
    pub full_text_tokens: Vec<String>,
    /// Dense paragraph indices, in document order.
    pub paragraphs: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub n_paragraphs: usize,
    pub n_articles: usize,
}

/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Corpus {
    paragraphs: Vec<Paragraph>,
    paragraph_index: HashMap<String, usize>,
    paragraph_article: Vec<usize>,
    articles: Vec<Article>,
    article_index: HashMap<String, usize>,
}

impl Corpus {
    /// Each record is paired with its 1-based source line for error reporting.
    fn build(records: Vec<(usize, CorpusRecord)>) -> Result<Self> {
        let mut titles: HashMap<String, String> = HashMap::new();
        let mut by_id: BTreeMap<String, Paragraph> = BTreeMap::new();
        for (line, rec) in records {
            match titles.get(&rec.article_id) {
                Some(t) if *t != rec.title => {
                    return Err(Error::Ingest {
                        line,
                        message: format!(
                            "title `{}` disagrees with earlier title `{}` for article `{}`",
                            rec.title, t, rec.article_id
                        ),
                    })
                }
                Some(_) => {}
                None => {
                    titles.insert(rec.article_id.clone(), rec.title.clone());
                }
            }
            let p = Paragraph::new(&rec.article_id, &rec.title, rec.order, &rec.text);
            if by_id.contains_key(&p.id) {
                return Err(Error::DuplicateParagraph {
                    article_id: rec.article_id,
                    order: rec.order,
                });
            }
            by_id.insert(p.id.clone(), p);
        }

        let paragraphs: Vec<Paragraph> = by_id.into_values().collect();
        let paragraph_index = paragraphs
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), i))
            .collect();

        let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, p) in paragraphs.iter().enumerate() {
            members.entry(p.article_id.as_str()).or_default().push(i);
        }
        let mut articles = Vec::with_capacity(members.len());
        let mut paragraph_article = vec![0; paragraphs.len()];
        for (a, (article_id, mut idx)) in members.into_iter().enumerate() {
            idx.sort_by_key(|&i| paragraphs[i].order);
            let full_text_tokens = idx
                .iter()
                .flat_map(|&i| paragraphs[i].tokens.iter().cloned())
                .collect();
            for &i in &idx {
                paragraph_article[i] = a;
            }
            articles.push(Article {
                article_id: article_id.to_string(),
                title: titles[article_id].clone(),
                full_text_tokens,
                paragraphs: idx,
            });
        }
        let article_index = articles
            .iter()
            .enumerate()
            .map(|(i, a)| (a.article_id.clone(), i))
            .collect();

        Ok(Corpus {
            paragraphs,
            paragraph_index,
            paragraph_article,
            articles,
            article_index,
        })
    }

    pub fn from_records(records: impl IntoIterator<Item = CorpusRecord>) -> Result<Self> {
        Self::build(
            records
                .into_iter()
                .enumerate()
                .map(|(i, r)| (i + 1, r))
                .collect(),
        )
    }

    pub fn stats(&self) -> CorpusStats {
        CorpusStats {
            n_paragraphs: self.paragraphs.len(),
            n_articles: self.articles.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.paragraphs.is_empty()
    }

    /// Paragraphs in ascending id order.
    pub fn paragraphs(&self) -> &[Paragraph] {
        &self.paragraphs
    }

    /// Articles in ascending article id order.
    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn paragraph(&self, id: &str) -> Option<&Paragraph> {
        self.paragraph_index.get(id).map(|&i| &self.paragraphs[i])
    }

    pub fn paragraph_idx(&self, id: &str) -> Option<usize> {
        self.paragraph_index.get(id).copied()
    }

    pub fn article(&self, article_id: &str) -> Option<&Article> {
        self.article_index
            .get(article_id)
            .map(|&i| &self.articles[i])
    }

    pub fn article_idx(&self, article_id: &str) -> Option<usize> {
        self.article_index.get(article_id).copied()
    }

    /// Dense article index of the paragraph at dense index `para`.
    pub fn article_of(&self, para: usize) -> usize {
        self.paragraph_article[para]
    }

    /// Member paragraphs of an article, in document order.
    pub fn article_paragraphs<'a>(
        &'a self,
        article: &'a Article,
    ) -> impl Iterator<Item = &'a Paragraph> + 'a {
        article.paragraphs.iter().map(move |&i| &self.paragraphs[i])
    }

    pub fn to_records(&self) -> Vec<CorpusRecord> {
        self.paragraphs
            .iter()
            .map(|p| CorpusRecord {
                article_id: p.article_id.clone(),
                title: p.title.clone(),
                order: p.order,
                text: p.text.clone(),
            })
            .collect()
    }
}

/// Reads the line-delimited corpus format. Blank lines are skipped.
pub fn ingest_corpus<R: BufRead>(source: R) -> Result<Corpus> {
    let mut records = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CorpusRecord = serde_json::from_str(&line).map_err(|e| Error::Ingest {
            line: line_no,
            message: e.to_string(),
        })?;
        records.push((line_no, rec));
    }
    Corpus::build(records)
}

pub fn write_corpus<W: std::io::Write>(corpus: &Corpus, mut out: W) -> Result<()> {
    for rec in corpus.to_records() {
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(article: &str, title: &str, order: u64, text: &str) -> String {
        serde_json::to_string(&CorpusRecord {
            article_id: article.into(),
            title: title.into(),
            order,
            text: text.into(),
        })
        .unwrap()
    }

    #[test]
    fn two_records_one_article() {
        let src = [
            rec("toad", "Toad", 0, "A toad."),
            rec("toad", "Toad", 1, "It hops."),
        ]
        .join("\n");
        let corpus = ingest_corpus(src.as_bytes()).unwrap();
        assert_eq!(
            corpus.stats(),
            CorpusStats {
                n_paragraphs: 2,
                n_articles: 1
            }
        );
        assert!(corpus.paragraph("toad#1").is_some());
    }

    #[test]
    fn missing_title_names_line() {
        let src = format!(
            "{}\n{{\"article_id\":\"x\",\"order\":0,\"text\":\"hi\"}}\n",
            rec("a", "A", 0, "ok")
        );
        match ingest_corpus(src.as_bytes()) {
            Err(Error::Ingest { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("title"), "{message}");
            }
            other => panic!("expected ingest error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_names_line() {
        let src = format!("{}\n\n{{not json\n", rec("a", "A", 0, "ok"));
        assert!(matches!(
            ingest_corpus(src.as_bytes()),
            Err(Error::Ingest { line: 3, .. })
        ));
    }

    #[test]
    fn duplicate_order_rejected() {
        let src = [rec("a", "A", 3, "x"), rec("a", "A", 3, "y")].join("\n");
        assert!(matches!(
            ingest_corpus(src.as_bytes()),
            Err(Error::DuplicateParagraph { order: 3, .. })
        ));
    }

    #[test]
    fn article_text_is_concatenation_in_document_order() {
        // orders 10 and 2 sort differently as ids than as document positions
        let src = [
            rec("b", "B", 10, "Second part."),
            rec("a", "A", 0, "Alpha beta."),
            rec("b", "B", 2, "First part, here."),
        ]
        .join("\n");
        let corpus = ingest_corpus(src.as_bytes()).unwrap();
        assert_eq!(corpus.stats().n_articles, 2);
        for article in corpus.articles() {
            let mut expected = Vec::new();
            let mut members: Vec<&Paragraph> = corpus
                .paragraphs()
                .iter()
                .filter(|p| p.article_id == article.article_id)
                .collect();
            members.sort_by_key(|p| p.order);
            for p in members {
                expected.extend(tokenize(&p.text));
            }
            assert_eq!(article.full_text_tokens, expected);
        }
        assert_eq!(
            corpus.article("b").unwrap().full_text_tokens,
            vec!["first", "part", "here", "second", "part"]
        );
    }

    #[test]
    fn paragraphs_sorted_by_id_and_resolve() {
        let src = [
            rec("z", "Z", 0, "z"),
            rec("a", "A", 1, "a"),
            rec("a", "A", 0, "a"),
        ]
        .join("\n");
        let corpus = ingest_corpus(src.as_bytes()).unwrap();
        let ids: Vec<&str> = corpus.paragraphs().iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, vec!["a#0", "a#1", "z#0"]);
        for (i, p) in corpus.paragraphs().iter().enumerate() {
            let a = &corpus.articles()[corpus.article_of(i)];
            assert_eq!(a.article_id, p.article_id);
            assert_eq!(p.tokens, tokenize(&p.text));
        }
    }

    #[test]
    fn inconsistent_title_rejected() {
        let src = [rec("a", "A", 0, "x"), rec("a", "Other", 1, "y")].join("\n");
        assert!(matches!(
            ingest_corpus(src.as_bytes()),
            Err(Error::Ingest { line: 2, .. })
        ));
    }
}
