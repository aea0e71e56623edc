//! Inverted index over paragraphs with an article-level side index.
//!
//! A paragraph's relevance is the sum of two parts: paragraph BM25
//! (`k1 = 1.2`, `b = 0.75`) and a squared, clamped IDF score against the
//! full text of its parent article with no length normalization.

mod persist;
mod scoring;

pub use persist::{load_index, save_index, INDEX_MAGIC, INDEX_VERSION};
pub use scoring::{article_idf_plus, bm25_tf, paragraph_idf, saturated_tf, ScoringParams};

use std::collections::HashMap;

use serde::Serialize;

use crate::corpus::{is_normalized, tokenize, Corpus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Posting {
    /// Dense paragraph or article index.
    pub doc: u32,
    pub tf: u32,
}

/// A multiset of normalized terms. Order is kept so score sums are reproducible.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Query {
    terms: Vec<String>,
}

impl Query {
    pub fn new(terms: Vec<String>) -> Result<Self> {
        if let Some(bad) = terms.iter().find(|t| !is_normalized(t)) {
            return Err(Error::UnnormalizedTerm(bad.clone()));
        }
        Ok(Query { terms })
    }

    /// Tokenizes free text into a query.
    pub fn parse(text: &str) -> Self {
        Query {
            terms: tokenize(text),
        }
    }

    /// Caller guarantees the terms are corpus tokens.
    pub(crate) fn from_tokens_unchecked(terms: Vec<String>) -> Self {
        Query { terms }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl std::fmt::Display for Query {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.terms.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchHit {
    pub paragraph_id: String,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct InvertedIndex {
    params: ScoringParams,
    vocab: HashMap<String, u32>,
    terms: Vec<String>,
    postings: Vec<Vec<Posting>>,
    article_postings: Vec<Vec<Posting>>,
    doc_lengths: Vec<u32>,
    avg_doc_length: f64,
    paragraph_ids: Vec<String>,
    paragraph_lookup: HashMap<String, u32>,
    paragraph_article: Vec<u32>,
    article_ids: Vec<String>,
    article_lookup: HashMap<String, u32>,
    article_paragraphs: Vec<Vec<u32>>,
}

/// Per-query accumulated scores, shared by top-k and rank queries.
struct ScoreBoard {
    /// Paragraphs with a positive combined score, with that score.
    scored: Vec<(u32, f64)>,
}

impl InvertedIndex {
    pub fn build(corpus: &Corpus) -> Result<Self> {
        Self::build_with(corpus, ScoringParams::default())
    }

    pub fn build_with(corpus: &Corpus, params: ScoringParams) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut vocab: HashMap<String, u32> = HashMap::new();
        let mut terms: Vec<String> = Vec::new();
        let mut postings: Vec<Vec<Posting>> = Vec::new();
        let mut article_postings: Vec<Vec<Posting>> = Vec::new();

        let term_id = |t: &str,
                       vocab: &mut HashMap<String, u32>,
                       terms: &mut Vec<String>,
                       postings: &mut Vec<Vec<Posting>>,
                       article_postings: &mut Vec<Vec<Posting>>| {
            if let Some(&id) = vocab.get(t) {
                return id;
            }
            let id = terms.len() as u32;
            vocab.insert(t.to_string(), id);
            terms.push(t.to_string());
            postings.push(Vec::new());
            article_postings.push(Vec::new());
            id
        };

        let mut doc_lengths = Vec::with_capacity(corpus.paragraphs().len());
        for (p_idx, p) in corpus.paragraphs().iter().enumerate() {
            doc_lengths.push(p.tokens.len() as u32);
            let mut counts: HashMap<u32, u32> = HashMap::new();
            for t in &p.tokens {
                let id = term_id(
                    t,
                    &mut vocab,
                    &mut terms,
                    &mut postings,
                    &mut article_postings,
                );
                *counts.entry(id).or_default() += 1;
            }
            for (id, tf) in counts {
                postings[id as usize].push(Posting {
                    doc: p_idx as u32,
                    tf,
                });
            }
        }
        for (a_idx, a) in corpus.articles().iter().enumerate() {
            let mut counts: HashMap<u32, u32> = HashMap::new();
            for t in &a.full_text_tokens {
                *counts.entry(vocab[t.as_str()]).or_default() += 1;
            }
            for (id, tf) in counts {
                article_postings[id as usize].push(Posting {
                    doc: a_idx as u32,
                    tf,
                });
            }
        }
        // paragraphs were visited in ascending order, articles too
        debug_assert!(postings
            .iter()
            .all(|l| l.windows(2).all(|w| w[0].doc < w[1].doc)));

        Ok(Self::assemble(
            params,
            corpus,
            terms,
            postings,
            article_postings,
            doc_lengths,
        ))
    }

    fn assemble(
        params: ScoringParams,
        corpus: &Corpus,
        terms: Vec<String>,
        postings: Vec<Vec<Posting>>,
        article_postings: Vec<Vec<Posting>>,
        doc_lengths: Vec<u32>,
    ) -> Self {
        let vocab = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let total: u64 = doc_lengths.iter().map(|&l| l as u64).sum();
        let avg_doc_length = total as f64 / doc_lengths.len() as f64;
        let paragraph_ids: Vec<String> = corpus.paragraphs().iter().map(|p| p.id.clone()).collect();
        let paragraph_lookup = paragraph_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32))
            .collect();
        let paragraph_article = (0..paragraph_ids.len())
            .map(|i| corpus.article_of(i) as u32)
            .collect();
        let article_ids: Vec<String> = corpus
            .articles()
            .iter()
            .map(|a| a.article_id.clone())
            .collect();
        let article_lookup = article_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32))
            .collect();
        let article_paragraphs = corpus
            .articles()
            .iter()
            .map(|a| a.paragraphs.iter().map(|&p| p as u32).collect())
            .collect();
        InvertedIndex {
            params,
            vocab,
            terms,
            postings,
            article_postings,
            doc_lengths,
            avg_doc_length,
            paragraph_ids,
            paragraph_lookup,
            paragraph_article,
            article_ids,
            article_lookup,
            article_paragraphs,
        }
    }

    pub fn params(&self) -> ScoringParams {
        self.params
    }

    pub fn n_paragraphs(&self) -> usize {
        self.paragraph_ids.len()
    }

    pub fn n_articles(&self) -> usize {
        self.article_ids.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    /// Sentinel rank for targets a query does not retrieve at all.
    pub fn not_retrieved_rank(&self) -> usize {
        self.n_paragraphs() + 1
    }

    pub fn doc_length(&self, paragraph_id: &str) -> Option<u32> {
        self.paragraph_lookup
            .get(paragraph_id)
            .map(|&i| self.doc_lengths[i as usize])
    }

    pub fn df_para(&self, term: &str) -> usize {
        self.vocab
            .get(term)
            .map_or(0, |&t| self.postings[t as usize].len())
    }

    pub fn df_article(&self, term: &str) -> usize {
        self.vocab
            .get(term)
            .map_or(0, |&t| self.article_postings[t as usize].len())
    }

    /// `(paragraph_id, tf)` pairs for a term, in ascending id order.
    pub fn postings(&self, term: &str) -> Vec<(&str, u32)> {
        self.vocab.get(term).map_or_else(Vec::new, |&t| {
            self.postings[t as usize]
                .iter()
                .map(|p| (self.paragraph_ids[p.doc as usize].as_str(), p.tf))
                .collect()
        })
    }

    /// `(article_id, tf)` pairs for a term, in ascending id order.
    pub fn article_postings(&self, term: &str) -> Vec<(&str, u32)> {
        self.vocab.get(term).map_or_else(Vec::new, |&t| {
            self.article_postings[t as usize]
                .iter()
                .map(|p| (self.article_ids[p.doc as usize].as_str(), p.tf))
                .collect()
        })
    }

    /// Paragraph-level idf of a term; unseen terms get the `df = 0` value.
    pub fn idf(&self, term: &str) -> f64 {
        paragraph_idf(self.n_paragraphs(), self.df_para(term))
    }

    pub fn paragraph_id(&self, idx: usize) -> &str {
        &self.paragraph_ids[idx]
    }

    fn para_idx(&self, paragraph_id: &str) -> Result<u32> {
        self.paragraph_lookup
            .get(paragraph_id)
            .copied()
            .ok_or_else(|| Error::UnknownParagraph(paragraph_id.to_string()))
    }

    fn paragraph_contribution(&self, term_id: u32, para: u32, tf: u32) -> f64 {
        let df = self.postings[term_id as usize].len();
        paragraph_idf(self.n_paragraphs(), df)
            * bm25_tf(
                tf,
                self.doc_lengths[para as usize],
                self.avg_doc_length,
                self.params.k1,
                self.params.b,
            )
    }

    fn article_contribution(&self, term_id: u32, tf: u32) -> f64 {
        let df = self.article_postings[term_id as usize].len();
        let idf = article_idf_plus(self.n_articles(), df);
        idf * idf * saturated_tf(tf, self.params.article_k1)
    }

    fn tf_in(list: &[Posting], doc: u32) -> u32 {
        list.binary_search_by_key(&doc, |p| p.doc)
            .map_or(0, |i| list[i].tf)
    }

    fn score_paragraph_idx(&self, para: u32, query: &Query) -> f64 {
        let mut score = 0.0;
        for term in query.terms() {
            if let Some(&t) = self.vocab.get(term.as_str()) {
                let tf = Self::tf_in(&self.postings[t as usize], para);
                if tf > 0 {
                    score += self.paragraph_contribution(t, para, tf);
                }
            }
        }
        score
    }

    fn score_article_idx(&self, article: u32, query: &Query) -> f64 {
        let mut score = 0.0;
        for term in query.terms() {
            if let Some(&t) = self.vocab.get(term.as_str()) {
                let tf = Self::tf_in(&self.article_postings[t as usize], article);
                if tf > 0 {
                    score += self.article_contribution(t, tf);
                }
            }
        }
        score
    }

    pub fn score_paragraph(&self, paragraph_id: &str, query: &Query) -> Result<f64> {
        Ok(self.score_paragraph_idx(self.para_idx(paragraph_id)?, query))
    }

    pub fn score_article(&self, article_id: &str, query: &Query) -> Result<f64> {
        let a = self
            .article_lookup
            .get(article_id)
            .copied()
            .ok_or_else(|| Error::UnknownArticle(article_id.to_string()))?;
        Ok(self.score_article_idx(a, query))
    }

    pub fn combined_score(&self, paragraph_id: &str, query: &Query) -> Result<f64> {
        let p = self.para_idx(paragraph_id)?;
        Ok(self.score_paragraph_idx(p, query)
            + self.score_article_idx(self.paragraph_article[p as usize], query))
    }

    fn score_board(&self, query: &Query) -> ScoreBoard {
        let mut para_acc: HashMap<u32, f64> = HashMap::new();
        let mut art_acc: HashMap<u32, f64> = HashMap::new();
        // Terms are applied in query order so every paragraph's sum matches
        // the scalar route exactly.
        for term in query.terms() {
            let Some(&t) = self.vocab.get(term.as_str()) else {
                continue;
            };
            for p in &self.postings[t as usize] {
                *para_acc.entry(p.doc).or_insert(0.0) +=
                    self.paragraph_contribution(t, p.doc, p.tf);
            }
            for a in &self.article_postings[t as usize] {
                let c = self.article_contribution(t, a.tf);
                if c > 0.0 {
                    *art_acc.entry(a.doc).or_insert(0.0) += c;
                }
            }
        }
        for (&a, _) in art_acc.iter() {
            for &p in &self.article_paragraphs[a as usize] {
                para_acc.entry(p).or_insert(0.0);
            }
        }
        let scored = para_acc
            .into_iter()
            .map(|(p, s)| {
                let a = self.paragraph_article[p as usize];
                (p, s + art_acc.get(&a).copied().unwrap_or(0.0))
            })
            .filter(|&(_, s)| s > 0.0)
            .collect();
        ScoreBoard { scored }
    }

    /// The `k` best paragraphs by combined score, ties by ascending id.
    /// Paragraphs the query does not touch score 0 and fill remaining slots.
    pub fn search_topk(&self, query: &Query, k: usize) -> Result<Vec<SearchHit>> {
        if k == 0 {
            return Err(Error::ZeroK);
        }
        let mut scored = self.score_board(query).scored;
        let by_rank = |a: &(u32, f64), b: &(u32, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, by_rank);
            scored.truncate(k);
        }
        scored.sort_unstable_by(by_rank);

        if scored.len() < k {
            let mut taken: Vec<u32> = scored.iter().map(|&(p, _)| p).collect();
            taken.sort_unstable();
            let need = k - scored.len();
            let fill: Vec<(u32, f64)> = (0..self.n_paragraphs() as u32)
                .filter(|p| taken.binary_search(p).is_err())
                .take(need)
                .map(|p| (p, 0.0))
                .collect();
            scored.extend(fill);
        }

        Ok(scored
            .into_iter()
            .enumerate()
            .map(|(i, (p, score))| SearchHit {
                paragraph_id: self.paragraph_ids[p as usize].clone(),
                score,
                rank: i + 1,
            })
            .collect())
    }

    /// 1-based rank of `target` under the same ordering as [`search_topk`].
    /// Empty queries and zero-scoring targets get [`not_retrieved_rank`].
    ///
    /// [`search_topk`]: InvertedIndex::search_topk
    /// [`not_retrieved_rank`]: InvertedIndex::not_retrieved_rank
    pub fn rank_of(&self, target_paragraph_id: &str, query: &Query) -> Result<usize> {
        let target = self.para_idx(target_paragraph_id)?;
        if query.is_empty() {
            return Ok(self.not_retrieved_rank());
        }
        let board = self.score_board(query);
        let Some(&(_, target_score)) = board.scored.iter().find(|&&(p, _)| p == target) else {
            return Ok(self.not_retrieved_rank());
        };
        let ahead = board
            .scored
            .iter()
            .filter(|&&(p, s)| s > target_score || (s == target_score && p < target))
            .count();
        Ok(ahead + 1)
    }

    pub(crate) fn raw_parts(&self) -> (&[String], &[Vec<Posting>], &[Vec<Posting>]) {
        (&self.terms, &self.postings, &self.article_postings)
    }

    pub(crate) fn from_raw_parts(
        params: ScoringParams,
        corpus: &Corpus,
        terms: Vec<String>,
        postings: Vec<Vec<Posting>>,
        article_postings: Vec<Vec<Posting>>,
    ) -> Self {
        let doc_lengths = corpus
            .paragraphs()
            .iter()
            .map(|p| p.tokens.len() as u32)
            .collect();
        Self::assemble(
            params,
            corpus,
            terms,
            postings,
            article_postings,
            doc_lengths,
        )
    }
}
