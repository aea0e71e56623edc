//! Index-statistics stand-ins for the neural retriever and reranker.

use std::collections::HashSet;

use crate::corpus::{tokenize, Paragraph};
use crate::error::{Error, Result};
use crate::pipeline::ReasoningPath;
use crate::search::{InvertedIndex, Query};

use super::{is_stopword, Reranker, Retriever};

pub const DEFAULT_KEEP_FRACTION: f64 = 0.4;
pub const DEFAULT_MAX_QUERY_TERMS: usize = 20;

/// Keeps the rarest fraction of the path's distinct non-stopword tokens, in
/// path order.
#[derive(Debug, Clone, Copy)]
pub struct BaselineRetriever<'a> {
    index: &'a InvertedIndex,
    keep_fraction: f64,
    max_terms: usize,
}

impl<'a> BaselineRetriever<'a> {
    pub fn new(index: &'a InvertedIndex) -> Self {
        BaselineRetriever {
            index,
            keep_fraction: DEFAULT_KEEP_FRACTION,
            max_terms: DEFAULT_MAX_QUERY_TERMS,
        }
    }

    pub fn with_limits(
        index: &'a InvertedIndex,
        keep_fraction: f64,
        max_terms: usize,
    ) -> Result<Self> {
        if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "keep fraction {keep_fraction} outside (0, 1]"
            )));
        }
        if max_terms == 0 {
            return Err(Error::InvalidArgument(
                "max query terms must be positive".into(),
            ));
        }
        Ok(BaselineRetriever {
            index,
            keep_fraction,
            max_terms,
        })
    }

    pub fn query_for_tokens(&self, tokens: &[String]) -> Query {
        let mut seen = HashSet::new();
        let candidates: Vec<&String> = tokens
            .iter()
            .filter(|t| !is_stopword(t) && seen.insert(t.as_str()))
            .collect();
        if candidates.is_empty() {
            return Query::from_tokens_unchecked(Vec::new());
        }
        let idfs: Vec<f64> = candidates.iter().map(|t| self.index.idf(t)).collect();

        let mut by_idf: Vec<usize> = (0..candidates.len()).collect();
        by_idf.sort_by(|&a, &b| idfs[b].total_cmp(&idfs[a]).then(a.cmp(&b)));
        let keep = ((self.keep_fraction * candidates.len() as f64).ceil() as usize)
            .clamp(1, candidates.len());
        let threshold = idfs[by_idf[keep - 1]];
        let mut kept: Vec<usize> = by_idf
            .into_iter()
            .filter(|&i| idfs[i] >= threshold)
            .take(self.max_terms)
            .collect();
        if kept.is_empty() {
            kept = (0..candidates.len()).collect();
        }
        kept.sort_unstable();
        Query::from_tokens_unchecked(kept.into_iter().map(|i| candidates[i].clone()).collect())
    }
}

impl Retriever for BaselineRetriever<'_> {
    fn query(&self, path: &ReasoningPath) -> Result<Query> {
        Ok(self.query_for_tokens(&path.tokens()))
    }
}

/// Sum of idf over the candidate's distinct non-stopword tokens (title and
/// text) that also occur in the question or the path's last paragraph,
/// divided by the square root of the candidate's token count.
#[derive(Debug, Clone, Copy)]
pub struct BaselineReranker<'a> {
    index: &'a InvertedIndex,
}

impl<'a> BaselineReranker<'a> {
    pub fn new(index: &'a InvertedIndex) -> Self {
        BaselineReranker { index }
    }
}

impl Reranker for BaselineReranker<'_> {
    fn score(&self, path: &ReasoningPath, candidate: &Paragraph) -> Result<f64> {
        let mut context: HashSet<String> = path.question_tokens().into_iter().collect();
        if let Some(last) = path.last() {
            context.extend(tokenize(&last.title));
            context.extend(last.tokens.iter().cloned());
        }
        let mut cand = tokenize(&candidate.title);
        cand.extend(candidate.tokens.iter().cloned());
        if cand.is_empty() {
            return Ok(0.0);
        }
        let mut seen = HashSet::new();
        let overlap: f64 = cand
            .iter()
            .filter(|t| !is_stopword(t) && seen.insert(t.as_str()) && context.contains(t.as_str()))
            .map(|t| self.index.idf(t))
            .sum();
        Ok(overlap / (cand.len() as f64).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, CorpusRecord};
    use proptest::prelude::*;

    fn corpus(texts: &[&str]) -> Corpus {
        Corpus::from_records(texts.iter().enumerate().map(|(i, t)| CorpusRecord {
            article_id: format!("a{i}"),
            title: format!("T{i}"),
            order: 0,
            text: t.to_string(),
        }))
        .unwrap()
    }

    fn is_subsequence(q: &[String], path: &[String]) -> bool {
        let mut it = path.iter();
        q.iter().all(|t| it.any(|p| p == t))
    }

    #[test]
    fn rare_term_among_stopwords() {
        let c = corpus(&["the cat", "the dog", "zyzzyva of the"]);
        let idx = InvertedIndex::build(&c).unwrap();
        let r = BaselineRetriever::new(&idx);
        let q = r
            .query(&ReasoningPath::new("what is the zyzzyva of"))
            .unwrap();
        assert_eq!(q.terms(), ["zyzzyva"]);
        assert!(r
            .query(&ReasoningPath::new("what is the"))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn keeps_rarest_fraction_in_path_order() {
        let c = corpus(&["alpha beta gamma", "alpha beta", "alpha", "delta"]);
        let idx = InvertedIndex::build(&c).unwrap();
        let r = BaselineRetriever::with_limits(&idx, 0.5, 20).unwrap();
        // idf: delta, gamma rare; beta mid; alpha common
        let q = r.query_for_tokens(&tokenize("gamma alpha beta delta"));
        assert_eq!(q.terms(), ["gamma", "delta"]);
        let r = BaselineRetriever::with_limits(&idx, 1.0, 2).unwrap();
        assert_eq!(
            r.query_for_tokens(&tokenize("gamma alpha beta delta"))
                .terms(),
            ["gamma", "delta"]
        );
        assert!(BaselineRetriever::with_limits(&idx, 0.0, 2).is_err());
        assert!(BaselineRetriever::with_limits(&idx, 0.5, 0).is_err());
    }

    #[test]
    fn reranker_zero_and_dominance() {
        let c = corpus(&["gollum toad species", "ring bearer", "toad species list"]);
        let idx = InvertedIndex::build(&c).unwrap();
        let rr = BaselineReranker::new(&idx);
        let path = ReasoningPath::new("gollum toad species");
        let none = Paragraph::new("x", "", 0, "ring bearer");
        assert_eq!(rr.score(&path, &none).unwrap(), 0.0);
        let same = Paragraph::new("y", "", 0, "gollum toad species");
        let fewer = Paragraph::new("z", "", 0, "gollum toad bearer");
        assert!(rr.score(&path, &same).unwrap() >= rr.score(&path, &fewer).unwrap());
    }

    #[test]
    fn reranker_matches_brute_force() {
        let c = corpus(&["a b c d", "b c e", "e f g", "a g h", "c c c the"]);
        let idx = InvertedIndex::build(&c).unwrap();
        let rr = BaselineReranker::new(&idx);
        let path = ReasoningPath::new("b c the").extended(&c.paragraphs()[2]);
        let n = c.paragraphs().len() as f64;
        let brute = |p: &Paragraph| {
            let ctx: Vec<String> = tokenize("b c e f g t2");
            let mut toks = tokenize(&p.title);
            toks.extend(p.tokens.clone());
            let mut distinct = toks.clone();
            distinct.sort();
            distinct.dedup();
            let s: f64 = distinct
                .iter()
                .filter(|t| ctx.contains(t) && !is_stopword(t))
                .map(|t| {
                    let df = c
                        .paragraphs()
                        .iter()
                        .filter(|q| q.tokens.contains(t))
                        .count() as f64;
                    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
                })
                .sum();
            s / (toks.len() as f64).sqrt()
        };
        for p in c.paragraphs() {
            let got = rr.score(&path, p).unwrap();
            assert!(
                (got - brute(p)).abs() < 1e-12,
                "{}: {got} vs {}",
                p.id,
                brute(p)
            );
        }
    }

    proptest! {
        #[test]
        fn query_is_subsequence_and_monotone(
            words in proptest::collection::vec(0usize..30, 1..40),
            f1 in 0.05f64..1.0,
            f2 in 0.05f64..1.0,
        ) {
            let texts: Vec<String> = (0..10)
                .map(|i| (0..=i).map(|j| format!("w{}", (i * 7 + j * 3) % 30)).collect::<Vec<_>>().join(" "))
                .collect();
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let c = corpus(&refs);
            let idx = InvertedIndex::build(&c).unwrap();
            let path: Vec<String> = words.iter().map(|w| format!("w{w}")).collect();
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            let small = BaselineRetriever::with_limits(&idx, lo, 20).unwrap().query_for_tokens(&path);
            let large = BaselineRetriever::with_limits(&idx, hi, 20).unwrap().query_for_tokens(&path);
            prop_assert!(is_subsequence(small.terms(), &path));
            prop_assert!(is_subsequence(large.terms(), &path));
            for t in small.terms() {
                prop_assert!(large.terms().contains(t));
            }
        }
    }
}
