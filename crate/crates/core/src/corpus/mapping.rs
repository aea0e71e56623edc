//! Mapping a paragraph from one corpus version onto an article of another.
//!
//! Every window of one or two consecutive candidate paragraphs is scored by
//! unigram recall of the original's tokens. The best window is then also
//! measured by longest-common-subsequence coverage.

use std::collections::HashMap;

use serde::Serialize;

use super::{Article, Corpus, Paragraph};
use crate::error::{Error, Result};

/// A match needs strictly more than this share of original unigrams...
pub const UNIGRAM_THRESHOLD_PERCENT: usize = 66;
/// ...or a common subsequence covering strictly more than this share.
pub const LCS_THRESHOLD_PERCENT: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappingVerdict {
    pub matched: bool,
    pub unigram_recall: f64,
    pub lcs_coverage: f64,
    /// Paragraph ids of the best window; empty when unmatched.
    pub target_paragraph_ids: Vec<String>,
}

/// `candidates` must be the candidate article's paragraphs in document order.
pub fn map_paragraph(original: &Paragraph, candidates: &[&Paragraph]) -> Result<MappingVerdict> {
    if original.tokens.is_empty() {
        return Err(Error::EmptyParagraph(original.id.clone()));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidArgument(
            "candidate article has no paragraphs".into(),
        ));
    }

    let mut wanted: HashMap<&str, usize> = HashMap::new();
    for t in &original.tokens {
        *wanted.entry(t.as_str()).or_default() += 1;
    }

    // Single paragraphs are tried before pairs, so a pair only wins when it
    // strictly improves recall; within a size the earliest window wins.
    let mut best: Option<(usize, Vec<&Paragraph>)> = None;
    for len in 1..=2 {
        for start in 0..candidates.len() {
            if start + len > candidates.len() {
                break;
            }
            let window = &candidates[start..start + len];
            let hits = clipped_overlap(&wanted, window);
            if best.as_ref().map_or(true, |(h, _)| hits > *h) {
                best = Some((hits, window.to_vec()));
            }
        }
    }
    let (hits, window) = best.expect("at least one window");

    let window_tokens: Vec<&str> = window
        .iter()
        .flat_map(|p| p.tokens.iter().map(String::as_str))
        .collect();
    let lcs = lcs_len(&original.tokens, &window_tokens);

    let n = original.tokens.len();
    let matched =
        hits * 100 > UNIGRAM_THRESHOLD_PERCENT * n || lcs * 100 > LCS_THRESHOLD_PERCENT * n;
    Ok(MappingVerdict {
        matched,
        unigram_recall: hits as f64 / n as f64,
        lcs_coverage: lcs as f64 / n as f64,
        target_paragraph_ids: if matched {
            window.iter().map(|p| p.id.clone()).collect()
        } else {
            Vec::new()
        },
    })
}

/// Convenience wrapper resolving an article's paragraphs within its corpus.
pub fn map_paragraph_to_article(
    original: &Paragraph,
    corpus: &Corpus,
    article: &Article,
) -> Result<MappingVerdict> {
    let members: Vec<&Paragraph> = corpus.article_paragraphs(article).collect();
    map_paragraph(original, &members)
}

fn clipped_overlap(wanted: &HashMap<&str, usize>, window: &[&Paragraph]) -> usize {
    let mut have: HashMap<&str, usize> = HashMap::new();
    for p in window {
        for t in &p.tokens {
            if wanted.contains_key(t.as_str()) {
                *have.entry(t.as_str()).or_default() += 1;
            }
        }
    }
    wanted
        .iter()
        .map(|(t, &n)| n.min(have.get(t).copied().unwrap_or(0)))
        .sum()
}

fn lcs_len(a: &[String], b: &[&str]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
