//! Dynamic oracle for query supervision.
//!
//! Given a reasoning path and the paragraph it should retrieve next, the
//! oracle finds the maximal token runs the two share, scores each run by
//!
//! ```text
//! importance(s_i) = rank(target, all spans but s_i) - rank(target, {s_i})
//! ```
//!
//! and then adds runs in descending importance while the target's rank
//! strictly improves. Runs are included or excluded whole. The whole
//! construction costs at most `3N - 1` rank evaluations for `N` runs.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Corpus, Paragraph};
use crate::error::{Error, Result};
use crate::search::{InvertedIndex, Query};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapSpan {
    pub tokens: Vec<String>,
    /// Offset of the first occurrence in the path.
    pub path_offset: usize,
    pub importance: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleQuery {
    pub target_id: String,
    /// Every overlap span with its importance, in path order.
    pub spans: Vec<OverlapSpan>,
    /// The spans kept by the greedy pass, in the order they were added.
    pub spans_included: Vec<OverlapSpan>,
    pub query: Query,
    pub achieved_rank: usize,
    pub rank_evaluations: usize,
}

/// All maximal contiguous runs of `path_tokens` that also occur contiguously
/// in `target`, deduplicated by content, in order of first occurrence.
pub fn extract_overlap_spans(path_tokens: &[String], target: &Paragraph) -> Vec<OverlapSpan> {
    let target = &target.tokens;
    if path_tokens.is_empty() || target.is_empty() {
        return Vec::new();
    }
    // longest[i]: longest prefix of path[i..] found anywhere in target.
    // row[j]: common prefix length of path[i..] and target[j..].
    let n = path_tokens.len();
    let mut longest = vec![0usize; n];
    let mut next_row = vec![0usize; target.len() + 1];
    let mut row = vec![0usize; target.len() + 1];
    for i in (0..n).rev() {
        for j in (0..target.len()).rev() {
            row[j] = if path_tokens[i] == target[j] {
                next_row[j + 1] + 1
            } else {
                0
            };
        }
        longest[i] = row[..target.len()].iter().copied().max().unwrap_or(0);
        std::mem::swap(&mut row, &mut next_row);
    }

    let mut seen: HashSet<&[String]> = HashSet::new();
    let mut spans = Vec::new();
    for i in 0..n {
        let len = longest[i];
        // a run starting one earlier that reaches this far would contain it
        if len == 0 || (i > 0 && longest[i - 1] == len + 1) {
            continue;
        }
        let run = &path_tokens[i..i + len];
        if seen.insert(run) {
            spans.push(OverlapSpan {
                tokens: run.to_vec(),
                path_offset: i,
                importance: None,
            });
        }
    }
    spans
}

fn concat<'a>(spans: impl IntoIterator<Item = &'a OverlapSpan>) -> Query {
    Query::from_tokens_unchecked(
        spans
            .into_iter()
            .flat_map(|s| s.tokens.iter().cloned())
            .collect(),
    )
}

struct CountingRanker<'a> {
    index: &'a InvertedIndex,
    target: &'a str,
    calls: usize,
}

impl CountingRanker<'_> {
    fn rank(&mut self, query: &Query) -> Result<usize> {
        self.calls += 1;
        self.index.rank_of(self.target, query)
    }
}

/// `rank(target, spans without i) - rank(target, {spans[i]})`.
pub fn span_importance(
    index: &InvertedIndex,
    target_id: &str,
    spans: &[OverlapSpan],
    i: usize,
) -> Result<i64> {
    if i >= spans.len() {
        return Err(Error::InvalidArgument(format!(
            "span {i} out of range for {} spans",
            spans.len()
        )));
    }
    let mut ranker = CountingRanker {
        index,
        target: target_id,
        calls: 0,
    };
    importance_with(&mut ranker, spans, i, None)
}

fn importance_with(
    ranker: &mut CountingRanker<'_>,
    spans: &[OverlapSpan],
    i: usize,
    singleton: Option<usize>,
) -> Result<i64> {
    let others = concat(
        spans
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, s)| s),
    );
    let without = ranker.rank(&others)?;
    let alone = match singleton {
        Some(r) => r,
        None => ranker.rank(&concat([&spans[i]]))?,
    };
    Ok(without as i64 - alone as i64)
}

pub fn build_oracle_query(
    index: &InvertedIndex,
    path_tokens: &[String],
    target: &Paragraph,
) -> Result<OracleQuery> {
    let mut spans = extract_overlap_spans(path_tokens, target);
    if spans.is_empty() {
        return Err(Error::Untrainable(target.id.clone()));
    }
    let mut ranker = CountingRanker {
        index,
        target: &target.id,
        calls: 0,
    };

    let mut singles = Vec::with_capacity(spans.len());
    for s in &spans {
        singles.push(ranker.rank(&concat([s]))?);
    }
    for i in 0..spans.len() {
        let imp = importance_with(&mut ranker, &spans, i, Some(singles[i]))?;
        spans[i].importance = Some(imp);
    }

    // descending importance, ties by earlier path position
    let mut order: Vec<usize> = (0..spans.len()).collect();
    order.sort_by(|&a, &b| {
        spans[b]
            .importance
            .cmp(&spans[a].importance)
            .then(spans[a].path_offset.cmp(&spans[b].path_offset))
    });

    let mut included = vec![order[0]];
    let mut best = singles[order[0]];
    for &next in &order[1..] {
        if best == 1 {
            break;
        }
        let trial = concat(included.iter().chain([&next]).map(|&j| &spans[j]));
        let r = ranker.rank(&trial)?;
        if r < best {
            included.push(next);
            best = r;
        } else {
            break;
        }
    }

    let spans_included: Vec<OverlapSpan> = included.iter().map(|&j| spans[j].clone()).collect();
    let query = concat(&spans_included);
    Ok(OracleQuery {
        target_id: target.id.clone(),
        spans,
        spans_included,
        query,
        achieved_rank: best,
        rank_evaluations: ranker.calls,
    })
}

#[derive(Debug, Clone)]
pub struct OracleExample {
    pub path_tokens: Vec<String>,
    pub target_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallCurve {
    pub ks: Vec<usize>,
    pub recall: Vec<f64>,
    pub examples: usize,
    /// Examples with no overlap; they count as misses at every k.
    pub untrainable: usize,
}

/// Fraction of examples whose target lands in the top `k` results of its
/// oracle query, for each `k` in `ks`.
pub fn oracle_recall_curve(
    index: &InvertedIndex,
    corpus: &Corpus,
    examples: &[OracleExample],
    ks: &[usize],
) -> Result<RecallCurve> {
    if examples.is_empty() {
        return Err(Error::InvalidArgument("no oracle examples".into()));
    }
    if ks.is_empty() || ks.contains(&0) || ks.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument(
            "ks must be non-empty, positive and ascending".into(),
        ));
    }
    let max_k = *ks.last().unwrap();
    // Ok(None): untrainable. Ok(Some(None)): not in the top max_k.
    let positions: Vec<Option<Option<usize>>> = examples
        .par_iter()
        .map(|ex| -> Result<Option<Option<usize>>> {
            let target = corpus
                .paragraph(&ex.target_id)
                .ok_or_else(|| Error::UnknownParagraph(ex.target_id.clone()))?;
            let oq = match build_oracle_query(index, &ex.path_tokens, target) {
                Ok(oq) => oq,
                Err(Error::Untrainable(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let hits = index.search_topk(&oq.query, max_k)?;
            Ok(Some(
                hits.iter()
                    .position(|h| h.paragraph_id == ex.target_id)
                    .map(|p| p + 1),
            ))
        })
        .collect::<Result<_>>()?;

    let untrainable = positions.iter().filter(|p| p.is_none()).count();
    let recall = ks
        .iter()
        .map(|&k| {
            positions
                .iter()
                .filter(|p| matches!(p, Some(Some(r)) if *r <= k))
                .count() as f64
                / examples.len() as f64
        })
        .collect();
    Ok(RecallCurve {
        ks: ks.to_vec(),
        recall,
        examples: examples.len(),
        untrainable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, CorpusRecord};

    fn corpus(rows: &[(&str, &str)]) -> Corpus {
        Corpus::from_records(rows.iter().map(|&(a, t)| CorpusRecord {
            article_id: a.into(),
            title: a.into(),
            order: 0,
            text: t.into(),
        }))
        .unwrap()
    }

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn david_dunn_is_one_span() {
        let target = Paragraph::new(
            "dd",
            "David Dunn",
            0,
            "David Dunn is a fictional security guard.",
        );
        let spans = extract_overlap_spans(&toks("david dunn plays"), &target);
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].tokens, vec!["david", "dunn"]);
        assert_eq!(spans[0].path_offset, 0);
    }

    #[test]
    fn disjoint_and_identity() {
        let target = Paragraph::new("t", "T", 0, "alpha beta gamma beta");
        assert!(extract_overlap_spans(&toks("delta epsilon"), &target).is_empty());
        let spans = extract_overlap_spans(&target.tokens, &target);
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].tokens, target.tokens);
    }

    #[test]
    fn overlapping_runs_and_dedup() {
        // "a b" and "b c" occur separately in the target, "a b c" does not
        let target = Paragraph::new("t", "T", 0, "a b x b c");
        let spans = extract_overlap_spans(&toks("a b c q a b"), &target);
        let got: Vec<Vec<String>> = spans.iter().map(|s| s.tokens.clone()).collect();
        assert_eq!(got, vec![toks("a b"), toks("b c")]);
        assert_eq!(spans[1].path_offset, 1);
    }

    #[test]
    fn spans_are_maximal_on_both_sides() {
        let target = Paragraph::new("t", "T", 0, "the lord of the rings by tolkien sold copies");
        let path = toks("which book of the rings did tolkien write the lord");
        for s in extract_overlap_spans(&path, &target) {
            let i = s.path_offset;
            let n = s.tokens.len();
            let occurs = |run: &[String]| target.tokens.windows(run.len()).any(|w| w == run);
            assert!(occurs(&s.tokens));
            if i > 0 {
                assert!(!occurs(&path[i - 1..i + n]));
            }
            if i + n < path.len() {
                assert!(!occurs(&path[i..i + n + 1]));
            }
        }
    }

    fn small_world() -> (Corpus, InvertedIndex) {
        let c = corpus(&[
            (
                "gollum",
                "ingerophrynus gollum is a toad named after gollum",
            ),
            ("genus", "ingerophrynus is a genus of true toads"),
            ("lotr", "the lord of the rings sold 150 million copies"),
            ("hobbit", "the hobbit is a book by tolkien"),
            ("frog", "a frog is not a toad"),
        ]);
        let i = InvertedIndex::build(&c).unwrap();
        (c, i)
    }

    #[test]
    fn single_span_importance_uses_sentinel() {
        let (c, idx) = small_world();
        let target = c.paragraph("lotr#0").unwrap();
        let spans = extract_overlap_spans(&toks("how many copies"), target);
        assert_eq!(spans.len(), 1);
        let imp = span_importance(&idx, "lotr#0", &spans, 0).unwrap();
        let alone = idx.rank_of("lotr#0", &Query::parse("copies")).unwrap();
        assert_eq!(alone, 1);
        assert_eq!(imp, (idx.n_paragraphs() + 1) as i64 - alone as i64);

        let oq = build_oracle_query(&idx, &toks("how many copies"), target).unwrap();
        assert_eq!(oq.query.terms(), ["copies"]);
        assert_eq!(oq.achieved_rank, 1);
        assert!(oq.rank_evaluations <= 4);
    }

    #[test]
    fn unique_span_has_nonnegative_importance() {
        let (c, idx) = small_world();
        let target = c.paragraph("gollum#0").unwrap();
        let path = toks("a toad named gollum");
        let spans = extract_overlap_spans(&path, target);
        let i = spans.iter().position(|s| s.tokens == ["gollum"]).unwrap();
        // brute force: gollum alone puts the target first
        assert_eq!(idx.rank_of("gollum#0", &Query::parse("gollum")).unwrap(), 1);
        let imp = span_importance(&idx, "gollum#0", &spans, i).unwrap();
        let others = concat(
            spans
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, s)| s),
        );
        assert_eq!(imp, idx.rank_of("gollum#0", &others).unwrap() as i64 - 1);
        assert!(imp >= 0);
    }

    #[test]
    fn duplicate_span_complement_equals_full_set() {
        let (_, idx) = small_world();
        let a = OverlapSpan {
            tokens: toks("toad"),
            path_offset: 0,
            importance: None,
        };
        let b = OverlapSpan {
            tokens: toks("genus"),
            path_offset: 1,
            importance: None,
        };
        let spans = vec![a.clone(), b.clone(), a.clone()];
        let imp = span_importance(&idx, "genus#0", &spans, 0).unwrap();
        let full = idx.rank_of("genus#0", &concat([&a, &b])).unwrap();
        let alone = idx.rank_of("genus#0", &concat([&a])).unwrap();
        assert_eq!(imp, full as i64 - alone as i64);
        assert!(span_importance(&idx, "genus#0", &spans, 3).is_err());
    }

    #[test]
    fn stops_after_rank_one() {
        let (c, idx) = small_world();
        let target = c.paragraph("lotr#0").unwrap();
        let oq =
            build_oracle_query(&idx, &toks("copies sold by the lord of rings"), target).unwrap();
        assert_eq!(oq.achieved_rank, 1);
        assert_eq!(oq.spans_included.len(), 1);
        let first = &oq.spans_included[0];
        assert_eq!(
            idx.rank_of("lotr#0", &Query::new(first.tokens.clone()).unwrap())
                .unwrap(),
            1
        );
    }

    #[test]
    fn no_overlap_is_untrainable() {
        let (c, idx) = small_world();
        let target = c.paragraph("lotr#0").unwrap();
        assert!(matches!(
            build_oracle_query(&idx, &toks("zebra quagga"), target),
            Err(Error::Untrainable(_))
        ));
    }

    #[test]
    fn query_is_concatenation_and_rank_matches() {
        let (c, idx) = small_world();
        let target = c.paragraph("gollum#0").unwrap();
        let path = toks("the toad named after a character in a book by tolkien");
        let oq = build_oracle_query(&idx, &path, target).unwrap();
        let joined: Vec<String> = oq
            .spans_included
            .iter()
            .flat_map(|s| s.tokens.clone())
            .collect();
        assert_eq!(oq.query.terms(), &joined[..]);
        assert_eq!(
            idx.rank_of(&target.id, &oq.query).unwrap(),
            oq.achieved_rank
        );
        assert!(oq.rank_evaluations <= 3 * oq.spans.len() + 1);
        assert!(oq.spans.iter().all(|s| s.importance.is_some()));
    }

    #[test]
    fn recall_curve_basics() {
        let (c, idx) = small_world();
        let examples = vec![
            OracleExample {
                path_tokens: toks("how many copies"),
                target_id: "lotr#0".into(),
            },
            OracleExample {
                path_tokens: toks("a genus of toads"),
                target_id: "genus#0".into(),
            },
            OracleExample {
                path_tokens: toks("zebra"),
                target_id: "frog#0".into(),
            },
        ];
        let curve = oracle_recall_curve(&idx, &c, &examples, &[1, 2, 5]).unwrap();
        assert_eq!(curve.untrainable, 1);
        assert!(curve.recall.windows(2).all(|w| w[0] <= w[1]));
        assert!((curve.recall[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!(oracle_recall_curve(&idx, &c, &[], &[1]).is_err());
        assert!(oracle_recall_curve(&idx, &c, &examples, &[5, 1]).is_err());
    }
}
