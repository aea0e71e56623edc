//! Per-term score contributions. Every scoring route in the crate goes
//! through these functions so the indexed and scalar paths agree bit for bit.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringParams {
    /// Paragraph-level BM25 saturation.
    pub k1: f64,
    /// Paragraph-level length normalization.
    pub b: f64,
    /// Saturation for the squared-IDF article score (which has no length term).
    pub article_k1: f64,
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            k1: 1.2,
            b: 0.75,
            article_k1: 1.2,
        }
    }
}

/// Lucene-style idf, `ln(1 + (N - n + 0.5) / (n + 0.5))`, never negative.
pub fn paragraph_idf(n_docs: usize, df: usize) -> f64 {
    let (n, df) = (n_docs as f64, df as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

/// `max(0, ln((N - n + 0.5) / (n + 0.5)))`
pub fn article_idf_plus(n_docs: usize, df: usize) -> f64 {
    let (n, df) = (n_docs as f64, df as f64);
    ((n - df + 0.5) / (df + 0.5)).ln().max(0.0)
}

pub fn bm25_tf(tf: u32, doc_len: u32, avg_doc_len: f64, k1: f64, b: f64) -> f64 {
    let f = tf as f64;
    let norm = 1.0 - b + b * (doc_len as f64 / avg_doc_len);
    f * (k1 + 1.0) / (f + k1 * norm)
}

pub fn saturated_tf(tf: u32, k1: f64) -> f64 {
    let f = tf as f64;
    f * (1.0 + k1) / (f + k1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_paragraph_hand_value() {
        // "a b a", query ["a"]: idf = ln(4/3), tf part = 2 * 2.2 / 3.2
        let idf = paragraph_idf(1, 1);
        assert!((idf - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        let tfp = bm25_tf(2, 3, 3.0, 1.2, 0.75);
        assert!((tfp - 1.375).abs() < 1e-15);
        assert!((idf * tfp - 0.395_563).abs() < 1e-6);
    }

    #[test]
    fn article_idf_clamps() {
        assert_eq!(article_idf_plus(2, 1), 0.0);
        assert_eq!(article_idf_plus(1, 1), 0.0);
        assert_eq!(article_idf_plus(10, 9), 0.0);
        let idf = article_idf_plus(10, 1);
        assert!((idf - 1.845_826_690_498_331_8).abs() < 1e-12);
        assert!((idf * idf * saturated_tf(2, 1.2) - 4.684_7).abs() < 1e-4);
    }

    #[test]
    fn paragraph_idf_is_positive() {
        for n in 1..50 {
            for df in 0..=n {
                assert!(paragraph_idf(n, df) > 0.0);
            }
        }
    }
}
