//! Answer metrics with SQuAD-style normalization: lowercase, drop ASCII
//! punctuation, drop the articles a/an/the, collapse whitespace.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub fn normalize_answer(text: &str) -> String {
    let lowered = text.to_lowercase();
    let no_punct: String = lowered
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .collect();
    no_punct
        .split_whitespace()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn check(golds: &[String]) -> Result<()> {
    if golds.is_empty() {
        return Err(Error::InvalidArgument("no gold answers".into()));
    }
    Ok(())
}

/// 1.0 if the normalized prediction equals any normalized gold, else 0.0.
pub fn exact_match(prediction: &str, golds: &[String]) -> Result<f64> {
    check(golds)?;
    let p = normalize_answer(prediction);
    Ok(if golds.iter().any(|g| normalize_answer(g) == p) {
        1.0
    } else {
        0.0
    })
}

fn f1_single(prediction: &str, gold: &str) -> f64 {
    let p = normalize_answer(prediction);
    let g = normalize_answer(gold);
    let pt: Vec<&str> = p.split_whitespace().collect();
    let gt: Vec<&str> = g.split_whitespace().collect();
    if pt.is_empty() || gt.is_empty() {
        return if pt.is_empty() && gt.is_empty() {
            1.0
        } else {
            0.0
        };
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in &gt {
        *counts.entry(t).or_default() += 1;
    }
    let mut common = 0usize;
    for t in &pt {
        if let Some(c) = counts.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / pt.len() as f64;
    let recall = common as f64 / gt.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Best token-multiset F1 of the prediction against any gold.
pub fn unigram_f1(prediction: &str, golds: &[String]) -> Result<f64> {
    check(golds)?;
    Ok(golds
        .iter()
        .map(|g| f1_single(prediction, g))
        .fold(0.0, f64::max))
}
