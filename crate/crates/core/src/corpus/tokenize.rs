//! The one tokenizer shared by indexing, overlap detection, and answer
//! extraction.
//!
//! Text is split on Unicode whitespace, each piece loses any leading and
//! trailing characters that are not alphanumeric, and the remainder is
//! lowercased. Interior punctuation survives (`"j.r.r."` becomes `"j.r.r"`).

use std::ops::Range;

/// A token together with the byte range of the original text it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub token: String,
    pub range: Range<usize>,
}

pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with_offsets(text)
        .into_iter()
        .map(|t| t.token)
        .collect()
}

pub fn tokenize_with_offsets(text: &str) -> Vec<TokenSpan> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                push_piece(text, s..i, &mut out);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        push_piece(text, s..text.len(), &mut out);
    }
    out
}

/// True when `term` is already a single normalized token.
pub fn is_normalized(term: &str) -> bool {
    let toks = tokenize(term);
    toks.len() == 1 && toks[0] == term
}

fn push_piece(text: &str, range: Range<usize>, out: &mut Vec<TokenSpan>) {
    let piece = &text[range.clone()];
    let trimmed = piece.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        return;
    }
    let lead = piece.len()
        - piece
            .trim_start_matches(|c: char| !c.is_alphanumeric())
            .len();
    let begin = range.start + lead;
    let lowered = trimmed.to_lowercase();
    // Some lowercase mappings emit combining marks at the edges.
    let token = lowered.trim_matches(|c: char| !c.is_alphanumeric());
    if token.is_empty() {
        return;
    }
    out.push(TokenSpan {
        token: token.to_string(),
        range: begin..begin + trimmed.len(),
    });
}
