//! Reasoning-path rendering for model input.
//!
//! The text form is `[CLS] question [SEP] title1 [CONT] para1 [SEP] ...`;
//! the positional form ([`PathLayout`]) is what reader logits index into.

use std::ops::Range;

use serde::Serialize;

use crate::corpus::tokenize;
use crate::pipeline::ReasoningPath;

pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const CONT: &str = "[CONT]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "step", rename_all = "lowercase")]
pub enum Segment {
    Marker,
    Question,
    Title(usize),
    Paragraph(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentRange {
    pub segment: Segment,
    /// Byte range within [`SerializedPath::text`].
    pub range: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SerializedPath {
    pub text: String,
    /// Question, title and paragraph ranges in text order. Markers are not listed.
    pub segments: Vec<SegmentRange>,
}

impl SerializedPath {
    pub fn slice(&self, segment: Segment) -> Option<&str> {
        self.segments
            .iter()
            .find(|s| s.segment == segment)
            .map(|s| &self.text[s.range.clone()])
    }

    /// Segment of every whitespace-delimited token of `text`.
    pub fn token_segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        let mut start = None;
        let mut push = |s: usize| {
            let seg = self
                .segments
                .iter()
                .find(|r| r.range.contains(&s))
                .map_or(Segment::Marker, |r| r.segment);
            out.push(seg);
        };
        for (i, c) in self.text.char_indices() {
            if c.is_whitespace() {
                if let Some(s) = start.take() {
                    push(s);
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            push(s);
        }
        out
    }
}

pub fn serialize_path(path: &ReasoningPath) -> SerializedPath {
    let mut text = String::new();
    let mut segments = Vec::new();
    let mut put = |text: &mut String, segment: Segment, body: &str| {
        let start = text.len();
        text.push_str(body);
        segments.push(SegmentRange {
            segment,
            range: start..text.len(),
        });
    };
    text.push_str(CLS);
    text.push(' ');
    put(&mut text, Segment::Question, &path.question);
    text.push(' ');
    text.push_str(SEP);
    for (i, p) in path.steps.iter().enumerate() {
        text.push(' ');
        put(&mut text, Segment::Title(i), &p.title);
        text.push(' ');
        text.push_str(CONT);
        text.push(' ');
        put(&mut text, Segment::Paragraph(i), &p.text);
        text.push(' ');
        text.push_str(SEP);
    }
    SerializedPath { text, segments }
}

/// Token positions seen by a reader. Position 0 is the `[CLS]` marker and
/// doubles as the "no span" position; question, title and paragraph tokens
/// follow in path order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathLayout {
    pub tokens: Vec<String>,
    pub segments: Vec<Segment>,
    /// Index of each position's token within its own segment.
    pub offsets: Vec<usize>,
}

impl PathLayout {
    pub fn new(path: &ReasoningPath) -> Self {
        let mut layout = PathLayout {
            tokens: vec![CLS.to_string()],
            segments: vec![Segment::Marker],
            offsets: vec![0],
        };
        layout.push(Segment::Question, tokenize(&path.question));
        for (i, p) in path.steps.iter().enumerate() {
            layout.push(Segment::Title(i), tokenize(&p.title));
            layout.push(Segment::Paragraph(i), p.tokens.clone());
        }
        layout
    }

    fn push(&mut self, segment: Segment, tokens: Vec<String>) {
        for (i, t) in tokens.into_iter().enumerate() {
            self.tokens.push(t);
            self.segments.push(segment);
            self.offsets.push(i);
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// First position of paragraph `step`, if it has any tokens.
    pub fn paragraph_start(&self, step: usize) -> Option<usize> {
        self.segments
            .iter()
            .position(|&s| s == Segment::Paragraph(step))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Paragraph;
    use proptest::prelude::*;

    fn path(q: &str, steps: &[(&str, &str)]) -> ReasoningPath {
        let mut p = ReasoningPath::new(q);
        for (i, (title, text)) in steps.iter().enumerate() {
            p = p.extended(&Paragraph::new(&format!("a{i}"), title, 0, text));
        }
        p
    }

    /// Independent parser: recovers (question, [(title, para)]) from the text alone.
    fn parse(text: &str) -> Option<(String, Vec<(String, String)>)> {
        let body = text.strip_prefix("[CLS] ")?.strip_suffix(" [SEP]")?;
        let mut parts = body.split(" [SEP] ");
        let question = parts.next()?.to_string();
        let mut steps = Vec::new();
        for part in parts {
            let (t, p) = part.split_once(" [CONT] ")?;
            steps.push((t.to_string(), p.to_string()));
        }
        Some((question, steps))
    }

    #[test]
    fn zero_steps() {
        let s = serialize_path(&path("q", &[]));
        assert_eq!(s.text, "[CLS] q [SEP]");
        assert_eq!(s.slice(Segment::Question), Some("q"));
    }

    #[test]
    fn one_step_block() {
        let s = serialize_path(&path("Who?", &[("Gollum", "A toad.")]));
        assert_eq!(s.text, "[CLS] Who? [SEP] Gollum [CONT] A toad. [SEP]");
        assert_eq!(
            s.token_segments(),
            vec![
                Segment::Marker,
                Segment::Question,
                Segment::Marker,
                Segment::Title(0),
                Segment::Marker,
                Segment::Paragraph(0),
                Segment::Paragraph(0),
                Segment::Marker,
            ]
        );
    }

    #[test]
    fn layout_positions() {
        let p = path("who wrote", &[("The Hobbit", "by tolkien")]);
        let l = PathLayout::new(&p);
        assert_eq!(
            l.tokens,
            ["[CLS]", "who", "wrote", "the", "hobbit", "by", "tolkien"]
        );
        assert_eq!(l.segments[0], Segment::Marker);
        assert_eq!(l.paragraph_start(0), Some(5));
        assert_eq!(l.offsets[6], 1);
        assert_eq!(l.paragraph_start(1), None);
    }

    proptest! {
        #[test]
        fn round_trips_through_independent_parser(
            q in "[A-Za-z0-9 ,.?']{0,30}",
            steps in proptest::collection::vec(("[A-Za-z ()]{0,12}", "[A-Za-z0-9 ,.'-]{0,40}"), 0..4),
        ) {
            let refs: Vec<(&str, &str)> = steps.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            let p = path(&q, &refs);
            let s = serialize_path(&p);
            let (pq, psteps) = parse(&s.text).expect("parsable");
            prop_assert_eq!(&pq, &q);
            prop_assert_eq!(psteps.len(), steps.len());
            for (i, ((t, b), (pt, pb))) in steps.iter().zip(&psteps).enumerate() {
                prop_assert_eq!(t, pt);
                prop_assert_eq!(b, pb);
                prop_assert_eq!(s.slice(Segment::Title(i)), Some(t.as_str()));
                prop_assert_eq!(s.slice(Segment::Paragraph(i)), Some(b.as_str()));
            }
        }
    }
}
