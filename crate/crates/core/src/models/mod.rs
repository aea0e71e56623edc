//! Retriever, reader and reranker contracts, answerability scoring, and the
//! deterministic implementations that back them without trained networks.
//!
//! Answerability is a log-likelihood ratio between the best positive answer
//! and `NOANSWER`. For yes/no it is the plain logit difference; for spans it
//! also credits the chosen span over the `[CLS]` "no span" position:
//!
//! ```text
//! span - noanswer + (start[s] - start[CLS]) / 2 + (end[e] - end[CLS]) / 2
//! ```
//!
//! Raw logits are used throughout; every term is a difference within one
//! head, so softmax normalization would not change the value.

mod baseline;
mod external;
mod gold;
mod manifest;
mod oracle_retriever;
mod serialize;
mod stopwords;

pub use baseline::{
    BaselineReranker, BaselineRetriever, DEFAULT_KEEP_FRACTION, DEFAULT_MAX_QUERY_TERMS,
};
pub use external::ExternalModel;
pub use gold::{GoldAnswer, GoldReader, GoldTable, GOLD_MARGIN};
pub use manifest::{ModelContext, ModelManifest, ReaderSpec, RerankerSpec, RetrieverSpec};
pub use oracle_retriever::OracleRetriever;
pub use serialize::{
    serialize_path, PathLayout, Segment, SegmentRange, SerializedPath, CLS, CONT, SEP,
};
pub use stopwords::is_stopword;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize_with_offsets, Paragraph};
use crate::error::{Error, Result};
use crate::pipeline::ReasoningPath;
use crate::search::Query;

/// Longest span (in tokens) a reader may extract.
pub const DEFAULT_MAX_SPAN_LEN: usize = 30;

pub trait Retriever: Send + Sync {
    fn query(&self, path: &ReasoningPath) -> Result<Query>;
}

pub trait Reader: Send + Sync {
    fn read(&self, path: &ReasoningPath) -> Result<ReaderOutput>;
}

pub trait Reranker: Send + Sync {
    fn score(&self, path: &ReasoningPath, candidate: &Paragraph) -> Result<f64>;
}

pub struct ModelBundle<'a> {
    pub retriever: Box<dyn Retriever + 'a>,
    pub reader: Box<dyn Reader + 'a>,
    pub reranker: Box<dyn Reranker + 'a>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerKind {
    Span,
    Yes,
    No,
}

impl AnswerKind {
    /// Infers the kind from a gold answer string.
    pub fn infer(answer: &str) -> Self {
        match answer.trim().to_lowercase().as_str() {
            "yes" => AnswerKind::Yes,
            "no" => AnswerKind::No,
            _ => AnswerKind::Span,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassLogits {
    pub span: f64,
    pub yes: f64,
    pub no: f64,
    pub noanswer: f64,
}

impl ClassLogits {
    pub fn new(span: f64, yes: f64, no: f64, noanswer: f64) -> Self {
        ClassLogits {
            span,
            yes,
            no,
            noanswer,
        }
    }
}

/// Inclusive token interval over [`PathLayout`] positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanInterval {
    pub start: usize,
    pub end: usize,
}

impl SpanInterval {
    /// The `[CLS]` "no span" answer.
    pub const NONE: SpanInterval = SpanInterval { start: 0, end: 0 };
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReaderOutput {
    pub class_logits: ClassLogits,
    pub start_logits: Vec<f64>,
    pub end_logits: Vec<f64>,
    pub best_span: SpanInterval,
}

impl ReaderOutput {
    /// Picks the best span: highest `start + end` among intervals inside a
    /// single paragraph no longer than `max_span_len`, earliest on ties.
    /// Without any paragraph tokens the span is [`SpanInterval::NONE`].
    pub fn new(
        class_logits: ClassLogits,
        start_logits: Vec<f64>,
        end_logits: Vec<f64>,
        layout: &PathLayout,
        max_span_len: usize,
    ) -> Result<Self> {
        if start_logits.len() != layout.len() || end_logits.len() != layout.len() {
            return Err(Error::InvalidArgument(format!(
                "reader produced {}/{} span logits for {} positions",
                start_logits.len(),
                end_logits.len(),
                layout.len()
            )));
        }
        let best_span = best_span(&start_logits, &end_logits, layout, max_span_len);
        Ok(ReaderOutput {
            class_logits,
            start_logits,
            end_logits,
            best_span,
        })
    }
}

fn best_span(start: &[f64], end: &[f64], layout: &PathLayout, max_len: usize) -> SpanInterval {
    let mut best: Option<(f64, SpanInterval)> = None;
    for s in 1..layout.len() {
        let Segment::Paragraph(_) = layout.segments[s] else {
            continue;
        };
        for e in s..layout.len().min(s + max_len.max(1)) {
            if layout.segments[e] != layout.segments[s] {
                break;
            }
            let v = start[s] + end[e];
            if best.map_or(true, |(b, _)| v > b) {
                best = Some((v, SpanInterval { start: s, end: e }));
            }
        }
    }
    best.map_or(SpanInterval::NONE, |(_, span)| span)
}

pub fn answerability_span(
    class_logits: &ClassLogits,
    start_logits: &[f64],
    end_logits: &[f64],
    span: SpanInterval,
) -> f64 {
    class_logits.span - class_logits.noanswer
        + (start_logits[span.start] - start_logits[0]) / 2.0
        + (end_logits[span.end] - end_logits[0]) / 2.0
}

pub fn answerability_yesno(class_logits: &ClassLogits, which: AnswerKind) -> f64 {
    match which {
        AnswerKind::Yes => class_logits.yes - class_logits.noanswer,
        AnswerKind::No => class_logits.no - class_logits.noanswer,
        AnswerKind::Span => panic!("answerability_yesno called with a span answer"),
    }
}

/// Most likely positive class (ties prefer span, then yes, then no) and its
/// answerability.
pub fn pick_answer(output: &ReaderOutput) -> (AnswerKind, f64) {
    let c = &output.class_logits;
    let kind = if c.span >= c.yes && c.span >= c.no {
        AnswerKind::Span
    } else if c.yes >= c.no {
        AnswerKind::Yes
    } else {
        AnswerKind::No
    };
    let score = match kind {
        AnswerKind::Span => answerability_span(
            c,
            &output.start_logits,
            &output.end_logits,
            output.best_span,
        ),
        k => answerability_yesno(c, k),
    };
    (kind, score)
}

/// Surface text of an answer: the original paragraph text under the best
/// span, or `"yes"` / `"no"`.
pub fn answer_text(
    path: &ReasoningPath,
    layout: &PathLayout,
    output: &ReaderOutput,
    kind: AnswerKind,
) -> String {
    match kind {
        AnswerKind::Yes => "yes".to_string(),
        AnswerKind::No => "no".to_string(),
        AnswerKind::Span => {
            let span = output.best_span;
            let Segment::Paragraph(step) = layout.segments[span.start] else {
                return String::new();
            };
            let para = &path.steps[step];
            let offsets = tokenize_with_offsets(&para.text);
            let (a, b) = (layout.offsets[span.start], layout.offsets[span.end]);
            para.text[offsets[a].range.start..offsets[b].range.end].to_string()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn worked_example() -> (ClassLogits, Vec<f64>, Vec<f64>, SpanInterval) {
        let cl = ClassLogits::new(2.0, 0.0, 0.0, -1.0);
        let start = vec![1.0, 0.0, 3.0, 0.0];
        let end = vec![0.5, 0.0, 0.0, 2.5];
        (cl, start, end, SpanInterval { start: 2, end: 3 })
    }

    #[test]
    fn span_answerability_zero_and_worked_value() {
        let zero = ClassLogits::default();
        assert_eq!(
            answerability_span(
                &zero,
                &[0.0; 3],
                &[0.0; 3],
                SpanInterval { start: 1, end: 2 }
            ),
            0.0
        );
        let (cl, s, e, span) = worked_example();
        // 2 - (-1) + (3 - 1)/2 + (2.5 - 0.5)/2
        assert_eq!(answerability_span(&cl, &s, &e, span), 5.0);
    }

    #[test]
    fn yesno_answerability() {
        assert_eq!(
            answerability_yesno(&ClassLogits::new(0.0, 1.0, 0.0, 1.0), AnswerKind::Yes),
            0.0
        );
        assert_eq!(
            answerability_yesno(&ClassLogits::new(0.0, 2.5, 0.0, -0.5), AnswerKind::Yes),
            3.0
        );
        assert_eq!(
            answerability_yesno(&ClassLogits::new(0.0, 0.0, 4.0, 1.5), AnswerKind::No),
            2.5
        );
    }

    fn output(cl: ClassLogits, start: Vec<f64>, end: Vec<f64>, span: SpanInterval) -> ReaderOutput {
        ReaderOutput {
            class_logits: cl,
            start_logits: start,
            end_logits: end,
            best_span: span,
        }
    }

    #[test]
    fn pick_answer_argmax() {
        let (cl, s, e, span) = worked_example();
        let out = output(cl, s, e, span);
        assert_eq!(pick_answer(&out), (AnswerKind::Span, 5.0));
        let out = output(
            ClassLogits::new(0.5, 3.0, 1.0, 1.0),
            vec![0.0; 2],
            vec![0.0; 2],
            SpanInterval::NONE,
        );
        assert_eq!(pick_answer(&out), (AnswerKind::Yes, 2.0));
    }

    #[test]
    fn pick_answer_tie_order_exhaustive() {
        // every assignment of {low, high} logits to the three positive classes
        for mask in 0u8..8 {
            let v = |bit: u8| if mask & bit != 0 { 2.0 } else { 1.0 };
            let cl = ClassLogits::new(v(1), v(2), v(4), 0.0);
            let max = cl.span.max(cl.yes).max(cl.no);
            let expected = if cl.span == max {
                AnswerKind::Span
            } else if cl.yes == max {
                AnswerKind::Yes
            } else {
                AnswerKind::No
            };
            let out = output(cl, vec![0.0; 2], vec![0.0; 2], SpanInterval::NONE);
            assert_eq!(pick_answer(&out).0, expected, "mask {mask}");
        }
    }

    #[test]
    fn best_span_respects_paragraph_bounds_and_length() {
        let p = ReasoningPath::new("q")
            .extended(&Paragraph::new("a", "A", 0, "x y"))
            .extended(&Paragraph::new("b", "B", 0, "z w"));
        let layout = PathLayout::new(&p);
        // positions: 0 cls, 1 q, 2 a(title), 3 x, 4 y, 5 b(title), 6 z, 7 w
        let mut start = vec![0.0; 8];
        let mut end = vec![0.0; 8];
        start[4] = 5.0; // y
        end[6] = 5.0; // z, other paragraph
        end[7] = 1.0;
        let out = ReaderOutput::new(
            ClassLogits::default(),
            start.clone(),
            end.clone(),
            &layout,
            30,
        )
        .unwrap();
        assert_eq!(out.best_span, SpanInterval { start: 4, end: 4 });
        start[0] = 100.0; // [CLS] is never a span start
        start[1] = 100.0; // neither is the question
        let out = ReaderOutput::new(ClassLogits::default(), start, end, &layout, 30).unwrap();
        assert_eq!(out.best_span, SpanInterval { start: 4, end: 4 });

        let mut start = vec![0.0; 8];
        let mut end = vec![0.0; 8];
        start[3] = 1.0;
        end[4] = 1.0;
        let out = ReaderOutput::new(
            ClassLogits::default(),
            start.clone(),
            end.clone(),
            &layout,
            1,
        )
        .unwrap();
        assert_eq!(out.best_span.end - out.best_span.start, 0);
        let out = ReaderOutput::new(ClassLogits::default(), start, end, &layout, 2).unwrap();
        assert_eq!(out.best_span, SpanInterval { start: 3, end: 4 });
        assert!(
            ReaderOutput::new(ClassLogits::default(), vec![0.0], vec![0.0], &layout, 2).is_err()
        );
    }

    #[test]
    fn no_paragraph_means_cls_span() {
        let p = ReasoningPath::new("just a question");
        let layout = PathLayout::new(&p);
        let out = ReaderOutput::new(
            ClassLogits::default(),
            vec![1.0; layout.len()],
            vec![1.0; layout.len()],
            &layout,
            30,
        )
        .unwrap();
        assert_eq!(out.best_span, SpanInterval::NONE);
        assert_eq!(answer_text(&p, &layout, &out, AnswerKind::Span), "");
    }

    #[test]
    fn answer_text_uses_original_surface() {
        let p = ReasoningPath::new("q").extended(&Paragraph::new(
            "lotr",
            "LOTR",
            0,
            "It sold \"150 Million copies\" worldwide.",
        ));
        let layout = PathLayout::new(&p);
        let s = layout.paragraph_start(0).unwrap();
        let out = ReaderOutput {
            class_logits: ClassLogits::default(),
            start_logits: vec![0.0; layout.len()],
            end_logits: vec![0.0; layout.len()],
            best_span: SpanInterval {
                start: s + 2,
                end: s + 4,
            },
        };
        assert_eq!(
            answer_text(&p, &layout, &out, AnswerKind::Span),
            "150 Million copies"
        );
        assert_eq!(answer_text(&p, &layout, &out, AnswerKind::No), "no");
    }

    proptest! {
        #[test]
        fn answerability_translation_invariant(
            cls in proptest::array::uniform4(-10.0f64..10.0),
            start in proptest::collection::vec(-10.0f64..10.0, 4),
            end in proptest::collection::vec(-10.0f64..10.0, 4),
            shift in -100.0f64..100.0,
            s in 1usize..4,
            len in 0usize..3,
        ) {
            let e = (s + len).min(3);
            let span = SpanInterval { start: s, end: e };
            let cl = ClassLogits::new(cls[0], cls[1], cls[2], cls[3]);
            let shifted = ClassLogits::new(cls[0] + shift, cls[1] + shift, cls[2] + shift, cls[3] + shift);
            let ss: Vec<f64> = start.iter().map(|x| x + shift).collect();
            let es: Vec<f64> = end.iter().map(|x| x + shift).collect();
            let a = answerability_span(&cl, &start, &end, span);
            let b = answerability_span(&shifted, &ss, &es, span);
            prop_assert!((a - b).abs() < 1e-9);
            for k in [AnswerKind::Yes, AnswerKind::No] {
                prop_assert!((answerability_yesno(&cl, k) - answerability_yesno(&shifted, k)).abs() < 1e-9);
            }
        }

        #[test]
        fn pick_kind_invariant_under_positive_scaling(
            cls in proptest::array::uniform4(-10.0f64..10.0),
            scale in 0.01f64..100.0,
        ) {
            let mk = |f: f64| output(
                ClassLogits::new(cls[0] * f, cls[1] * f, cls[2] * f, cls[3] * f),
                vec![0.0; 2], vec![0.0; 2], SpanInterval::NONE,
            );
            let (a, b) = (pick_answer(&mk(1.0)).0, pick_answer(&mk(scale)).0);
            // scaling can only create ties by underflow, not reorder strict winners
            let strict = {
                let mut v = [cls[0], cls[1], cls[2]];
                v.sort_by(f64::total_cmp);
                v[2] > v[1]
            };
            if strict {
                prop_assert_eq!(a, b);
            }
        }
    }
}
