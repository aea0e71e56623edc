//! How reader logits turn into an answer and a stop decision. A hand-written
//! reader output over a one-paragraph path is decoded into its best span,
//! class and answerability, then shifted until the pipeline would stop.
//!
//!     cargo run --example answerability

use hopqa::corpus::Paragraph;
use hopqa::models::{
    answer_text, answerability_span, answerability_yesno, pick_answer, AnswerKind, ClassLogits,
    PathLayout, ReaderOutput, DEFAULT_MAX_SPAN_LEN,
};
use hopqa::pipeline::ReasoningPath;

fn main() -> hopqa::Result<()> {
    let para = Paragraph::new(
        "lotr",
        "The Lord of the Rings",
        1,
        "The novel has sold more than 150 million copies.",
    );
    let path = ReasoningPath::new("How many copies did it sell?").extended(&para);
    let layout = PathLayout::new(&path);
    for (i, (t, s)) in layout.tokens.iter().zip(&layout.segments).enumerate() {
        println!("{i:>3} {t:<10} {s:?}");
    }

    // peak the start logit on "150" and the end logit on "copies"
    let start_at = layout.tokens.iter().position(|t| t == "150").unwrap();
    let end_at = layout.tokens.iter().rposition(|t| t == "copies").unwrap();
    let mut start = vec![0.0; layout.len()];
    let mut end = vec![0.0; layout.len()];
    start[start_at] = 4.0;
    end[end_at] = 3.0;

    for noanswer in [1.0, 6.0, 9.0] {
        let logits = ClassLogits::new(2.0, -1.0, 0.5, noanswer);
        let out = ReaderOutput::new(
            logits,
            start.clone(),
            end.clone(),
            &layout,
            DEFAULT_MAX_SPAN_LEN,
        )?;
        let (kind, score) = pick_answer(&out);
        assert_eq!(
            score,
            answerability_span(&logits, &out.start_logits, &out.end_logits, out.best_span)
        );
        println!(
            "\nnoanswer logit {noanswer}: best span {:?} = {:?}",
            out.best_span,
            answer_text(&path, &layout, &out, kind)
        );
        println!(
            "  span answerability {score:.2}, yes {:.2}, no {:.2} -> {}",
            answerability_yesno(&logits, AnswerKind::Yes),
            answerability_yesno(&logits, AnswerKind::No),
            if score > 0.0 {
                "answer now"
            } else {
                "keep retrieving"
            }
        );
    }
    Ok(())
}
