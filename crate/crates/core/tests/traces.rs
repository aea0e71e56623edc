mod common;

use common::*;
use hopqa::pipeline::{
    generate_training_traces, GoldExample, ReaderLabel, SkipReason, TraceConfig,
};
use hopqa::search::InvertedIndex;

fn toad_example(dataset: Option<&str>) -> GoldExample {
    GoldExample {
        id: "toad".into(),
        question: TOAD_QUESTION.into(),
        gold_paragraphs: vec!["ingerophrynus_gollum#0".into(), "lotr#1".into()],
        answers: vec!["150 million copies".into()],
        dataset: dataset.map(String::from),
    }
}

#[test]
fn single_hop_without_augmentation_gives_one_span_trace() {
    let corpus = toad_corpus();
    let index = InvertedIndex::build(&corpus).unwrap();
    let ex = GoldExample {
        id: "hobbit".into(),
        question: "When was The Hobbit published?".into(),
        gold_paragraphs: vec!["hobbit#0".into()],
        answers: vec!["1937".into()],
        dataset: Some("squad".into()),
    };
    let batch = generate_training_traces(&corpus, &index, &[ex], &TraceConfig::default()).unwrap();
    assert!(batch.skipped.is_empty());
    assert_eq!(batch.traces.len(), 1);
    let t = &batch.traces[0];
    assert!(!t.polluted);
    assert!(t.path_state.paragraph_ids.is_empty());
    let ReaderLabel::Span {
        paragraph_id,
        start,
        end,
        text,
    } = &t.reader_label
    else {
        panic!("{:?}", t.reader_label)
    };
    assert_eq!(paragraph_id, "hobbit#0");
    assert_eq!(text, "1937");
    assert_eq!(
        &corpus.paragraph("hobbit#0").unwrap().text[*start..*end],
        "1937"
    );
}

#[test]
fn gold_chain_traces_and_labels() {
    let corpus = toad_corpus();
    let index = InvertedIndex::build(&corpus).unwrap();
    let batch = generate_training_traces(
        &corpus,
        &index,
        &[toad_example(None)],
        &TraceConfig::default(),
    )
    .unwrap();
    assert_eq!(batch.traces.len(), 2);
    let (t1, t2) = (&batch.traces[0], &batch.traces[1]);
    assert_eq!(t1.reader_label, ReaderLabel::NoAnswer);
    assert!(
        matches!(&t2.reader_label, ReaderLabel::Span { text, .. } if text == "150 million copies")
    );
    assert_eq!(t1.oracle_query.target_id, "ingerophrynus_gollum#0");
    assert_eq!(t2.oracle_query.target_id, "lotr#1");
    assert_eq!(t2.path_state.paragraph_ids, ["ingerophrynus_gollum#0"]);
    for t in &batch.traces {
        assert_eq!(t.candidates.len(), 5);
        assert!(!t
            .candidates
            .iter()
            .any(|c| t.path_state.paragraph_ids.contains(c)));
        for (c, &flag) in t.candidates.iter().zip(&t.gold_flags) {
            assert_eq!(flag, c == "ingerophrynus_gollum#0" || c == "lotr#1");
        }
        assert!(
            t.gold_flags.iter().any(|&f| f),
            "oracle query should retrieve its target"
        );
    }
}

#[test]
fn augmentation_count_follows_step_caps() {
    let corpus = toad_corpus();
    let index = InvertedIndex::build(&corpus).unwrap();
    // a polluted variant at gold step i (0-based) needs i + 2 steps
    let expected = |n: usize, cap: usize| n + (0..n).filter(|i| i + 2 <= cap).count();
    for (dataset, cap) in [(None, 3), (Some("hotpotqa"), 3), (Some("squad"), 2)] {
        let config = TraceConfig {
            augment_nongold: true,
            ..TraceConfig::default()
        };
        let batch =
            generate_training_traces(&corpus, &index, &[toad_example(dataset)], &config).unwrap();
        assert_eq!(batch.traces.len(), expected(2, cap), "{dataset:?}");
        let polluted: Vec<_> = batch.traces.iter().filter(|t| t.polluted).collect();
        for t in &polluted {
            let ids = &t.path_state.paragraph_ids;
            let distractor = ids.last().unwrap();
            assert!(distractor != "ingerophrynus_gollum#0" && distractor != "lotr#1");
            // the polluted path is the gold prefix plus one distractor
            assert_eq!(ids.len(), t.step);
            assert_eq!(t.candidates.len(), 5);
            for (c, &flag) in t.candidates.iter().zip(&t.gold_flags) {
                assert_eq!(flag, c == "ingerophrynus_gollum#0" || c == "lotr#1");
            }
            let gold_twin = batch
                .traces
                .iter()
                .find(|g| !g.polluted && g.step == t.step)
                .unwrap();
            assert_eq!(gold_twin.reader_label, t.reader_label);
            assert_eq!(gold_twin.oracle_query.target_id, t.oracle_query.target_id);
            // the distractor is the best-ranked non-gold candidate of the gold trace
            let first_non_gold = gold_twin
                .candidates
                .iter()
                .zip(&gold_twin.gold_flags)
                .find(|(_, &f)| !f)
                .unwrap()
                .0;
            assert_eq!(distractor, first_non_gold);
        }
    }
}

#[test]
fn skips_are_counted() {
    let corpus = toad_corpus();
    let index = InvertedIndex::build(&corpus).unwrap();
    let untrainable = GoldExample {
        id: "u".into(),
        question: "zzz?".into(),
        gold_paragraphs: vec!["lotr#1".into()],
        answers: vec!["150 million copies".into()],
        dataset: None,
    };
    let missing_answer = GoldExample {
        id: "m".into(),
        answers: vec!["two copies".into()],
        ..toad_example(None)
    };
    let too_long = GoldExample {
        id: "l".into(),
        gold_paragraphs: vec![
            "hobbit#0".into(),
            "ingerophrynus_gollum#0".into(),
            "lotr#1".into(),
        ],
        ..toad_example(Some("squad"))
    };
    let unknown = GoldExample {
        id: "x".into(),
        gold_paragraphs: vec!["nowhere#0".into()],
        ..toad_example(None)
    };
    let batch = generate_training_traces(
        &corpus,
        &index,
        &[
            untrainable,
            toad_example(None),
            missing_answer,
            too_long,
            unknown,
        ],
        &TraceConfig::default(),
    )
    .unwrap();
    assert_eq!(batch.traces.len(), 2);
    assert!(batch.traces.iter().all(|t| t.example_id == "toad"));
    let reasons: Vec<_> = batch
        .skipped
        .iter()
        .map(|(id, r)| (id.as_str(), r.clone()))
        .collect();
    assert_eq!(
        reasons,
        [
            ("u", SkipReason::Untrainable { step: 1 }),
            ("m", SkipReason::AnswerNotFound),
            ("l", SkipReason::ExceedsStepCap { steps: 3, cap: 2 }),
            (
                "x",
                SkipReason::UnknownParagraph {
                    paragraph_id: "nowhere#0".into()
                }
            ),
        ]
    );
}

#[test]
fn yes_no_labels() {
    let corpus = toad_corpus();
    let index = InvertedIndex::build(&corpus).unwrap();
    let ex = GoldExample {
        id: "yn".into(),
        question: "Is Malaysia in Southeast Asia?".into(),
        gold_paragraphs: vec!["malaysia#0".into()],
        answers: vec!["yes".into()],
        dataset: None,
    };
    let batch = generate_training_traces(&corpus, &index, &[ex], &TraceConfig::default()).unwrap();
    assert_eq!(batch.traces[0].reader_label, ReaderLabel::Yes);
}
