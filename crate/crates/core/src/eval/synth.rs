//! Seeded generator of corpora with planted multi-hop chains.
//!
//! Each chain `E1 -r1-> E2 -r2-> ... -rn-> answer` puts one paragraph in the
//! article titled `Ei` containing `Ei`, `ri` and `E(i+1)` (the last one holds
//! the answer phrase instead). The question reads
//! `what is the rn of the ... of the r1 of E1`. Entity names and answer
//! phrases are unique pseudo-words, so every hop's title occurs only in its
//! predecessor and its own article, and the answer only in the terminal
//! paragraph. Sibling paragraphs and distractor articles are filler text
//! with decoy relations; distractors never mention chain entities.

use std::collections::HashSet;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Corpus, CorpusRecord};
use crate::error::{Error, Result};

use super::QuestionRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub seed: u64,
    /// `(hops, count)` pairs.
    pub questions: Vec<(usize, usize)>,
    pub paragraphs_per_article: usize,
    pub distractor_articles: usize,
    pub filler_vocab: usize,
    pub relation_vocab: usize,
    /// Filler words per paragraph, drawn uniformly from this range.
    pub filler_words: (usize, usize),
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            questions: vec![(1, 100), (2, 100), (3, 100)],
            paragraphs_per_article: 3,
            distractor_articles: 200,
            filler_vocab: 3000,
            relation_vocab: 80,
            filler_words: (15, 40),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticBenchmark {
    pub corpus: Corpus,
    pub questions: Vec<QuestionRecord>,
}

const ONSETS: &[&str] = &[
    "b", "br", "d", "dr", "f", "g", "gl", "k", "kr", "l", "m", "n", "p", "pl", "qu", "r", "s",
    "st", "t", "tr", "v", "z", "sh", "th",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou", "ea", "io"];
const CODAS: &[&str] = &["", "n", "r", "s", "x", "th", "l", "m", "nd", "sk"];

/// Distinct pronounceable words, never colliding with each other or with
/// any English stopword in the filler.
struct WordForge {
    used: HashSet<String>,
}

impl WordForge {
    fn word(&mut self, rng: &mut ChaCha8Rng, syllables: usize) -> String {
        loop {
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS.choose(rng).unwrap());
                w.push_str(NUCLEI.choose(rng).unwrap());
                w.push_str(CODAS.choose(rng).unwrap());
            }
            if !crate::models::is_stopword(&w) && self.used.insert(w.clone()) {
                return w;
            }
        }
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

const GLUE: &[&str] = &[
    "the", "of", "and", "in", "a", "was", "is", "with", "for", "by",
];

struct Gen {
    rng: ChaCha8Rng,
    filler: Vec<String>,
    zipf: WeightedIndex<f64>,
    relations: Vec<String>,
    filler_words: (usize, usize),
}

impl Gen {
    fn filler(&mut self, n: usize) -> Vec<String> {
        (0..n)
            .map(|_| {
                if self.rng.gen_bool(0.3) {
                    GLUE.choose(&mut self.rng).unwrap().to_string()
                } else {
                    self.filler[self.zipf.sample(&mut self.rng)].clone()
                }
            })
            .collect()
    }

    fn filler_len(&mut self) -> usize {
        self.rng
            .gen_range(self.filler_words.0..=self.filler_words.1)
    }

    /// Filler text with `inserts` placed at random word boundaries, in order.
    fn paragraph(&mut self, inserts: &[String]) -> String {
        let n = self.filler_len();
        let mut words = self.filler(n);
        let mut at: Vec<usize> = (0..inserts.len())
            .map(|_| self.rng.gen_range(0..=words.len()))
            .collect();
        at.sort_unstable();
        for (pos, ins) in at.iter().zip(inserts).rev() {
            words.insert(*pos, ins.clone());
        }
        let mut text = words.join(" ");
        if let Some(f) = text.get_mut(0..1) {
            f.make_ascii_uppercase();
        }
        text.push('.');
        text
    }

    fn decoy_relation(&mut self, exclude: &[String]) -> String {
        loop {
            let r = self.relations.choose(&mut self.rng).unwrap();
            if !exclude.contains(r) {
                return r.clone();
            }
        }
    }
}

pub fn generate(config: &SynthConfig) -> Result<SyntheticBenchmark> {
    let max_hops = config.questions.iter().map(|&(h, _)| h).max().unwrap_or(0);
    if config.questions.iter().any(|&(h, _)| h == 0)
        || config.paragraphs_per_article == 0
        || config.filler_vocab == 0
        || config.relation_vocab < max_hops + 1
        || config.filler_words.0 > config.filler_words.1
    {
        return Err(Error::InvalidArgument(
            "degenerate synthetic benchmark config".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut forge = WordForge {
        used: HashSet::new(),
    };
    let filler: Vec<String> = (0..config.filler_vocab)
        .map(|_| forge.word(&mut rng, 2))
        .collect();
    let relations: Vec<String> = (0..config.relation_vocab)
        .map(|_| forge.word(&mut rng, 2))
        .collect();
    let weights: Vec<f64> = (1..=filler.len()).map(|r| 1.0 / r as f64).collect();
    let mut g = Gen {
        zipf: WeightedIndex::new(&weights).expect("positive weights"),
        rng,
        filler,
        relations,
        filler_words: config.filler_words,
    };

    let mut records = Vec::new();
    let mut questions = Vec::new();
    let mut article_no = 0usize;
    let mut add_article =
        |records: &mut Vec<CorpusRecord>, title: &str, texts: Vec<String>| -> String {
            article_no += 1;
            let id = format!("art{article_no:05}");
            for (order, text) in texts.into_iter().enumerate() {
                records.push(CorpusRecord {
                    article_id: id.clone(),
                    title: title.to_string(),
                    order: order as u64,
                    text,
                });
            }
            id
        };

    let mut q_no = 0usize;
    for &(hops, count) in &config.questions {
        for _ in 0..count {
            q_no += 1;
            let entities: Vec<String> = (0..hops)
                .map(|_| capitalize(&forge.word(&mut g.rng, 3)))
                .collect();
            let mut rels: Vec<String> = Vec::with_capacity(hops);
            while rels.len() < hops {
                let r = g.relations.choose(&mut g.rng).unwrap().clone();
                if !rels.contains(&r) {
                    rels.push(r);
                }
            }
            let answer = format!(
                "{} {}",
                forge.word(&mut g.rng, 2),
                forge.word(&mut g.rng, 2)
            );

            let mut gold = Vec::with_capacity(hops);
            for i in 0..hops {
                let object = if i + 1 < hops {
                    entities[i + 1].clone()
                } else {
                    answer.clone()
                };
                let planted =
                    g.paragraph(&[entities[i].clone(), format!("{} {}", rels[i], object)]);
                let slot = g.rng.gen_range(0..config.paragraphs_per_article);
                let texts: Vec<String> = (0..config.paragraphs_per_article)
                    .map(|k| {
                        if k == slot {
                            planted.clone()
                        } else {
                            let decoy = g.decoy_relation(&rels);
                            g.paragraph(&[entities[i].clone(), decoy])
                        }
                    })
                    .collect();
                let id = add_article(&mut records, &entities[i], texts);
                gold.push(format!("{id}#{slot}"));
            }

            let mut question = String::from("What is the ");
            for i in (0..hops).rev() {
                question.push_str(&rels[i]);
                question.push_str(if i == 0 { " of " } else { " of the " });
            }
            question.push_str(&entities[0]);
            question.push('?');
            questions.push(QuestionRecord {
                id: format!("syn{q_no:04}"),
                question,
                answers: vec![answer],
                gold_paragraphs: Some(gold),
                fixed_steps: None,
                dataset: Some("synthetic".into()),
                hops: Some(hops),
            });
        }
    }

    let distractors: Vec<String> = (0..config.distractor_articles)
        .map(|_| capitalize(&forge.word(&mut g.rng, 3)))
        .collect();
    for (i, title) in distractors.iter().enumerate() {
        let texts: Vec<String> = (0..config.paragraphs_per_article)
            .map(|_| {
                let other = distractors[g.rng.gen_range(0..distractors.len())].clone();
                let rel = g.decoy_relation(&[]);
                let mut ins = vec![title.clone(), format!("{rel} {other}")];
                if i % 2 == 0 {
                    ins.pop();
                }
                g.paragraph(&ins)
            })
            .collect();
        add_article(&mut records, title, texts);
    }

    Ok(SyntheticBenchmark {
        corpus: Corpus::from_records(records)?,
        questions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn small() -> SynthConfig {
        SynthConfig {
            questions: vec![(1, 5), (2, 5), (3, 5)],
            distractor_articles: 20,
            filler_vocab: 300,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.questions, b.questions);
        assert_eq!(a.corpus.to_records(), b.corpus.to_records());
        let c = generate(&SynthConfig { seed: 8, ..small() }).unwrap();
        assert_ne!(a.questions, c.questions);
    }

    #[test]
    fn planted_structure() {
        let b = generate(&small()).unwrap();
        for q in &b.questions {
            let gold = q.gold_paragraphs.as_ref().unwrap();
            assert_eq!(gold.len(), q.hops.unwrap());
            let answer = tokenize(&q.answers[0]);
            // answer occurs in the terminal paragraph and nowhere else
            let holders: Vec<&str> = b
                .corpus
                .paragraphs()
                .iter()
                .filter(|p| {
                    p.tokens
                        .windows(answer.len())
                        .any(|w| w == answer.as_slice())
                })
                .map(|p| p.id.as_str())
                .collect();
            assert_eq!(holders, [gold.last().unwrap().as_str()]);
            // each hop's title token occurs only in its predecessor and its own article
            for i in 1..gold.len() {
                let p = b.corpus.paragraph(&gold[i]).unwrap();
                let title = tokenize(&p.title)[0].clone();
                for other in b.corpus.paragraphs() {
                    if other.tokens.contains(&title) {
                        assert!(
                            other.article_id == p.article_id || other.id == gold[i - 1],
                            "{}",
                            other.id
                        );
                    }
                }
            }
            assert!(tokenize(&q.question)
                .contains(&tokenize(&b.corpus.paragraph(&gold[0]).unwrap().title)[0]));
        }
    }

    #[test]
    fn rejects_degenerate_configs() {
        assert!(generate(&SynthConfig {
            questions: vec![(0, 1)],
            ..small()
        })
        .is_err());
        assert!(generate(&SynthConfig {
            relation_vocab: 2,
            ..small()
        })
        .is_err());
    }
}
