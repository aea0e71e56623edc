use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hopqa::corpus::{ingest_corpus, map_paragraph_to_article, Corpus};
use hopqa::eval::{
    gold_table, read_questions, run_benchmark, synth, write_questions, BenchOptions, QuestionRecord,
};
use hopqa::models::{ModelContext, ModelManifest};
use hopqa::oracle::{build_oracle_query, oracle_recall_curve, OracleExample};
use hopqa::pipeline::{
    generate_training_traces, Pipeline, PipelineConfig, ReasoningPath, TraceConfig,
};
use hopqa::search::{load_index, save_index, InvertedIndex, ScoringParams};
use hopqa::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hopqa",
    version,
    about = "Multi-hop question answering over a BM25 index"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index file from a corpus file.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
    /// Emit oracle queries along each question's gold chain.
    Oracle {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long)]
        questions: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also report oracle recall at these cutoffs, e.g. 1,5,10.
        #[arg(long, value_delimiter = ',')]
        recall_at: Vec<usize>,
    },
    /// Emit training traces along gold chains.
    Traces {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long)]
        questions: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add a polluted variant with a non-gold paragraph at every step.
        #[arg(long)]
        augment: bool,
        #[arg(long, default_value_t = 5)]
        candidates: usize,
    },
    /// Answer one question, printing the step log.
    Run {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long)]
        question: String,
        /// Questions file supplying gold answers for oracle/gold models.
        #[arg(long)]
        questions: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Run a questions file and write reports.
    Bench {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long)]
        questions: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// docs_per_step settings for the retrieval budget table.
        #[arg(long, value_delimiter = ',')]
        budgets: Vec<usize>,
        /// Compare dynamic stopping against fixed 1..=K step runs.
        #[arg(long, default_value_t = 0)]
        compare_fixed: usize,
    },
    /// Map paragraphs of one corpus onto the same-titled articles of another.
    Map {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// JSON lines of {"from": old title, "to": new title}.
        #[arg(long)]
        redirects: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Questions whose gold paragraphs should be rewritten.
        #[arg(long, requires = "questions_out")]
        questions: Option<PathBuf>,
        #[arg(long)]
        questions_out: Option<PathBuf>,
    },
    /// Write a synthetic multi-hop corpus and questions file.
    Synth {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Questions per hop count for 1, 2 and 3 hops.
        #[arg(long, value_delimiter = ',', default_values_t = [100usize, 100, 100])]
        per_hop: Vec<usize>,
        #[arg(long)]
        corpus_out: PathBuf,
        #[arg(long)]
        questions_out: PathBuf,
    },
}

#[derive(Args)]
struct ScoringArgs {
    #[arg(long, default_value_t = 1.2)]
    k1: f64,
    #[arg(long, default_value_t = 0.75)]
    b: f64,
}

impl ScoringArgs {
    fn params(&self) -> ScoringParams {
        ScoringParams {
            k1: self.k1,
            b: self.b,
            article_k1: self.k1,
        }
    }
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long = "index")]
    path: PathBuf,
    #[command(flatten)]
    scoring: ScoringArgs,
}

impl IndexArgs {
    fn load(&self) -> Result<(Corpus, InvertedIndex)> {
        load_index(BufReader::new(open(&self.path)?), self.scoring.params())
    }
}

#[derive(Args)]
struct PipelineArgs {
    /// Paragraphs retrieved per step (50, 100, 150, or any positive count).
    #[arg(long, default_value_t = 50)]
    docs_per_step: usize,
    #[arg(long, default_value_t = 5)]
    k_cap: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    stop_threshold: f64,
    /// Run exactly this many steps instead of stopping dynamically.
    #[arg(long)]
    fixed_steps: Option<usize>,
    /// Model manifest (JSON); defaults to oracle retriever, gold reader,
    /// baseline reranker.
    #[arg(long)]
    models: Option<PathBuf>,
}

impl PipelineArgs {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            k_cap: self.k_cap,
            docs_per_step: self.docs_per_step,
            stop_threshold: self.stop_threshold,
            ..PipelineConfig::default()
        }
    }

    fn manifest(&self) -> Result<ModelManifest> {
        self.models
            .as_deref()
            .map_or_else(|| Ok(ModelManifest::default()), ModelManifest::load)
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn questions_from(path: &Path) -> Result<Vec<QuestionRecord>> {
    read_questions(BufReader::new(open(path)?))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_line<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[derive(Serialize)]
struct OracleRecord<'a> {
    question_id: &'a str,
    step: usize,
    path_tokens: Vec<String>,
    target_id: &'a str,
    oracle: Option<hopqa::oracle::OracleQuery>,
    untrainable: bool,
}

fn cmd_oracle(
    index: &IndexArgs,
    questions: &Path,
    out: Option<&Path>,
    recall_at: &[usize],
) -> Result<()> {
    let (corpus, idx) = index.load()?;
    let questions = questions_from(questions)?;
    let mut w = output(out)?;
    let mut examples = Vec::new();
    for q in &questions {
        let Some(gold) = &q.gold_paragraphs else {
            continue;
        };
        let mut path = ReasoningPath::new(&q.question);
        for (i, id) in gold.iter().enumerate() {
            let target = corpus
                .paragraph(id)
                .ok_or_else(|| Error::UnknownParagraph(id.clone()))?;
            let tokens = path.tokens();
            let query = match build_oracle_query(&idx, &tokens, target) {
                Ok(oq) => Some(oq),
                Err(Error::Untrainable(_)) => None,
                Err(e) => return Err(e),
            };
            write_line(
                &mut *w,
                &OracleRecord {
                    question_id: &q.id,
                    step: i + 1,
                    untrainable: query.is_none(),
                    path_tokens: tokens.clone(),
                    target_id: id,
                    oracle: query,
                },
            )?;
            examples.push(OracleExample {
                path_tokens: tokens,
                target_id: id.clone(),
            });
            path = path.extended(target);
        }
    }
    w.flush()?;
    if !recall_at.is_empty() {
        let curve = oracle_recall_curve(&idx, &corpus, &examples, recall_at)?;
        eprintln!(
            "oracle recall over {} targets ({} untrainable):",
            curve.examples, curve.untrainable
        );
        for (k, r) in curve.ks.iter().zip(&curve.recall) {
            eprintln!("  @{k:<4} {:.2}%", 100.0 * r);
        }
    }
    Ok(())
}

fn cmd_traces(
    index: &IndexArgs,
    questions: &Path,
    out: Option<&Path>,
    augment: bool,
    candidates: usize,
) -> Result<()> {
    let (corpus, idx) = index.load()?;
    let examples: Vec<_> = questions_from(questions)?
        .iter()
        .filter_map(QuestionRecord::gold_example)
        .collect();
    let config = TraceConfig {
        augment_nongold: augment,
        reranker_candidates: candidates,
        ..TraceConfig::default()
    };
    let batch = generate_training_traces(&corpus, &idx, &examples, &config)?;
    let mut w = output(out)?;
    for t in &batch.traces {
        write_line(&mut *w, t)?;
    }
    w.flush()?;
    eprintln!(
        "{} traces from {} examples; {} skipped",
        batch.traces.len(),
        examples.len() - batch.skipped.len(),
        batch.skipped.len()
    );
    Ok(())
}

fn cmd_run(
    index: &IndexArgs,
    question: &str,
    questions: Option<&Path>,
    args: &PipelineArgs,
) -> Result<()> {
    let (corpus, idx) = index.load()?;
    let gold = match questions {
        Some(p) => Some(gold_table(&questions_from(p)?)),
        None => None,
    };
    let manifest = args.manifest()?;
    let models = manifest.build(ModelContext {
        index: &idx,
        corpus: &corpus,
        gold: gold.as_ref(),
    })?;
    let pipeline = Pipeline::new(&idx, &corpus, &models, args.config())?;
    let run = match args.fixed_steps {
        Some(k) => pipeline.run_fixed(question, k)?,
        None => pipeline.run_question(question)?,
    };
    let mut out = io::stdout().lock();
    for s in &run.steps {
        write_line(&mut out, s)?;
    }
    match run.prediction() {
        Some(a) => eprintln!(
            "answer: {:?} ({:?}, answerability {:.3}) via {}",
            a.text,
            a.kind,
            a.answerability,
            a.path_snapshot.join(" -> ")
        ),
        None => eprintln!("no answer"),
    }
    eprintln!("{}", serde_json::to_string(&run.outcome)?);
    Ok(())
}

fn cmd_bench(
    index: &IndexArgs,
    questions: &Path,
    out_dir: &Path,
    args: &PipelineArgs,
    budgets: Vec<usize>,
    compare_fixed: usize,
) -> Result<()> {
    let (corpus, idx) = index.load()?;
    let mut questions = questions_from(questions)?;
    if let Some(k) = args.fixed_steps {
        for q in &mut questions {
            q.fixed_steps.get_or_insert(k);
        }
    }
    let gold = gold_table(&questions);
    let manifest = args.manifest()?;
    let models = manifest.build(ModelContext {
        index: &idx,
        corpus: &corpus,
        gold: Some(&gold),
    })?;
    let report = run_benchmark(
        &idx,
        &corpus,
        &models,
        args.config(),
        &questions,
        &BenchOptions {
            budgets,
            compare_fixed_up_to: compare_fixed,
        },
    )?;
    std::fs::create_dir_all(out_dir)?;
    let mut per_q = BufWriter::new(File::create(out_dir.join("per_question.jsonl"))?);
    for q in &report.result.per_question {
        write_line(&mut per_q, q)?;
    }
    per_q.flush()?;
    let mut runs = BufWriter::new(File::create(out_dir.join("runs.jsonl"))?);
    for r in &report.runs {
        write_line(&mut runs, r)?;
    }
    runs.flush()?;
    serde_json::to_writer_pretty(File::create(out_dir.join("report.json"))?, &report)?;
    let summary = report.summary();
    std::fs::write(out_dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

#[derive(Serialize)]
struct MapRecord<'a> {
    paragraph_id: &'a str,
    target_article: Option<&'a str>,
    #[serde(flatten)]
    verdict: Option<hopqa::corpus::MappingVerdict>,
}

fn cmd_map(
    original: &Path,
    target: &Path,
    redirects: Option<&Path>,
    out: Option<&Path>,
    questions: Option<&Path>,
    questions_out: Option<&Path>,
) -> Result<()> {
    let original = ingest_corpus(BufReader::new(open(original)?))?;
    let target = ingest_corpus(BufReader::new(open(target)?))?;
    let mut renamed: HashMap<String, String> = HashMap::new();
    if let Some(p) = redirects {
        for (i, line) in BufReader::new(open(p)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            #[derive(serde::Deserialize)]
            struct Redirect {
                from: String,
                to: String,
            }
            let r: Redirect = serde_json::from_str(&line).map_err(|e| Error::Ingest {
                line: i + 1,
                message: e.to_string(),
            })?;
            renamed.insert(r.from, r.to);
        }
    }
    let by_title: HashMap<&str, &hopqa::corpus::Article> = target
        .articles()
        .iter()
        .map(|a| (a.title.as_str(), a))
        .collect();

    let mut w = output(out)?;
    let mut mapped: HashMap<String, Vec<String>> = HashMap::new();
    let (mut matched, mut total) = (0usize, 0usize);
    for p in original.paragraphs() {
        total += 1;
        let title = renamed
            .get(&p.title)
            .map_or(p.title.as_str(), String::as_str);
        let article = by_title.get(title).copied();
        let verdict = match article {
            Some(a) => match map_paragraph_to_article(p, &target, a) {
                Ok(v) => Some(v),
                Err(Error::EmptyParagraph(_)) | Err(Error::EmptyArticle(_)) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        if let Some(v) = verdict.as_ref().filter(|v| v.matched) {
            matched += 1;
            mapped.insert(p.id.clone(), v.target_paragraph_ids.clone());
        }
        write_line(
            &mut *w,
            &MapRecord {
                paragraph_id: &p.id,
                target_article: article.map(|a| a.article_id.as_str()),
                verdict,
            },
        )?;
    }
    w.flush()?;
    eprintln!("{matched} of {total} paragraphs mapped");

    if let (Some(qin), Some(qout)) = (questions, questions_out) {
        let qs = questions_from(qin)?;
        let mut kept = Vec::new();
        for mut q in qs {
            let Some(gold) = &q.gold_paragraphs else {
                kept.push(q);
                continue;
            };
            let new: Option<Vec<Vec<String>>> =
                gold.iter().map(|id| mapped.get(id).cloned()).collect();
            if let Some(new) = new {
                let mut ids: Vec<String> = Vec::new();
                for id in new.into_iter().flatten() {
                    if !ids.contains(&id) {
                        ids.push(id);
                    }
                }
                q.gold_paragraphs = Some(ids);
                kept.push(q);
            }
        }
        eprintln!("{} questions kept after mapping", kept.len());
        write_questions(&kept, BufWriter::new(File::create(qout)?))?;
    }
    Ok(())
}

fn cmd_synth(seed: u64, per_hop: &[usize], corpus_out: &Path, questions_out: &Path) -> Result<()> {
    let bench = synth::generate(&synth::SynthConfig {
        seed,
        questions: per_hop
            .iter()
            .enumerate()
            .map(|(i, &n)| (i + 1, n))
            .filter(|&(_, n)| n > 0)
            .collect(),
        ..Default::default()
    })?;
    hopqa::corpus::write_corpus(&bench.corpus, BufWriter::new(File::create(corpus_out)?))?;
    write_questions(
        &bench.questions,
        BufWriter::new(File::create(questions_out)?),
    )?;
    eprintln!(
        "{} paragraphs, {} questions",
        bench.corpus.paragraphs().len(),
        bench.questions.len()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Index {
            corpus,
            out,
            scoring,
        } => {
            let corpus = ingest_corpus(BufReader::new(open(&corpus)?))?;
            let index = InvertedIndex::build_with(&corpus, scoring.params())?;
            let mut w = BufWriter::new(File::create(&out)?);
            save_index(&index, &corpus, &mut w)?;
            w.flush()?;
            eprintln!(
                "indexed {} paragraphs in {} articles, {} terms",
                index.n_paragraphs(),
                index.n_articles(),
                index.vocabulary_size()
            );
            Ok(())
        }
        Command::Oracle {
            index,
            questions,
            out,
            recall_at,
        } => cmd_oracle(&index, &questions, out.as_deref(), &recall_at),
        Command::Traces {
            index,
            questions,
            out,
            augment,
            candidates,
        } => cmd_traces(&index, &questions, out.as_deref(), augment, candidates),
        Command::Run {
            index,
            question,
            questions,
            pipeline,
        } => cmd_run(&index, &question, questions.as_deref(), &pipeline),
        Command::Bench {
            index,
            questions,
            out_dir,
            pipeline,
            budgets,
            compare_fixed,
        } => cmd_bench(
            &index,
            &questions,
            &out_dir,
            &pipeline,
            budgets,
            compare_fixed,
        ),
        Command::Map {
            original,
            target,
            redirects,
            out,
            questions,
            questions_out,
        } => cmd_map(
            &original,
            &target,
            redirects.as_deref(),
            out.as_deref(),
            questions.as_deref(),
            questions_out.as_deref(),
        ),
        Command::Synth {
            seed,
            per_hop,
            corpus_out,
            questions_out,
        } => cmd_synth(seed, &per_hop, &corpus_out, &questions_out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
