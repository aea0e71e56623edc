//! Models served by a child process over line-delimited JSON.
//!
//! One request per line on the child's stdin, one response per line on its
//! stdout. Every request carries the path:
//!
//! ```json
//! {"role": "reader", "question": "...", "paragraphs": [{"id": "...", "title": "...", "text": "..."}],
//!  "serialized": "[CLS] ... [SEP]", "tokens": ["[CLS]", "..."]}
//! ```
//!
//! Reranker requests add `"candidate": {"id", "title", "text"}`. Responses:
//! retriever `{"terms": [...]}`, reader `{"class_logits": {"span", "yes", "no",
//! "noanswer"}, "start_logits": [...], "end_logits": [...]}` with one logit per
//! entry of `tokens`, reranker `{"score": x}`. Calls are serialized, so the
//! child may keep state, but it must answer identical requests identically.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::Paragraph;
use crate::error::{Error, Result};
use crate::pipeline::ReasoningPath;
use crate::search::Query;

use super::{
    serialize_path, ClassLogits, PathLayout, Reader, ReaderOutput, Reranker, Retriever,
    DEFAULT_MAX_SPAN_LEN,
};

struct Channel {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

pub struct ExternalModel {
    command: Vec<String>,
    channel: Mutex<Channel>,
}

#[derive(Serialize)]
struct WireParagraph<'a> {
    id: &'a str,
    title: &'a str,
    text: &'a str,
}

impl<'a> From<&'a Paragraph> for WireParagraph<'a> {
    fn from(p: &'a Paragraph) -> Self {
        WireParagraph {
            id: &p.id,
            title: &p.title,
            text: &p.text,
        }
    }
}

#[derive(Serialize)]
struct Request<'a> {
    role: &'static str,
    question: &'a str,
    paragraphs: Vec<WireParagraph<'a>>,
    serialized: String,
    tokens: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    candidate: Option<WireParagraph<'a>>,
}

#[derive(Deserialize)]
struct RetrieverResponse {
    terms: Vec<String>,
}

#[derive(Deserialize)]
struct ReaderResponse {
    class_logits: ClassLogits,
    start_logits: Vec<f64>,
    end_logits: Vec<f64>,
}

#[derive(Deserialize)]
struct RerankerResponse {
    score: f64,
}

impl ExternalModel {
    pub fn spawn(command: &[String]) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::Manifest("external model needs a command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::External(format!("cannot start {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ExternalModel {
            command: command.to_vec(),
            channel: Mutex::new(Channel {
                child,
                stdin,
                stdout,
            }),
        })
    }

    fn call<T: for<'de> Deserialize<'de>>(&self, request: &Request<'_>) -> Result<T> {
        let mut line = serde_json::to_string(request)?;
        line.push('\n');
        let mut ch = self.channel.lock().unwrap_or_else(|p| p.into_inner());
        let io = |e: std::io::Error| Error::External(format!("{}: {e}", self.command.join(" ")));
        ch.stdin.write_all(line.as_bytes()).map_err(io)?;
        ch.stdin.flush().map_err(io)?;
        let mut response = String::new();
        if ch.stdout.read_line(&mut response).map_err(io)? == 0 {
            return Err(Error::External(format!(
                "{} closed its output",
                self.command.join(" ")
            )));
        }
        let value: Value = serde_json::from_str(&response)
            .map_err(|e| Error::External(format!("bad response {response:?}: {e}")))?;
        if let Some(msg) = value.get("error").and_then(Value::as_str) {
            return Err(Error::External(msg.to_string()));
        }
        serde_json::from_value(value)
            .map_err(|e| Error::External(format!("bad response {response:?}: {e}")))
    }

    fn request<'a>(
        role: &'static str,
        path: &'a ReasoningPath,
        layout: &PathLayout,
        candidate: Option<&'a Paragraph>,
    ) -> Request<'a> {
        Request {
            role,
            question: &path.question,
            paragraphs: path.steps.iter().map(WireParagraph::from).collect(),
            serialized: serialize_path(path).text,
            tokens: layout.tokens.clone(),
            candidate: candidate.map(WireParagraph::from),
        }
    }
}

impl Drop for ExternalModel {
    fn drop(&mut self) {
        let ch = self.channel.get_mut().unwrap_or_else(|p| p.into_inner());
        let _ = ch.child.kill();
        let _ = ch.child.wait();
    }
}

impl Retriever for ExternalModel {
    fn query(&self, path: &ReasoningPath) -> Result<Query> {
        let layout = PathLayout::new(path);
        let r: RetrieverResponse = self.call(&Self::request("retriever", path, &layout, None))?;
        Ok(Query::parse(&r.terms.join(" ")))
    }
}

impl Reader for ExternalModel {
    fn read(&self, path: &ReasoningPath) -> Result<ReaderOutput> {
        let layout = PathLayout::new(path);
        let r: ReaderResponse = self.call(&Self::request("reader", path, &layout, None))?;
        ReaderOutput::new(
            r.class_logits,
            r.start_logits,
            r.end_logits,
            &layout,
            DEFAULT_MAX_SPAN_LEN,
        )
    }
}

impl Reranker for ExternalModel {
    fn score(&self, path: &ReasoningPath, candidate: &Paragraph) -> Result<f64> {
        let layout = PathLayout::new(path);
        let r: RerankerResponse =
            self.call(&Self::request("reranker", path, &layout, Some(candidate)))?;
        Ok(r.score)
    }
}
