//! Selecting the implementation behind each model role from a JSON manifest:
//!
//! ```json
//! {
//!   "retriever": {"kind": "oracle"},
//!   "reader": {"kind": "gold"},
//!   "reranker": {"kind": "external", "command": ["python3", "rerank.py"]}
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::search::InvertedIndex;

use super::{
    BaselineReranker, BaselineRetriever, ExternalModel, GoldReader, GoldTable, ModelBundle,
    OracleRetriever, DEFAULT_KEEP_FRACTION, DEFAULT_MAX_QUERY_TERMS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RetrieverSpec {
    Oracle,
    Baseline {
        #[serde(default = "default_keep")]
        keep_fraction: f64,
        #[serde(default = "default_max_terms")]
        max_terms: usize,
    },
    External {
        command: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReaderSpec {
    Gold,
    External { command: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RerankerSpec {
    Baseline,
    External { command: Vec<String> },
}

fn default_keep() -> f64 {
    DEFAULT_KEEP_FRACTION
}

fn default_max_terms() -> usize {
    DEFAULT_MAX_QUERY_TERMS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelManifest {
    pub retriever: RetrieverSpec,
    pub reader: ReaderSpec,
    pub reranker: RerankerSpec,
}

impl Default for ModelManifest {
    /// Oracle retriever, gold reader, baseline reranker.
    fn default() -> Self {
        ModelManifest {
            retriever: RetrieverSpec::Oracle,
            reader: ReaderSpec::Gold,
            reranker: RerankerSpec::Baseline,
        }
    }
}

/// What the built models may borrow.
#[derive(Clone, Copy)]
pub struct ModelContext<'a> {
    pub index: &'a InvertedIndex,
    pub corpus: &'a Corpus,
    pub gold: Option<&'a GoldTable>,
}

impl ModelManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Whether building needs gold answers.
    pub fn needs_gold(&self) -> bool {
        self.retriever == RetrieverSpec::Oracle || self.reader == ReaderSpec::Gold
    }

    pub fn build<'a>(&self, ctx: ModelContext<'a>) -> Result<ModelBundle<'a>> {
        let gold = || {
            ctx.gold.ok_or_else(|| {
                Error::Manifest("oracle retriever and gold reader need gold answers".into())
            })
        };
        let retriever: Box<dyn super::Retriever + 'a> = match &self.retriever {
            RetrieverSpec::Oracle => Box::new(OracleRetriever::new(ctx.index, ctx.corpus, gold()?)),
            RetrieverSpec::Baseline {
                keep_fraction,
                max_terms,
            } => Box::new(BaselineRetriever::with_limits(
                ctx.index,
                *keep_fraction,
                *max_terms,
            )?),
            RetrieverSpec::External { command } => Box::new(ExternalModel::spawn(command)?),
        };
        let reader: Box<dyn super::Reader + 'a> = match &self.reader {
            ReaderSpec::Gold => Box::new(GoldReader::new(gold()?)),
            ReaderSpec::External { command } => Box::new(ExternalModel::spawn(command)?),
        };
        let reranker: Box<dyn super::Reranker + 'a> = match &self.reranker {
            RerankerSpec::Baseline => Box::new(BaselineReranker::new(ctx.index)),
            RerankerSpec::External { command } => Box::new(ExternalModel::spawn(command)?),
        };
        Ok(ModelBundle {
            retriever,
            reader,
            reranker,
        })
    }
}
