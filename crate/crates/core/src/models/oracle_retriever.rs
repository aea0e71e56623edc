use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::oracle::build_oracle_query;
use crate::pipeline::ReasoningPath;
use crate::search::{InvertedIndex, Query};

use super::{BaselineRetriever, GoldTable, Retriever};

/// Emits the dynamic-oracle query for the first gold paragraph not yet on
/// the path. Falls back to the baseline retriever for unknown questions,
/// complete paths, and targets sharing no token with the path.
#[derive(Debug, Clone, Copy)]
pub struct OracleRetriever<'a> {
    index: &'a InvertedIndex,
    corpus: &'a Corpus,
    gold: &'a GoldTable,
    fallback: BaselineRetriever<'a>,
}

impl<'a> OracleRetriever<'a> {
    pub fn new(index: &'a InvertedIndex, corpus: &'a Corpus, gold: &'a GoldTable) -> Self {
        OracleRetriever {
            index,
            corpus,
            gold,
            fallback: BaselineRetriever::new(index),
        }
    }
}

impl Retriever for OracleRetriever<'_> {
    fn query(&self, path: &ReasoningPath) -> Result<Query> {
        let target = self
            .gold
            .get(&path.question)
            .and_then(|g| g.paragraph_ids.iter().find(|id| !path.contains(id)));
        let Some(target_id) = target else {
            return self.fallback.query(path);
        };
        let target = self
            .corpus
            .paragraph(target_id)
            .ok_or_else(|| Error::UnknownParagraph(target_id.clone()))?;
        match build_oracle_query(self.index, &path.tokens(), target) {
            Ok(oq) => Ok(oq.query),
            Err(Error::Untrainable(_)) => self.fallback.query(path),
            Err(e) => Err(e),
        }
    }
}
