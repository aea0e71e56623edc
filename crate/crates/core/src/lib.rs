//! Multi-hop question answering that grows a reasoning path one paragraph at
//! a time over a BM25 search engine, and stops once the reader is confident.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod models;
pub mod oracle;
pub mod pipeline;
pub mod search;

pub use error::{Error, Result};
