//! Detection, consolidation, storage and exploration of text reuse in noisy
//! OCR corpora.
//!
//! The pipeline runs [`detector`] over a [`corpus::Corpus`] to produce
//! [`edge::Edge`]s, optionally merges fragments and collapses cliques with
//! [`consolidate`], loads the result into an [`edgestore::EdgeStore`] and
//! serves it through the JSON [`api`].

pub mod api;
pub mod consolidate;
pub mod corpus;
pub mod detector;
pub mod edge;
pub mod edgestore;
pub mod metasearch;
pub mod offsetmap;
pub mod synthbench;
mod tsv;

pub use corpus::{Corpus, CorpusError, DocMetadata, Document};
pub use detector::AlignParams;
pub use edge::Edge;
pub use tsv::TsvError;
