//! Relation extraction over shortest dependency paths.
//!
//! Candidate protein pairs are reduced to the shortest path between them in
//! the sentence's dependency graph. Every path token becomes the
//! concatenation of a word embedding, a dense PoS code and two dense
//! relative-position codes, and a bidirectional LSTM with max-pooling and an
//! MLP head classifies the pair as interacting or not.

pub mod corpus;
pub mod depgraph;
pub mod embed;
pub mod features;
pub mod neural;
pub mod pipeline;
