//! Community detection with machine-learned similarity weights.
//!
//! The crate covers the full algorithmic pipeline: build an undirected
//! simple [`graph::Graph`], detect communities with one of four detectors
//! ([`detect`]), sample labeled node pairs with structural features
//! ([`pairs`]), learn same-community likelihoods with tree ensembles
//! ([`ml`]), square the out-of-fold likelihoods into link weights
//! ([`weave`]), re-detect on the weighted network, and score the result
//! ([`metrics`]). [`synth`] provides the tree-like benchmark generator
//! with planted communities.
//!
//! The crate is `no_std` + `alloc`; all IO, file formats, and the CLI
//! live in the companion `commweave-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod detect;
pub mod error;
pub(crate) mod fmath;
pub mod graph;
pub mod metrics;
pub mod ml;
pub mod pairs;
pub mod synth;
pub mod weave;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId, Partition};
