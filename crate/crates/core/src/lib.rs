//! Weisfeiler-Leman guided higher-order GNN for directed link prediction.
//!
//! The crate is `no_std` (with `alloc`) and contains only the numerical and
//! combinatorial machinery:
//!
//! - [`graph`]: the directed graph model, pair splitting and negative sampling.
//! - [`tuples`]: restricted directed k-tuples and their position graphs.
//! - [`wl`]: directed k-WL color refinement and the non-isomorphism test.
//! - [`gnn`]: per-position GCN layers, MLP fusion, average allocation back to
//!   nodes and the node readout, with analytic gradients.
//! - [`predictor`]: the Siamese scoring head, cross-entropy loss, Adam,
//!   training and precision/recall/F1 evaluation.
//!
//! File formats, checkpoints and the command line live in the `wlprereq`
//! companion crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod fixtures;
pub mod graph;
pub mod gnn;
pub mod matrix;
pub mod predictor;
pub mod tuples;
pub mod wl;

pub use error::{Error, Result};
pub use graph::{DirectedGraph, LabeledPair, LabeledPairSet, Split};
pub use matrix::{FeatureMatrix, Matrix};
