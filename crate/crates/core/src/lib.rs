//! Count-based and prediction-based document representations for text
//! classification.
//!
//! The pipeline runs corpus → co-occurrence counts → (shifted) PPMI →
//! optional low-frequency reweighting → truncated SVD → average-pooled
//! document vectors → classifier. SGNS and LDA baselines produce comparable
//! document features, and [`harness`] runs whole experiment grids from a
//! config file.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod association;
pub mod baselines;
pub mod classify;
pub mod cooc;
pub mod corpus;
pub mod dense;
pub mod error;
pub mod factorize;
pub mod harness;
pub mod oracle;
pub mod selftest;
pub mod sparse;
pub mod stats;
pub mod synth;
pub mod util;
pub mod wl;

pub use error::{Error, Result};
