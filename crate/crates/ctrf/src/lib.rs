//! Causal Transfer Random Forest (CTRF) and the synthetic benchmarks around it.
//!
//! The library is organized in layers:
//!
//! - [`dataset`]: labeled feature tables with a source tag (R / L / TEST) and
//!   CSV import/export.
//! - [`trees`]: a from-scratch random-forest engine (greedy binary trees,
//!   best-first growth under a node budget, bagging, feature subsampling,
//!   mean-decrease-impurity feature importance).
//! - [`ctrf`]: the two-stage procedure itself — structure from R-data, leaf
//!   values recalibrated on pooled R+L data.
//! - [`baselines`]: logistic regression (optionally importance-weighted via a
//!   density-ratio classifier) and the CNT/RND/Combine forest variants.
//! - [`datagen`]: the stable/unstable-feature simulation (cases a/b/c with a
//!   tunable inclusion rate) and a Gaussian-cluster classification sampler.
//! - [`auction`]: the simulated ad auction with a relevance-reserve filter,
//!   position assignment, and relevance-driven clicks.
//! - [`metrics`]: AUC, cumulative prediction bias, RIG, top-k inclusion, and
//!   histogram Jensen-Shannon / distribution-shift scores.
//! - [`serialize`]: versioned JSON documents for trained models.
//! - [`runner`]: the experiment engine behind the CLI — sweep configs, seed
//!   derivation, worker pools, and CSV/JSON result files.

pub mod auction;
pub mod baselines;
pub mod ctrf;
pub mod datagen;
pub mod dataset;
mod error;
pub mod metrics;
pub mod runner;
pub mod seeding;
pub mod serialize;
pub mod trees;

pub use error::{Error, Result};
