//! Experiment runner for `onesided-core`: configs, corpora, file formats,
//! subcommands and the verification suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod formats;

pub use config::ExperimentConfig;
pub use error::{LabError, Result};
pub mod pinned;
pub mod run;
pub mod suite;

pub use run::{run, ReportBundle, RunOptions, Subcommand};
