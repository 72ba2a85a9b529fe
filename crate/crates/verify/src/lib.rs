//! Verification harness: runs identity and inequality suites over the
//! `sphereball` machinery and writes machine-readable reports.
//!
//! A run is `config → jobs → reports`: [`config::Config`] resolves the
//! per-suite settings up front, every suite becomes a job, jobs run on a
//! thread pool and [`report::emit_report`] writes JSON and/or CSV.

pub mod config;
pub mod corpus;
pub mod error;
pub mod fit;
pub mod report;
pub mod suites;

pub use error::{Result, VerifyError};
pub use report::{Case, Report};
pub use suites::{run_suites, RunOptions, SUITES};
