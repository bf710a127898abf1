//! Turns per-screen accessibility audit captures into one de-duplicated report.
//!
//! The pipeline groups captures into same-screen clusters ([`grouping`]),
//! matches UI elements across screen instances ([`matching`]), merges
//! duplicate issues, re-applies stored ignore decisions ([`ignore`]) and
//! hides issues that sit on no detected element ([`report`]).

pub mod capture;
pub mod config;
pub mod error;
pub mod geometry;
pub mod grouping;
pub mod ignore;
pub mod matching;
pub mod metrics;
pub mod raster;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
