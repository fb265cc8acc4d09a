//! File formats, pipeline orchestration and the command line interface for
//! comparing word usage between two corpora.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod io;
pub mod parallel;
pub mod pipeline;
pub mod svg;
pub mod synth;
