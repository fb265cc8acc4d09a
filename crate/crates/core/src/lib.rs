//! Numerical core of dialectoscope.
//!
//! Everything needed to compare how two corpora use a shared vocabulary:
//! windowed co-occurrence counting, GloVe training, embedding-space alignment,
//! per-word difference measures, dialectogram projections, and the synthetic
//! swap benchmark used to validate all of the above.
//!
//! The crate is `no_std` and only needs an allocator. File formats, threading
//! and the command line live in the `dialectoscope` crate.
#![no_std]

extern crate alloc;

pub mod align;
pub mod corpus;
pub mod dialectogram;
mod error;
pub mod glove;
pub mod linalg;
pub mod measures;
pub mod swapbench;

pub use error::{Error, ErrorKind, Result};
pub use linalg::Matrix;
