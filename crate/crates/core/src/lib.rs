//! Uniform random generation of walks confined to the quarter plane.
//!
//! Two exact samplers are provided: the recursive method over a full table
//! of suffix counts, and rejection from a half-plane model whose walks are
//! words of a context-free grammar. Exact big-integer enumeration backs
//! both and is exposed for analysis.

pub mod enumerate;
pub mod grammar;
pub mod pipeline;
pub mod cache;
pub mod cli;
pub mod selftest;
pub mod stats;
pub mod svg;
pub mod error;
pub mod projection;
pub mod slope;
pub mod stepset;

pub use error::{Error, Result};
pub use stepset::{Step, StepSet};
