//! Execution and analysis of classical Turing machines extended into
//! transfinite ordinal time.
//!
//! The crate runs machines from a textual description, detects the lasso
//! witnesses of divergence, computes the limit-supremum configuration at
//! limit ordinals, and converts executions into state graphs with matrix
//! and tensor encodings, greedy routing, exact replay, and a small
//! analysis toolkit (the autoregressive accuracy law, the attention cost
//! model, and graph saturation metrics).

pub mod analysis;
pub mod dsl;
pub mod encodings;
pub mod exec;
pub mod graph;
pub mod machine;
pub mod ordinal;
pub mod tape;
pub mod transfinite;

pub use exec::{run, step, Configuration, Outcome, Trace};
pub use machine::{Machine, Move};
pub use ordinal::OrdinalTime;
pub use tape::Tape;
