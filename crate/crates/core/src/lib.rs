//! Exact path counting and Martin-boundary measures on the r-differential
//! Young–Fibonacci graph.

pub mod boundary;
pub mod cli;
pub mod closed_form;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod numeric;
pub mod verify;
pub mod word;

pub use boundary::{BoundaryMeasure, BoundaryVertex, MeasureValue};
pub use error::{Result, YfError};
pub use graph::PathCount;
pub use word::{Stats, SuffixRelation, Symbol, Word};
