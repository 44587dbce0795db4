//! Generators, file formats, batch runs and the command line.

pub mod batch;
pub mod cli;
pub mod generate;
pub mod schemefile;

pub use batch::{batch_check, BatchReport};
pub use generate::{generate, MultSpec, Pattern, PatternSpec};
pub use schemefile::{parse_scheme, read_scheme, scheme_to_json, SchemeFile};
