//! File formats and the `fracop` command line for `fracop-core`.

pub mod cli;
pub mod input;
pub mod matrix_io;
pub mod record;

pub use fracop_core as core;
