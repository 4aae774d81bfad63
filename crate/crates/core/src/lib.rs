//! Fractional differences, Cesàro numbers and hereditary operator inequalities.
//!
//! Everything here works without `std`; enable the `std` feature to get
//! `std::error::Error` on [`Error`].
#![no_std]
// `Float` is unused whenever another crate in the build links std
#![allow(unused_imports)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod cesaro;
pub mod error;
pub mod extrapolate;
pub mod fracdiff;
pub mod linalg;
pub mod model;
pub mod operator;
pub mod sequence;
pub mod series;
pub mod shifts;
pub mod similarity;
pub mod special;

pub use error::{Error, Result};
