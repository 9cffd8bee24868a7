//! Schur analysis for power series in a matrix variable.

pub mod acceptance;
pub mod algebra;
pub mod blaschke;
pub mod cara;
pub mod cli;
pub mod error;
pub mod interp;
pub mod mps;
pub mod schur;
pub mod numkit;
pub mod sample;
pub mod spaces;
pub mod symm;

pub use error::{Error, Result};
pub use mps::{MatrixPowerSeries, RectSeries};
pub use numkit::{CMat, Tolerance};
