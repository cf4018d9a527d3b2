pub mod cf;
pub mod cli;
pub mod error;
pub mod irrational;
pub mod moebius;
pub mod rational;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;
