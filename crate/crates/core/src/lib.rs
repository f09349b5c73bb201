//! Graded groupoid dynamics on finite models: graded cones, growth and
//! entropy, conformal measures, rational maps and subshifts of finite type.

pub mod conformal;
pub mod error;
pub mod export;
pub mod graph;
pub mod growth;
pub mod rational;
pub mod sft;

#[cfg(test)]
mod testkit;

pub use error::{Error, Result};
