//! Angle-based multicategory margin classifiers with reject and refine options.

pub mod cli;
pub mod coding;
pub mod data;
pub mod error;
pub mod losses;
pub mod optim;
pub mod predict;
pub mod theory;
pub mod tune;

pub use error::{Error, Result};
