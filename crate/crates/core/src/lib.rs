pub mod adversary;
pub mod algos;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod potential;
pub mod verify;

pub use error::{Error, Result};
