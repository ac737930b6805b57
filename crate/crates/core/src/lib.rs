pub mod analysis;
pub mod corpus;
pub mod duality;
pub mod error;
pub mod formula;
pub mod geometry;
pub mod limits;
pub mod par;
pub mod pwl;
pub mod scalar;
pub mod selftest;

pub use error::{Error, Result};
