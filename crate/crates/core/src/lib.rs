pub mod error;
pub mod experiment;
pub mod geometry;
pub mod group_action;
pub mod identities;
pub mod linalg;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};
