//! Finite-blocklength converse bounds for classical communication over
//! quantum channels, with the linear algebra, hypothesis testing and
//! semidefinite programming they rest on.

pub mod bounds;
pub mod error;
pub mod hypotest;
pub mod linalg;
pub mod quantum;
pub mod random;
pub mod sdp;

pub use error::{Error, Result};
