//! Nonlocality of quantum states distributed in networks.
//!
//! Local measurements on multipartite states produce [`behaviors::Behavior`]
//! tables; [`polytope`] decides whether a table admits a local (or hybrid
//! local/no-signalling) model by linear programming, returning a separating
//! Bell functional when it does not. [`protocols`] chains these pieces into
//! the star, Λ and flag-based activation pipelines.

pub mod behaviors;
pub mod bell;
pub mod cli;
pub mod distill;
pub mod error;
pub mod measurements;
pub mod polytope;
pub mod protocols;
pub mod states;
pub mod tensor;

pub use error::{Error, Result};
