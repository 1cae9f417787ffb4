//! Decides whether the two-setting correlation functions of an N-qubit
//! state admit a local hidden variable description.
//!
//! The pipeline: build a state ([`qstate`]), take its full correlation
//! tensor ([`corrtensor`]), evaluate the single general Bell inequality
//! on correlation tables ([`bellcore`]), construct the explicit local
//! model when the inequality is satisfied ([`lhvmodel`]), and decide
//! violation directly from the tensor ([`criterion`]) using the shared
//! optimization engine ([`optimizer`]).

pub mod bellcore;
pub mod corrtensor;
pub mod criterion;
pub mod error;
pub mod lhvmodel;
pub mod optimizer;
pub mod qstate;

pub use error::{Error, Result};
