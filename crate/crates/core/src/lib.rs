//! Channel-first quantum compiler core.

pub mod bench;
pub mod circuit;
pub mod error;
pub mod format;
pub mod ir;
pub mod linalg;
pub mod lindfront;
pub mod pauli;
pub mod pipeline;
pub mod quadrature;
pub mod rewrite;
pub mod select_optim;
pub mod synthesis;

pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString, PauliSum};
pub use ir::{BlockEncoding, ChannelExpr, ChannelMap, KrausExpr, LindbladSpec, Primitive};
