//! A small dense-tensor engine with reverse-mode differentiation.
//!
//! Models are written once against [`Backend`]. [`Tape`] records every op for
//! [`Tape::backward`]; [`Eval`] computes the same values (bitwise, through the
//! shared [`kernels`]) and tallies arithmetic in an [`OpCount`].

pub mod backend;
pub mod catalog;
pub mod check;
pub mod error;
pub mod kernels;
pub mod tape;
pub mod tensor;

pub use backend::{Backend, Eval, OpCount};
pub use check::gradient_check;
pub use error::{Result, TensorError};
pub use tape::{Gradients, Tape, VarId};
pub use tensor::Tensor;
