//! Numerical toolkit for detailed-balance quantum Markov semigroups and
//! the transport geometry they induce on density matrices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod entropic;
pub mod error;
pub mod generator;
pub mod inequalities;
pub mod operator;
pub mod optim;
mod par;
pub mod transport;

pub use error::{ConvergenceWarning, QmsError, Result};
