// Guards written as `!(x > 0.0)` are deliberate: they reject NaN along with
// the out-of-range values, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Detectability-oriented entanglement analysis.
//!
//! The library computes how well an entangled state can be told apart from
//! the separable set: the minimum relative entropy (and sandwiched Rényi
//! divergence) from separable states *to* the given state, restricted to a
//! finite net of pure states on the smaller subsystem. The minimizer yields
//! an entanglement witness; thresholding the value decides separability
//! membership; sweeping a parametrized state family reproduces boundary
//! curves against the partial-transpose test.

pub mod coherence;
pub mod divergence;
pub mod error;
pub mod experiment;
pub mod hermitian;
pub mod measures;
pub mod membership;
pub mod net;
pub mod solver;
pub mod states;
pub mod witness;

pub use error::{Error, Result};
pub use hermitian::{CMat, CVec, DensityMatrix, HermitianOperator, Keep, Spectrum};
