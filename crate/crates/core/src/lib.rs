//! Exact input-output theory of Rydberg slow-light polaritons with a
//! Kerr-type nonlinearity.
//!
//! The photon-photon interaction inside the medium reduces to a pure phase
//! map on the outgoing multi-photon wavefunction. This crate builds that
//! phase kernel for arbitrary atomic clouds and derives from it the
//! coherent-state output field, normally ordered correlators, homodyne
//! probe-mode moments with their Wigner function, and the validity bound
//! for neglecting the polariton mass.

// negated comparisons reject NaN inputs
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod homodyne;
pub mod interaction;
pub mod interp;
pub mod massterm;
pub mod medium;
pub mod oracle;
pub mod phase;
pub mod pipeline;
pub mod quadrature;
pub mod scenario;
pub mod scattering;

pub use error::{Error, QuadratureError, Result};
