//! Statevector simulation of the Gutzwiller operator `exp(-g D)` for attractive SU(3)
//! fermions, realized either as an ancilla-postselected linear combination of unitaries
//! or by Metropolis sampling over discrete auxiliary fields, with exact references.

pub mod encoding;
pub mod error;
pub mod experiment;
pub mod gutzwiller;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod sampling;
pub mod statevector;
pub mod trialstate;

pub use error::{Error, Result};
