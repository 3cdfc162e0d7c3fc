//! Magic secret sharing over GHZ states.
//!
//! Dense few-qubit simulation of the threshold protocol in which a dealer's
//! phase gate on a shared GHZ state delivers the magic state P(φ)|+⟩ to one
//! recipient, while every individual party holds I/2. The crate measures magic
//! as the L1 distance from a state's discrete Wigner vector to the stabilizer
//! polytope, solved exactly by a small simplex, and certifies delivery from
//! the recipient's steering assemblage. The [`tomo`] module reproduces a
//! shot-sampled tomography pipeline with post-selection and bootstrap errors.

pub mod error;
pub mod lp;
pub mod magic;
pub mod protocol;
pub mod qcore;
pub mod stabilizer;
pub mod steering;
pub mod tomo;
pub mod wigner;

pub use error::{MssError, Result};
