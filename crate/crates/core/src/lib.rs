//! Computational equivariant Morse theory for finite group actions.

pub mod coeff;
pub mod complexes;
pub mod error;
pub mod fixture;
pub mod gcw;
pub mod groups;
pub mod linalg;
pub mod morse;
pub mod polyalg;
pub mod smith;
pub mod specseq;

pub use error::{Error, Result};
