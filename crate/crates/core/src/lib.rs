//! Transverse intersection algebra on cubical lattices.
//!
//! Chains are finite rational combinations of decorated cells. Products and
//! boundaries are exact; an independent integration oracle recomputes them
//! from the wiggling densities.

pub mod error;
pub mod exactnum;
pub mod fluid;
pub mod lattice;
pub mod oracle;
pub mod tensor;
pub mod tia1d;
pub mod verify;

pub use error::{Result, TiaError};
pub use exactnum::Rational;
pub use lattice::{CellKind, Chain, Decoration, Gen1D, Lattice1D};
