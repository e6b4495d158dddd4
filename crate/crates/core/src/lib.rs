//! Foldy-Wouthuysen transformations of lattice Dirac Hamiltonians and the
//! checks that tell whether a transform actually reaches the FW representation.

pub mod clifford;
pub mod error;
pub mod hamiltonians;
pub mod lattice;
pub mod linalg;
pub mod spectra;
pub mod transforms;
pub mod verify;

pub use error::{FwError, Result};
