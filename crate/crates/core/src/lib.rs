//! Open abelian varieties: Jacobians of Riemann surfaces with analytically
//! parametrized boundary, at a finite Fourier truncation.
//!
//! The crate is organised bottom-up:
//!
//! * [`boundary`]: branched Fourier functions on the circle and the
//!   symplectic forms on boundary data, with ordering machinery.
//! * [`oav`]: open abelian varieties in normal form, validation,
//!   equivalence, period matrices and the smoothness diagnostic.
//! * [`gluing`]: disjoint union and gluing of inbound/outbound pairs.
//! * [`torelli`]: the Torelli map on genus-0 circle domains.
//! * [`lattice_cft`]: even lattices, the loop-group cocycle, discriminants
//!   and theta-function dimension checks.
//! * [`cli`]: JSON documents and the command-line front end.

pub mod boundary;
pub mod cli;
pub mod error;
pub mod gluing;
pub mod intlin;
pub mod lattice_cft;
pub mod linalg;
pub mod oav;
pub mod torelli;

pub use error::{Error, Result};
