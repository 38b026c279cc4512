//! Truncated branched Fourier functions on `S¹` and the symplectic forms on
//! boundary data.

mod block;
mod function;
mod layout;
mod signature;

pub use block::{block_pairing, polarization_split, standard_transform, BlockVector, PolarizationSplit};
pub use function::{gauss_legendre, pairing, quadrature_pairing, BranchedFunction};
pub use layout::{Coord, VLayout};
pub use signature::{Boundary, BoundaryId, ComponentSignature, Ordering, Orientation, Signature};
