//! Exact computations with torsion-free modules over the local ring of an
//! ordinary cusp, and the equivalence relating sheaves on a cuspidal curve
//! to vector bundle data on its normalization.
//!
//! Everything is exact: coefficients are rationals or residues modulo a
//! prime, series are truncated at a fixed precision chosen large enough
//! that every reported answer is provably stable.

pub mod batch;
pub mod doc;
pub mod error;
pub mod extension;
pub mod field;
pub mod triples;
pub mod lattice;
pub mod matrix;
pub mod oracle;
pub mod ring;
pub mod selftest;
pub mod series;
pub mod smatrix;

pub use error::{Error, ErrorKind, Result};
pub use field::{Field, Scalar};
pub use lattice::{Decomposition, Lattice};
pub use ring::Context;
pub use series::PSeries;
