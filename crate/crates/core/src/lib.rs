//! String C-group representations of the orthogonal groups `Omega(5, q)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`ffield`]: arithmetic in GF(p^e) with square classes;
//! - [`matlin`]: dense linear algebra (row vectors, right action);
//! - [`quadspace`]: quadratic forms, symmetries, spinor norms;
//! - [`group`]: stabilizer chains for matrix groups acting on vectors;
//! - [`sggi`]: string and intersection properties, rank reduction;
//! - [`constructions`]: the explicit rank 5 and rank 4 generating sequences;
//! - [`search`]: scalar sweeps and involution-tuple searches.

pub mod error;
pub mod ffield;
pub mod matlin;
pub mod quadspace;
pub mod group;
pub mod sggi;
pub mod constructions;
pub mod search;

pub use error::{Result, ScgError};
pub use ffield::{Field, FieldElement, SquareClass};
pub use matlin::{Matrix, Subspace, Vector};
pub use quadspace::QuadraticForm;
