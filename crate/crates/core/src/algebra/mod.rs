//! The algebra of fermion monomials over boson polynomials.

mod element;
mod index;
mod poly;
mod scalar;
pub mod serialize;
pub mod star;

pub use element::{fermion_product_sign, FMono, NElement};
pub use index::{perm_sign, sort_sign, Field, FieldIndex, IndexSequence, Kind, Layout, Species};
pub use poly::{BMono, Poly};
pub use scalar::{parse_rational, Scalar, C64, Cq};
