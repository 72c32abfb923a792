//! Grassmann-boson algebra over a finite index set, Gaussian integration
//! (fermionic, bosonic, combined), the super-Laplacian and doubling map,
//! weighted test-function norms with the dual `T_phi` semi-norm, field
//! regulators on a lattice torus, and a property-check harness.
//!
//! Exact suites run over complex rationals ([`Cq`]); norm and Monte-Carlo
//! work uses `f64` ([`C64`]).

pub mod algebra;
pub mod error;
pub mod gaussian;
pub mod lattice;
pub mod linalg;
pub mod norms;
pub mod regulators;
pub mod verify;

pub use algebra::{
    BMono, FMono, FieldIndex, Field, IndexSequence, Kind, Layout, NElement, Poly, Scalar, Species,
    C64, Cq,
};
pub use error::{Error, Result};
pub use lattice::{Dir, MultiIndex, Polymer, Torus};
pub use gaussian::{BijectionMap, CovBlock, CovariancePair};
pub use norms::{NormMode, NormParams, NormValue, TestFunction, Weight};
