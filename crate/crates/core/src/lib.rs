//! Symmetric Nitsche discretizations in 2D with P1 elements: the classical
//! penalty formulation and a parameter-free variant stabilized through an
//! element-local lifting of the flux terms.
//!
//! Two model problems are covered: the Poisson problem on a fitted mesh with
//! weakly imposed Dirichlet data, and a two-phase diffusion problem whose
//! interface cuts through an unfitted mesh (CutFEM with doubled unknowns on
//! cut elements).

pub mod analysis;
pub mod assembly;
pub mod cut;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod spaces;

pub use error::{Error, Result};
pub use mesh::{BBox, Mesh, Point2};
