//! Combinatorics, characteristic matrices and cohomology rings of quasitoric
//! manifolds and small covers over dual cyclic polytopes.
//!
//! The pipeline is matrix-level throughout: a manifold is represented by its
//! characteristic matrix, classified by canonical forms under the
//! row-GL × column-sign × facet-permutation action, and compared through its
//! cohomology ring presentation.

pub mod charmat;
pub mod cohomology;
pub mod connectsum;
pub mod error;
pub mod golden;
pub mod isomorphism;
pub mod linalg;
pub mod poly;
pub mod polytope;
pub mod reproduce;

pub use charmat::{CharMatrix, EquivClass, RealCharMatrix};
pub use cohomology::RingPresentation;
pub use error::{Error, Result};
pub use polytope::{CombinatorialPolytope, FaceData, FacetPermutation};
