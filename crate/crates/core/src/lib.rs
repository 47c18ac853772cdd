//! Exact spectral graph theory around the non-backtracking edge Laplacian.
//!
//! The crate computes, over an exact scalar field, the operators attached to a
//! finite symmetric graph (edge Laplacian, non-backtracking transition matrix,
//! transfer matrix, the involution `Ξ` and the source sum `Σ`), their
//! eigenspaces, and the boundary machinery of the universal covering tree:
//! horocycle brackets, finitely additive boundary measures at a truncation
//! radius, vertex and edge Poisson transforms, deck transformations, and the
//! `Δᵉ`/`Ξ` operator algebra of a regular tree.
//!
//! All core math is generic over [`scalar::Scalar`]; the crate-level aliases
//! pin the exact rational instantiation used by the verification harness and
//! the CLI. Nothing in the default pipeline touches floating point.

pub mod corpus;
pub mod cover;
pub mod deck;
pub mod graph;
pub mod hecke;
pub mod linalg;
pub mod scalar;
pub mod spectral;
pub mod suites;

/// Exact rational scalar used throughout the harness.
pub type Rational = num::BigRational;
/// Sparse exact matrix over [`Rational`].
pub type RationalMatrix = linalg::Matrix<Rational>;
/// Dense exact vector over [`Rational`].
pub type RationalVector = Vec<Rational>;

pub use graph::{DirEdgeId, Graph, PruneResult, SpanningTree, VertexId};
pub use linalg::Matrix;
