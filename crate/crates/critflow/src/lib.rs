//! Numerical toolkit for global bifurcation of critical *values*: spectral
//! flow of symmetric operator paths, Morse indices, sublevel-pair homology
//! over GF(2), sublevel-preserving deformation flows, grid-exact plane
//! separation lemmas, a branch scanner for critical pairs in the
//! `(lambda, y)`-plane, and the strongly-indefinite truncation machinery.
//!
//! Everything is desk-scale and deterministic: fixed seeds reproduce every
//! report byte for byte, and the independent algorithm routes (endpoint
//! eigenspaces vs. crossing counts vs. truncation signatures, scanner
//! landmarks vs. closed forms) cross-check each other in the test suites.

pub mod bifurcate;
pub mod deform;
pub mod functional;
pub mod galerkin;
pub mod linalg;
pub mod plane;
pub mod solver;
pub mod spectral;
pub mod topology;

pub use functional::{DomainBox, FunctionalFamily, ScalarProfile};
pub use linalg::{SpectralDecomposition, SymMatrix};
pub use spectral::SymOperatorPath;
