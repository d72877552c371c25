//! Complex matrix factorization for subspace face recognition.
//!
//! The library maps real image data onto the complex unit-magnitude sphere,
//! factorizes the resulting complex matrix with block coordinate descent
//! (plain, sparse-penalized, or graph-regularized), and classifies samples in
//! the learned subspace with a one-nearest-neighbor rule. A standard
//! multiplicative-update NMF is included as the real-valued baseline.
//!
//! Modules:
//! - [`linalg`]: dense complex matrices, pseudoinverse, `cmfmat` file format
//! - [`transform`]: pixel normalization and the Euler phase map
//! - [`graph`]: cosine kNN graph and its Laplacian
//! - [`factor`]: the CMF/SpaCMF/GraCMF solvers and the NMF baseline
//! - [`recognition`]: subspace encoding and 1-NN classification
//! - [`dataset`]: PGM ingestion, occlusion, splits, synthetic generators

pub mod dataset;
pub mod error;
pub mod factor;
pub mod graph;
pub mod linalg;
pub mod recognition;
pub mod transform;

pub use error::{CmfError, Result};
pub use linalg::ComplexMatrix;
