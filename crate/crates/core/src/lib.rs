//! Product higher-rank numerical ranges of operators on tensor-product spaces.
//!
//! The crate computes compression values `λ` with `(R ⊗ R′) A (R ⊗ R′) = λ (R ⊗ R′)`
//! for local projectors `R`, `R′`, outer-bounds the set of such values, and
//! builds and checks the matching error-correction codes for bi-unitary
//! multiple-access channels `ρ ↦ pρ + (1−p) UρU†`.
//!
//! Layout:
//!
//! * [`linalg`]: dense complex matrices tagged with tensor-factor dimensions,
//!   partial traces, spectral decompositions, norms, projectors.
//! * [`spectral`]: the ordinary rank-k range of Hermitian operators, convex-hull
//!   certificates for unitaries, dual codes and code entropy.
//! * [`product`]: product-code verification, partial-trace eigenvalue conditions
//!   and the γ-scanner built on them, common ranges and structural helpers.
//! * [`localopt`]: multistart optimization over local unitary pairs.
//! * [`zoo`]: operator families with known ranges, channels and reverse
//!   constructions.
//! * [`io`]: the JSON operator and code file formats.

pub mod error;
pub mod interval;
pub mod io;
pub mod linalg;
pub mod localopt;
pub mod product;
pub mod spectral;
pub mod tol;
pub mod zoo;

pub use error::{Error, ProjectorCheck, Result};
pub use interval::RealInterval;
pub use linalg::{
    hermitian_eigendecomposition, partial_trace, random_haar_unitary, tensor_product, trace_norm,
    unitary_eigendecomposition, validate_projector, ComplexMatrix, Projector, SpectralDecomposition, C64,
};
pub use localopt::{LocalOptConfig, OptimizedBound};
pub use product::{BoundMethod, BoundReport, KlVerdict, ProductCode};
pub use spectral::{CompressionCertificate, HullDecomposition};
pub use zoo::{BucChannel, ZooEntry};
