//! Numerical tolerances shared across the crate.

/// Hermiticity, idempotence and unitarity checks (max-abs deviation).
pub const STRUCTURAL: f64 = 1e-10;
/// Reconstruction error of spectral decompositions.
pub const RECONSTRUCTION: f64 = 1e-9;
/// Derived operator identities such as `P A P = λ P`.
pub const IDENTITY: f64 = 1e-8;
/// Knill–Laflamme residual accepted when certifying a code.
pub const KL: f64 = 1e-8;
/// Eigenvalues below this count as zero when taking numerical ranks.
pub const RANK: f64 = 1e-9;
/// Slack granted to the right-hand side of the partial-trace inequalities.
pub const FEASIBILITY: f64 = 1e-9;
