//! Rank-k numerical ranges without product structure.
//!
//! Covers the interval formula for Hermitian operators, convex-cell
//! certificates for normal operators (unitaries in particular), explicit code
//! synthesis from such certificates, dual codes of projection noise and the
//! entropy of a bi-unitary code.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::RealInterval;
use crate::linalg::{
    cr, hermitian_eigendecomposition, max_abs, unitary_eigendecomposition, ComplexMatrix, Projector,
    SpectralDecomposition, C64,
};
use crate::tol;

/// `Λ_k(A) = [a_k, a_{n−k+1}]` from the ascending spectrum of a Hermitian `a`.
pub fn hermitian_rank_k_range(a: &ComplexMatrix, k: usize) -> Result<RealInterval> {
    let n = a.side();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("rank k={k} outside 1..={n}")));
    }
    let eig = hermitian_eigendecomposition(a)?;
    Ok(interval_from_ascending(&eig.eigenvalues, k))
}

pub(crate) fn interval_from_ascending(vals: &[f64], k: usize) -> RealInterval {
    let n = vals.len();
    let (lo, hi) = (vals[k - 1], vals[n - k]);
    if lo <= hi {
        RealInterval::new(lo, hi)
    } else if lo - hi <= tol::STRUCTURAL {
        RealInterval::singleton(0.5 * (lo + hi))
    } else {
        RealInterval::empty()
    }
}

/// Disjoint spectral index cells with convex weights.
///
/// Cell `i` lists eigenvalue indices `subsets[i]` and weights `weights[i]`
/// with `Σⱼ weights[i][j]·z[subsets[i][j]] = λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HullDecomposition {
    pub lambda: C64,
    pub subsets: Vec<Vec<usize>>,
    pub weights: Vec<Vec<f64>>,
}

impl HullDecomposition {
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Largest deviation of a cell's weighted sum from λ.
    pub fn residual(&self, spectrum: &[C64]) -> f64 {
        self.subsets
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| {
                let z: C64 = s.iter().zip(w).map(|(&i, &a)| spectrum[i] * a).sum();
                (z - self.lambda).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Certified rank-k compression `P u P = λ P` assembled from a hull decomposition.
#[derive(Clone, Debug)]
pub struct CompressionCertificate {
    pub lambda: C64,
    pub code: Projector,
    pub subsets: Vec<Vec<usize>>,
    pub weights: Vec<Vec<f64>>,
}

impl CompressionCertificate {
    pub fn hull(&self) -> HullDecomposition {
        HullDecomposition { lambda: self.lambda, subsets: self.subsets.clone(), weights: self.weights.clone() }
    }
}

const CELL_TOL: f64 = 1e-9;
const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
struct Cell {
    indices: Vec<usize>,
    weights: Vec<f64>,
}

fn normalized(mut w: Vec<f64>) -> Option<Vec<f64>> {
    for x in &mut w {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let s: f64 = w.iter().sum();
    if s <= 0.0 {
        return None;
    }
    w.iter_mut().for_each(|x| *x /= s);
    // a vanishing weight means a smaller cell already covers this one
    w.iter().all(|&x| x > WEIGHT_FLOOR).then_some(w)
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segment_cell(z: &[C64], i: usize, j: usize, lambda: C64) -> Option<Cell> {
    let d = z[j] - z[i];
    let len2 = d.norm_sqr();
    if len2 <= CELL_TOL * CELL_TOL {
        return None;
    }
    let r = lambda - z[i];
    if cross(d, r).abs() / len2.sqrt() > CELL_TOL {
        return None;
    }
    let t = (d.re * r.re + d.im * r.im) / len2;
    let slack = CELL_TOL / len2.sqrt();
    if t < -slack || t > 1.0 + slack {
        return None;
    }
    normalized(vec![1.0 - t, t]).map(|weights| Cell { indices: vec![i, j], weights })
}

fn triangle_cell(z: &[C64], i: usize, j: usize, l: usize, lambda: C64) -> Option<Cell> {
    let (a, b, c) = (z[i], z[j], z[l]);
    let area2 = cross(b - a, c - a);
    if area2.abs() <= CELL_TOL {
        return None;
    }
    let wa = cross(b - lambda, c - lambda) / area2;
    let wb = cross(c - lambda, a - lambda) / area2;
    let wc = cross(a - lambda, b - lambda) / area2;
    let tol = CELL_TOL / area2.abs().sqrt();
    if wa < -tol || wb < -tol || wc < -tol {
        return None;
    }
    normalized(vec![wa, wb, wc]).map(|weights| Cell { indices: vec![i, j, l], weights })
}

fn candidate_cells(z: &[C64], lambda: C64) -> Vec<Cell> {
    let n = z.len();
    let mut cells = Vec::new();
    for (i, zi) in z.iter().enumerate() {
        if (zi - lambda).norm() <= CELL_TOL {
            cells.push(Cell { indices: vec![i], weights: vec![1.0] });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            cells.extend(segment_cell(z, i, j, lambda));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for l in j + 1..n {
                cells.extend(triangle_cell(z, i, j, l, lambda));
            }
        }
    }
    cells
}

fn backtrack(cells: &[Cell], start: usize, k: usize, used: &mut Vec<bool>, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == k {
        return true;
    }
    for c in start..cells.len() {
        if cells[c].indices.iter().any(|&i| used[i]) {
            continue;
        }
        cells[c].indices.iter().for_each(|&i| used[i] = true);
        chosen.push(c);
        if backtrack(cells, c + 1, k, used, chosen) {
            return true;
        }
        chosen.pop();
        cells[c].indices.iter().for_each(|&i| used[i] = false);
    }
    false
}

/// Searches `k` pairwise-disjoint cells of at most three eigenvalues whose
/// convex hulls contain `lambda`. Smaller cells are tried first.
pub fn find_hull_decomposition(spectrum: &[C64], k: usize, lambda: C64) -> Option<HullDecomposition> {
    if k == 0 || k > spectrum.len() {
        return None;
    }
    let cells = candidate_cells(spectrum, lambda);
    let mut used = vec![false; spectrum.len()];
    let mut chosen = Vec::with_capacity(k);
    if !backtrack(&cells, 0, k, &mut used, &mut chosen) {
        return None;
    }
    Some(HullDecomposition {
        lambda,
        subsets: chosen.iter().map(|&c| cells[c].indices.clone()).collect(),
        weights: chosen.iter().map(|&c| cells[c].weights.clone()).collect(),
    })
}

/// `λ ∈ Δ_k(u)` certificate, or `None` when no ≤3-point cells are found.
pub fn delta_k_membership(u: &ComplexMatrix, k: usize, lambda: C64) -> Result<Option<CompressionCertificate>> {
    let eig = unitary_eigendecomposition(u)?;
    certify_normal(u, &eig, k, lambda)
}

/// Same search on the real spectrum of a Hermitian operator.
pub fn delta_k_membership_hermitian(
    a: &ComplexMatrix,
    k: usize,
    lambda: f64,
) -> Result<Option<CompressionCertificate>> {
    let eig = hermitian_eigendecomposition(a)?;
    let eig = SpectralDecomposition {
        eigenvalues: eig.eigenvalues.iter().map(|&x| cr(x)).collect(),
        eigenvectors: eig.eigenvectors,
    };
    certify_normal(a, &eig, k, cr(lambda))
}

fn certify_normal(
    op: &ComplexMatrix,
    eig: &SpectralDecomposition<C64>,
    k: usize,
    lambda: C64,
) -> Result<Option<CompressionCertificate>> {
    let Some(hull) = find_hull_decomposition(&eig.eigenvalues, k, lambda) else {
        return Ok(None);
    };
    let code = build_compression_code_from(op, eig, &hull)?;
    Ok(Some(CompressionCertificate { lambda, code, subsets: hull.subsets, weights: hull.weights }))
}

/// Code projector `Σᵢ |ψᵢ⟩⟨ψᵢ|` with `ψᵢ = Σ_{j∈δᵢ} √αᵢⱼ vⱼ`, eigenvectors taken from `u`.
pub fn build_compression_code(u: &ComplexMatrix, hull: &HullDecomposition) -> Result<Projector> {
    let eig = unitary_eigendecomposition(u)?;
    build_compression_code_from(u, &eig, hull)
}

/// As [`build_compression_code`] with a caller-supplied orthonormal eigenbasis,
/// for spectra whose eigenvectors are fixed by a construction.
pub fn build_compression_code_from(
    op: &ComplexMatrix,
    eig: &SpectralDecomposition<C64>,
    hull: &HullDecomposition,
) -> Result<Projector> {
    let n = op.side();
    if eig.eigenvectors.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigenvectors of length {} for an operator of side {n}",
            eig.eigenvectors.nrows()
        )));
    }
    let mut seen = vec![false; eig.len()];
    for s in &hull.subsets {
        for &i in s {
            if i >= eig.len() || seen[i] {
                return Err(Error::InvalidArgument(format!("cell index {i} is out of range or used twice")));
            }
            seen[i] = true;
        }
    }
    for w in &hull.weights {
        if w.iter().any(|&x| x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > tol::STRUCTURAL {
            return Err(Error::InvalidArgument("cell weights are not a convex combination".into()));
        }
    }
    let hull_residual = hull.residual(&eig.eigenvalues);
    if hull_residual > tol::IDENTITY {
        return Err(Error::Precondition(format!("hull cells miss lambda by {hull_residual:.3e}")));
    }
    let vectors: Vec<DVector<C64>> = hull
        .subsets
        .iter()
        .zip(&hull.weights)
        .map(|(s, w)| s.iter().zip(w).fold(DVector::zeros(n), |acc, (&j, &a)| acc + eig.vector(j) * cr(a.sqrt())))
        .collect();
    let code = Projector::span(op.dims(), &vectors)?;
    if code.rank() != hull.len() {
        return Err(Error::Decomposition(format!("code vectors span rank {} instead of {}", code.rank(), hull.len())));
    }
    let residual = compression_residual(op, &code, hull.lambda);
    if residual > tol::KL {
        return Err(Error::Decomposition(format!("compression residual {residual:.3e} exceeds tolerance")));
    }
    Ok(code)
}

/// `‖P A P − λ P‖_max`.
pub fn compression_residual(a: &ComplexMatrix, p: &Projector, lambda: C64) -> f64 {
    let pm = p.matrix().matrix();
    max_abs(&(pm * a.matrix() * pm - pm * lambda))
}

/// Companion code at `1 − γ`: `vᵢ = (q eᵢ − γ eᵢ)/√(γ(1−γ))` over an orthonormal basis of `r`.
pub fn dual_code(q: &Projector, r: &Projector, gamma: f64) -> Result<Projector> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("dual code needs 0 < gamma < 1, got {gamma}")));
    }
    if q.side() != r.side() {
        return Err(Error::DimensionMismatch("q and r act on different spaces".into()));
    }
    let residual = compression_residual(q.matrix(), r, cr(gamma));
    if residual > tol::KL {
        return Err(Error::Precondition(format!("r q r differs from gamma r by {residual:.3e}")));
    }
    let basis = r.range_basis();
    let scale = cr(1.0 / (gamma * (1.0 - gamma)).sqrt());
    let qm = q.matrix().matrix();
    let vectors: Vec<DVector<C64>> = basis.column_iter().map(|e| (qm * e - e * cr(gamma)) * scale).collect();
    let dual = Projector::span(q.dims(), &vectors)?;
    if dual.rank() != r.rank() {
        return Err(Error::Precondition(format!("dual vectors span rank {} instead of {}", dual.rank(), r.rank())));
    }
    Ok(dual)
}

/// Entropy in bits of the 2×2 matrix `[[p, λ√(p(1−p))], [λ*√(p(1−p)), 1−p]]`.
pub fn code_entropy(p: f64, lambda: C64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    let m2 = lambda.norm_sqr();
    if m2 > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!("|lambda| = {} exceeds 1", m2.sqrt())));
    }
    let disc = (1.0 - 4.0 * p * (1.0 - p) * (1.0 - m2.min(1.0))).max(0.0).sqrt();
    Ok([0.5 * (1.0 + disc), 0.5 * (1.0 - disc)].iter().filter(|&&mu| mu > 0.0).map(|&mu| -mu * mu.log2()).sum())
}

/// Unitary `Σ zᵢ |vᵢ⟩⟨vᵢ|` from phases and an orthonormal basis given as columns.
pub fn unitary_from_spectrum(dims: &[usize], phases: &[f64], vectors: &DMatrix<C64>) -> Result<ComplexMatrix> {
    if phases.len() != vectors.ncols() || vectors.nrows() != vectors.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} phases for a {}x{} eigenvector matrix",
            phases.len(),
            vectors.nrows(),
            vectors.ncols()
        )));
    }
    let dec = SpectralDecomposition {
        eigenvalues: phases.iter().map(|&t| C64::from_polar(1.0, t)).collect::<Vec<_>>(),
        eigenvectors: vectors.clone(),
    };
    ComplexMatrix::new(dims.to_vec(), dec.reconstruct())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_haar_unitary, random_hermitian};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn diag_c(z: &[C64]) -> ComplexMatrix {
        ComplexMatrix::from_matrix(DMatrix::from_diagonal(&DVector::from_vec(z.to_vec()))).unwrap()
    }

    #[test]
    fn hermitian_range_diag() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(hermitian_rank_k_range(&a, 2).unwrap(), RealInterval::new(2.0, 3.0));
        assert_eq!(hermitian_rank_k_range(&a, 1).unwrap(), RealInterval::new(1.0, 4.0));
        let b = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        assert!(hermitian_rank_k_range(&b, 2).unwrap().is_empty());
        assert!(hermitian_rank_k_range(&b, 3).is_err());
        assert!(hermitian_rank_k_range(&b, 0).is_err());
    }

    #[test]
    fn cube_roots_triangle() {
        let w = C64::from_polar(1.0, TAU / 3.0);
        let u = diag_c(&[cr(1.0), w, w * w]);
        let cert = delta_k_membership(&u, 1, cr(0.0)).unwrap().unwrap();
        assert_eq!(cert.subsets[0].len(), 3);
        for &x in &cert.weights[0] {
            assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-12);
        }
        assert!(compression_residual(&u, &cert.code, cr(0.0)) < 1e-12);
    }

    #[test]
    fn antipodal_segment() {
        let u = diag_c(&[cr(1.0), cr(-1.0), C64::i()]);
        let cert = delta_k_membership(&u, 1, cr(0.0)).unwrap().unwrap();
        assert_eq!(cert.subsets[0].len(), 2);
        assert_abs_diff_eq!(cert.weights[0][0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cert.weights[0][1], 0.5, epsilon = 1e-12);
        assert_eq!(cert.code.rank(), 1);
    }

    #[test]
    fn absent_when_outside_hull() {
        let u = diag_c(&[cr(1.0), C64::i()]);
        assert!(delta_k_membership(&u, 1, cr(0.0)).unwrap().is_none());
        assert!(delta_k_membership(&u, 2, cr(0.5)).unwrap().is_none());
    }

    #[test]
    fn random_unitary_certificates_verify() {
        let mut found = 0;
        for seed in 0..20 {
            let u = random_haar_unitary(9, seed);
            if let Some(cert) = delta_k_membership(&u, 2, cr(0.0)).unwrap() {
                assert!(compression_residual(&u, &cert.code, cr(0.0)) <= tol::KL);
                assert_eq!(cert.code.rank(), 2);
                found += 1;
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn hermitian_certificates_lie_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a = random_hermitian(&[6], &mut rng);
            let range = hermitian_rank_k_range(&a, 2).unwrap();
            let (lo, hi) = range.bounds().unwrap();
            for t in [0.1, 0.5, 0.9] {
                let lam = lo + t * (hi - lo);
                let cert = delta_k_membership_hermitian(&a, 2, lam).unwrap().unwrap();
                assert!(range.contains_tol(lam, 1e-12));
                assert!(compression_residual(&a, &cert.code, cr(lam)) <= tol::KL);
            }
        }
    }

    #[test]
    fn entropy_values() {
        assert_abs_diff_eq!(code_entropy(0.5, cr(0.0)).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(code_entropy(0.3, C64::from_polar(1.0, 0.7)).unwrap(), 0.0, epsilon = 1e-12);
        let h = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert_abs_diff_eq!(code_entropy(0.25, cr(0.0)).unwrap(), h, epsilon = 1e-12);
        assert!(code_entropy(0.5, cr(1.1)).is_err());
        assert!(code_entropy(1.5, cr(0.0)).is_err());
    }

    #[test]
    fn entropy_symmetric_and_monotone() {
        for p in [0.1, 0.3, 0.5, 0.8] {
            let mut prev = f64::INFINITY;
            for i in 0..=10 {
                let lam = C64::from_polar(i as f64 / 10.0, 0.4);
                let h = code_entropy(p, lam).unwrap();
                assert_abs_diff_eq!(h, code_entropy(1.0 - p, lam).unwrap(), epsilon = 1e-12);
                assert!(h <= prev + 1e-12);
                prev = h;
            }
        }
    }
}
