//! Dense complex linear algebra over tensor-product spaces.
//!
//! Every operator is a square [`ComplexMatrix`] carrying the list of its tensor
//! factor dimensions. Basis vectors are ordered lexicographically over factor
//! indices with party 0 varying slowest, which is exactly the ordering produced
//! by the Kronecker product.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, ProjectorCheck, Result};
use crate::tol;

pub type C64 = Complex64;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub(crate) fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Square complex matrix tagged with tensor-factor dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dims: Vec<usize>,
    data: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn new(dims: Vec<usize>, data: DMatrix<C64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "factor dimensions must be a non-empty list of positive integers, got {dims:?}"
            )));
        }
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be square, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let n: usize = dims.iter().product();
        if n != data.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "product of dims {dims:?} is {n} but the matrix side is {}",
                data.nrows()
            )));
        }
        Ok(Self { dims, data })
    }

    /// Plain operator with a single factor.
    pub fn from_matrix(data: DMatrix<C64>) -> Result<Self> {
        let n = data.nrows();
        Self::new(vec![n], data)
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let data = DMatrix::from_fn(n, n, |i, j| if i == j { cr(values[i]) } else { C64::default() });
        Self { dims: vec![n], data }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self { dims: dims.to_vec(), data: DMatrix::identity(n, n) }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self { dims: dims.to_vec(), data: DMatrix::zeros(n, n) }
    }

    /// Rank-one operator `|v⟩⟨v|`.
    pub fn outer(dims: &[usize], v: &DVector<C64>) -> Result<Self> {
        Self::new(dims.to_vec(), v * v.adjoint())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.data.nrows()
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    /// Same entries, different factorization of the side length.
    pub fn with_dims(&self, dims: &[usize]) -> Result<Self> {
        Self::new(dims.to_vec(), self.data.clone())
    }

    pub fn adjoint(&self) -> Self {
        Self { dims: self.dims.clone(), data: self.data.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dims: self.dims.clone(), data: &self.data * s }
    }

    /// Hermitian part `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self { dims: self.dims.clone(), data: (&self.data + self.data.adjoint()) * cr(0.5) }
    }

    /// Largest entry-wise modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs(&(&self.data - &other.data))
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.data - self.data.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn unitarity_error(&self) -> f64 {
        let n = self.side();
        max_abs(&(self.data.adjoint() * &self.data - DMatrix::<C64>::identity(n, n)))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    /// Conjugation `W M W†`.
    pub fn conjugate_by(&self, w: &ComplexMatrix) -> Self {
        assert_eq!(w.side(), self.side(), "conjugation by a matrix of different side");
        Self { dims: self.dims.clone(), data: &w.data * &self.data * w.data.adjoint() }
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.side(), rhs.side(), "matrix product of different sides");
        ComplexMatrix { dims: self.dims.clone(), data: &self.data * &rhs.data }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.side(), rhs.side(), "sum of different sides");
        ComplexMatrix { dims: self.dims.clone(), data: &self.data + &rhs.data }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.side(), rhs.side(), "difference of different sides");
        ComplexMatrix { dims: self.dims.clone(), data: &self.data - &rhs.data }
    }
}

/// Kronecker product; the factor lists are concatenated.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    ComplexMatrix { dims, data: a.data.kronecker(&b.data) }
}

/// Kronecker product of a non-empty list of operators.
pub fn tensor_product_all(ops: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let (first, rest) = ops.split_first().ok_or_else(|| Error::InvalidArgument("empty tensor product".into()))?;
    Ok(rest.iter().fold((*first).clone(), |acc, m| tensor_product(&acc, m)))
}

/// Reduced operator on factor `keep`, tracing out every other factor.
pub fn partial_trace(m: &ComplexMatrix, keep: usize) -> Result<ComplexMatrix> {
    let parties = m.parties();
    if parties < 2 {
        return Err(Error::DimensionMismatch("partial trace needs at least two tensor factors".into()));
    }
    if keep >= parties {
        return Err(Error::InvalidParty { party: keep, parties });
    }
    let dk = m.dims[keep];
    let stride: usize = m.dims[keep + 1..].iter().product();
    let n = m.side();
    let mut out = DMatrix::<C64>::zeros(dk, dk);
    for base in (0..n).filter(|r| (r / stride).is_multiple_of(dk)) {
        for i in 0..dk {
            let row = base + i * stride;
            for j in 0..dk {
                out[(i, j)] += m.data[(row, base + j * stride)];
            }
        }
    }
    ComplexMatrix::new(vec![dk], out)
}

/// Eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: DMatrix<C64>,
}

impl<T: Copy + Into<C64>> SpectralDecomposition<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, i: usize) -> DVector<C64> {
        self.eigenvectors.column(i).into_owned()
    }

    /// `Σ zᵢ |vᵢ⟩⟨vᵢ|`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let v = &self.eigenvectors;
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&z| z.into()),
        ));
        v * d * v.adjoint()
    }
}

/// Real spectrum in ascending order. Ties keep the solver's order.
pub fn hermitian_eigendecomposition(m: &ComplexMatrix) -> Result<SpectralDecomposition<f64>> {
    let deviation = m.hermiticity_error();
    if deviation > tol::STRUCTURAL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(hermitian_eigen_unchecked(&m.hermitian_part().data))
}

pub(crate) fn hermitian_eigen_unchecked(h: &DMatrix<C64>) -> SpectralDecomposition<f64> {
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = h.nrows();
    let mut vectors = DMatrix::<C64>::zeros(n, order.len());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    SpectralDecomposition { eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(), eigenvectors: vectors }
}

/// Eigenvalues of a Hermitian matrix, descending.
pub(crate) fn eigenvalues_descending(h: &DMatrix<C64>) -> Vec<f64> {
    let sym = (h + h.adjoint()) * cr(0.5);
    let mut vals: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Spectrum of a unitary, ordered by phase in `[0, 2π)`.
///
/// Computed from the complex Schur form, which is diagonal for normal
/// matrices; degenerate eigenspaces still get orthonormal Schur vectors.
pub fn unitary_eigendecomposition(u: &ComplexMatrix) -> Result<SpectralDecomposition<C64>> {
    let deviation = u.unitarity_error();
    if deviation > tol::STRUCTURAL {
        return Err(Error::NotUnitary { deviation });
    }
    let (q, t) = u.data.clone().schur().unpack();
    let phase = |z: C64| z.arg().rem_euclid(std::f64::consts::TAU);
    let mut order: Vec<usize> = (0..t.nrows()).collect();
    order.sort_by(|&a, &b| phase(t[(a, a)]).total_cmp(&phase(t[(b, b)])));
    let n = u.side();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &q.column(src));
    }
    let dec = SpectralDecomposition {
        eigenvalues: order.iter().map(|&i| t[(i, i)] / t[(i, i)].norm()).collect(),
        eigenvectors: vectors,
    };
    let err = max_abs(&(dec.reconstruct() - &u.data));
    if err > tol::RECONSTRUCTION {
        return Err(Error::Decomposition(format!("unitary spectral reconstruction error {err:.3e}")));
    }
    Ok(dec)
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    m.data.clone().singular_values().iter().sum()
}

/// `exp(i H)` for Hermitian `H`.
pub(crate) fn expi_hermitian(h: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = hermitian_eigen_unchecked(h);
    let phases =
        DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&x| C64::from_polar(1.0, x)));
    &eig.eigenvectors * DMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}

/// Haar-distributed unitary drawn from `rng`.
///
/// QR of a complex Ginibre matrix with the diagonal of `R` phase-normalized.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = DMatrix::<C64>::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DVector::from_iterator(
        d,
        (0..d).map(|i| {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                cr(1.0)
            }
        }),
    );
    ComplexMatrix { dims: vec![d], data: q * DMatrix::from_diagonal(&phases) }
}

/// Seeded Haar unitary; equal seeds give identical matrices.
pub fn random_haar_unitary(d: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary(d.max(1), &mut rng)
}

/// Random Hermitian matrix with Gaussian entries (GUE up to scale).
pub fn random_hermitian<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> ComplexMatrix {
    let n: usize = dims.iter().product();
    let g = DMatrix::<C64>::from_fn(n, n, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    ComplexMatrix { dims: dims.to_vec(), data: (&g + g.adjoint()) * cr(0.5) }
}

/// Orthonormalize `vectors` by modified Gram–Schmidt, dropping dependent ones.
pub(crate) fn orthonormalize(vectors: &[DVector<C64>], eps: f64) -> Vec<DVector<C64>> {
    let mut out: Vec<DVector<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &out {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let norm = w.norm();
        if norm > eps {
            out.push(w / cr(norm));
        }
    }
    out
}

/// Validated orthogonal projector with its rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dims(&self) -> &[usize] {
        self.matrix.dims()
    }

    pub fn side(&self) -> usize {
        self.matrix.side()
    }

    /// Projector onto the span of `vectors` (orthonormalized first).
    pub fn span(dims: &[usize], vectors: &[DVector<C64>]) -> Result<Self> {
        let n: usize = dims.iter().product();
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(format!("vector of length {} in a space of dimension {n}", v.len())));
        }
        let basis = orthonormalize(vectors, 1e-12);
        let mut m = DMatrix::<C64>::zeros(n, n);
        for b in &basis {
            m += b * b.adjoint();
        }
        validate_projector(&ComplexMatrix::new(dims.to_vec(), m)?)
    }

    /// Projector onto the first `rank` canonical basis vectors of `C^d`.
    pub fn leading(d: usize, rank: usize) -> Result<Self> {
        if rank > d {
            return Err(Error::InvalidArgument(format!("rank {rank} exceeds dimension {d}")));
        }
        let vals: Vec<f64> = (0..d).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
        Ok(Self { matrix: ComplexMatrix::from_real_diagonal(&vals), rank })
    }

    /// Projector onto canonical basis vectors with the given indices.
    pub fn coordinate(d: usize, indices: &[usize]) -> Result<Self> {
        let vecs: Vec<DVector<C64>> = indices.iter().map(|&i| basis_vector(d, i)).collect();
        Self::span(&[d], &vecs)
    }

    /// Orthonormal basis of the range as columns.
    pub fn range_basis(&self) -> DMatrix<C64> {
        let eig = hermitian_eigen_unchecked(self.matrix.matrix());
        let n = self.side();
        let cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        let mut out = DMatrix::<C64>::zeros(n, cols.len());
        for (dst, &src) in cols.iter().enumerate() {
            out.set_column(dst, &eig.eigenvectors.column(src));
        }
        out
    }

    /// `I − P`.
    pub fn complement(&self) -> Projector {
        let id = ComplexMatrix::identity(self.dims());
        Projector { matrix: &id - &self.matrix, rank: self.side() - self.rank }
    }

    pub fn tensor(&self, other: &Projector) -> Projector {
        Projector { matrix: tensor_product(&self.matrix, &other.matrix), rank: self.rank * other.rank }
    }

    /// `W P W†` for a unitary `W`.
    pub fn rotate(&self, w: &ComplexMatrix) -> Result<Projector> {
        validate_projector(&self.matrix.conjugate_by(w).with_dims(self.dims())?)
    }
}

/// Canonical basis vector `|i⟩` of `C^d`.
pub fn basis_vector(d: usize, i: usize) -> DVector<C64> {
    let mut v = DVector::<C64>::zeros(d);
    v[i] = cr(1.0);
    v
}

/// Product basis vector `|i₀ i₁ …⟩`.
pub fn product_basis_vector(dims: &[usize], digits: &[usize]) -> DVector<C64> {
    let n: usize = dims.iter().product();
    let idx = digits.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i);
    basis_vector(n, idx)
}

/// Accepts `m` as a projector when it is Hermitian, idempotent and has integer trace.
pub fn validate_projector(m: &ComplexMatrix) -> Result<Projector> {
    let herm = m.hermiticity_error();
    if herm > tol::STRUCTURAL {
        return Err(Error::NotProjector { check: ProjectorCheck::Hermitian, deviation: herm });
    }
    let idem = max_abs(&(&m.data * &m.data - &m.data));
    if idem > tol::STRUCTURAL {
        return Err(Error::NotProjector { check: ProjectorCheck::Idempotent, deviation: idem });
    }
    let tr = m.trace();
    let rank = tr.re.round();
    let off = (tr - cr(rank)).norm();
    if off > tol::IDENTITY || rank < 0.0 {
        return Err(Error::NotProjector { check: ProjectorCheck::IntegerTrace, deviation: off });
    }
    Ok(Projector { matrix: m.clone(), rank: rank as usize })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(v)
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(ComplexMatrix::new(vec![2, 3], DMatrix::zeros(5, 5)).is_err());
        assert!(ComplexMatrix::new(vec![], DMatrix::zeros(1, 1)).is_err());
        assert!(ComplexMatrix::new(vec![2, 0], DMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn tensor_identity_and_diagonal() {
        let i2 = ComplexMatrix::identity(&[2]);
        let i4 = tensor_product(&i2, &i2);
        assert_eq!(i4.dims(), &[2, 2]);
        assert_eq!(i4.max_abs_diff(&ComplexMatrix::identity(&[4])), 0.0);

        let d = tensor_product(&diag(&[1.0, 2.0]), &diag(&[3.0, 4.0]));
        assert_eq!(d.max_abs_diff(&diag(&[3.0, 4.0, 6.0, 8.0])), 0.0);
    }

    #[test]
    fn tensor_of_basis_projectors() {
        let p0 = Projector::coordinate(2, &[0]).unwrap();
        let p1 = Projector::coordinate(2, &[1]).unwrap();
        let p = p0.tensor(&p1);
        assert_eq!(p.rank(), 1);
        // |01⟩ is index 1 with party 0 slowest
        assert_eq!(p.matrix().get(1, 1), cr(1.0));
        assert_eq!(p.matrix().trace(), cr(1.0));
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(&[3], &mut rng);
        let b = random_hermitian(&[2], &mut rng);
        let ab = tensor_product(&a, &b);
        let ra = partial_trace(&ab, 0).unwrap();
        assert!(ra.max_abs_diff(&a.scale(b.trace())) < 1e-12);
        let rb = partial_trace(&ab, 1).unwrap();
        assert!(rb.max_abs_diff(&b.scale(a.trace())) < 1e-12);
    }

    #[test]
    fn partial_trace_three_parties() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_hermitian(&[2], &mut rng);
        let b = random_hermitian(&[3], &mut rng);
        let cc = random_hermitian(&[2], &mut rng);
        let abc = tensor_product_all(&[&a, &b, &cc]).unwrap();
        let rb = partial_trace(&abc, 1).unwrap();
        assert!(rb.max_abs_diff(&b.scale(a.trace() * cc.trace())) < 1e-12);
    }

    #[test]
    fn partial_trace_errors() {
        let m = ComplexMatrix::identity(&[4]);
        assert!(partial_trace(&m, 0).is_err());
        let m = ComplexMatrix::identity(&[2, 2]);
        assert!(matches!(partial_trace(&m, 2), Err(Error::InvalidParty { .. })));
    }

    #[test]
    fn eigen_sorted_ascending() {
        let e = hermitian_eigendecomposition(&diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
        let m =
            ComplexMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, 1.0), c(0.0, 1.0), cr(0.0)]))
                .unwrap();
        assert!(matches!(hermitian_eigendecomposition(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigen_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let h = random_hermitian(&[4, 4], &mut rng);
            let e = hermitian_eigendecomposition(&h).unwrap();
            assert!(max_abs(&(e.reconstruct() - h.matrix())) < tol::RECONSTRUCTION);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn unitary_spectrum_of_diagonal() {
        let w = C64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        let u =
            ComplexMatrix::from_matrix(DMatrix::from_diagonal(&DVector::from_vec(vec![w * w, cr(1.0), w]))).unwrap();
        let e = unitary_eigendecomposition(&u).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!((e.eigenvalues[1] - w).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((e.eigenvalues[2] - w * w).norm(), 0.0, epsilon = 1e-12);
        assert!(unitary_eigendecomposition(&diag(&[1.0, 0.5])).is_err());
    }

    #[test]
    fn trace_norm_cases() {
        assert_eq!(trace_norm(&ComplexMatrix::zeros(&[3])), 0.0);
        assert_abs_diff_eq!(trace_norm(&diag(&[-1.0, 2.0, 0.5])), 3.5, epsilon = 1e-12);
    }

    #[test]
    fn haar_properties() {
        let u1 = random_haar_unitary(1, 5);
        assert_abs_diff_eq!(u1.get(0, 0).norm(), 1.0, epsilon = 1e-12);
        for d in [2, 3, 5, 8] {
            let u = random_haar_unitary(d, 17);
            assert!(u.is_unitary(1e-10));
            assert_eq!(u, random_haar_unitary(d, 17));
        }
        assert_ne!(random_haar_unitary(3, 1), random_haar_unitary(3, 2));
    }

    #[test]
    fn projector_validation() {
        assert_eq!(validate_projector(&ComplexMatrix::identity(&[3])).unwrap().rank(), 3);
        match validate_projector(&ComplexMatrix::identity(&[2]).scale(cr(0.5))) {
            Err(Error::NotProjector { check, .. }) => assert_eq!(check, ProjectorCheck::Idempotent),
            other => panic!("unexpected {other:?}"),
        }
        let nh =
            ComplexMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[cr(1.0), cr(1.0), cr(0.0), cr(0.0)])).unwrap();
        match validate_projector(&nh) {
            Err(Error::NotProjector { check, .. }) => assert_eq!(check, ProjectorCheck::Hermitian),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn span_and_range_basis() {
        let v = vec![
            DVector::from_vec(vec![cr(1.0), cr(1.0), cr(0.0)]),
            DVector::from_vec(vec![cr(2.0), cr(2.0), cr(0.0)]),
            DVector::from_vec(vec![cr(0.0), c(0.0, 1.0), cr(1.0)]),
        ];
        let p = Projector::span(&[3], &v).unwrap();
        assert_eq!(p.rank(), 2);
        let b = p.range_basis();
        assert_eq!(b.ncols(), 2);
        let back = &b * b.adjoint();
        assert!(max_abs(&(back - p.matrix().matrix())) < 1e-12);
        assert_eq!(p.complement().rank(), 1);
    }

    #[test]
    fn expi_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = random_hermitian(&[3], &mut rng);
        let u = ComplexMatrix::from_matrix(expi_hermitian(h.matrix())).unwrap();
        assert!(u.is_unitary(1e-12));
    }
}
