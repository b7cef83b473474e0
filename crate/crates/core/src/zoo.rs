//! Concrete operators with known ranges, their attaining codes, the
//! bi-unitary channel and the reverse constructions of unitaries from codes.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::interval::RealInterval;
use crate::linalg::{
    basis_vector, c, cr, haar_unitary, hermitian_eigen_unchecked, orthonormalize, product_basis_vector,
    validate_projector, ComplexMatrix, Projector, SpectralDecomposition, C64,
};
use crate::product::{swap_range, ProductCode};
use crate::spectral::{build_compression_code_from, HullDecomposition};
use crate::tol;

/// Parameterized code families attached to zoo entries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CodeFamily {
    None,
    /// `P₀ ⊗ P₀` with `P₀ = |0⟩⟨0| + |1⟩⟨1|`, value `α`.
    Example1 {
        alpha: f64,
    },
    /// β-codes with value `β(1−α)` (or `βα` when `α > ½`).
    Q44 {
        alpha: f64,
    },
    /// `I₂ ⊗ span{ξ₁, ξ₂}` at angle β.
    Q24 {
        gamma: f64,
    },
    /// Orthogonal-support code of the swap.
    Swap {
        d: usize,
    },
    /// Fixed decoherence-free code.
    Fixed,
}

/// A named operator with what is known about its product range.
#[derive(Clone, Debug)]
pub struct ZooEntry {
    pub label: String,
    pub operator: ComplexMatrix,
    pub parameters: BTreeMap<String, f64>,
    pub known_exact_range: Option<RealInterval>,
    pub known_outer_bound: Option<RealInterval>,
    pub family: CodeFamily,
    pub claim: Option<String>,
    fixed_code: Option<Vec<Projector>>,
}

impl ZooEntry {
    fn new(label: &str, operator: ComplexMatrix) -> Self {
        Self {
            label: label.to_string(),
            operator,
            parameters: BTreeMap::new(),
            known_exact_range: None,
            known_outer_bound: None,
            family: CodeFamily::None,
            claim: None,
            fixed_code: None,
        }
    }

    fn param(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    /// The operator as a validated projector, when it is one.
    pub fn projector(&self) -> Result<Projector> {
        validate_projector(&self.operator)
    }

    /// Certified member of the attaining family at parameter `t`
    /// (β for the 4⊗4 and 2⊗4 families; ignored by fixed codes).
    pub fn attaining_code(&self, t: f64) -> Result<Option<ProductCode>> {
        let parties = match self.family {
            CodeFamily::None => return Ok(None),
            CodeFamily::Example1 { .. } => example1_code()?,
            CodeFamily::Q44 { alpha } => q44_code(alpha, t)?.0,
            CodeFamily::Q24 { gamma } => q24_code(gamma, t)?.0,
            CodeFamily::Swap { d } => match swap_range(d, 2, 2)?.code {
                Some(code) => code,
                None => return Ok(None),
            },
            CodeFamily::Fixed => match &self.fixed_code {
                Some(code) => code.clone(),
                None => return Ok(None),
            },
        };
        ProductCode::certify(&self.operator, parties).map(Some)
    }
}

fn unit_open(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must lie in (0, 1), got {x}")))
    }
}

fn projector_from(dims: &[usize], vectors: &[DVector<C64>]) -> ComplexMatrix {
    let n: usize = dims.iter().product();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for v in vectors {
        m += v * v.adjoint();
    }
    ComplexMatrix::new(dims.to_vec(), m).expect("consistent dims")
}

fn ket(dims: &[usize], digits: &[usize]) -> DVector<C64> {
    product_basis_vector(dims, digits)
}

fn kron(a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
    a.kronecker(b)
}

/// Swap `V_d |φ⟩|ψ⟩ = |ψ⟩|φ⟩` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let n = d * d;
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            m[(j * d + i, i * d + j)] = cr(1.0);
        }
    }
    ComplexMatrix::new(vec![d, d], m).expect("consistent dims")
}

pub fn swap_entry(d: usize) -> Result<ZooEntry> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("swap needs d >= 2, got {d}")));
    }
    let mut e = ZooEntry::new("swap", swap_operator(d)).param("d", d as f64);
    e.family = CodeFamily::Swap { d };
    Ok(e)
}

/// `[⅔(1−√(1−3α²/16)), ⅓(1+√(4−3((1−α)/2)²))]`.
pub fn example1_closed_form(alpha: f64) -> RealInterval {
    let lo = 2.0 / 3.0 * (1.0 - (1.0 - 3.0 * alpha * alpha / 16.0).sqrt());
    let h = 0.5 * (1.0 - alpha);
    let hi = (1.0 + (4.0 - 3.0 * h * h).sqrt()) / 3.0;
    RealInterval::new(lo, hi)
}

fn example1_code() -> Result<Vec<Projector>> {
    let p0 = Projector::coordinate(3, &[0, 1])?;
    Ok(vec![p0.clone(), p0])
}

/// Rank-4 projector on `3⊗3` spanned by `(√α|0⟩+√(1−α)|2⟩)|0⟩` and its three companions.
pub fn example1_projector(alpha: f64) -> Result<ZooEntry> {
    unit_open("alpha", alpha)?;
    let d = [3];
    let (sa, sb) = (cr(alpha.sqrt()), cr((1.0 - alpha).sqrt()));
    let mix = |i: usize| ket(&d, &[i]) * sa + ket(&d, &[2]) * sb;
    let vecs = [
        kron(&mix(0), &ket(&d, &[0])),
        kron(&ket(&d, &[0]), &mix(1)),
        kron(&ket(&d, &[1]), &mix(0)),
        kron(&mix(1), &ket(&d, &[1])),
    ];
    let mut e = ZooEntry::new("example1", projector_from(&[3, 3], &vecs)).param("alpha", alpha);
    e.known_outer_bound = Some(example1_closed_form(alpha));
    e.family = CodeFamily::Example1 { alpha };
    Ok(e)
}

/// Root `a = (3+√5)/2` of `a + 1/a = 3`.
pub fn example2_a() -> f64 {
    0.5 * (3.0 + 5f64.sqrt())
}

/// `Σ_{i<j} |ψᵢⱼ⟩⟨ψᵢⱼ| + P₃⁺` on `3⊗3` with `ψᵢⱼ = (√a|ij⟩ + √(1/a)|ji⟩)/√3`.
pub fn example2_projector() -> ZooEntry {
    let a = example2_a();
    let dims = [3, 3];
    let s3 = 3f64.sqrt();
    let mut vecs = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            vecs.push((ket(&dims, &[i, j]) * cr(a.sqrt()) + ket(&dims, &[j, i]) * cr((1.0 / a).sqrt())) / cr(s3));
        }
    }
    let plus = (0..3).map(|i| ket(&dims, &[i, i])).fold(DVector::zeros(9), |acc, v| acc + v) / cr(s3);
    vecs.push(plus);
    let mut e = ZooEntry::new("example2", projector_from(&dims, &vecs)).param("a", a);
    e.known_outer_bound = Some(RealInterval::new((4.0 - 13f64.sqrt()) / 6.0, (3.0 + 33f64.sqrt()) / 9.0));
    e
}

/// Rank-4 projector on `4⊗4` spanned by `√α|00⟩ + √(1−α)|22⟩` and its three companions.
pub fn q44_projector(alpha: f64) -> Result<ZooEntry> {
    unit_open("alpha", alpha)?;
    let dims = [4, 4];
    let (sa, sb) = (cr(alpha.sqrt()), cr((1.0 - alpha).sqrt()));
    let vecs: Vec<DVector<C64>> = [(0, 0), (0, 1), (1, 0), (1, 1)]
        .iter()
        .map(|&(i, j)| ket(&dims, &[i, j]) * sa + ket(&dims, &[i + 2, j + 2]) * sb)
        .collect();
    let mut e = ZooEntry::new("q44", projector_from(&dims, &vecs)).param("alpha", alpha);
    e.known_exact_range = Some(RealInterval::new(0.0, alpha.max(1.0 - alpha)));
    e.family = CodeFamily::Q44 { alpha };
    Ok(e)
}

/// β-code and its value: `β(1−α)` for `α ≤ ½`, mirrored to `βα` otherwise.
pub fn q44_code(alpha: f64, beta: f64) -> Result<(Vec<Projector>, f64)> {
    unit_open("alpha", alpha)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!("beta must lie in [0, 1], got {beta}")));
    }
    let d = [4];
    let (s0, s1) = (cr((1.0 - beta).sqrt()), cr(beta.sqrt()));
    let (main, other, gamma) = if alpha <= 0.5 { (0, 2, beta * (1.0 - alpha)) } else { (2, 0, beta * alpha) };
    let r = Projector::span(
        &d,
        &[ket(&d, &[main]) * s0 + ket(&d, &[other]) * s1, ket(&d, &[main + 1]) * s0 + ket(&d, &[other + 1]) * s1],
    )?;
    let rp = Projector::coordinate(4, &[other, other + 1])?;
    Ok((vec![r, rp], gamma))
}

/// Equal-projector code `φ = √(1−β)|0⟩ + i√β|2⟩` with value `(√α(1−β) − √(1−α)β)²`.
pub fn q44_symmetric_code(alpha: f64, beta: f64) -> Result<(Vec<Projector>, f64)> {
    unit_open("alpha", alpha)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!("beta must lie in [0, 1], got {beta}")));
    }
    let d = [4];
    let (s0, s1) = (cr((1.0 - beta).sqrt()), c(0.0, beta.sqrt()));
    let r = Projector::span(&d, &[ket(&d, &[0]) * s0 + ket(&d, &[2]) * s1, ket(&d, &[1]) * s0 + ket(&d, &[3]) * s1])?;
    let amp = alpha.sqrt() * (1.0 - beta) - (1.0 - alpha).sqrt() * beta;
    Ok((vec![r.clone(), r], amp * amp))
}

fn q24_blocks(gamma: f64) -> (ComplexMatrix, ComplexMatrix) {
    let d = [4];
    let q1 = projector_from(&d, &[ket(&d, &[0]), ket(&d, &[1])]);
    let (sg, sh) = (cr(gamma.sqrt()), cr((1.0 - gamma).sqrt()));
    let eta = [ket(&d, &[0]) * sg + ket(&d, &[2]) * sh, ket(&d, &[1]) * sg + ket(&d, &[3]) * sh];
    (q1, projector_from(&d, &eta))
}

/// Blocks `Q₁` and `Q₂(γ)` of the `2⊗4` family.
pub fn q24_block_operators(gamma: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    Ok(q24_blocks(gamma))
}

/// `|0⟩⟨0| ⊗ Q₁ + |1⟩⟨1| ⊗ Q₂(γ)` on `2⊗4`.
pub fn q24_projector(gamma: f64) -> Result<ZooEntry> {
    let (q1, q2) = q24_block_operators(gamma)?;
    let e0 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
    let e1 = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
    let q = &crate::linalg::tensor_product(&e0, &q1) + &crate::linalg::tensor_product(&e1, &q2);
    let mut e = ZooEntry::new("q24", q).param("gamma", gamma);
    let s = gamma.sqrt();
    e.known_exact_range = Some(RealInterval::new(0.5 * (1.0 - s), 0.5 * (1.0 + s)));
    e.family = CodeFamily::Q24 { gamma };
    Ok(e)
}

/// `Z(γ) = (Q₁ + Q₂(γ))/2`, whose rank-2 range is the `2⊗4` product range.
pub fn z24_entry(gamma: f64) -> Result<ZooEntry> {
    let (q1, q2) = q24_block_operators(gamma)?;
    let z = (&q1 + &q2).scale(cr(0.5));
    let mut e = ZooEntry::new("z24", z).param("gamma", gamma);
    let s = gamma.sqrt();
    e.known_exact_range = Some(RealInterval::new(0.5 * (1.0 - s), 0.5 * (1.0 + s)));
    Ok(e)
}

/// Value reached by the ξ-code at angle β: `½(1 + √γ cosβ / √(1 − γ sin²β))`.
pub fn q24_code_value(gamma: f64, beta: f64) -> f64 {
    let den = (1.0 - gamma * beta.sin().powi(2)).max(0.0).sqrt();
    let s = if den <= 1e-15 { 0.0 } else { gamma.sqrt() * beta.cos() / den };
    0.5 * (1.0 + s.clamp(-1.0, 1.0))
}

/// `I₂ ⊗ span{√λ|0⟩ + e^{iβ}√(1−λ)|2⟩, √λ|1⟩ + e^{iβ}√(1−λ)|3⟩}` and its value.
pub fn q24_code(gamma: f64, beta: f64) -> Result<(Vec<Projector>, f64)> {
    q24_block_operators(gamma)?;
    let lam = q24_code_value(gamma, beta);
    let d = [4];
    let ph = C64::from_polar((1.0 - lam).sqrt(), beta);
    let xi = [ket(&d, &[0]) * cr(lam.sqrt()) + ket(&d, &[2]) * ph, ket(&d, &[1]) * cr(lam.sqrt()) + ket(&d, &[3]) * ph];
    Ok((vec![Projector::leading(2, 2)?, Projector::span(&d, &xi)?], lam))
}

/// The two rank-2 noise projections on `3⊗3` with and without a `2⊗2` decoherence-free code.
pub fn dfs_examples_d3() -> (ZooEntry, ZooEntry) {
    let dims = [3, 3];
    let h = cr(FRAC_1_SQRT_2);
    let pair = |a: [usize; 2], b: [usize; 2]| (ket(&dims, &a) + ket(&dims, &b)) * h;
    let q1 = projector_from(&dims, &[pair([1, 1], [2, 2]), pair([1, 0], [2, 1])]);
    let q2 = projector_from(&dims, &[pair([0, 2], [1, 0]), pair([0, 1], [2, 0])]);

    let mut first = ZooEntry::new("dfs1", q1);
    first.claim = Some("no 2x2 decoherence-free code".into());
    let mut second = ZooEntry::new("dfs2", q2);
    second.claim = Some("2x2 decoherence-free code exists".into());
    let r = Projector::coordinate(3, &[1, 2]).expect("coordinate projector");
    second.fixed_code = Some(vec![r.clone(), r]);
    second.family = CodeFamily::Fixed;
    (first, second)
}

/// `U = I − 2q`.
pub fn noise_from_projection(q: &Projector) -> ComplexMatrix {
    &ComplexMatrix::identity(q.dims()) - &q.matrix().scale(cr(2.0))
}

/// Random-unitary channel `ρ ↦ pρ + (1−p)UρU†`.
#[derive(Clone, Debug)]
pub struct BucChannel {
    p: f64,
    u: ComplexMatrix,
}

impl BucChannel {
    pub fn new(p: f64, u: ComplexMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
        }
        let deviation = u.unitarity_error();
        if deviation > tol::STRUCTURAL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { p, u })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        buc_apply(self, rho)
    }
}

fn check_state(rho: &ComplexMatrix) -> Result<()> {
    let deviation = rho.hermiticity_error();
    if deviation > tol::STRUCTURAL {
        return Err(Error::NotHermitian { deviation });
    }
    let tr = rho.trace();
    if (tr - cr(1.0)).norm() > tol::KL {
        return Err(Error::InvalidArgument(format!("state trace {tr} is not 1")));
    }
    let min = hermitian_eigen_unchecked(rho.hermitian_part().matrix()).eigenvalues[0];
    if min < -tol::KL {
        return Err(Error::InvalidArgument(format!("state has negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

pub fn buc_apply(ch: &BucChannel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.side() != ch.u.side() {
        return Err(Error::DimensionMismatch(format!(
            "state of side {} for a channel of side {}",
            rho.side(),
            ch.u.side()
        )));
    }
    check_state(rho)?;
    Ok(&rho.scale(cr(ch.p)) + &rho.conjugate_by(&ch.u).scale(cr(1.0 - ch.p)))
}

fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = hermitian_eigen_unchecked(&((m + m.adjoint()) * cr(0.5)));
    // eigenvalues at round-off level are zero; their square roots would not be
    let floor = 1e-14 * eig.eigenvalues.iter().fold(1.0f64, |a, &x| a.max(x.abs()));
    let roots =
        DVector::from_iterator(eig.len(), eig.eigenvalues.iter().map(|&x| cr(if x > floor { x.sqrt() } else { 0.0 })));
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
pub fn state_fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let s = psd_sqrt(rho.matrix());
    let inner = psd_sqrt(&(&s * sigma.matrix() * &s));
    inner.trace().re.powi(2)
}

/// Eigenvector mixing used by [`reverse_build_d4`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenVariant {
    /// Discrete Fourier mixing of the Bell-state triples.
    Bell,
    /// Real-orthogonal mixing with a free phase per triple.
    Alternative,
}

fn omega() -> C64 {
    C64::from_polar(1.0, TAU / 3.0)
}

fn mixing_matrix(variant: EigenVariant, phase: f64) -> DMatrix<C64> {
    let s3 = 3f64.sqrt();
    match variant {
        EigenVariant::Bell => {
            let w = omega();
            DMatrix::from_fn(3, 3, |i, j| w.powu((i * j) as u32) / cr(s3))
        }
        EigenVariant::Alternative => {
            let e = C64::from_polar(1.0, phase);
            let (r2, r6) = (2f64.sqrt(), 6f64.sqrt());
            DMatrix::from_row_slice(
                3,
                3,
                &[
                    cr(1.0),
                    e * r2,
                    cr(0.0),
                    cr(1.0),
                    -e * (r2 / 2.0),
                    e * (r6 / 2.0),
                    cr(1.0),
                    -e * (r2 / 2.0),
                    -e * (r6 / 2.0),
                ],
            ) / cr(s3)
        }
    }
}

fn phases_distinct(phases: &[f64]) -> Option<(usize, usize)> {
    for i in 0..phases.len() {
        for j in i + 1..phases.len() {
            if (C64::from_polar(1.0, phases[i]) - C64::from_polar(1.0, phases[j])).norm() <= tol::RECONSTRUCTION {
                return Some((i, j));
            }
        }
    }
    None
}

/// Certify the code obtained from fixed eigenvectors and hull cells, then
/// wrap it as a product code after checking it equals `R ⊗ R′`.
fn certify_reverse(
    u: &ComplexMatrix,
    eig: &SpectralDecomposition<C64>,
    hull: &HullDecomposition,
    parties: Vec<Projector>,
) -> Result<ProductCode> {
    let joint = build_compression_code_from(u, eig, hull)?;
    let product = parties[0].tensor(&parties[1]);
    let gap = joint.matrix().max_abs_diff(product.matrix());
    if gap > tol::KL {
        return Err(Error::Decomposition(format!("synthesized code is {gap:.3e} away from a product")));
    }
    ProductCode::certify(u, parties)
}

/// 16×16 unitary with four rotated cube-root triples and four free phases,
/// together with the product code `P₀₁ ⊗ P₀₁` compressing it to 0.
pub fn reverse_build_d4(
    xi: &[f64; 8],
    variant: EigenVariant,
    alphas: Option<[f64; 4]>,
) -> Result<(ComplexMatrix, ProductCode)> {
    if let Some((i, j)) = phases_distinct(&xi[..4]) {
        return Err(Error::Constraint {
            name: "distinct-triples",
            detail: format!("xi_{} and xi_{} coincide", i + 1, j + 1),
        });
    }
    let dims = [4, 4];
    let h = cr(FRAC_1_SQRT_2);
    let bell = [
        (ket(&dims, &[0, 0]) + ket(&dims, &[1, 1])) * h,
        (ket(&dims, &[0, 0]) - ket(&dims, &[1, 1])) * h,
        (ket(&dims, &[0, 1]) + ket(&dims, &[1, 0])) * h,
        (ket(&dims, &[0, 1]) - ket(&dims, &[1, 0])) * h,
    ];
    let mut seed_vectors = bell.to_vec();
    seed_vectors.extend((0..16).map(|i| basis_vector(16, i)));
    let basis = orthonormalize(&seed_vectors, 1e-8);
    debug_assert_eq!(basis.len(), 16);
    // basis[0..4] are the Bell states; basis[4..16] complete the space
    let mut vectors: Vec<DVector<C64>> = Vec::with_capacity(16);
    let mut values: Vec<C64> = Vec::with_capacity(16);
    let alphas = alphas.unwrap_or([0.0; 4]);
    let w = omega();
    for m in 0..4 {
        let trio = [&basis[m], &basis[4 + 2 * m], &basis[5 + 2 * m]];
        let f = mixing_matrix(variant, alphas[m]);
        for i in 0..3 {
            vectors.push((0..3).fold(DVector::zeros(16), |acc, j| acc + trio[j] * f[(i, j)]));
            values.push(C64::from_polar(1.0, xi[m]) * w.powu(i as u32));
        }
    }
    for k in 0..4 {
        vectors.push(basis[12 + k].clone());
        values.push(C64::from_polar(1.0, xi[4 + k]));
    }
    let eig = SpectralDecomposition { eigenvalues: values, eigenvectors: DMatrix::from_columns(&vectors) };
    let u = ComplexMatrix::new(dims.to_vec(), eig.reconstruct())?;
    let hull = HullDecomposition {
        lambda: cr(0.0),
        subsets: (0..4).map(|m| vec![3 * m, 3 * m + 1, 3 * m + 2]).collect(),
        weights: vec![vec![1.0 / 3.0; 3]; 4],
    };
    let p01 = Projector::coordinate(4, &[0, 1])?;
    let code = certify_reverse(&u, &eig, &hull, vec![p01.clone(), p01])?;
    Ok((u, code))
}

/// Orthonormal discrete Fourier vectors `f₁ = (1, ω, ω²)/√3`,
/// `f₂ = (1, ω², ω)/√3`, `f₃ = (1, 1, 1)/√3`.
pub fn fourier_vectors() -> [DVector<C64>; 3] {
    let w = omega();
    let s = cr(1.0 / 3f64.sqrt());
    [
        DVector::from_vec(vec![cr(1.0), w, w * w]) * s,
        DVector::from_vec(vec![cr(1.0), w * w, w]) * s,
        DVector::from_vec(vec![cr(1.0), cr(1.0), cr(1.0)]) * s,
    ]
}

fn contains_origin(points: [C64; 3]) -> bool {
    let cross = |a: C64, b: C64| a.re * b.im - a.im * b.re;
    let [a, b, c] = points;
    let s = [cross(a, b), cross(b, c), cross(c, a)];
    let eps = 1e-9;
    s.iter().all(|&x| x >= -eps) || s.iter().all(|&x| x <= eps)
}

/// Checks the ordering, antipodal pairing and hull constraints on nine phases.
pub fn check_d3_phases(alpha: &[f64; 9]) -> Result<()> {
    for i in 0..8 {
        if alpha[i + 1] <= alpha[i] {
            return Err(Error::Constraint { name: "ascending", detail: format!("alpha_{} >= alpha_{}", i + 1, i + 2) });
        }
    }
    const PAIRS: [(usize, usize, &str); 4] =
        [(0, 4, "pair-1-5"), (1, 5, "pair-2-6"), (2, 6, "pair-3-7"), (3, 8, "pair-4-9")];
    for (i, j, name) in PAIRS {
        let off = (alpha[i] - (alpha[j] - PI)).abs();
        if off > tol::RECONSTRUCTION {
            return Err(Error::Constraint {
                name,
                detail: format!("alpha_{} differs from alpha_{} - pi by {off:.3e}", i + 1, j + 1),
            });
        }
    }
    let pts = [alpha[3], alpha[4], alpha[8]].map(|t| C64::from_polar(1.0, t));
    if !contains_origin(pts) {
        return Err(Error::Constraint {
            name: "hull-4-5-9",
            detail: "0 is not in the convex hull of the eigenvalues 4, 5 and 9".into(),
        });
    }
    Ok(())
}

/// 9×9 unitary from Fourier-basis products, with the symmetric code
/// `(I − |f₃⟩⟨f₃|) ⊗ (I − |f₃⟩⟨f₃|)` compressing it to 0.
///
/// Eigenvectors are paired `(1,5), (2,6), (3,7), (4,9)` so that each pair of
/// eigenvalues is antipodal; `φ₈ = f₃ ⊗ f₃` carries the free phase.
pub fn reverse_build_d3(alpha: &[f64; 9]) -> Result<(ComplexMatrix, ProductCode)> {
    check_d3_phases(alpha)?;
    let f = fourier_vectors();
    let h = cr(FRAC_1_SQRT_2);
    let ff = |a: usize, b: usize| kron(&f[a], &f[b]);
    // (code product, partner product) for the pairs (1,5), (2,6), (3,7), (4,9)
    let pairs = [((0, 0), (2, 1)), ((0, 1), (1, 2)), ((1, 0), (0, 2)), ((1, 1), (2, 0))];
    let mut phi: Vec<DVector<C64>> = vec![DVector::zeros(9); 9];
    for (k, &((a, b), (c2, d2))) in pairs.iter().enumerate() {
        let partner = if k < 3 { k + 4 } else { 8 };
        phi[k] = (ff(a, b) + ff(c2, d2)) * h;
        phi[partner] = (ff(a, b) - ff(c2, d2)) * h;
    }
    phi[7] = ff(2, 2);
    let eig = SpectralDecomposition {
        eigenvalues: alpha.iter().map(|&t| C64::from_polar(1.0, t)).collect(),
        eigenvectors: DMatrix::from_columns(&phi),
    };
    let u = ComplexMatrix::new(vec![3, 3], eig.reconstruct())?;
    let hull = HullDecomposition {
        lambda: cr(0.0),
        subsets: vec![vec![0, 4], vec![1, 5], vec![2, 6], vec![3, 8]],
        weights: vec![vec![0.5, 0.5]; 4],
    };
    let r = Projector::span(&[3], &[f[0].clone(), f[1].clone()])?;
    let code = certify_reverse(&u, &eig, &hull, vec![r.clone(), r])?;
    Ok((u, code))
}

/// Eight phases in `[0, 2π)` with the first four well separated.
pub fn random_d4_phases(seed: u64) -> [f64; 8] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let xi: [f64; 8] = std::array::from_fn(|_| rng.random_range(0.0..TAU));
        let separated = (0..4)
            .all(|i| (i + 1..4).all(|j| (C64::from_polar(1.0, xi[i]) - C64::from_polar(1.0, xi[j])).norm() > 1e-3));
        if separated {
            return xi;
        }
    }
}

/// Four free phases for the alternative eigenvector mixing.
pub fn random_d4_alphas(seed: u64) -> [f64; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    std::array::from_fn(|_| rng.random_range(0.0..TAU))
}

/// Nine ascending phases satisfying the pairing constraints of [`reverse_build_d3`].
pub fn random_d3_phases(seed: u64) -> [f64; 9] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let a1 = rng.random_range(0.0..PI);
        let mut offs: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..PI));
        offs.sort_by(f64::total_cmp);
        let gaps_ok = offs[0] > 1e-3 && offs[1] - offs[0] > 1e-3 && offs[2] - offs[1] > 1e-3 && PI - offs[2] > 1e-3;
        if !gaps_ok {
            continue;
        }
        let a = [a1, a1 + offs[0], a1 + offs[1], a1 + offs[2]];
        let t = rng.random_range(0.1..0.9);
        let a7 = a[2] + PI;
        let a9 = a[3] + PI;
        return [a[0], a[1], a[2], a[3], a[0] + PI, a[1] + PI, a7, a7 + t * (a9 - a7), a9];
    }
}

/// Evenly spread phases used in documentation and tests.
pub fn d3_example_phases() -> [f64; 9] {
    let a = [0.1, 0.6, 1.2, 1.9];
    [a[0], a[1], a[2], a[3], a[0] + PI, a[1] + PI, a[2] + PI, a[2] + PI + 0.35, a[3] + PI]
}

/// Projector `q` of rank `l` and code `r` of rank `k` with `r q r = γ r`, in
/// the block form `k × [[γ, s], [s, 1−γ]] ⊕ I_{l−k} ⊕ 0_extra`
/// (`s = √(γ(1−γ))`), rotated by a seeded Haar unitary.
pub fn block_form_pair(k: usize, l: usize, gamma: f64, extra: usize, seed: u64) -> Result<(Projector, Projector)> {
    if k == 0 || l < k {
        return Err(Error::InvalidArgument(format!("block form needs 1 <= k <= l, got k={k}, l={l}")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let n = 2 * k + (l - k) + extra;
    let s = (gamma * (1.0 - gamma)).sqrt();
    let mut q = DMatrix::<C64>::zeros(n, n);
    let mut r = DMatrix::<C64>::zeros(n, n);
    for b in 0..k {
        let (i, j) = (2 * b, 2 * b + 1);
        q[(i, i)] = cr(gamma);
        q[(i, j)] = cr(s);
        q[(j, i)] = cr(s);
        q[(j, j)] = cr(1.0 - gamma);
        r[(i, i)] = cr(1.0);
    }
    for t in 2 * k..2 * k + (l - k) {
        q[(t, t)] = cr(1.0);
    }
    let w = haar_unitary(n, &mut ChaCha8Rng::seed_from_u64(seed));
    let rot =
        |m: DMatrix<C64>| -> Result<Projector> { validate_projector(&ComplexMatrix::from_matrix(m)?.conjugate_by(&w)) };
    Ok((rot(q)?, rot(r)?))
}

/// Zoo lookup by label; parameters are `alpha`, `gamma` or `d` as the family needs.
pub fn by_label(label: &str, params: &BTreeMap<String, f64>) -> Result<ZooEntry> {
    let get = |name: &str| {
        params
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("zoo entry {label} needs parameter {name}")))
    };
    match label {
        "swap" => {
            let d = get("d")?;
            if d.fract() != 0.0 || d < 2.0 {
                return Err(Error::InvalidArgument(format!("swap dimension must be an integer >= 2, got {d}")));
            }
            swap_entry(d as usize)
        }
        "example1" => example1_projector(get("alpha")?),
        "example2" => Ok(example2_projector()),
        "q44" => q44_projector(get("alpha")?),
        "q24" => q24_projector(get("gamma")?),
        "z24" => z24_entry(get("gamma")?),
        "dfs1" => Ok(dfs_examples_d3().0),
        "dfs2" => Ok(dfs_examples_d3().1),
        other => Err(Error::InvalidArgument(format!("unknown zoo label {other}; known: {}", LABELS.join(", ")))),
    }
}

pub const LABELS: [&str; 8] = ["swap", "example1", "example2", "q44", "q24", "z24", "dfs1", "dfs2"];
