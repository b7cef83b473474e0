//! Product codes, the partial-trace eigenvalue bounds and structural reductions.
//!
//! Values reported by the scanners are compressions of the projector `q`
//! itself, i.e. `γ` with `(R⊗R′) q (R⊗R′) = γ (R⊗R′)`. For the noise unitary
//! `U = I − 2q` the same code has `λ = 1 − 2γ`.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::RealInterval;
use crate::io::csv_number;
use crate::linalg::{
    cr, eigenvalues_descending, max_abs, orthonormalize, partial_trace, tensor_product, tensor_product_all,
    ComplexMatrix, Projector, C64,
};
use crate::spectral::hermitian_rank_k_range;
use crate::tol;

/// `γ = (1 − λ)/2`.
pub fn gamma_from_lambda(lambda: f64) -> f64 {
    0.5 * (1.0 - lambda)
}

/// `λ = 1 − 2γ`.
pub fn lambda_from_gamma(gamma: f64) -> f64 {
    1.0 - 2.0 * gamma
}

/// Per-party projectors with the common compression value they certify.
#[derive(Clone, Debug)]
pub struct ProductCode {
    parties: Vec<Projector>,
    lambda: C64,
}

impl ProductCode {
    /// Wraps a code without checking it against an operator.
    pub fn new(parties: Vec<Projector>, lambda: C64) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::InvalidArgument("a product code needs at least one party".into()));
        }
        if parties.iter().all(|p| p.rank() < 2) {
            return Err(Error::Constraint {
                name: "rank-proviso",
                detail: "at least one party must have rank >= 2".into(),
            });
        }
        Ok(Self { parties, lambda })
    }

    /// Verifies the code on `a` and records the certified value.
    pub fn certify(a: &ComplexMatrix, parties: Vec<Projector>) -> Result<Self> {
        match verify_product_kl(a, &parties)? {
            KlVerdict::Certified { lambda, .. } => Self::new(parties, lambda),
            KlVerdict::Failed { residual, row, col } => Err(Error::Constraint {
                name: "knill-laflamme",
                detail: format!("residual {residual:.3e} at entry ({row}, {col})"),
            }),
        }
    }

    pub fn parties(&self) -> &[Projector] {
        &self.parties
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.parties.iter().map(Projector::rank).collect()
    }

    /// `R₁ ⊗ R₂ ⊗ …`.
    pub fn joint(&self) -> Projector {
        let (first, rest) = self.parties.split_first().expect("non-empty code");
        rest.iter().fold(first.clone(), |acc, p| acc.tensor(p))
    }

    /// All parties carry the same projector.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let first = self.parties[0].matrix();
        self.parties.iter().all(|p| p.side() == first.side() && p.matrix().max_abs_diff(first) <= tol)
    }
}

/// Outcome of a Knill–Laflamme check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum KlVerdict {
    Certified { lambda: C64, residual: f64 },
    Failed { residual: f64, row: usize, col: usize },
}

impl KlVerdict {
    pub fn lambda(&self) -> Option<C64> {
        match self {
            Self::Certified { lambda, .. } => Some(*lambda),
            Self::Failed { .. } => None,
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            Self::Certified { residual, .. } | Self::Failed { residual, .. } => *residual,
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, Self::Certified { .. })
    }
}

fn check_code_dims(a: &ComplexMatrix, code: &[Projector]) -> Result<()> {
    if code.len() != a.parties() {
        return Err(Error::DimensionMismatch(format!(
            "{} code parties for an operator with {} factors",
            code.len(),
            a.parties()
        )));
    }
    for (i, (p, &d)) in code.iter().zip(a.dims()).enumerate() {
        if p.side() != d {
            return Err(Error::DimensionMismatch(format!(
                "party {i} projector acts on dimension {} but the factor has {d}",
                p.side()
            )));
        }
        if p.rank() == 0 {
            return Err(Error::InvalidArgument(format!("party {i} projector has rank 0")));
        }
    }
    Ok(())
}

/// `λ` read from the first product basis vector of the code, then
/// `‖P a P − λ P‖_max` checked globally.
fn compress_and_check(a: &DMatrix<C64>, p: &DMatrix<C64>, probe: &DVector<C64>) -> KlVerdict {
    let lambda = probe.dotc(&(a * probe));
    let r = p * a * p - p * lambda;
    let (mut residual, mut row, mut col) = (0.0, 0, 0);
    for j in 0..r.ncols() {
        for i in 0..r.nrows() {
            let v = r[(i, j)].norm();
            if v > residual {
                (residual, row, col) = (v, i, j);
            }
        }
    }
    if residual <= tol::KL {
        KlVerdict::Certified { lambda, residual }
    } else {
        KlVerdict::Failed { residual, row, col }
    }
}

/// Checks `(⊗Rᵢ) a (⊗Rᵢ) = λ (⊗Rᵢ)` for any number of parties.
pub fn verify_product_kl(a: &ComplexMatrix, code: &[Projector]) -> Result<KlVerdict> {
    check_code_dims(a, code)?;
    let joint = tensor_product_all(&code.iter().map(Projector::matrix).collect::<Vec<_>>())?;
    let probe = code
        .iter()
        .map(|p| p.range_basis().column(0).into_owned())
        .reduce(|acc, v| acc.kronecker(&v))
        .expect("non-empty code");
    Ok(compress_and_check(a.matrix(), joint.matrix(), &probe))
}

/// Outcome of a common-range check over several operators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum CommonVerdict {
    Certified { lambda: C64, residual: f64 },
    Failed { operator: usize, residual: f64 },
}

impl CommonVerdict {
    pub fn lambda(&self) -> Option<C64> {
        match self {
            Self::Certified { lambda, .. } => Some(*lambda),
            Self::Failed { .. } => None,
        }
    }
}

/// One `λ` with `R opᵢ R = λ R` for every operator, or the first violating index.
pub fn verify_common(code: &Projector, ops: &[ComplexMatrix]) -> Result<CommonVerdict> {
    if ops.is_empty() {
        return Err(Error::InvalidArgument("no operators given".into()));
    }
    if let Some(op) = ops.iter().find(|op| op.side() != code.side()) {
        return Err(Error::DimensionMismatch(format!(
            "operator of side {} against a code of side {}",
            op.side(),
            code.side()
        )));
    }
    let probe = code.range_basis().column(0).into_owned();
    let lambda = probe.dotc(&(ops[0].matrix() * &probe));
    let p = code.matrix().matrix();
    let mut worst: f64 = 0.0;
    for (i, op) in ops.iter().enumerate() {
        let r = max_abs(&(p * op.matrix() * p - p * lambda));
        if r > tol::KL {
            return Ok(CommonVerdict::Failed { operator: i, residual: r });
        }
        worst = worst.max(r);
    }
    Ok(CommonVerdict::Certified { lambda, residual: worst })
}

/// Spectral data of a bipartite projector used by the eigenvalue bounds.
#[derive(Clone, Debug)]
pub struct ReducedSpectra {
    pub dims: (usize, usize),
    pub rank: usize,
    /// Eigenvalues of `tr_B q`, descending.
    pub x: Vec<f64>,
    /// Eigenvalues of `tr_A q`, descending.
    pub y: Vec<f64>,
}

impl ReducedSpectra {
    pub fn of(q: &Projector) -> Result<Self> {
        let dims = q.dims();
        if dims.len() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "the eigenvalue bounds need a bipartite operator, got dims {dims:?}"
            )));
        }
        let x = eigenvalues_descending(partial_trace(q.matrix(), 0)?.matrix());
        let y = eigenvalues_descending(partial_trace(q.matrix(), 1)?.matrix());
        Ok(Self { dims: (dims[0], dims[1]), rank: q.rank(), x, y })
    }

    /// Spectra of `I − q`.
    pub fn complement(&self) -> Self {
        let (da, db) = self.dims;
        let flip = |v: &[f64], d: usize| v.iter().rev().map(|&t| d as f64 - t).collect();
        Self { dims: self.dims, rank: da * db - self.rank, x: flip(&self.x, db), y: flip(&self.y, da) }
    }

    fn side_lhs(vals: &[f64], m: usize, target: f64) -> f64 {
        let r = vals.iter().filter(|&&v| v > tol::RANK).count();
        let head: f64 = vals.iter().take(m).map(|&v| (v - target).abs()).sum();
        let tail: f64 = vals.iter().take(r).skip(m).sum();
        head + tail
    }

    /// Both inequalities for value `gamma` with ranks `(m, n)`:
    /// `Σ_{i≤M}|xᵢ−Nγ| + Σ_{M<i≤r} xᵢ ≤ MN√((1−γ)(1+3γ)) + l − MN` and its mirror.
    pub fn bound_holds(&self, m: usize, n: usize, gamma: f64) -> bool {
        let mn = (m * n) as f64;
        let rhs = mn * ((1.0 - gamma) * (1.0 + 3.0 * gamma)).max(0.0).sqrt() + self.rank as f64 - mn;
        let lx = Self::side_lhs(&self.x, m, n as f64 * gamma);
        let ly = Self::side_lhs(&self.y, n, m as f64 * gamma);
        lx <= rhs + tol::FEASIBILITY && ly <= rhs + tol::FEASIBILITY
    }

    fn check_ranks(&self, m: usize, n: usize) -> Result<()> {
        if m == 0 || n == 0 || m > self.dims.0 || n > self.dims.1 {
            return Err(Error::InvalidArgument(format!("ranks ({m}, {n}) do not fit dims {:?}", self.dims)));
        }
        Ok(())
    }

    pub fn theorem2(&self, m: usize, n: usize, gamma: f64) -> bool {
        self.bound_holds(m, n, gamma)
    }

    /// The same bound on `I − q` at `1 − γ`.
    pub fn theorem3(&self, m: usize, n: usize, gamma: f64) -> bool {
        self.complement().bound_holds(m, n, 1.0 - gamma)
    }
}

/// Necessary condition for `γ ∈ Λ_{M⊗N}(q)` from the spectra of `tr_B q` and `tr_A q`.
pub fn theorem2_feasible(q: &Projector, m: usize, n: usize, gamma: f64) -> Result<bool> {
    let s = ReducedSpectra::of(q)?;
    s.check_ranks(m, n)?;
    Ok(s.theorem2(m, n, gamma))
}

/// Necessary condition for `γ ∈ Λ_{M⊗N}(q)` from the complement `I − q`.
pub fn theorem3_feasible(q: &Projector, m: usize, n: usize, gamma: f64) -> Result<bool> {
    let s = ReducedSpectra::of(q)?;
    s.check_ranks(m, n)?;
    Ok(s.theorem3(m, n, gamma))
}

/// Which technique produced a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    Theorem2,
    Theorem3,
    Combined,
    ConvexCombination,
    CRange,
    ClosedForm,
}

impl BoundMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Theorem2 => "theorem2",
            Self::Theorem3 => "theorem3",
            Self::Combined => "combined",
            Self::ConvexCombination => "convex-combination",
            Self::CRange => "c-range",
            Self::ClosedForm => "closed-form",
        }
    }
}

/// Interval with the method that produced it and, for scanners, the γ grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub interval: RealInterval,
    pub method: BoundMethod,
    pub gamma_trace: Vec<(f64, bool)>,
    pub label: Option<String>,
    pub ranks: Option<(usize, usize)>,
}

impl BoundReport {
    pub fn new(interval: RealInterval, method: BoundMethod) -> Self {
        Self { interval, method, gamma_trace: Vec::new(), label: None, ranks: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn feasible_at(&self, gamma: f64) -> Option<bool> {
        self.gamma_trace.iter().find(|(g, _)| (g - gamma).abs() < 1e-12).map(|&(_, f)| f)
    }

    /// Two columns `gamma,feasible` with feasibility as 0/1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma,feasible\n");
        for &(g, f) in &self.gamma_trace {
            out.push_str(&csv_number(g));
            out.push(',');
            out.push(if f { '1' } else { '0' });
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization")
    }
}

impl Serialize for BoundReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let gamma: Vec<f64> = self.gamma_trace.iter().map(|t| t.0).collect();
        let feasible: Vec<bool> = self.gamma_trace.iter().map(|t| t.1).collect();
        let mut st = s.serialize_struct("BoundReport", 6)?;
        st.serialize_field("interval", &self.interval)?;
        st.serialize_field("method", &self.method)?;
        st.serialize_field("gamma", &gamma)?;
        st.serialize_field("feasible", &feasible)?;
        st.serialize_field("label", &self.label)?;
        st.serialize_field("ranks", &self.ranks)?;
        st.end()
    }
}

/// `γ` grid over `[0, 1]` with both endpoints included exactly.
pub fn gamma_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.01 + 1e-15) {
        return Err(Error::InvalidArgument(format!("scan step must lie in (0, 0.01], got {step}")));
    }
    let count = (1.0 / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|i| i as f64 * step).collect();
    let last = grid.last_mut().expect("non-empty grid");
    if (*last - 1.0).abs() < 1e-9 {
        *last = 1.0;
    } else {
        grid.push(1.0);
    }
    Ok(grid)
}

fn scan(q: &Projector, m: usize, n: usize, step: f64, method: BoundMethod) -> Result<BoundReport> {
    let s = ReducedSpectra::of(q)?;
    s.check_ranks(m, n)?;
    let c = s.complement();
    let grid = gamma_grid(step)?;
    let trace: Vec<(f64, bool)> = grid
        .iter()
        .map(|&g| {
            let t2 = || s.bound_holds(m, n, g);
            let t3 = || c.bound_holds(m, n, 1.0 - g);
            let ok = match method {
                BoundMethod::Theorem2 => t2(),
                BoundMethod::Theorem3 => t3(),
                _ => t2() && t3(),
            };
            (g, ok)
        })
        .collect();
    let first = trace.iter().find(|t| t.1).map(|t| t.0);
    let last = trace.iter().rev().find(|t| t.1).map(|t| t.0);
    let interval = match (first, last) {
        (Some(a), Some(b)) => RealInterval::new((a - step).max(0.0), (b + step).min(1.0)),
        _ => RealInterval::empty(),
    };
    Ok(BoundReport { interval, method, gamma_trace: trace, label: None, ranks: Some((m, n)) })
}

/// Intersects both eigenvalue bounds on a `γ` grid and widens the feasible
/// hull by one step on each side.
pub fn outer_bound_scan(q: &Projector, m: usize, n: usize, step: f64) -> Result<BoundReport> {
    scan(q, m, n, step, BoundMethod::Combined)
}

/// Scanner restricted to one of the two bounds.
pub fn single_bound_scan(q: &Projector, m: usize, n: usize, step: f64, method: BoundMethod) -> Result<BoundReport> {
    match method {
        BoundMethod::Theorem2 | BoundMethod::Theorem3 | BoundMethod::Combined => scan(q, m, n, step, method),
        other => Err(Error::InvalidArgument(format!("{} is not a scanner method", other.as_str()))),
    }
}

/// `Λ_k(Σ αᵢ opᵢ)`, an outer bound on the common rank-k range of the operators.
pub fn convex_combination_bound(ops: &[ComplexMatrix], weights: &[f64], k: usize) -> Result<BoundReport> {
    if ops.is_empty() || ops.len() != weights.len() {
        return Err(Error::InvalidArgument(format!("{} operators with {} weights", ops.len(), weights.len())));
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidArgument("weights must be non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > tol::STRUCTURAL {
        return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
    }
    let side = ops[0].side();
    if ops.iter().any(|o| o.side() != side) {
        return Err(Error::DimensionMismatch("operators of different sides".into()));
    }
    let mut sum = ComplexMatrix::zeros(ops[0].dims());
    for (op, &w) in ops.iter().zip(weights) {
        sum = &sum + &op.scale(cr(w));
    }
    let interval = hermitian_rank_k_range(&sum, k)?;
    Ok(BoundReport::new(interval, BoundMethod::ConvexCombination))
}

/// Diagonal blocks `Qᵢ` of `q = Σᵢ |i⟩⟨i| ⊗ Qᵢ`.
#[derive(Clone, Debug)]
pub struct BlockReduction {
    pub blocks: Vec<ComplexMatrix>,
    /// Number of blocks that are not zero.
    pub present: usize,
}

impl BlockReduction {
    /// Every block is non-zero, so the product range equals the common range of the blocks.
    pub fn is_complete(&self) -> bool {
        self.present == self.blocks.len()
    }
}

/// Splits a projector that is block diagonal in party A's canonical basis.
pub fn projector_block_reduction(q: &Projector, d1: usize) -> Result<BlockReduction> {
    let n = q.side();
    if d1 == 0 || !n.is_multiple_of(d1) {
        return Err(Error::DimensionMismatch(format!("side {n} is not a multiple of {d1}")));
    }
    let d2 = n / d1;
    let m = q.matrix().matrix();
    let mut blocks = Vec::with_capacity(d1);
    for i in 0..d1 {
        for j in 0..d1 {
            let b = m.view((i * d2, j * d2), (d2, d2));
            if i != j {
                let off = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if off > tol::STRUCTURAL {
                    return Err(Error::Constraint {
                        name: "block-diagonal",
                        detail: format!("block ({i}, {j}) has entry of size {off:.3e}"),
                    });
                }
            }
        }
        blocks.push(ComplexMatrix::new(vec![d2], m.view((i * d2, i * d2), (d2, d2)).into_owned())?);
    }
    let present = blocks.iter().filter(|b| b.max_abs() > tol::STRUCTURAL).count();
    Ok(BlockReduction { blocks, present })
}

/// `{xy : x ∈ a, y ∈ b}`.
pub fn minkowski_interval_product(a: &RealInterval, b: &RealInterval) -> RealInterval {
    a.product(b)
}

/// Replaces one party's projector by a seeded rank-`sub_rank` sub-projector of its range.
pub fn restrict_code(code: &ProductCode, party: usize, sub_rank: usize, seed: u64) -> Result<ProductCode> {
    let parties = code.parties();
    if party >= parties.len() {
        return Err(Error::InvalidParty { party, parties: parties.len() });
    }
    let p = &parties[party];
    if sub_rank == 0 || sub_rank >= p.rank() {
        return Err(Error::Precondition(format!("sub-rank {sub_rank} must lie in 1..{}", p.rank())));
    }
    let basis = p.range_basis();
    let mut order: Vec<usize> = (0..basis.ncols()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let vecs: Vec<DVector<C64>> = order[..sub_rank].iter().map(|&i| basis.column(i).into_owned()).collect();
    let mut next = parties.to_vec();
    next[party] = Projector::span(p.dims(), &vecs)?;
    ProductCode::new(next, code.lambda())
}

/// Product range of the swap on `C^d ⊗ C^d`.
#[derive(Clone, Debug)]
pub struct SwapRange {
    pub interval: RealInterval,
    /// Orthogonal-support code attaining 0 when the range is `{0}`.
    pub code: Option<Vec<Projector>>,
    /// `[0, min(1/M, 1/N)]` from the trace of the compressed swap.
    pub trace_bound: RealInterval,
}

fn swap_args(d: usize, m: usize, n: usize) -> Result<()> {
    if d < 2 || m == 0 || n == 0 || m > d || n > d {
        return Err(Error::InvalidArgument(format!("invalid swap setting d={d}, ranks ({m}, {n})")));
    }
    if m < 2 && n < 2 {
        return Err(Error::Constraint { name: "rank-proviso", detail: "one rank must be >= 2".into() });
    }
    Ok(())
}

/// `Λ_{M⊗N}(V_d)`: `{0}` when `M + N ≤ d`, empty otherwise.
pub fn swap_range(d: usize, m: usize, n: usize) -> Result<SwapRange> {
    swap_args(d, m, n)?;
    let trace_bound = RealInterval::new(0.0, (1.0 / m as f64).min(1.0 / n as f64));
    if m + n > d {
        return Ok(SwapRange { interval: RealInterval::empty(), code: None, trace_bound });
    }
    let r = Projector::coordinate(d, &(0..m).collect::<Vec<_>>())?;
    let rp = Projector::coordinate(d, &(m..m + n).collect::<Vec<_>>())?;
    Ok(SwapRange { interval: RealInterval::singleton(0.0), code: Some(vec![r, rp]), trace_bound })
}

/// Symmetric variant with equal projectors on both parties; always empty.
pub fn swap_range_symmetric(d: usize, m: usize) -> Result<SwapRange> {
    swap_args(d, m, m)?;
    Ok(SwapRange { interval: RealInterval::empty(), code: None, trace_bound: RealInterval::new(0.0, 1.0 / m as f64) })
}

/// Unitary on `C^d` that maps `range(from)` onto `range(to)`, both of equal rank.
pub fn aligning_unitary(from: &Projector, to: &Projector) -> Result<ComplexMatrix> {
    if from.side() != to.side() || from.rank() != to.rank() {
        return Err(Error::DimensionMismatch("projectors differ in side or rank".into()));
    }
    let d = from.side();
    let complete = |p: &Projector| -> DMatrix<C64> {
        let mut vecs: Vec<DVector<C64>> = p.range_basis().column_iter().map(|c| c.into_owned()).collect();
        vecs.extend((0..d).map(|i| crate::linalg::basis_vector(d, i)));
        let basis = orthonormalize(&vecs, 1e-8);
        DMatrix::from_columns(&basis[..d])
    };
    let w = complete(to) * complete(from).adjoint();
    ComplexMatrix::new(vec![d], w)
}

/// Moves a bipartite code `(R, R′)` on `a` to the equal-projector code
/// `(R, R)` on `(I ⊗ W) a (I ⊗ W†)` where `W` maps `range(R′)` onto `range(R)`.
pub fn symmetrize_code(a: &ComplexMatrix, code: &[Projector]) -> Result<(ComplexMatrix, Vec<Projector>)> {
    if code.len() != 2 || a.dims().len() != 2 || a.dims()[0] != a.dims()[1] {
        return Err(Error::DimensionMismatch("needs a bipartite operator on equal factors".into()));
    }
    let w = aligning_unitary(&code[1], &code[0])?;
    let lift = tensor_product(&ComplexMatrix::identity(&[a.dims()[0]]), &w);
    Ok((a.conjugate_by(&lift), vec![code[0].clone(), code[0].clone()]))
}
