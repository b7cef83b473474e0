//! Optimization over pairs of local unitaries `U ⊗ V`.
//!
//! Every objective is a function of the rotated operator `Ã = W a W†` with
//! `W = U ⊗ V`, evaluated against the canonical product projector
//! `Π = P_M ⊗ P_N`; the corresponding code is `W† Π W`. Descent runs on the
//! unitary group directly: a Hermitian direction `H` moves `U` to `e^{itH} U`,
//! with Armijo backtracking on `t`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::RealInterval;
use crate::linalg::{cr, expi_hermitian, haar_unitary, max_abs, ComplexMatrix, Projector, C64};
use crate::product::{BoundMethod, BoundReport};

/// Multistart optimizer controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalOptConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub objective_tolerance: f64,
    pub seed: u64,
    pub ranks: (usize, usize),
}

impl Default for LocalOptConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iterations: 2000,
            step_tolerance: 1e-10,
            objective_tolerance: 1e-12,
            seed: 0,
            ranks: (2, 2),
        }
    }
}

impl LocalOptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if !(self.step_tolerance > 0.0 && self.objective_tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_ranks(mut self, m: usize, n: usize) -> Self {
        self.ranks = (m, n);
        self
    }
}

/// Heuristic outer bound `[λ↑, λ↓]` from the local C-numerical range.
#[derive(Clone, Debug)]
pub struct OptimizedBound {
    pub lambda_up: f64,
    pub lambda_down: f64,
    /// Local pair attaining `lambda_up`.
    pub argmin: (ComplexMatrix, ComplexMatrix),
    /// Local pair attaining `lambda_down`.
    pub argmax: (ComplexMatrix, ComplexMatrix),
    pub restart_minima: Vec<f64>,
    pub restart_maxima: Vec<f64>,
    pub symmetric: bool,
}

pub const BOUND_NOTE: &str = "heuristic outer bound (optimizer-converged)";

impl OptimizedBound {
    pub fn interval(&self) -> RealInterval {
        RealInterval::new(self.lambda_up, self.lambda_down)
    }

    pub fn to_report(&self) -> BoundReport {
        BoundReport::new(self.interval(), BoundMethod::CRange)
    }
}

fn matrix_entries(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    m.matrix().row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

impl Serialize for OptimizedBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("OptimizedBound", 8)?;
        st.serialize_field("lambda_up", &self.lambda_up)?;
        st.serialize_field("lambda_down", &self.lambda_down)?;
        st.serialize_field("argmin", &[matrix_entries(&self.argmin.0), matrix_entries(&self.argmin.1)])?;
        st.serialize_field("argmax", &[matrix_entries(&self.argmax.0), matrix_entries(&self.argmax.1)])?;
        st.serialize_field("restart_minima", &self.restart_minima)?;
        st.serialize_field("restart_maxima", &self.restart_maxima)?;
        st.serialize_field("symmetric", &self.symmetric)?;
        st.serialize_field("note", BOUND_NOTE)?;
        st.end()
    }
}

#[derive(Clone, Copy, Debug)]
enum Objective {
    /// `sign · Re tr(Π Ã) / MN`.
    CRange { sign: f64 },
    /// `‖Π Ã Π − λ̃ Π‖_F²`.
    Distance { target: C64 },
    /// `‖Π Ã Π − μ Π‖_F²` with the best scalar `μ = tr(Π Ã)/MN`.
    Scalar,
}

struct Problem<'a> {
    a: &'a DMatrix<C64>,
    da: usize,
    db: usize,
    pi: DMatrix<C64>,
    mn: f64,
    symmetric: bool,
    objective: Objective,
}

fn ptrace_b(m: &DMatrix<C64>, da: usize, db: usize) -> DMatrix<C64> {
    DMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum())
}

fn ptrace_a(m: &DMatrix<C64>, da: usize, db: usize) -> DMatrix<C64> {
    DMatrix::from_fn(db, db, |k, l| (0..da).map(|i| m[(i * db + k, i * db + l)]).sum())
}

fn frob2(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Local pair `(U, V)`; `V` is ignored in the symmetric case.
#[derive(Clone)]
struct Point {
    u: DMatrix<C64>,
    v: DMatrix<C64>,
}

struct Run {
    value: f64,
    point: Point,
}

impl<'a> Problem<'a> {
    fn new(a: &'a ComplexMatrix, m: usize, n: usize, symmetric: bool, objective: Objective) -> Result<Self> {
        let dims = a.dims();
        if dims.len() != 2 {
            return Err(Error::DimensionMismatch(format!("needs a bipartite operator, got dims {dims:?}")));
        }
        let (da, db) = (dims[0], dims[1]);
        if m == 0 || n == 0 || m > da || n > db {
            return Err(Error::InvalidArgument(format!("ranks ({m}, {n}) do not fit dims {dims:?}")));
        }
        if symmetric && (da != db || m != n) {
            return Err(Error::InvalidArgument("symmetric optimization needs equal factors and ranks".into()));
        }
        let pi = Projector::leading(da, m)?.tensor(&Projector::leading(db, n)?).matrix().matrix().clone();
        Ok(Self { a: a.matrix(), da, db, pi, mn: (m * n) as f64, symmetric, objective })
    }

    fn rotated(&self, p: &Point) -> DMatrix<C64> {
        let v = if self.symmetric { &p.u } else { &p.v };
        let w = p.u.kronecker(v);
        &w * self.a * w.adjoint()
    }

    fn compressed(&self, at: &DMatrix<C64>) -> DMatrix<C64> {
        &self.pi * at * &self.pi
    }

    /// Objective value and the matrix `E` with `df = Re tr(E† dÃ)`.
    fn eval(&self, at: &DMatrix<C64>, with_grad: bool) -> (f64, Option<DMatrix<C64>>) {
        match self.objective {
            Objective::CRange { sign } => {
                let f = sign * (&self.pi * at).trace().re / self.mn;
                (f, with_grad.then(|| &self.pi * cr(sign / self.mn)))
            }
            Objective::Distance { target } => {
                let r = self.compressed(at) - &self.pi * target;
                (frob2(&r), with_grad.then(|| r * cr(2.0)))
            }
            Objective::Scalar => {
                let c = self.compressed(at);
                let mu = c.trace() / self.mn;
                let r = c - &self.pi * mu;
                (frob2(&r), with_grad.then(|| r * cr(2.0)))
            }
        }
    }

    fn value(&self, p: &Point) -> f64 {
        self.eval(&self.rotated(p), false).0
    }

    /// Value and Riemannian gradients for `U` and `V` (one combined gradient when symmetric).
    fn value_grad(&self, p: &Point) -> (f64, DMatrix<C64>, DMatrix<C64>) {
        let at = self.rotated(p);
        let (f, e) = self.eval(&at, true);
        let e_adj = e.expect("gradient requested").adjoint();
        let comm = (&at * &e_adj - &e_adj * &at) * C64::i();
        let gk = (&comm + comm.adjoint()) * cr(0.5);
        let gu = ptrace_b(&gk, self.da, self.db);
        let gv = ptrace_a(&gk, self.da, self.db);
        if self.symmetric {
            (f, gu + gv, DMatrix::zeros(self.db, self.db))
        } else {
            (f, gu, gv)
        }
    }

    fn step(&self, p: &Point, gu: &DMatrix<C64>, gv: &DMatrix<C64>, t: f64) -> Point {
        let u = expi_hermitian(&(gu * cr(-t))) * &p.u;
        let v = if self.symmetric { u.clone() } else { expi_hermitian(&(gv * cr(-t))) * &p.v };
        Point { u, v }
    }

    fn descend(&self, start: Point, cfg: &LocalOptConfig) -> Run {
        const ARMIJO: f64 = 1e-4;
        let mut p = start;
        let (mut f, mut gu, mut gv) = self.value_grad(&p);
        let mut t = 1.0;
        for _ in 0..cfg.max_iterations {
            let g2 = frob2(&gu) + frob2(&gv);
            let gnorm = g2.sqrt();
            if gnorm == 0.0 {
                break;
            }
            let accepted = loop {
                if t * gnorm < cfg.step_tolerance {
                    break None;
                }
                let cand = self.step(&p, &gu, &gv, t);
                let fc = self.value(&cand);
                if fc <= f - ARMIJO * t * g2 {
                    break Some((cand, fc));
                }
                t *= 0.5;
            };
            let Some((cand, fc)) = accepted else { break };
            let drop = f - fc;
            p = cand;
            (f, gu, gv) = self.value_grad(&p);
            if drop < cfg.objective_tolerance {
                break;
            }
            t = (t * 2.0).min(1e3);
        }
        Run { value: f, point: p }
    }

    fn start(&self, seed: u64, restart: usize) -> Point {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let u = haar_unitary(self.da, &mut rng).into_matrix();
        let v = if self.symmetric { u.clone() } else { haar_unitary(self.db, &mut rng).into_matrix() };
        Point { u, v }
    }

    fn pair(&self, p: &Point) -> (ComplexMatrix, ComplexMatrix) {
        let wrap = |m: &DMatrix<C64>| ComplexMatrix::from_matrix(m.clone()).expect("square unitary");
        (wrap(&p.u), wrap(if self.symmetric { &p.u } else { &p.v }))
    }

    /// Code `W† Π W` at a point.
    fn code(&self, p: &Point) -> Result<Projector> {
        let v = if self.symmetric { &p.u } else { &p.v };
        let w = p.u.kronecker(v);
        let m = w.adjoint() * &self.pi * &w;
        crate::linalg::validate_projector(&ComplexMatrix::new(vec![self.da, self.db], m)?)
    }
}

fn best_of(runs: &[Run]) -> usize {
    // ties resolve to the lowest restart index
    (0..runs.len())
        .min_by(|&i, &j| runs[i].value.total_cmp(&runs[j].value).then(i.cmp(&j)))
        .expect("at least one restart")
}

fn c_range(a: &ComplexMatrix, cfg: &LocalOptConfig, symmetric: bool) -> Result<OptimizedBound> {
    cfg.validate()?;
    let (m, n) = cfg.ranks;
    let lo = Problem::new(a, m, n, symmetric, Objective::CRange { sign: 1.0 })?;
    let hi = Problem::new(a, m, n, symmetric, Objective::CRange { sign: -1.0 })?;
    let (mins, maxs): (Vec<Run>, Vec<Run>) = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let start = lo.start(cfg.seed, r);
            (lo.descend(start.clone(), cfg), hi.descend(start, cfg))
        })
        .unzip();
    let (imin, imax) = (best_of(&mins), best_of(&maxs));
    Ok(OptimizedBound {
        lambda_up: mins[imin].value,
        lambda_down: -maxs[imax].value,
        argmin: lo.pair(&mins[imin].point),
        argmax: hi.pair(&maxs[imax].point),
        restart_minima: mins.iter().map(|r| r.value).collect(),
        restart_maxima: maxs.iter().map(|r| -r.value).collect(),
        symmetric,
    })
}

/// Min and max of `Re tr[(U⊗V)(P_M⊗P_N)(U⊗V)† a]/(MN)` over local unitaries.
pub fn local_c_range_bound(a: &ComplexMatrix, cfg: &LocalOptConfig) -> Result<OptimizedBound> {
    c_range(a, cfg, false)
}

/// As [`local_c_range_bound`] with `V = U`.
pub fn local_c_range_bound_symmetric(a: &ComplexMatrix, cfg: &LocalOptConfig) -> Result<OptimizedBound> {
    c_range(a, cfg, true)
}

/// C-range objective and its gradients at a given pair, for checking the descent.
pub fn c_range_objective(
    a: &ComplexMatrix,
    m: usize,
    n: usize,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
) -> Result<(f64, DMatrix<C64>, DMatrix<C64>)> {
    let prob = Problem::new(a, m, n, false, Objective::CRange { sign: 1.0 })?;
    Ok(prob.value_grad(&Point { u: u.matrix().clone(), v: v.matrix().clone() }))
}

/// Distance objective `‖Π Ã Π − λ̃ Π‖_F²` and its gradients, for checking the descent.
pub fn distance_objective(
    a: &ComplexMatrix,
    lambda: C64,
    m: usize,
    n: usize,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
) -> Result<(f64, DMatrix<C64>, DMatrix<C64>)> {
    let prob = Problem::new(a, m, n, false, Objective::Distance { target: lambda })?;
    Ok(prob.value_grad(&Point { u: u.matrix().clone(), v: v.matrix().clone() }))
}

/// Best local pair found by the membership pretest.
#[derive(Clone, Debug)]
pub struct PretestOutcome {
    /// `‖Π Ã Π − λ̃ Π‖_max` at the best point.
    pub distance: f64,
    /// Frobenius distance at the same point.
    pub frobenius: f64,
    pub code: Projector,
    pub restart_distances: Vec<f64>,
}

/// Minimizes the distance of the compressed operator from `λ̃ Π` over local pairs.
///
/// The Frobenius norm is minimized (it is smooth) and the max-abs norm is
/// reported at the minimizer. A distance clearly above zero rejects
/// `λ̃ ∈ Λ_{M⊗N}(a)` up to optimizer convergence.
pub fn local_norm_pretest(
    a: &ComplexMatrix,
    lambda: C64,
    m: usize,
    n: usize,
    cfg: &LocalOptConfig,
) -> Result<PretestOutcome> {
    cfg.validate()?;
    let prob = Problem::new(a, m, n, false, Objective::Distance { target: lambda })?;
    let runs: Vec<Run> =
        (0..cfg.restarts).into_par_iter().map(|r| prob.descend(prob.start(cfg.seed, r), cfg)).collect();
    let dist = |p: &Point| max_abs(&(prob.compressed(&prob.rotated(p)) - &prob.pi * lambda));
    let restart_distances: Vec<f64> = runs.iter().map(|r| dist(&r.point)).collect();
    let best = (0..runs.len())
        .min_by(|&i, &j| restart_distances[i].total_cmp(&restart_distances[j]).then(i.cmp(&j)))
        .expect("at least one restart");
    Ok(PretestOutcome {
        distance: restart_distances[best],
        frobenius: runs[best].value.sqrt(),
        code: prob.code(&runs[best].point)?,
        restart_distances,
    })
}

fn compression_at(prob: &Problem, p: &Point, residual_tol: f64) -> Option<C64> {
    let c = prob.compressed(&prob.rotated(p));
    let lambda = c[(0, 0)];
    (max_abs(&(c - &prob.pi * lambda)) <= residual_tol).then_some(lambda)
}

/// Compression values of Haar-random product codes that pass the KL check.
pub fn sample_product_compressions(
    a: &ComplexMatrix,
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
    residual_tol: f64,
) -> Result<Vec<C64>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let prob = Problem::new(a, m, n, false, Objective::Scalar)?;
    Ok((0..samples).into_par_iter().filter_map(|r| compression_at(&prob, &prob.start(seed, r), residual_tol)).collect())
}

/// Like [`sample_product_compressions`], but every random start is first
/// driven towards a scalar compression by descent on `‖ΠÃΠ − μΠ‖_F²`.
pub fn refined_product_compressions(
    a: &ComplexMatrix,
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
    residual_tol: f64,
    cfg: &LocalOptConfig,
) -> Result<Vec<C64>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let prob = Problem::new(a, m, n, false, Objective::Scalar)?;
    // the objective is a squared residual, so the stopping drop must sit well below residual_tol²
    let mut cfg = cfg.clone();
    cfg.objective_tolerance = cfg.objective_tolerance.min(1e-2 * residual_tol * residual_tol);
    Ok((0..samples)
        .into_par_iter()
        .filter_map(|r| {
            let run = prob.descend(prob.start(seed, r), &cfg);
            compression_at(&prob, &run.point, residual_tol)
        })
        .collect())
}
