use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use clap::{Args, ValueEnum};
use num_complex::Complex64;
use prodrange::io::{csv_number, write_code, write_operator};
use prodrange::localopt::{local_c_range_bound, local_c_range_bound_symmetric};
use prodrange::product::{
    convex_combination_bound, gamma_from_lambda, outer_bound_scan, single_bound_scan, swap_range, verify_product_kl,
};
use prodrange::spectral::{
    code_entropy, compression_residual, delta_k_membership, delta_k_membership_hermitian, hermitian_rank_k_range,
};
use prodrange::zoo::{self, EigenVariant};
use prodrange::{io, BoundMethod, ComplexMatrix, KlVerdict, LocalOptConfig, RealInterval};
use serde_json::{json, Value};

use crate::source::{parse_ranks, Loaded, SourceArgs};

/// Non-error outcome of a command; `Negative` maps to exit code 2.
pub enum Status {
    Success,
    Negative,
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Success
    } else {
        Status::Negative
    }
}

fn emit(value: &Value, out: Option<&Path>, outputs: &mut Vec<String>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    print_stdout(&format!("{text}\n"));
    if let Some(path) = out {
        write_text(path, &(text + "\n"), outputs)?;
    }
    Ok(())
}

/// Prints without panicking when the reader has gone away.
fn print_stdout(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn write_text(path: &Path, text: &str, outputs: &mut Vec<String>) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    outputs.push(path.display().to_string());
    Ok(())
}

fn interval_json(i: &RealInterval) -> Value {
    serde_json::to_value(i).expect("interval serializes")
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected RE or RE,IM, got {s}")),
    }
}

#[derive(Args)]
pub struct RangeArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Code rank.
    #[arg(long, default_value_t = 2)]
    pub k: usize,

    /// Look for a Δ_k certificate at this value (RE or RE,IM).
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: Option<Complex64>,

    /// Product ranks MxN; answered only where the product range is known exactly.
    #[arg(long, value_parser = parse_ranks)]
    pub product: Option<(usize, usize)>,

    /// Write the certified code projector here (with --lambda).
    #[arg(long)]
    pub code_out: Option<PathBuf>,

    /// Also write the JSON result here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn range(a: &RangeArgs, outputs: &mut Vec<String>) -> anyhow::Result<Status> {
    let src = a.source.load()?;
    if let Some((m, n)) = a.product {
        return product_range(&src, m, n, a.out.as_deref(), outputs);
    }
    let op = &src.operator;
    if let Some(lambda) = a.lambda {
        let cert = if op.is_hermitian(1e-10) {
            ensure!(lambda.im == 0.0, "a Hermitian operator has only real compressions");
            delta_k_membership_hermitian(op, a.k, lambda.re)?
        } else {
            delta_k_membership(op, a.k, lambda)?
        };
        let Some(cert) = cert else {
            emit(
                &json!({"operator": src.label, "k": a.k, "lambda": complex_json(lambda), "certified": false}),
                a.out.as_deref(),
                outputs,
            )?;
            return Ok(Status::Negative);
        };
        if let Some(path) = &a.code_out {
            write_operator(path, cert.code.matrix())?;
            outputs.push(path.display().to_string());
        }
        let v = json!({
            "operator": src.label,
            "k": a.k,
            "lambda": complex_json(cert.lambda),
            "certified": true,
            "subsets": cert.subsets,
            "weights": cert.weights,
            "residual": compression_residual(op, &cert.code, cert.lambda),
        });
        emit(&v, a.out.as_deref(), outputs)?;
        return Ok(Status::Success);
    }
    let interval = hermitian_rank_k_range(op, a.k)?;
    emit(
        &json!({"operator": src.label, "k": a.k, "method": "hermitian-rank-k", "interval": interval_json(&interval)}),
        a.out.as_deref(),
        outputs,
    )?;
    Ok(status(!interval.is_empty()))
}

fn product_range(
    src: &Loaded,
    m: usize,
    n: usize,
    out: Option<&Path>,
    outputs: &mut Vec<String>,
) -> anyhow::Result<Status> {
    let entry = src.entry.as_ref();
    if let Some(d) = entry.filter(|e| e.label == "swap").and_then(|e| e.parameters.get("d")) {
        let sr = swap_range(*d as usize, m, n)?;
        let v = json!({
            "operator": src.label,
            "ranks": [m, n],
            "method": "analytic",
            "interval": interval_json(&sr.interval),
            "trace_bound": interval_json(&sr.trace_bound),
        });
        emit(&v, out, outputs)?;
        return Ok(status(!sr.interval.is_empty()));
    }
    match entry.and_then(|e| e.known_exact_range.as_ref()) {
        Some(exact) if (m, n) == (2, 2) => {
            emit(
                &json!({"operator": src.label, "ranks": [m, n], "method": "known", "interval": interval_json(exact)}),
                out,
                outputs,
            )?;
            Ok(status(!exact.is_empty()))
        }
        _ => bail!("no exact product range is known for {} at {m}x{n}; use `bound` for outer bounds", src.label),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Intersection of both partial-trace eigenvalue bounds.
    Scan,
    Theorem2,
    Theorem3,
    /// Local C-numerical-range bound.
    Cnum,
    /// Local C-numerical-range bound with equal local unitaries.
    CnumSymm,
    /// Hermitian rank-k range of a weighted sum of operators.
    Convex,
}

#[derive(Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    #[arg(long, value_enum, default_value_t = Method::Scan)]
    pub method: Method,

    /// Product ranks MxN.
    #[arg(long, value_parser = parse_ranks, default_value = "2x2")]
    pub ranks: (usize, usize),

    /// γ grid step for scans.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,

    #[arg(long, default_value_t = 64)]
    pub restarts: usize,

    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,

    /// Further operator files for --method convex.
    #[arg(long = "with")]
    pub with: Vec<PathBuf>,

    /// Comma-separated convex weights (default uniform).
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,

    /// Rank for --method convex.
    #[arg(long, default_value_t = 2)]
    pub k: usize,

    /// Write the γ feasibility trace as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn optimizer_config(
    seed: u64,
    restarts: usize,
    max_iter: usize,
    ranks: (usize, usize),
) -> anyhow::Result<LocalOptConfig> {
    let mut cfg = LocalOptConfig::default().with_seed(seed).with_restarts(restarts).with_ranks(ranks.0, ranks.1);
    cfg.max_iterations = max_iter;
    cfg.validate()?;
    Ok(cfg)
}

pub fn bound(a: &BoundArgs, seed: u64, outputs: &mut Vec<String>) -> anyhow::Result<Status> {
    let src = a.source.load()?;
    let (m, n) = a.ranks;
    let report = match a.method {
        Method::Scan | Method::Theorem2 | Method::Theorem3 => {
            let q = src.noise_projector()?;
            let rep = match a.method {
                Method::Scan => outer_bound_scan(&q, m, n, a.step)?,
                Method::Theorem2 => single_bound_scan(&q, m, n, a.step, BoundMethod::Theorem2)?,
                _ => single_bound_scan(&q, m, n, a.step, BoundMethod::Theorem3)?,
            };
            rep.with_label(src.label.clone())
        }
        Method::Cnum | Method::CnumSymm => {
            let cfg = optimizer_config(seed, a.restarts, a.max_iter, a.ranks)?;
            let b = if a.method == Method::Cnum {
                local_c_range_bound(&src.operator, &cfg)?
            } else {
                local_c_range_bound_symmetric(&src.operator, &cfg)?
            };
            let v = json!({
                "operator": src.label,
                "method": "c-range",
                "ranks": [m, n],
                "seed": seed,
                "restarts": a.restarts,
                "interval": interval_json(&b.interval()),
                "bound": b,
            });
            emit(&v, a.out.as_deref(), outputs)?;
            return Ok(status(!b.interval().is_empty()));
        }
        Method::Convex => {
            let ops = convex_operators(&src, &a.with)?;
            let weights =
                if a.weights.is_empty() { vec![1.0 / ops.len() as f64; ops.len()] } else { a.weights.clone() };
            convex_combination_bound(&ops, &weights, a.k)?.with_label(src.label.clone())
        }
    };
    if let Some(path) = &a.csv {
        write_text(path, &report.to_csv(), outputs)?;
    }
    let v: Value = serde_json::from_str(&report.to_json())?;
    emit(&v, a.out.as_deref(), outputs)?;
    Ok(status(!report.interval.is_empty()))
}

fn convex_operators(src: &Loaded, with: &[PathBuf]) -> anyhow::Result<Vec<ComplexMatrix>> {
    if with.is_empty() {
        if let Some(e) = src.entry.as_ref().filter(|e| e.label == "q24") {
            let (q1, q2) = zoo::q24_block_operators(e.parameters["gamma"])?;
            return Ok(vec![q1, q2]);
        }
        bail!("--method convex needs further operators via --with (or --zoo q24 for its blocks)");
    }
    let mut ops = vec![src.operator.clone()];
    for p in with {
        ops.push(io::read_operator(p).with_context(|| format!("loading {}", p.display()))?);
    }
    Ok(ops)
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Code JSON file with one projector per party.
    #[arg(long)]
    pub code: PathBuf,

    /// Channel probability for the code entropy.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn verify(a: &VerifyArgs, outputs: &mut Vec<String>) -> anyhow::Result<Status> {
    let src = a.source.load()?;
    let code = io::read_code(&a.code).with_context(|| format!("loading {}", a.code.display()))?;
    let verdict = verify_product_kl(&src.operator, &code)?;
    let v = match &verdict {
        KlVerdict::Certified { lambda, residual } => {
            let entropy = if lambda.norm() <= 1.0 + 1e-12 {
                Some(code_entropy(a.p, *lambda / lambda.norm().max(1.0))?)
            } else {
                None
            };
            json!({
                "operator": src.label,
                "certified": true,
                "lambda": complex_json(*lambda),
                "gamma": gamma_from_lambda(lambda.re),
                "p": a.p,
                "entropy_bits": entropy,
                "residual": residual,
            })
        }
        KlVerdict::Failed { residual, row, col } => json!({
            "operator": src.label,
            "certified": false,
            "residual": residual,
            "worst_entry": [row, col],
        }),
    };
    if let KlVerdict::Failed { residual, .. } = &verdict {
        eprintln!("not a product code: KL residual {residual:.3e}");
    }
    emit(&v, a.out.as_deref(), outputs)?;
    Ok(status(verdict.is_certified()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepMethod {
    Scan,
    Cnum,
    CnumSymm,
    Exact,
}

impl SweepMethod {
    fn column(&self) -> &'static str {
        match self {
            Self::Scan => "scan",
            Self::Cnum => "cnum",
            Self::CnumSymm => "cnum_symm",
            Self::Exact => "exact",
        }
    }
}

#[derive(Args)]
pub struct SweepArgs {
    /// Zoo label.
    #[arg(long)]
    pub zoo: String,

    /// Parameter to vary.
    #[arg(long)]
    pub vary: String,

    #[arg(long)]
    pub start: f64,

    #[arg(long)]
    pub stop: f64,

    #[arg(long, default_value_t = 0.01)]
    pub step: f64,

    /// Comma-separated subset of scan, cnum, cnum-symm, exact.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "scan,exact")]
    pub methods: Vec<SweepMethod>,

    /// Fixed zoo parameters as name=value.
    #[arg(long = "param", value_parser = crate::source::parse_param)]
    pub params: Vec<(String, f64)>,

    #[arg(long, value_parser = parse_ranks, default_value = "2x2")]
    pub ranks: (usize, usize),

    /// γ grid step for the scan column.
    #[arg(long, default_value_t = 0.01)]
    pub scan_step: f64,

    #[arg(long, default_value_t = 64)]
    pub restarts: usize,

    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,

    /// CSV destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn grid(start: f64, stop: f64, step: f64) -> anyhow::Result<Vec<f64>> {
    ensure!(step > 0.0 && step.is_finite(), "step must be positive, got {step}");
    ensure!(start < stop, "start {start} must be below stop {stop}");
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    let mut g: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).collect();
    // land exactly on stop when the step divides the span
    if let Some(last) = g.last_mut() {
        if (stop - *last).abs() <= 1e-9 * step {
            *last = stop;
        }
    }
    Ok(g)
}

pub fn sweep(a: &SweepArgs, seed: u64, outputs: &mut Vec<String>) -> anyhow::Result<Status> {
    ensure!(!a.methods.is_empty(), "at least one method is needed");
    let values = grid(a.start, a.stop, a.step)?;
    let cfg = optimizer_config(seed, a.restarts, a.max_iter, a.ranks)?;
    let (m, n) = a.ranks;
    let source = SourceArgs { zoo: Some(a.zoo.clone()), file: None, params: a.params.clone(), d: None };

    let mut csv = a.vary.clone();
    for method in &a.methods {
        let _ = write!(csv, ",{0}_lo,{0}_hi", method.column());
    }
    csv.push('\n');
    for &t in &values {
        let mut params = source.param_map();
        params.insert(a.vary.clone(), t);
        let src = source.load_with(&params)?;
        let _ = write!(csv, "{}", csv_number(t));
        for method in &a.methods {
            let interval = match method {
                SweepMethod::Scan => Some(outer_bound_scan(&src.noise_projector()?, m, n, a.scan_step)?.interval),
                SweepMethod::Cnum => Some(local_c_range_bound(&src.operator, &cfg)?.interval()),
                SweepMethod::CnumSymm => Some(local_c_range_bound_symmetric(&src.operator, &cfg)?.interval()),
                SweepMethod::Exact => src.entry.as_ref().and_then(|e| e.known_exact_range),
            };
            match interval.and_then(|i| i.bounds()) {
                Some((lo, hi)) => {
                    let _ = write!(csv, ",{},{}", csv_number(lo), csv_number(hi));
                }
                None => csv.push_str(",,"),
            }
        }
        csv.push('\n');
    }
    match &a.out {
        Some(path) => write_text(path, &csv, outputs)?,
        None => print_stdout(&csv),
    }
    Ok(Status::Success)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Bell,
    Alternative,
}

#[derive(Args)]
pub struct ReverseArgs {
    /// Local dimension, 3 or 4.
    #[arg(long)]
    pub d: usize,

    /// Comma-separated eigenphases (8 for d=4, 9 for d=3).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phases: Vec<f64>,

    /// Draw the phases from the seed instead.
    #[arg(long, conflicts_with = "phases")]
    pub random: bool,

    /// Eigenvector mixing for d=4.
    #[arg(long, value_enum, default_value_t = Variant::Bell)]
    pub variant: Variant,

    /// Comma-separated mixing phases for the alternative variant (4 values).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alphas: Vec<f64>,

    /// Write the unitary here.
    #[arg(long)]
    pub unitary_out: Option<PathBuf>,

    /// Write the code here.
    #[arg(long)]
    pub code_out: Option<PathBuf>,
}

fn fixed<const N: usize>(v: &[f64], what: &str) -> anyhow::Result<[f64; N]> {
    v.try_into().map_err(|_| anyhow::anyhow!("{what} needs {N} values, got {}", v.len()))
}

pub fn reverse(a: &ReverseArgs, seed: u64, outputs: &mut Vec<String>) -> anyhow::Result<Status> {
    ensure!(a.random || !a.phases.is_empty(), "give --phases or --random");
    let (u, code) = match a.d {
        4 => {
            let xi = if a.random { zoo::random_d4_phases(seed) } else { fixed::<8>(&a.phases, "--phases")? };
            let (variant, alphas) = match a.variant {
                Variant::Bell => (EigenVariant::Bell, None),
                Variant::Alternative if a.alphas.is_empty() => {
                    (EigenVariant::Alternative, Some(zoo::random_d4_alphas(seed)))
                }
                Variant::Alternative => (EigenVariant::Alternative, Some(fixed::<4>(&a.alphas, "--alphas")?)),
            };
            zoo::reverse_build_d4(&xi, variant, alphas)?
        }
        3 => {
            let alpha = if a.random { zoo::random_d3_phases(seed) } else { fixed::<9>(&a.phases, "--phases")? };
            zoo::reverse_build_d3(&alpha)?
        }
        d => bail!("reverse construction exists for d = 3 and d = 4, not {d}"),
    };
    if let Some(path) = &a.unitary_out {
        write_operator(path, &u)?;
        outputs.push(path.display().to_string());
    }
    if let Some(path) = &a.code_out {
        write_code(path, code.parties())?;
        outputs.push(path.display().to_string());
    }
    let verdict = verify_product_kl(&u, code.parties())?;
    let zero = verdict.lambda().is_some_and(|l| l.norm() <= 1e-8);
    let v = json!({
        "d": a.d,
        "seed": a.random.then_some(seed),
        "certified": zero,
        "lambda": verdict.lambda().map(complex_json),
        "residual": verdict.residual(),
        "symmetric": code.is_symmetric(1e-10),
    });
    emit(&v, None, outputs)?;
    Ok(status(zero))
}

#[derive(Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Operator destination.
    #[arg(long)]
    pub out: PathBuf,

    /// Also write the attaining code at this family parameter.
    #[arg(long)]
    pub code_out: Option<PathBuf>,

    /// Family parameter for --code-out.
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
}

pub fn export(a: &ExportArgs, outputs: &mut Vec<String>) -> anyhow::Result<Status> {
    let src = a.source.load()?;
    write_operator(&a.out, &src.operator)?;
    outputs.push(a.out.display().to_string());
    if let Some(path) = &a.code_out {
        let code = src
            .entry
            .as_ref()
            .map(|e| e.attaining_code(a.beta))
            .transpose()?
            .flatten()
            .with_context(|| format!("{} has no attaining code", src.label))?;
        write_code(path, code.parties())?;
        outputs.push(path.display().to_string());
    }
    Ok(Status::Success)
}
