use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;
use prodrange::io::read_operator;
use prodrange::zoo::{self, ZooEntry};
use prodrange::{validate_projector, ComplexMatrix, Projector, C64};

/// Where the operator comes from: a zoo label with parameters, or a JSON file.
#[derive(Args, Clone, Debug)]
pub struct SourceArgs {
    /// Named operator from the built-in zoo.
    #[arg(long, conflicts_with = "file")]
    pub zoo: Option<String>,

    /// Operator JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,

    /// Zoo parameter as name=value; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,

    /// Local dimension, shorthand for --param d=<D>.
    #[arg(long)]
    pub d: Option<usize>,
}

pub struct Loaded {
    pub label: String,
    pub operator: ComplexMatrix,
    pub entry: Option<ZooEntry>,
}

pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s}"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("parameter {k} is not a number: {v}"))?;
    Ok((k.trim().to_string(), v))
}

/// `2x3` → (2, 3).
pub fn parse_ranks(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected MxN, got {s}"))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad rank {t} in {s}"));
    Ok((p(a)?, p(b)?))
}

impl SourceArgs {
    pub fn param_map(&self) -> BTreeMap<String, f64> {
        let mut map: BTreeMap<String, f64> = self.params.iter().cloned().collect();
        if let Some(d) = self.d {
            map.insert("d".into(), d as f64);
        }
        map
    }

    pub fn load(&self) -> anyhow::Result<Loaded> {
        self.load_with(&self.param_map())
    }

    pub fn load_with(&self, params: &BTreeMap<String, f64>) -> anyhow::Result<Loaded> {
        match (&self.zoo, &self.file) {
            (Some(label), _) => {
                let entry = zoo::by_label(label, params)?;
                Ok(Loaded { label: label.clone(), operator: entry.operator.clone(), entry: Some(entry) })
            }
            (None, Some(path)) => {
                let operator = read_operator(path).with_context(|| format!("loading {}", path.display()))?;
                Ok(Loaded { label: path.display().to_string(), operator, entry: None })
            }
            (None, None) => bail!("give an operator with --zoo <label> or --file <path>"),
        }
    }
}

impl Loaded {
    /// Noise projection `q`: the operator itself, or `(I − U)/2` for a Hermitian unitary `U`.
    pub fn noise_projector(&self) -> anyhow::Result<Projector> {
        if let Ok(q) = validate_projector(&self.operator) {
            return Ok(q);
        }
        let u = &self.operator;
        if u.is_hermitian(1e-10) && u.is_unitary(1e-10) {
            let q = (&ComplexMatrix::identity(u.dims()) - u).scale(C64::new(0.5, 0.0));
            return Ok(validate_projector(&q)?);
        }
        bail!("{} is neither a projector nor a Hermitian unitary", self.label)
    }
}
