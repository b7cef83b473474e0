//! JSON formats for operators and product codes.
//!
//! Operator file: `{"dims":[dA,dB,...],"matrix":[[[re,im],...],...]}`, row-major.
//! Code file: `{"parties":[<operator>, ...]}` with one projector per party.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{validate_projector, ComplexMatrix, Projector, C64};

#[derive(Serialize, Deserialize)]
struct OperatorFile {
    dims: Vec<usize>,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct CodeFile {
    parties: Vec<OperatorFile>,
}

impl From<&ComplexMatrix> for OperatorFile {
    fn from(m: &ComplexMatrix) -> Self {
        let n = m.side();
        let matrix = (0..n).map(|i| (0..n).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect()).collect();
        Self { dims: m.dims().to_vec(), matrix }
    }
}

impl TryFrom<OperatorFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(f: OperatorFile) -> Result<Self> {
        let n = f.matrix.len();
        if let Some((i, row)) = f.matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Format(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        let data = DMatrix::from_fn(n, n, |i, j| {
            let [re, im] = f.matrix[i][j];
            C64::new(re, im)
        });
        ComplexMatrix::new(f.dims, data)
    }
}

pub fn operator_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&OperatorFile::from(m)).expect("operator serialization")
}

pub fn operator_from_json(s: &str) -> Result<ComplexMatrix> {
    serde_json::from_str::<OperatorFile>(s)?.try_into()
}

pub fn read_operator(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    operator_from_json(&read(path.as_ref())?)
}

pub fn write_operator(path: impl AsRef<Path>, m: &ComplexMatrix) -> Result<()> {
    write(path.as_ref(), &operator_to_json(m))
}

pub fn code_to_json(parties: &[Projector]) -> String {
    let f = CodeFile { parties: parties.iter().map(|p| OperatorFile::from(p.matrix())).collect() };
    serde_json::to_string(&f).expect("code serialization")
}

/// Parses a code file and validates each party as a projector.
pub fn code_from_json(s: &str) -> Result<Vec<Projector>> {
    let f: CodeFile = serde_json::from_str(s)?;
    if f.parties.is_empty() {
        return Err(Error::Format("code file lists no parties".into()));
    }
    f.parties.into_iter().map(|p| validate_projector(&ComplexMatrix::try_from(p)?)).collect()
}

pub fn read_code(path: impl AsRef<Path>) -> Result<Vec<Projector>> {
    code_from_json(&read(path.as_ref())?)
}

pub fn write_code(path: impl AsRef<Path>, parties: &[Projector]) -> Result<()> {
    write(path.as_ref(), &code_to_json(parties))
}

/// Decimal rendering rounded to 12 significant digits, locale independent.
pub fn csv_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("float round trip");
    format!("{rounded}")
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, s: &str) -> Result<()> {
    std::fs::write(path, s).map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_haar_unitary;

    #[test]
    fn operator_round_trip_is_exact() {
        let u = random_haar_unitary(4, 2).with_dims(&[2, 2]).unwrap();
        let back = operator_from_json(&operator_to_json(&u)).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn rejects_mismatched_dims() {
        let s = r#"{"dims":[2,2],"matrix":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(matches!(operator_from_json(s), Err(Error::DimensionMismatch(_))));
        let ragged = r#"{"dims":[2],"matrix":[[[1,0]],[[0,0],[1,0]]]}"#;
        assert!(matches!(operator_from_json(ragged), Err(Error::Format(_))));
    }

    #[test]
    fn csv_digits() {
        assert_eq!(csv_number(0.1), "0.1");
        assert_eq!(csv_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(csv_number(2.0), "2");
        assert_eq!(csv_number(-0.065741454089), "-0.065741454089");
    }

    #[test]
    fn code_round_trip() {
        let p = Projector::leading(3, 2).unwrap();
        let parties = vec![p.clone(), p];
        let back = code_from_json(&code_to_json(&parties)).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].rank(), 2);
        assert!(code_from_json(r#"{"parties":[]}"#).is_err());
    }
}
