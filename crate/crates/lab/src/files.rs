use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mindisp_core::dsl::{parse_operator_str, DslError, DslErrorCode};
use mindisp_core::{DisplacementEstimate, Operator64, ProductPoint};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl OutputError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        OutputError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn csv(path: &Path, source: csv::Error) -> Self {
        OutputError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub fn parse_operator_file(path: impl AsRef<Path>) -> Result<Operator64, DslError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| DslError::new(DslErrorCode::Io, "", format!("{}: {e}", path.display())))?;
    parse_operator_str(&text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), OutputError> {
    let mut file = fs::File::create(path).map_err(|e| OutputError::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| OutputError::io(path, e))
}

fn coordinate_header(prefix: &[&str], dim: usize) -> Vec<String> {
    prefix
        .iter()
        .map(|s| s.to_string())
        .chain((1..=dim).map(|i| format!("x{i}")))
        .collect()
}

/// Rows `n, residual, x1, …, xd` with `xₙ` the iterate the residual was measured at.
pub fn write_residual_csv(path: &Path, rows: &[(usize, f64, Vec<f64>)]) -> Result<(), OutputError> {
    let dim = rows.first().map_or(0, |r| r.2.len());
    let mut w = csv::Writer::from_path(path).map_err(|e| OutputError::csv(path, e))?;
    w.write_record(coordinate_header(&["n", "residual"], dim))
        .map_err(|e| OutputError::csv(path, e))?;
    for (n, residual, x) in rows {
        let record = [n.to_string(), residual.to_string()]
            .into_iter()
            .chain(x.iter().map(f64::to_string));
        w.write_record(record).map_err(|e| OutputError::csv(path, e))?;
    }
    w.flush().map_err(|e| OutputError::io(path, e))
}

/// One row per part: `part, x1, …, xd`, parts numbered from 1.
pub fn write_tuple_csv(path: &Path, point: &ProductPoint<f64>) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| OutputError::csv(path, e))?;
    w.write_record(coordinate_header(&["part"], point.part_dim()))
        .map_err(|e| OutputError::csv(path, e))?;
    for (i, part) in point.parts().iter().enumerate() {
        let record = std::iter::once((i + 1).to_string()).chain(part.coords().iter().map(f64::to_string));
        w.write_record(record).map_err(|e| OutputError::csv(path, e))?;
    }
    w.flush().map_err(|e| OutputError::io(path, e))
}

pub fn estimate_json(est: &DisplacementEstimate<f64>) -> String {
    serde_json::to_string_pretty(est).expect("estimates serialise")
}

#[cfg(test)]
mod tests {
    use super::*;
    use mindisp_core::Vector;

    #[test]
    fn missing_file_is_an_io_error() {
        let err = parse_operator_file("/nonexistent/op.json").unwrap_err();
        assert_eq!(err.code, DslErrorCode::Io);
    }

    #[test]
    fn tuple_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tuple.csv");
        let p = ProductPoint::new(vec![
            Vector::new(vec![1.0, 2.5]).unwrap(),
            Vector::new(vec![-3.0, 0.0]).unwrap(),
        ])
        .unwrap();
        write_tuple_csv(&path, &p).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "part,x1,x2\n1,1,2.5\n2,-3,0\n");
    }

    #[test]
    fn residual_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("res.csv");
        write_residual_csv(&path, &[(0, 2.0, vec![0.0]), (1, 0.5, vec![-2.0])]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "n,residual,x1\n0,2,0\n1,0.5,-2\n");
    }
}
