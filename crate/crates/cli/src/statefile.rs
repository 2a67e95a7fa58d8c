//! Matrix files: `{"local_dims": [...], "re": [[...]], "im": [[...]]}`,
//! row-major, party 1 as the most significant tensor factor.

use std::fs;
use std::path::Path;

use entbound::{CMatrix, DensityMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixFile {
    pub local_dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            local_dims: rho.local_dims().to_vec(),
            re: rows(|z| z.re),
            im: Some(rows(|z| z.im)),
        }
    }

    pub fn to_state(&self) -> Result<DensityMatrix, CliError> {
        let dim = self.re.len();
        let ragged =
            |rows: &Vec<Vec<f64>>| rows.len() != dim || rows.iter().any(|r| r.len() != dim);
        if ragged(&self.re) {
            return Err(CliError::Input(format!(
                "matrix file: `re` must be a square {dim}x{dim} array"
            )));
        }
        if let Some(im) = &self.im {
            if ragged(im) {
                return Err(CliError::Input(format!(
                    "matrix file: `im` must match `re` ({dim}x{dim})"
                )));
            }
        }
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |rows| rows[i][j]);
            Complex64::new(self.re[i][j], im)
        });
        DensityMatrix::new(m, self.local_dims.clone()).map_err(|e| CliError::Input(e.to_string()))
    }
}

/// Reads and validates a matrix file.
pub fn parse_state_file(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let file: MatrixFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: malformed matrix file: {e}", path.display())))?;
    file.to_state()
        .map_err(|e| CliError::Input(format!("{}: {}", path.display(), e.message())))
}

pub fn write_state_file(path: &Path, rho: &DensityMatrix) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&MatrixFile::from_state(rho))
        .map_err(|e| CliError::Output(e.to_string()))?;
    fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn accepts_maximally_mixed_qubit() {
        let f = write(r#"{"local_dims":[2],"re":[[0.5,0.0],[0.0,0.5]],"im":[[0,0],[0,0]]}"#);
        let rho = parse_state_file(f.path()).unwrap();
        assert_eq!(rho.dim(), 2);
    }

    #[test]
    fn rejects_bad_trace_with_deviation() {
        let f = write(r#"{"local_dims":[2],"re":[[0.45,0.0],[0.0,0.45]],"im":[[0,0],[0,0]]}"#);
        let msg = parse_state_file(f.path()).unwrap_err().to_string();
        assert!(msg.contains("trace"), "{msg}");
        assert!(msg.contains("1.000e-1"), "{msg}");
    }

    #[test]
    fn rejects_non_hermitian() {
        let f = write(r#"{"local_dims":[2],"re":[[0.5,0.2],[0.0,0.5]],"im":[[0,0],[0,0]]}"#);
        let msg = parse_state_file(f.path()).unwrap_err().to_string();
        assert!(msg.contains("hermiticity"), "{msg}");
    }

    #[test]
    fn rejects_ragged_and_malformed() {
        let f = write(r#"{"local_dims":[2],"re":[[0.5],[0.0,0.5]]}"#);
        assert!(parse_state_file(f.path()).is_err());
        let f = write("not json");
        assert!(parse_state_file(f.path()).is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let rho = entbound::states::w_state(3).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_state_file(f.path(), &rho).unwrap();
        let back = parse_state_file(f.path()).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
        assert_eq!(back.local_dims(), rho.local_dims());
    }
}
