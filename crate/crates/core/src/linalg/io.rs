//! Text exchange format for matrices.
//!
//! A matrix is a JSON object with `rows`, `cols`, an optional qubit count
//! `n`, and two `rows × cols` grids `re` and `im`:
//!
//! ```json
//! {"n": 1, "rows": 2, "cols": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}
//! ```

use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixRecord {
    pub fn from_matrix(m: &ComplexMatrix, n: Option<usize>) -> Self {
        let grid = |f: fn(&C64) -> f64| (0..m.rows()).map(|i| m.row(i).iter().map(f).collect()).collect();
        Self {
            n,
            rows: m.rows(),
            cols: m.cols(),
            re: grid(|z| z.re),
            im: grid(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let shape_ok = |g: &Vec<Vec<f64>>| g.len() == self.rows && g.iter().all(|r| r.len() == self.cols);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::Format(format!(
                "grids do not match declared shape {}x{}",
                self.rows, self.cols
            )));
        }
        if let Some(n) = self.n {
            if self.rows != 1usize << n || self.cols != 1usize << n {
                return Err(Error::Format(format!(
                    "qubit count {n} inconsistent with {}x{}",
                    self.rows, self.cols
                )));
            }
        }
        let data = self
            .re
            .iter()
            .flatten()
            .zip(self.im.iter().flatten())
            .map(|(&r, &i)| C64::new(r, i))
            .collect();
        ComplexMatrix::new(self.rows, self.cols, data)
    }
}

pub fn to_json(m: &ComplexMatrix, n: Option<usize>) -> String {
    serde_json::to_string(&MatrixRecord::from_matrix(m, n)).expect("finite matrix serializes")
}

pub fn from_json(text: &str) -> Result<(ComplexMatrix, Option<usize>)> {
    let rec: MatrixRecord = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    Ok((rec.to_matrix()?, rec.n))
}
