//! Plain-text polyhedron format.
//!
//! ```text
//! dim 2 rows 4
//! 1 0 10
//! -1 0 10
//! 0 1 10
//! 0 -1 10
//! ```
//!
//! The header gives the ambient dimension and the row count; each following
//! line holds one normal followed by its offset. The empty marker is written
//! as a single zero row with offset `-1`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::{HPolyhedron, PolytopeError};
use crate::format::fmt_exact;

impl HPolyhedron {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.empty {
            let _ = writeln!(out, "dim {} rows 1", self.dim);
            let zeros: Vec<String> = (0..self.dim).map(|_| "0".to_string()).collect();
            let _ = writeln!(out, "{} -1", zeros.join(" "));
            return out;
        }
        let _ = writeln!(out, "dim {} rows {}", self.dim, self.num_rows());
        for i in 0..self.num_rows() {
            let mut fields: Vec<String> =
                self.normals.row(i).iter().map(|v| fmt_exact(*v)).collect();
            fields.push(fmt_exact(self.offsets[i]));
            let _ = writeln!(out, "{}", fields.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<HPolyhedron, PolytopeError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(PolytopeError::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || PolytopeError::Parse {
            line: hline,
            message: format!("expected `dim <k> rows <r>`, found `{header}`"),
        };
        if parts.len() != 4 || parts[0] != "dim" || parts[2] != "rows" {
            return Err(bad_header());
        }
        let dim: usize = parts[1].parse().map_err(|_| bad_header())?;
        let rows: usize = parts[3].parse().map_err(|_| bad_header())?;
        let mut data = Vec::with_capacity(rows * (dim + 1));
        let mut count = 0;
        for (line, l) in lines {
            let values: Vec<f64> = l
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| PolytopeError::Parse {
                        line,
                        message: format!("not a number: `{t}`"),
                    })
                })
                .collect::<Result<_, _>>()?;
            if values.len() != dim + 1 {
                return Err(PolytopeError::Parse {
                    line,
                    message: format!("expected {} values, found {}", dim + 1, values.len()),
                });
            }
            data.extend(values);
            count += 1;
        }
        if count != rows {
            return Err(PolytopeError::Parse {
                line: hline,
                message: format!("header announces {rows} rows, found {count}"),
            });
        }
        let normals = DMatrix::from_fn(rows, dim, |i, j| data[i * (dim + 1) + j]);
        let offsets = DVector::from_fn(rows, |i, _| data[i * (dim + 1) + dim]);
        HPolyhedron::new_or_empty(normals, offsets)
    }
}
