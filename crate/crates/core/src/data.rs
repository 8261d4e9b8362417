//! Datasets for linear prediction and their on-disk CSV format.
//!
//! A dataset is a design matrix with one output per row, optionally carrying
//! the generating parameter vector and the planted outlier indices. The CSV
//! format has a header `y,x1,...,xd` and one observation per row; floats are
//! written with 17 significant digits so that a write/read round trip is
//! bit-exact for `f64`. Generator provenance (name, seed, parameters,
//! `t_star`, outlier indices) goes to an optional sidecar file of flat
//! `key = value` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{dot, Real};

#[derive(Debug, Clone)]
pub struct Dataset<F> {
    pub x: Matrix<F>,
    pub y: Vec<F>,
    /// Parameter vector the outputs were generated from, when known.
    pub t_star: Option<Vec<F>>,
    /// Indices of planted outliers; empty when the data is clean.
    pub outliers: Vec<usize>,
    /// Seed the dataset was generated from.
    pub seed: u64,
}

impl<F: Real> Dataset<F> {
    pub fn new(x: Matrix<F>, y: Vec<F>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::argument(format!(
                "design has {} rows but {} outputs",
                x.rows(),
                y.len()
            )));
        }
        Ok(Dataset {
            x,
            y,
            t_star: None,
            outliers: Vec::new(),
            seed: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    /// Linear prediction `<x_i, t>`.
    pub fn margin(&self, i: usize, t: &[F]) -> F {
        dot(self.x.row(i), t)
    }

    /// Row subset as a new dataset (provenance fields carried over).
    pub fn subset(&self, indices: &[usize]) -> Dataset<F> {
        Dataset {
            x: self.x.select_rows(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            t_star: self.t_star.clone(),
            outliers: Vec::new(),
            seed: self.seed,
        }
    }

    /// Fraction of rows with `sign(<x_i, t>) != y_i` (labels in {-1,+1}).
    pub fn classification_error(&self, t: &[F]) -> F {
        let wrong = (0..self.n())
            .filter(|&i| {
                let s = if self.margin(i, t) >= F::zero() {
                    F::one()
                } else {
                    -F::one()
                };
                s != self.y[i]
            })
            .count();
        F::from64(wrong as f64) / F::from64(self.n() as f64)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::new();
        out.push('y');
        for j in 0..self.dim() {
            let _ = write!(out, ",x{}", j + 1);
        }
        out.push('\n');
        for i in 0..self.n() {
            out.push_str(&format_float(self.y[i]));
            for &v in self.x.row(i) {
                out.push(',');
                out.push_str(&format_float(v));
            }
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty dataset file".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.first() != Some(&"y") {
            return Err(Error::Parse("dataset header must start with 'y'".into()));
        }
        let d = cols.len() - 1;
        let mut y = Vec::new();
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != d + 1 {
                return Err(Error::Parse(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 2,
                    d + 1,
                    fields.len()
                )));
            }
            y.push(parse_float::<F>(fields[0], lineno + 2)?);
            let mut row = Vec::with_capacity(d);
            for f in &fields[1..] {
                row.push(parse_float::<F>(f, lineno + 2)?);
            }
            rows.push(row);
        }
        let x = Matrix::from_rows(rows)?;
        Dataset::new(x, y)
    }

    /// Writes the sidecar metadata file.
    pub fn write_meta(
        &self,
        path: impl AsRef<Path>,
        generator: &str,
        params: &BTreeMap<String, String>,
    ) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "generator = {generator}");
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "n = {}", self.n());
        let _ = writeln!(out, "d = {}", self.dim());
        for (k, v) in params {
            let _ = writeln!(out, "{k} = {v}");
        }
        if let Some(t) = &self.t_star {
            let joined: Vec<String> = t.iter().map(|&v| format_float(v)).collect();
            let _ = writeln!(out, "t_star = {}", joined.join(","));
        }
        if !self.outliers.is_empty() {
            let joined: Vec<String> = self.outliers.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "outlier_indices = {}", joined.join(","));
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Reads a sidecar file and merges `t_star`, seed and outliers into `self`.
    pub fn apply_meta(&mut self, path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
        let map = read_kv_file(path)?;
        if let Some(s) = map.get("seed") {
            self.seed = s
                .parse()
                .map_err(|_| Error::Parse(format!("bad seed value '{s}'")))?;
        }
        if let Some(t) = map.get("t_star") {
            let mut v = Vec::new();
            for part in t.split(',') {
                v.push(parse_float::<F>(part.trim(), 0)?);
            }
            self.t_star = Some(v);
        }
        if let Some(o) = map.get("outlier_indices") {
            let mut v = Vec::new();
            for part in o.split(',') {
                v.push(
                    part.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad outlier index '{part}'")))?,
                );
            }
            self.outliers = v;
        }
        Ok(map)
    }
}

/// Writes a bare matrix CSV with header `x1,...,xd`.
pub fn write_matrix_csv<F: Real>(m: &Matrix<F>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for j in 0..m.cols() {
        if j > 0 {
            out.push(',');
        }
        let _ = write!(out, "x{}", j + 1);
    }
    out.push('\n');
    for i in 0..m.rows() {
        for (j, &v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_float(v));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a bare matrix CSV (header `x1,...,xd`, one row per line).
pub fn read_matrix_csv<F: Real>(path: impl AsRef<Path>) -> Result<Matrix<F>> {
    let text = std::fs::read_to_string(&path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let d = header.split(',').count();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d {
            return Err(Error::Parse(format!(
                "line {}: expected {d} fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(d);
        for f in fields {
            row.push(parse_float::<F>(f, lineno + 2)?);
        }
        rows.push(row);
    }
    Matrix::from_rows(rows)
}

/// 17 significant digits; round-trips `f64` exactly.
pub fn format_float<F: Real>(v: F) -> String {
    format!("{:.16e}", v.to64())
}

fn parse_float<F: Real>(s: &str, lineno: usize) -> Result<F> {
    s.trim()
        .parse::<f64>()
        .map(F::from64)
        .map_err(|_| Error::Parse(format!("line {lineno}: bad float '{s}'")))
}

/// Parses a flat `key = value` file; `#` starts a comment line.
pub fn read_kv_file(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(&path)?;
    parse_kv(&text)
}

/// Parses flat `key = value` text; `#` starts a comment line.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected 'key = value'", lineno + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let x = Matrix::from_rows(vec![
            vec![0.1234567890123456_f64, -1.0 / 3.0],
            vec![1e-300, 2.5e17],
        ])
        .unwrap();
        let y = vec![1.0, -1.0];
        let mut ds = Dataset::new(x, y).unwrap();
        ds.seed = 99;
        ds.t_star = Some(vec![0.1, 0.2]);
        ds.outliers = vec![1];

        let dir = std::env::temp_dir().join("minmax_mom_data_test");
        std::fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("ds.csv");
        let meta = dir.join("ds.meta");
        ds.write_csv(&csv).unwrap();
        ds.write_meta(&meta, "unit_test", &BTreeMap::new()).unwrap();

        let mut back = Dataset::<f64>::read_csv(&csv).unwrap();
        back.apply_meta(&meta).unwrap();
        assert_eq!(back.x, ds.x);
        assert_eq!(back.y, ds.y);
        assert_eq!(back.t_star, ds.t_star);
        assert_eq!(back.outliers, ds.outliers);
        assert_eq!(back.seed, 99);
    }

    #[test]
    fn kv_parser_handles_comments_and_errors() {
        let map = parse_kv("# comment\n a = 1 \nb=two\n").unwrap();
        assert_eq!(map["a"], "1");
        assert_eq!(map["b"], "two");
        assert!(parse_kv("novalue\n").is_err());
    }

    #[test]
    fn classification_error_counts_sign_mismatches() {
        let x = Matrix::from_rows(vec![vec![1.0_f64], vec![-1.0], vec![2.0]]).unwrap();
        let ds = Dataset::new(x, vec![1.0, 1.0, -1.0]).unwrap();
        // t = [1]: predictions +, -, + -> wrong on rows 1 and 2.
        assert!((ds.classification_error(&[1.0]) - 2.0 / 3.0).abs() < 1e-15);
    }
}
