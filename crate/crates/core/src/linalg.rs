//! Dense row-major matrices and the small amount of linear algebra the
//! estimators need: the squared operator norm via power iteration and a
//! Jacobi eigendecomposition for symmetric matrices.

use crate::error::{Error, Result};
use crate::rng::{self, streams};
use crate::scalar::{dot, norm2, Real};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Real> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::argument("rows have unequal lengths"));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend(row);
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::argument(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Identity-scaled diagonal matrix from the given diagonal entries.
    pub fn diag(entries: &[F]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * n + i] = e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> F {
        self.data.iter().fold(F::zero(), |m, &x| m.max(x.abs()))
    }

    /// `self * v` for a length-`cols` vector.
    pub fn matvec(&self, v: &[F]) -> Vec<F> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ * w` for a length-`rows` vector.
    pub fn t_matvec(&self, w: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.cols];
        for (i, &wi) in w.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(self.row(i)) {
                *o += wi * x;
            }
        }
        out
    }

    /// Row sub-matrix given by `indices`.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix<F> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// Empirical second-moment matrix `(1/rows) Xᵀ X`.
    pub fn second_moment(&self) -> Matrix<F> {
        let d = self.cols;
        let mut m = Matrix::zeros(d, d);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..d {
                for b in a..d {
                    let v = m.get(a, b) + r[a] * r[b];
                    m.set(a, b, v);
                }
            }
        }
        let inv_n = F::one() / F::from64(self.rows as f64);
        for a in 0..d {
            for b in a..d {
                let v = m.get(a, b) * inv_n;
                m.set(a, b, v);
                m.set(b, a, v);
            }
        }
        m
    }
}

/// Squared operator norm of `m`, i.e. the largest eigenvalue of `mᵀm`
/// (the squared largest singular value of `m`).
///
/// Power iteration on `v -> mᵀ(m v)` from a seeded start vector, run to
/// relative tolerance `1e-8` with at most 1000 iterations. A zero matrix
/// yields 0.
pub fn operator_norm<F: Real>(m: &Matrix<F>) -> F {
    let d = m.cols();
    if d == 0 || m.rows() == 0 {
        return F::zero();
    }
    let mut rng = rng::chacha(rng::derive_seed(0, streams::POWER_ITER, 0));
    let mut v: Vec<F> = (0..d).map(|_| rng::standard_normal(&mut rng)).collect();
    let nv = norm2(&v);
    if nv == F::zero() {
        v[0] = F::one();
    } else {
        v.iter_mut().for_each(|x| *x /= nv);
    }
    let tol = F::from64(1e-8);
    let mut lambda = F::zero();
    for _ in 0..1000 {
        let w = m.matvec(&v);
        let u = m.t_matvec(&w);
        // Rayleigh quotient vᵀ mᵀ m v = ‖mv‖² for the unit vector v.
        let next = dot(&v, &u);
        let nu = norm2(&u);
        if nu == F::zero() {
            return F::zero();
        }
        v = u.into_iter().map(|x| x / nu).collect();
        if (next - lambda).abs() <= tol * next.max(F::min_positive_value()) {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns eigenvalues in descending order together with the matching
/// eigenvectors (as rows of the returned matrix).
pub fn sym_eigen<F: Real>(m: &Matrix<F>) -> Result<(Vec<F>, Matrix<F>)> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::argument("sym_eigen requires a square matrix"));
    }
    let sym_tol = F::from64(1e-8);
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| m.get(i, j).abs())
        .fold(F::zero(), F::max);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m.get(i, j) - m.get(j, i)).abs() > sym_tol * scale.max(F::one()) {
                return Err(Error::argument("matrix is not symmetric"));
            }
        }
    }

    let mut a = m.clone();
    let mut q = Matrix::diag(&vec![F::one(); n]);
    let eps = F::from64(1e-14);
    for _sweep in 0..100 {
        let mut off = F::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        let frob = {
            let mut s = off + off;
            for i in 0..n {
                s += a.get(i, i) * a.get(i, i);
            }
            s.sqrt()
        };
        if off.sqrt() <= eps * frob.max(F::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for qi in (p + 1)..n {
                let apq = a.get(p, qi);
                if apq == F::zero() {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(qi, qi);
                let theta = (aqq - app) / (F::from64(2.0) * apq);
                let t = {
                    let sign = if theta >= F::zero() {
                        F::one()
                    } else {
                        -F::one()
                    };
                    sign / (theta.abs() + (theta * theta + F::one()).sqrt())
                };
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, qi);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, qi, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(qi, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(qi, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let qpk = q.get(p, k);
                    let qqk = q.get(qi, k);
                    q.set(p, k, c * qpk - s * qqk);
                    q.set(qi, k, s * qpk + c * qqk);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(j, j)
            .partial_cmp(&a.get(i, i))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<F> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (r, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(r, k, q.get(i, k));
        }
    }
    Ok((values, vectors))
}
