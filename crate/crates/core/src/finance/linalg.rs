//! Small dense square matrices: just enough for covariance factors.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Row-major `n x n` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return contract("matrix rows must all have length n");
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..self.n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `A x` written into `out`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// `A^T x`.
    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `A A^T`.
    pub fn gram(&self) -> Self {
        self.mul(&self.transpose())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower-triangular `L` with positive diagonal and `L L^T = sigma`.
pub fn cholesky(sigma: &Matrix) -> Result<Matrix> {
    let n = sigma.dim();
    let scale = sigma.max_abs();
    for i in 0..n {
        for j in 0..i {
            if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-14 * scale {
                return contract(format!("matrix is not symmetric at ({i}, {j})"));
            }
        }
    }
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut diag = sigma[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 0.0) {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: diag,
            });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = sigma[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Orthogonal `H` whose first column is the unit vector `q`.
///
/// A single Householder reflection maps `e_1` to `+q` or `-q` depending on
/// which choice avoids cancellation; in the second case the first column is
/// negated afterwards, which keeps `H` orthogonal.
pub fn orthogonal_with_first_column(q: &[f64]) -> Matrix {
    let n = q.len();
    let mut v: Vec<f64> = q.iter().map(|x| -x).collect();
    // q1 <= 0: v = e1 - q reflects e1 onto q.
    // q1 > 0:  v = e1 + q reflects e1 onto -q.
    let flip = q[0] > 0.0;
    if flip {
        v.iter_mut().zip(q).for_each(|(vi, qi)| *vi = *qi);
    }
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let mut h = Matrix::identity(n);
    if vv > 0.0 {
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] -= 2.0 * v[i] * v[j] / vv;
            }
        }
    }
    if flip {
        for i in 0..n {
            h[(i, 0)] = -h[(i, 0)];
        }
    }
    h
}
