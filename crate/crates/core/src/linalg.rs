//! Small dense complex matrices. Networks here have a handful of channels,
//! so a row-major `Vec` with full-pivot elimination is all that is needed.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Returns `None` when the rows are ragged.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Some(CMatrix { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scaled(&self, factor: Complex64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Max-abs norm of `self - other`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Simultaneous row/column relabeling: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> CMatrix {
        assert!(self.is_square() && perm.len() == self.rows);
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for (i, &pi) in perm.iter().enumerate() {
            for (j, &pj) in perm.iter().enumerate() {
                out[(i, j)] = self[(pi, pj)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// The system matrix lost rank; `deficiency` is `n - rank`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular {
    pub deficiency: usize,
}

/// Solves `a x = b` by Gaussian elimination with full pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, Singular> {
    assert!(a.is_square() && a.rows == b.rows, "solve: shape mismatch");
    let n = a.rows;
    let m = b.cols;
    let mut a = a.clone();
    let mut b = b.clone();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let threshold = a.max_abs() * 1e-13 * n.max(1) as f64;

    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, -1.0);
        for i in k..n {
            for j in k..n {
                let v = a[(i, j)].norm();
                if v > best {
                    (pr, pc, best) = (i, j, v);
                }
            }
        }
        if !(best > threshold) {
            return Err(Singular { deficiency: n - k });
        }
        if pr != k {
            for j in 0..n {
                a.data.swap(k * n + j, pr * n + j);
            }
            for j in 0..m {
                b.data.swap(k * m + j, pr * m + j);
            }
        }
        if pc != k {
            for i in 0..n {
                a.data.swap(i * n + k, i * n + pc);
            }
            col_perm.swap(k, pc);
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            if f == ZERO {
                continue;
            }
            a[(i, k)] = ZERO;
            for j in k + 1..n {
                let t = a[(k, j)];
                a[(i, j)] -= f * t;
            }
            for j in 0..m {
                let t = b[(k, j)];
                b[(i, j)] -= f * t;
            }
        }
    }

    let mut y = CMatrix::zeros(n, m);
    for i in (0..n).rev() {
        for j in 0..m {
            let mut acc = b[(i, j)];
            for k in i + 1..n {
                acc -= a[(i, k)] * y[(k, j)];
            }
            y[(i, j)] = acc / a[(i, i)];
        }
    }
    let mut x = CMatrix::zeros(n, m);
    for (k, &orig) in col_perm.iter().enumerate() {
        x.row_mut(orig).copy_from_slice(y.row(k));
    }
    Ok(x)
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations:
/// `a = V diag(λ) V†`, eigenvectors in the columns of `V`. Only the upper
/// triangle's Hermitian part is meaningful; eigenvalues come unsorted.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = CMatrix::identity(n);
    let scale = a.max_abs();
    for _sweep in 0..64 {
        let off = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).fold(0.0_f64, |s, (p, q)| s.max(m[(p, q)].norm()));
        if off <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = m[(p, q)];
                let r = b.norm();
                if r == 0.0 {
                    continue;
                }
                // phase that makes the (p, q) entry real, then a real rotation
                let phase = b / r;
                let theta = (m[(q, q)].re - m[(p, p)].re) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                // U restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
                let u = [
                    [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
                    [-phase.conj() * s, phase.conj() * c],
                ];
                // m <- m U
                for k in 0..n {
                    let (x, y) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = x * u[0][0] + y * u[1][0];
                    m[(k, q)] = x * u[0][1] + y * u[1][1];
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * u[0][0] + y * u[1][0];
                    v[(k, q)] = x * u[0][1] + y * u[1][1];
                }
                // m <- U† m
                for k in 0..n {
                    let (x, y) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = u[0][0].conj() * x + u[1][0].conj() * y;
                    m[(q, k)] = u[0][1].conj() * x + u[1][1].conj() * y;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    ((0..n).map(|k| m[(k, k)].re).collect(), v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = CMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(2.0, 1.0), c(1.0, 0.0)],
            vec![c(1.0, -1.0), c(0.5, 0.0), c(0.0, 3.0)],
            vec![c(4.0, 0.0), c(0.0, 0.0), c(-1.0, 1.0)],
        ])
        .unwrap();
        let x = CMatrix::from_rows(&[vec![c(1.0, 2.0)], vec![c(-3.0, 0.5)], vec![c(0.0, -1.0)]]).unwrap();
        let b = &a * &x;
        let got = solve(&a, &b).unwrap();
        assert!(got.max_abs_diff(&x) < 1e-14);
    }

    #[test]
    fn rank_deficiency_reported() {
        let a = CMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let err = solve(&a, &CMatrix::zeros(3, 1)).unwrap_err();
        assert_eq!(err.deficiency, 2);
    }

    #[test]
    fn permutation_relabels() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]]).unwrap();
        let p = a.permuted(&[1, 0]);
        assert_eq!(p[(0, 0)], c(4.0, 0.0));
        assert_eq!(p[(0, 1)], c(3.0, 0.0));
        assert!(CMatrix::from_rows(&[vec![ONE], vec![ONE, ONE]]).is_none());
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let h = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, -3.0), c(0.5, 0.5)],
            vec![c(1.0, 3.0), c(-1.0, 0.0), c(0.0, 2.0)],
            vec![c(0.5, -0.5), c(0.0, -2.0), c(4.0, 0.0)],
        ])
        .unwrap();
        let (values, v) = hermitian_eigen(&h);
        let back = &(&v * &CMatrix::from_diagonal(&values.iter().map(|x| c(*x, 0.0)).collect::<Vec<_>>())) * &v.adjoint();
        assert!(back.max_abs_diff(&h) < 1e-13);
        assert!((&v * &v.adjoint()).max_abs_diff(&CMatrix::identity(3)) < 1e-14);
        let trace: f64 = values.iter().sum();
        assert!((trace - 5.0).abs() < 1e-13);
    }
}
