//! Dense complex matrices, thin wrapper over `nalgebra::DMatrix<Complex64>`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KflatError, Result};

pub type C64 = Complex64;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense complex matrix, row-major access, backed by nalgebra.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub(crate) inner: DMatrix<C64>,
}

impl CMatrix {
    pub fn from_inner(inner: DMatrix<C64>) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: DMatrix::identity(n, n) }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { inner: DMatrix::from_fn(rows, cols, |i, j| f(i, j)) }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn scalar(n: usize, z: C64) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { z } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.inner[(i, j)] = v;
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { inner: self.inner.map(|v| v * z) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { inner: &self.inner + &other.inner }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { inner: &self.inner - &other.inner }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { inner: &self.inner * &other.inner }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.inner * x).iter().copied().collect()
    }

    /// Hermitian deviation ||M - M*|| (Frobenius bound is enough for checks).
    pub fn hermitian_defect(&self) -> f64 {
        self.sub(&self.adjoint()).op_norm()
    }

    /// ||u* u - 1||, the unitary defect.
    pub fn unitary_defect(&self) -> f64 {
        let n = self.cols();
        let g = self.adjoint().mul(self);
        g.sub(&CMatrix::identity(n)).op_norm()
    }

    pub fn fro_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Operator norm (largest singular value). Exact SVD for small
    /// matrices, power iteration on M*M above.
    pub fn op_norm(&self) -> f64 {
        if self.rows() == 0 || self.cols() == 0 {
            return 0.0;
        }
        let dim = self.rows().max(self.cols());
        if dim <= 192 {
            let sv = self.inner.clone().singular_values();
            return sv.iter().copied().fold(0.0_f64, f64::max);
        }
        self.op_norm_power()
    }

    fn op_norm_power(&self) -> f64 {
        let n = self.cols();
        let mut v: Vec<C64> = (0..n)
            .map(|i| C64::new(1.0 + 0.3 * ((i as f64) * 0.7).sin(), 0.1 * ((i as f64) * 1.3).cos()))
            .collect();
        normalize(&mut v);
        let mut prev = 0.0_f64;
        for it in 0..600 {
            let av = self.mul_vec(&v);
            let mut w = self.adjoint().mul_vec(&av);
            let lam = norm(&w).sqrt();
            if lam == 0.0 {
                return 0.0;
            }
            normalize(&mut w);
            v = w;
            if it > 4 && (lam - prev).abs() <= 1e-13 * lam.max(1.0) {
                return lam;
            }
            prev = lam;
        }
        prev
    }

    /// Solve M x = b by LU.
    pub fn solve(&self, b: &Self) -> Result<Self> {
        let lu = self.inner.clone().lu();
        lu.solve(&b.inner)
            .map(|inner| Self { inner })
            .ok_or(KflatError::SingularInput { sigma_min: 0.0, tol: 0.0 })
    }

    pub fn try_inverse(&self) -> Result<Self> {
        self.inner
            .clone()
            .try_inverse()
            .map(|inner| Self { inner })
            .ok_or(KflatError::SingularInput { sigma_min: 0.0, tol: 0.0 })
    }

    /// log|det| and arg(det) via LU with partial pivoting.
    pub fn slogdet(&self) -> (f64, f64) {
        let lu = self.inner.clone().lu();
        let mut logabs = 0.0_f64;
        let mut arg = 0.0_f64;
        let u = lu.u();
        for i in 0..u.nrows().min(u.ncols()) {
            let d = u[(i, i)];
            logabs += d.norm().ln();
            arg += d.arg();
        }
        if lu.p().determinant::<i8>() < 0 {
            arg += std::f64::consts::PI;
        }
        // keep arg in (-pi, pi]
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut a = arg % two_pi;
        if a > std::f64::consts::PI {
            a -= two_pi;
        } else if a <= -std::f64::consts::PI {
            a += two_pi;
        }
        (logabs, a)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (r1, c1) = (self.rows(), self.cols());
        let (r2, c2) = (other.rows(), other.cols());
        Self::from_fn(r1 + r2, c1 + c2, |i, j| {
            if i < r1 && j < c1 {
                self.get(i, j)
            } else if i >= r1 && j >= c1 {
                other.get(i - r1, j - c1)
            } else {
                ZERO
            }
        })
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self { inner: self.inner.kronecker(&other.inner) }
    }

    /// Block matrix [[a, b], [c, d]]; all blocks must be compatible.
    pub fn block2x2(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let (r1, c1) = (a.rows(), a.cols());
        let (r2, c2) = (d.rows(), d.cols());
        assert_eq!(b.rows(), r1);
        assert_eq!(b.cols(), c2);
        assert_eq!(c.rows(), r2);
        assert_eq!(c.cols(), c1);
        Self::from_fn(r1 + r2, c1 + c2, |i, j| match (i < r1, j < c1) {
            (true, true) => a.get(i, j),
            (true, false) => b.get(i, j - c1),
            (false, true) => c.get(i - r1, j),
            (false, false) => d.get(i - r1, j - c1),
        })
    }

    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(row0 + i, col0 + j))
    }

    pub fn set_block(&mut self, row0: usize, col0: usize, block: &Self) {
        for i in 0..block.rows() {
            for j in 0..block.cols() {
                self.set(row0 + i, col0 + j, block.get(i, j));
            }
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.inner.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn to_entry_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| [self.get(i, j).re, self.get(i, j).im]).collect())
            .collect()
    }

    pub fn from_entry_rows(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|x| x.len() != c) {
            return Err(KflatError::Invalid("ragged matrix rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [C64]) {
    let n = norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// Serializable matrix payload: row-major [re, im] pairs.
#[derive(Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.rows() * m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let z = m.get(i, j);
                entries.push([z.re, z.im]);
            }
        }
        MatrixJson { rows: m.rows(), cols: m.cols(), entries }
    }
}

impl TryFrom<&MatrixJson> for CMatrix {
    type Error = KflatError;
    fn try_from(j: &MatrixJson) -> Result<Self> {
        if j.entries.len() != j.rows * j.cols {
            return Err(KflatError::Invalid("matrix entry count mismatch".into()));
        }
        Ok(CMatrix::from_fn(j.rows, j.cols, |i, jj| {
            let e = j.entries[i * j.cols + jj];
            C64::new(e[0], e[1])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn op_norm_examples() {
        assert!((CMatrix::identity(5).op_norm() - 1.0).abs() < 1e-12);
        assert_eq!(CMatrix::zeros(3, 3).op_norm(), 0.0);
        let d = CMatrix::diag(&[C64::new(3.0, 0.0), C64::new(0.0, 4.0)]);
        assert!((d.op_norm() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn op_norm_power_matches_svd() {
        let n = 250;
        let m = CMatrix::from_fn(n, n, |i, j| {
            C64::new(((i * 7 + j * 3) % 13) as f64 / 13.0, ((i + 2 * j) % 5) as f64 / 5.0)
        });
        let by_power = m.op_norm();
        let sv = m.inner.clone().singular_values();
        let by_svd = sv.iter().copied().fold(0.0_f64, f64::max);
        assert!((by_power - by_svd).abs() < 1e-9 * by_svd, "{by_power} vs {by_svd}");
    }

    #[test]
    fn submultiplicative() {
        let a = CMatrix::from_fn(6, 6, |i, j| C64::new((i as f64 - j as f64) / 6.0, 0.3));
        let b = CMatrix::from_fn(6, 6, |i, j| C64::new(0.1 * i as f64, -0.2 * j as f64));
        assert!(a.mul(&b).op_norm() <= a.op_norm() * b.op_norm() + 1e-10);
    }

    #[test]
    fn adjoint_involutive() {
        let a = CMatrix::from_fn(4, 7, |i, j| C64::new(i as f64, j as f64));
        assert_eq!(a.adjoint().adjoint(), a);
    }
}
