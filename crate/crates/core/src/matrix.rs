//! Row-major dense complex matrix.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Cplx::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Cplx<T>>) -> Result<Self> {
        Error::check_len(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cplx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Cplx::new(T::one(), T::zero())
            } else {
                Cplx::new(T::zero(), T::zero())
            }
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Cplx<T> {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Cplx<T>) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Cplx<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Cplx<T>] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Cplx<T>> {
        self.data
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        Error::check_len(self.cols, x.len())?;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(Cplx::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// `A^H z`.
    pub fn adjoint_mul_vec(&self, z: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        Error::check_len(self.rows, z.len())?;
        let mut out = vec![Cplx::new(T::zero(), T::zero()); self.cols];
        for (r, zr) in z.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * zr;
            }
        }
        Ok(out)
    }

    /// `A B`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        Error::check_len(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) + a * other.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Largest complex modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc.max((a - b).norm()))
    }
}
