//! Row-sampled discrete Fourier transform.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};
use crate::seed;

/// `exp(-2 pi i t / n)` for `t` in `0..n`.
pub fn twiddles<T: Real>(n: usize) -> Vec<Cplx<T>> {
    (0..n)
        .map(|t| {
            let angle = -2.0 * std::f64::consts::PI * t as f64 / n as f64;
            Cplx::new(T::of(angle.cos()), T::of(angle.sin()))
        })
        .collect()
}

/// DFT rows `rows[k]` of the `dim`-point transform; entry `(k, j)` is
/// `exp(-2 pi i rows[k] j / dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFourier<T> {
    dim: usize,
    rows: Vec<usize>,
    twiddles: Vec<Cplx<T>>,
}

impl<T: Real> PartialFourier<T> {
    pub fn new(dim: usize, rows: Vec<usize>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("dim_n", "dimension must be at least 1"));
        }
        if rows.is_empty() {
            return Err(Error::config("m", "need at least one measurement"));
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= dim) {
            return Err(Error::IndexOutOfRange { index: bad, dim });
        }
        Ok(Self {
            dim,
            rows,
            twiddles: twiddles(dim),
        })
    }

    /// `m` rows drawn uniformly with replacement.
    pub fn sampled(dim: usize, m: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("dim_n", "dimension must be at least 1"));
        }
        let mut rng = seed::rng(seed);
        let rows = (0..m).map(|_| rng.random_range(0..dim)).collect();
        Self::new(dim, rows)
    }

    pub fn full(dim: usize) -> Result<Self> {
        Self::new(dim, (0..dim).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    #[inline]
    pub fn entry(&self, k: usize, j: usize) -> Cplx<T> {
        self.twiddles[(self.rows[k] * j) % self.dim]
    }

    /// Full `dim`-point DFT of `x`, evaluated directly from the twiddle table.
    fn spectrum(&self, x: &[Cplx<T>], freqs: impl Iterator<Item = usize>) -> Vec<(usize, Cplx<T>)> {
        let n = self.dim;
        freqs
            .map(|f| {
                let v = x
                    .iter()
                    .enumerate()
                    .fold(Cplx::new(T::zero(), T::zero()), |acc, (j, &xj)| {
                        acc + self.twiddles[(f * j) % n] * xj
                    });
                (f, v)
            })
            .collect()
    }

    pub(crate) fn apply(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let n = self.dim;
        let mut used = vec![false; n];
        for &r in &self.rows {
            used[r] = true;
        }
        let mut spectrum = vec![Cplx::new(T::zero(), T::zero()); n];
        for (f, v) in self.spectrum(x, (0..n).filter(|&f| used[f])) {
            spectrum[f] = v;
        }
        self.rows.iter().map(|&r| spectrum[r]).collect()
    }

    /// `Phi^H z`, restricted to `columns`.
    pub(crate) fn adjoint(&self, z: &[Cplx<T>], columns: &[usize]) -> Vec<Cplx<T>> {
        let n = self.dim;
        // Repeated rows collapse onto one frequency bin.
        let mut bins = vec![Cplx::new(T::zero(), T::zero()); n];
        for (&r, &zk) in self.rows.iter().zip(z) {
            bins[r] += zk;
        }
        let active: Vec<usize> = (0..n).filter(|&f| bins[f] != Cplx::new(T::zero(), T::zero())).collect();
        let mut out = vec![Cplx::new(T::zero(), T::zero()); n];
        for &j in columns {
            out[j] = active.iter().fold(Cplx::new(T::zero(), T::zero()), |acc, &f| {
                acc + self.twiddles[(f * j) % n].conj() * bins[f]
            });
        }
        out
    }
}
