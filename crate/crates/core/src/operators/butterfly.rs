//! Radix-2 decimation-in-time factorization of the DFT.
//!
//! `DFT_N = B_k ... B_1 P` where `P` is the bit-reversal permutation and each
//! stage `B_l` mixes pairs `(p, p + 2^(l-1))` inside blocks of size `2^l`, so
//! every row holds exactly two structural nonzeros.

use crate::error::{Error, Result};
use crate::operators::fourier::twiddles;
use crate::quantizer::{choose_binary_resolution, DitherPolicy, UniformQuantizer};
use crate::scalar::{Cplx, Real};
use crate::seed;

/// Square sparse matrix with two `(column, value)` pairs per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseFactor<T> {
    dim: usize,
    rows: Vec<[(usize, Cplx<T>); 2]>,
}

impl<T: Real> SparseFactor<T> {
    pub fn new(dim: usize, rows: Vec<[(usize, Cplx<T>); 2]>) -> Result<Self> {
        Error::check_len(dim, rows.len())?;
        for row in &rows {
            for &(c, v) in row {
                if c >= dim {
                    return Err(Error::IndexOutOfRange { index: c, dim });
                }
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::Degenerate("non-finite factor entry".into()));
                }
            }
            if row[0].0 == row[1].0 {
                return Err(Error::Degenerate("duplicate column in factor row".into()));
            }
        }
        Ok(Self { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[[(usize, Cplx<T>); 2]] {
        &self.rows
    }

    pub fn apply(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        self.rows
            .iter()
            .map(|&[(a, va), (b, vb)]| va * x[a] + vb * x[b])
            .collect()
    }

    pub fn adjoint(&self, z: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut out = vec![Cplx::new(T::zero(), T::zero()); self.dim];
        for (row, &zr) in self.rows.iter().zip(z) {
            for &(c, v) in row {
                out[c] += v.conj() * zr;
            }
        }
        out
    }

    fn values(&self) -> Vec<Cplx<T>> {
        self.rows.iter().flat_map(|r| [r[0].1, r[1].1]).collect()
    }

    /// Quantizes the structural nonzeros only; the sparsity pattern is kept.
    /// The resolution is the binary one for this factor's nonzeros.
    pub fn quantized(&self, dither: DitherPolicy) -> Result<Self> {
        let nu = choose_binary_resolution(&self.values())?;
        let q = UniformQuantizer::new(nu, dither)?;
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                [
                    (row[0].0, q.quantize_at(row[0].1, r, 0)),
                    (row[1].0, q.quantize_at(row[1].1, r, 1)),
                ]
            })
            .collect();
        Ok(Self { dim: self.dim, rows })
    }
}

/// Bit-reversal permutation on `log2(n)` bits.
pub fn bit_reversal(n: usize) -> Vec<usize> {
    let bits = n.trailing_zeros();
    (0..n)
        .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
        .collect()
}

/// `DFT_N` as `factors[k-1] ... factors[0] * P`, with `(P x)[i] = x[permutation[i]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyChain<T> {
    dim: usize,
    factors: Vec<SparseFactor<T>>,
    permutation: Vec<usize>,
}

/// Radix-2 factorization of the `n`-point DFT.
pub fn butterfly_factorize<T: Real>(n: usize) -> Result<ButterflyChain<T>> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::config(
            "dim_n",
            format!("butterfly factorization needs a power of two >= 2, got {n}"),
        ));
    }
    let tw = twiddles::<T>(n);
    let one = Cplx::new(T::one(), T::zero());
    let stages = n.trailing_zeros() as usize;
    let factors = (1..=stages)
        .map(|l| {
            let size = 1usize << l;
            let half = size / 2;
            let stride = n / size;
            let rows = (0..n)
                .map(|r| {
                    let base = r - r % size;
                    let p = r % size;
                    if p < half {
                        [(base + p, one), (base + p + half, tw[p * stride])]
                    } else {
                        let p = p - half;
                        [(base + p, one), (base + p + half, -tw[p * stride])]
                    }
                })
                .collect();
            SparseFactor { dim: n, rows }
        })
        .collect();
    Ok(ButterflyChain {
        dim: n,
        factors,
        permutation: bit_reversal(n),
    })
}

impl<T: Real> ButterflyChain<T> {
    pub fn new(dim: usize, factors: Vec<SparseFactor<T>>, permutation: Vec<usize>) -> Result<Self> {
        Error::check_len(dim, permutation.len())?;
        let mut seen = vec![false; dim];
        for &p in &permutation {
            if p >= dim || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Degenerate("permutation is not a bijection".into()));
            }
        }
        for f in &factors {
            Error::check_len(dim, f.dim)?;
        }
        Ok(Self {
            dim,
            factors,
            permutation,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[SparseFactor<T>] {
        &self.factors
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Full `dim`-point transform in `O(dim log dim)`.
    pub fn apply(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let permuted: Vec<_> = self.permutation.iter().map(|&p| x[p]).collect();
        self.factors.iter().fold(permuted, |v, f| f.apply(&v))
    }

    pub fn adjoint(&self, z: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let v = self.factors.iter().rev().fold(z.to_vec(), |v, f| f.adjoint(&v));
        let mut out = vec![Cplx::new(T::zero(), T::zero()); self.dim];
        for (&p, vi) in self.permutation.iter().zip(v) {
            out[p] = vi;
        }
        out
    }

    /// Every factor quantized independently. Dither streams are keyed on
    /// `(seed, factor index)`.
    pub fn quantized(&self, dither: DitherPolicy) -> Result<Self> {
        let factors = self
            .factors
            .iter()
            .enumerate()
            .map(|(l, f)| {
                let policy = match dither {
                    DitherPolicy::FreshUniform { seed } => DitherPolicy::FreshUniform {
                        seed: seed::derive(seed, &[l as u64]),
                    },
                    DitherPolicy::None => DitherPolicy::None,
                };
                f.quantized(policy)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            dim: self.dim,
            factors,
            permutation: self.permutation.clone(),
        })
    }
}
