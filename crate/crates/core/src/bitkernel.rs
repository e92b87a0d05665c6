//! Sign-bit-plane storage for binary complex data and an XOR/popcount
//! back-projection.
//!
//! A binary complex value is `scale * (a + b i)` with `a, b` in `{±1}`. It is
//! stored as two bits, one per part, with bit `1` meaning `-1`. For sign
//! vectors `a, c` of length `m`, `sum_k a_k c_k = m - 2 popcount(a XOR c)`, so
//! `conj(a + b i)(c + d i) = (ac + bd) + i (ad - bc)` needs four popcounts per
//! output and no floating-point products.

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::{Cplx, Real};

const WORD: usize = u64::BITS as usize;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Mask of the valid bits in the last word of a `len`-bit plane.
#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

fn sign_bit<T: Real>(v: T, scale: T, index: usize, z: Cplx<T>) -> Result<u64> {
    if v == scale {
        Ok(0)
    } else if v == -scale {
        Ok(1)
    } else {
        Err(Error::OffGrid {
            index,
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
            scale: scale.to_f64_lossy(),
        })
    }
}

#[inline]
fn decode_bit<T: Real>(plane: &[u64], bit: usize, scale: T) -> T {
    if plane[bit / WORD] >> (bit % WORD) & 1 == 1 {
        -scale
    } else {
        scale
    }
}

fn check_scale<T: Real>(scale: T) -> Result<()> {
    if scale > T::zero() && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::config("scale", format!("must be positive and finite, got {scale}")))
    }
}

/// Packed `m x N` binary complex matrix.
///
/// Planes are stored column by column (one padded run of `m` bits per
/// column), which is the access order of `A^H z`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMatrix<T> {
    m: usize,
    n: usize,
    scale: T,
    words_per_col: usize,
    re: Vec<u64>,
    im: Vec<u64>,
}

/// Packed length-`m` binary complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryVector<T> {
    m: usize,
    scale: T,
    re: Vec<u64>,
    im: Vec<u64>,
}

/// Exact result of a packed product before scaling: `re + i im`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GaussianInt {
    pub re: i64,
    pub im: i64,
}

impl<T: Real> BinaryVector<T> {
    /// Packs `values`, every part of which must equal `±scale` exactly.
    pub fn pack(values: &[Cplx<T>], scale: T) -> Result<Self> {
        check_scale(scale)?;
        let m = values.len();
        let mut re = vec![0u64; words_for(m)];
        let mut im = vec![0u64; words_for(m)];
        for (k, &z) in values.iter().enumerate() {
            re[k / WORD] |= sign_bit(z.re, scale, k, z)? << (k % WORD);
            im[k / WORD] |= sign_bit(z.im, scale, k, z)? << (k % WORD);
        }
        Ok(Self { m, scale, re, im })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn unpack(&self) -> Vec<Cplx<T>> {
        (0..self.m)
            .map(|k| Cplx::new(decode_bit(&self.re, k, self.scale), decode_bit(&self.im, k, self.scale)))
            .collect()
    }
}

impl<T: Real> BinaryMatrix<T> {
    /// Packs `psi`, every entry of which must have parts equal to `±scale`.
    pub fn pack(psi: &ComplexMatrix<T>, scale: T) -> Result<Self> {
        check_scale(scale)?;
        let (m, n) = (psi.rows(), psi.cols());
        let wpc = words_for(m);
        let mut re = vec![0u64; wpc * n];
        let mut im = vec![0u64; wpc * n];
        for k in 0..m {
            for (j, &z) in psi.row(k).iter().enumerate() {
                let at = j * wpc + k / WORD;
                let index = k * n + j;
                re[at] |= sign_bit(z.re, scale, index, z)? << (k % WORD);
                im[at] |= sign_bit(z.im, scale, index, z)? << (k % WORD);
            }
        }
        Ok(Self {
            m,
            n,
            scale,
            words_per_col: wpc,
            re,
            im,
        })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    fn column(&self, j: usize) -> (&[u64], &[u64]) {
        let span = j * self.words_per_col..(j + 1) * self.words_per_col;
        (&self.re[span.clone()], &self.im[span])
    }

    pub fn unpack(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_fn(self.m, self.n, |k, j| {
            let (re, im) = self.column(j);
            Cplx::new(decode_bit(re, k, self.scale), decode_bit(im, k, self.scale))
        })
    }

    fn column_product(&self, j: usize, z: &BinaryVector<T>) -> GaussianInt {
        let (a, b) = self.column(j);
        let (c, d) = (&z.re, &z.im);
        let last = self.words_per_col.saturating_sub(1);
        let mask = tail_mask(self.m);
        let (mut ac, mut bd, mut ad, mut bc) = (0u64, 0u64, 0u64, 0u64);
        for w in 0..self.words_per_col {
            let keep = if w == last { mask } else { u64::MAX };
            ac += ((a[w] ^ c[w]) & keep).count_ones() as u64;
            bd += ((b[w] ^ d[w]) & keep).count_ones() as u64;
            ad += ((a[w] ^ d[w]) & keep).count_ones() as u64;
            bc += ((b[w] ^ c[w]) & keep).count_ones() as u64;
        }
        let m = self.m as i64;
        let dot = |disagree: u64| m - 2 * disagree as i64;
        GaussianInt {
            re: dot(ac) + dot(bd),
            im: dot(ad) - dot(bc),
        }
    }

    fn check_vector(&self, z: &BinaryVector<T>) -> Result<()> {
        Error::check_len(self.m, z.m)
    }

    /// `sign(A)^H sign(z)` as exact Gaussian integers.
    pub fn adjoint_multiply_integer(&self, z: &BinaryVector<T>) -> Result<Vec<GaussianInt>> {
        self.check_vector(z)?;
        Ok((0..self.n).map(|j| self.column_product(j, z)).collect())
    }

    /// As [`adjoint_multiply_integer`](Self::adjoint_multiply_integer) on
    /// `support` only; other outputs are zero.
    pub fn adjoint_multiply_integer_masked(
        &self,
        z: &BinaryVector<T>,
        support: &[usize],
    ) -> Result<Vec<GaussianInt>> {
        self.check_vector(z)?;
        if let Some(&bad) = support.iter().find(|&&j| j >= self.n) {
            return Err(Error::IndexOutOfRange { index: bad, dim: self.n });
        }
        let mut out = vec![GaussianInt::default(); self.n];
        for &j in support {
            out[j] = self.column_product(j, z);
        }
        Ok(out)
    }

    fn rescale(&self, z: &BinaryVector<T>, ints: Vec<GaussianInt>) -> Vec<Cplx<T>> {
        let s = self.scale * z.scale;
        ints.into_iter()
            .map(|g| Cplx::new(s * T::from_i64(g.re).unwrap(), s * T::from_i64(g.im).unwrap()))
            .collect()
    }
}

/// `A^H z` for packed operands.
pub fn binary_adjoint_multiply<T: Real>(a: &BinaryMatrix<T>, z: &BinaryVector<T>) -> Result<Vec<Cplx<T>>> {
    let ints = a.adjoint_multiply_integer(z)?;
    Ok(a.rescale(z, ints))
}

/// `A^H z` restricted to `support`.
pub fn binary_adjoint_multiply_masked<T: Real>(
    a: &BinaryMatrix<T>,
    z: &BinaryVector<T>,
    support: &[usize],
) -> Result<Vec<Cplx<T>>> {
    let ints = a.adjoint_multiply_integer_masked(z, support)?;
    Ok(a.rescale(z, ints))
}
