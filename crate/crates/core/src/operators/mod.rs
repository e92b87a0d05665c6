//! Sensing operators `Phi: C^N -> C^m`.

pub mod butterfly;
pub mod fourier;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub use butterfly::{bit_reversal, butterfly_factorize, ButterflyChain, SparseFactor};
pub use fourier::PartialFourier;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::quantizer::DitherPolicy;
use crate::recon::SparseSignal;
use crate::scalar::{norm_sqr, Cplx, Real};
use crate::seed;

/// Row-sampled butterfly transform.
///
/// Measurement `k` reads output `rows[k]` of chain `chains[k / dim]`, so an
/// operator built from one exact chain is the row-sampled DFT. Quantized
/// operators carry one independently quantized chain per block of `dim`
/// consecutive measurements, which keeps application at `O(m log N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyOperator<T> {
    dim: usize,
    chains: Vec<ButterflyChain<T>>,
    rows: Vec<usize>,
}

impl<T: Real> ButterflyOperator<T> {
    pub fn new(chain: ButterflyChain<T>, rows: Vec<usize>) -> Result<Self> {
        let dim = chain.dim();
        if rows.is_empty() {
            return Err(Error::config("m", "need at least one measurement"));
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= dim) {
            return Err(Error::IndexOutOfRange { index: bad, dim });
        }
        Ok(Self {
            dim,
            chains: vec![chain],
            rows,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn chains(&self) -> &[ButterflyChain<T>] {
        &self.chains
    }

    fn blocks(&self) -> impl Iterator<Item = (&ButterflyChain<T>, std::ops::Range<usize>)> {
        let m = self.rows.len();
        let per = if self.chains.len() == 1 { m } else { self.dim };
        self.chains
            .iter()
            .enumerate()
            .map(move |(b, c)| (c, (b * per).min(m)..((b + 1) * per).min(m)))
    }

    /// Quantizes the factors of the (first) chain once per measurement block,
    /// each block with its own dither stream.
    pub fn quantized(&self, dither: DitherPolicy) -> Result<Self> {
        let blocks = self.rows.len().div_ceil(self.dim);
        self.quantized_blocks(blocks, dither)
    }

    /// As [`quantized`](Self::quantized) with an explicit number of blocks;
    /// `blocks == 1` shares one quantized chain across all measurements.
    pub fn quantized_blocks(&self, blocks: usize, dither: DitherPolicy) -> Result<Self> {
        if blocks == 0 || (blocks > 1 && blocks != self.rows.len().div_ceil(self.dim)) {
            return Err(Error::config(
                "blocks",
                format!("expected 1 or ceil(m / N), got {blocks}"),
            ));
        }
        let base = &self.chains[0];
        let chains = (0..blocks)
            .map(|b| {
                let policy = match dither {
                    DitherPolicy::FreshUniform { seed } => DitherPolicy::FreshUniform {
                        seed: seed::derive(seed, &[b as u64]),
                    },
                    DitherPolicy::None => DitherPolicy::None,
                };
                base.quantized(policy)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            dim: self.dim,
            chains,
            rows: self.rows.clone(),
        })
    }

    fn apply(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut y = Vec::with_capacity(self.rows.len());
        for (chain, range) in self.blocks() {
            let full = chain.apply(x);
            y.extend(self.rows[range].iter().map(|&r| full[r]));
        }
        y
    }

    fn adjoint(&self, z: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut out = vec![Cplx::new(T::zero(), T::zero()); self.dim];
        for (chain, range) in self.blocks() {
            let mut bins = vec![Cplx::new(T::zero(), T::zero()); self.dim];
            for k in range {
                bins[self.rows[k]] += z[k];
            }
            for (o, v) in out.iter_mut().zip(chain.adjoint(&bins)) {
                *o += v;
            }
        }
        out
    }
}

/// A linear map `C^N -> C^m` with forward and adjoint application.
#[derive(Debug, Clone, PartialEq)]
pub enum SensingOperator<T> {
    DenseComplex(ComplexMatrix<T>),
    PartialFourier(PartialFourier<T>),
    ButterflyChain(ButterflyOperator<T>),
}

/// Dense `m x N` matrix with i.i.d. `CN(0, 1)` entries (variance 1/2 per part).
pub fn gaussian_operator<T: Real>(m: usize, n: usize, seed: u64) -> Result<SensingOperator<T>> {
    if m == 0 {
        return Err(Error::config("m", "need at least one measurement"));
    }
    if n == 0 {
        return Err(Error::config("dim_n", "dimension must be at least 1"));
    }
    let mut rng = seed::rng(seed);
    let sd = std::f64::consts::FRAC_1_SQRT_2;
    let entries = ComplexMatrix::from_fn(m, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Cplx::new(T::of(re * sd), T::of(im * sd))
    });
    Ok(SensingOperator::DenseComplex(entries))
}

/// `m` DFT rows of the `n`-point transform, sampled uniformly with replacement.
pub fn partial_fourier_operator<T: Real>(n: usize, m: usize, seed: u64) -> Result<SensingOperator<T>> {
    Ok(SensingOperator::PartialFourier(PartialFourier::sampled(n, m, seed)?))
}

/// The complete `n`-point DFT.
pub fn full_dft<T: Real>(n: usize) -> Result<SensingOperator<T>> {
    Ok(SensingOperator::PartialFourier(PartialFourier::full(n)?))
}

/// Butterfly-evaluated DFT with `m` rows sampled uniformly with replacement.
pub fn butterfly_operator<T: Real>(n: usize, m: usize, seed: u64) -> Result<SensingOperator<T>> {
    let chain = butterfly_factorize(n)?;
    let mut rng = seed::rng(seed);
    let rows = (0..m).map(|_| rng.random_range(0..n)).collect();
    Ok(SensingOperator::ButterflyChain(ButterflyOperator::new(chain, rows)?))
}

/// Quantizes every factor of a butterfly operator; see [`ButterflyOperator::quantized`].
pub fn quantize_butterfly<T: Real>(op: &ButterflyOperator<T>, dither: DitherPolicy) -> Result<SensingOperator<T>> {
    Ok(SensingOperator::ButterflyChain(op.quantized(dither)?))
}

impl<T: Real> SensingOperator<T> {
    /// Number of measurements `m`.
    pub fn measurements(&self) -> usize {
        match self {
            Self::DenseComplex(a) => a.rows(),
            Self::PartialFourier(f) => f.rows().len(),
            Self::ButterflyChain(b) => b.rows().len(),
        }
    }

    /// Ambient dimension `N`.
    pub fn dim(&self) -> usize {
        match self {
            Self::DenseComplex(a) => a.cols(),
            Self::PartialFourier(f) => f.dim(),
            Self::ButterflyChain(b) => b.dim(),
        }
    }

    /// `Phi x`.
    pub fn apply(&self, x: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        Error::check_len(self.dim(), x.len())?;
        Ok(match self {
            Self::DenseComplex(a) => a.mul_vec(x)?,
            Self::PartialFourier(f) => f.apply(x),
            Self::ButterflyChain(b) => b.apply(x),
        })
    }

    /// `Phi^H z`, unscaled. With a support, components outside it are zero.
    pub fn adjoint_apply(&self, z: &[Cplx<T>], support: Option<&[usize]>) -> Result<Vec<Cplx<T>>> {
        Error::check_len(self.measurements(), z.len())?;
        let n = self.dim();
        if let Some(s) = support {
            if let Some(&bad) = s.iter().find(|&&j| j >= n) {
                return Err(Error::IndexOutOfRange { index: bad, dim: n });
            }
        }
        let all: Vec<usize>;
        let columns = match support {
            Some(s) => s,
            None => {
                all = (0..n).collect();
                &all
            }
        };
        Ok(match self {
            Self::DenseComplex(a) => {
                let mut out = vec![Cplx::new(T::zero(), T::zero()); n];
                for &j in columns {
                    out[j] = (0..a.rows()).fold(Cplx::new(T::zero(), T::zero()), |acc, r| {
                        acc + a.get(r, j).conj() * z[r]
                    });
                }
                out
            }
            Self::PartialFourier(f) => f.adjoint(z, columns),
            Self::ButterflyChain(b) => {
                let full = b.adjoint(z);
                match support {
                    None => full,
                    Some(s) => {
                        let mut out = vec![Cplx::new(T::zero(), T::zero()); n];
                        for &j in s {
                            out[j] = full[j];
                        }
                        out
                    }
                }
            }
        })
    }

    /// Explicit `m x N` matrix.
    pub fn to_dense(&self) -> ComplexMatrix<T> {
        match self {
            Self::DenseComplex(a) => a.clone(),
            Self::PartialFourier(f) => {
                ComplexMatrix::from_fn(f.rows().len(), f.dim(), |k, j| f.entry(k, j))
            }
            Self::ButterflyChain(b) => {
                let (m, n) = (b.rows().len(), b.dim());
                let mut out = ComplexMatrix::zeros(m, n);
                let mut e = vec![Cplx::new(T::zero(), T::zero()); n];
                for j in 0..n {
                    e[j] = Cplx::new(T::one(), T::zero());
                    for (k, v) in b.apply(&e).into_iter().enumerate() {
                        out.set(k, j, v);
                    }
                    e[j] = Cplx::new(T::zero(), T::zero());
                }
                out
            }
        }
    }
}

/// Empirical lower bound on the RIP constant: the largest
/// `|(1/m) ||Phi x||^2 - 1|` over `probes` random unit `s`-sparse vectors.
pub fn estimate_rip_delta<T: Real>(op: &SensingOperator<T>, s: usize, probes: usize, seed: u64) -> Result<T> {
    if probes == 0 {
        return Err(Error::config("probes", "need at least one probe"));
    }
    let m = T::of_usize(op.measurements());
    let mut worst = T::zero();
    for p in 0..probes {
        let x = SparseSignal::<T>::generate(op.dim(), s, seed::derive(seed, &[p as u64]))?;
        let energy = norm_sqr(&op.apply(&x.to_dense())?) / m;
        worst = worst.max((energy - T::one()).abs());
    }
    Ok(worst)
}
