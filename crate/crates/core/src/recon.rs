//! Projected back-projection estimators.
//!
//! Every scheme computes `x_hat = (1/m) H_s(A^H b)`; they differ in which
//! back-projection matrix `A` and measurement vector `b` are used:
//!
//! | scheme                      | `A`                    | `b`          |
//! |-----------------------------|------------------------|--------------|
//! | PBP                         | `Phi`                  | `Phi x`      |
//! | PBPQ                        | `Phi`                  | `Q_eps(Phi x)` |
//! | QPBPQ                       | `Q_nu(Phi)`            | `Q_eps(Phi x)` |
//! | QPBPQ, no matrix dither     | `Q_nu(Phi)`, zero dither | `Q_eps(Phi x)` |

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};

use crate::bitkernel::{binary_adjoint_multiply, BinaryMatrix, BinaryVector};
use crate::error::{Error, Result};
use crate::operators::SensingOperator;
use crate::quantizer::{DitherPolicy, UniformQuantizer};
use crate::scalar::{norm_sqr, Cplx, Real};
use crate::seed;

/// Errors below this level are reported as this level.
pub const ERROR_DB_FLOOR: f64 = -160.0;

/// Unit-norm `s`-sparse complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal<T> {
    dim: usize,
    support: Vec<usize>,
    coefficients: Vec<Cplx<T>>,
}

impl<T: Real> SparseSignal<T> {
    /// Support uniform among `s`-subsets of `0..n`; i.i.d. complex Gaussian
    /// coefficients scaled to unit norm.
    pub fn generate(n: usize, s: usize, seed: u64) -> Result<Self> {
        if s == 0 || s > n {
            return Err(Error::config(
                "sparsities",
                format!("sparsity {s} must lie in 1..={n}"),
            ));
        }
        let mut rng = seed::rng(seed);
        let mut support = index::sample(&mut rng, n, s).into_vec();
        support.sort_unstable();
        loop {
            let raw: Vec<(f64, f64)> = (0..s)
                .map(|_| (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                .collect();
            let norm = raw.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            if norm > 0.0 {
                let coefficients = raw.iter().map(|&(a, b)| Cplx::new(T::of(a / norm), T::of(b / norm))).collect();
                return Ok(Self {
                    dim: n,
                    support,
                    coefficients,
                });
            }
        }
    }

    /// Builds a signal from explicit parts and rescales it to unit norm.
    pub fn from_parts(dim: usize, support: Vec<usize>, coefficients: Vec<Cplx<T>>) -> Result<Self> {
        Error::check_len(support.len(), coefficients.len())?;
        if let Some(&bad) = support.iter().find(|&&j| j >= dim) {
            return Err(Error::IndexOutOfRange { index: bad, dim });
        }
        let norm = norm_sqr(&coefficients).sqrt();
        if norm == T::zero() {
            return Err(Error::Degenerate("zero signal".into()));
        }
        let coefficients = coefficients.into_iter().map(|c| c / norm).collect();
        Ok(Self {
            dim,
            support,
            coefficients,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn coefficients(&self) -> &[Cplx<T>] {
        &self.coefficients
    }

    pub fn to_dense(&self) -> Vec<Cplx<T>> {
        let mut x = vec![Cplx::new(T::zero(), T::zero()); self.dim];
        for (&j, &c) in self.support.iter().zip(&self.coefficients) {
            x[j] = c;
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Pbp,
    Pbpq,
    Qpbpq,
    QpbpqNoMatrixDither,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [Self::Pbp, Self::Pbpq, Self::Qpbpq, Self::QpbpqNoMatrixDither];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pbp => "pbp",
            Self::Pbpq => "pbpq",
            Self::Qpbpq => "qpbpq",
            Self::QpbpqNoMatrixDither => "qpbpq_no_matrix_dither",
        }
    }

    /// Stable numeric tag used when deriving seeds.
    pub fn id(self) -> u64 {
        match self {
            Self::Pbp => 1,
            Self::Pbpq => 2,
            Self::Qpbpq => 3,
            Self::QpbpqNoMatrixDither => 4,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::config(
                    "schemes",
                    format!("unknown scheme `{s}` (expected pbp, pbpq, qpbpq or qpbpq_no_matrix_dither)"),
                )
            })
    }
}

/// Independent dither streams for one reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReconSeeds {
    pub measurement: u64,
    pub matrix: u64,
}

impl ReconSeeds {
    pub fn from_base(base: u64) -> Self {
        Self {
            measurement: seed::Stream::MeasurementDither.of(base),
            matrix: seed::Stream::MatrixDither.of(base),
        }
    }
}

/// How the quantized back-projection `Q_nu(Phi)^H b` is evaluated for dense
/// and Fourier operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Sign bit-planes with XOR/popcount.
    #[default]
    Packed,
    /// Floating-point multiply by the dequantized matrix.
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconResult<T> {
    pub estimate: Vec<Cplx<T>>,
    pub support: Vec<usize>,
    pub scheme: SchemeKind,
    pub error_db: f64,
}

/// Keeps the `s` largest-modulus entries of `u`; ties go to the smaller index.
/// Returns the thresholded vector and the kept indices in increasing order.
pub fn hard_threshold<T: Real>(u: &[Cplx<T>], s: usize) -> (Vec<Cplx<T>>, Vec<usize>) {
    if s >= u.len() {
        return (u.to_vec(), (0..u.len()).collect());
    }
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| {
        u[b].norm_sqr()
            .partial_cmp(&u[a].norm_sqr())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut kept = order[..s].to_vec();
    kept.sort_unstable();
    let mut out = vec![Cplx::new(T::zero(), T::zero()); u.len()];
    for &j in &kept {
        out[j] = u[j];
    }
    (out, kept)
}

/// `(1/m) H_s(back_projection)`.
pub fn pbp_core<T: Real>(back_projection: &[Cplx<T>], m: usize, s: usize) -> (Vec<Cplx<T>>, Vec<usize>) {
    let (mut est, support) = hard_threshold(back_projection, s);
    let inv = T::one() / T::of_usize(m);
    for &j in &support {
        est[j] *= inv;
    }
    (est, support)
}

/// `10 log10 || x - est / ||est|| ||_2`, floored at [`ERROR_DB_FLOOR`];
/// 0 dB for a zero estimate.
pub fn error_db<T: Real>(x: &SparseSignal<T>, estimate: &[Cplx<T>]) -> Result<f64> {
    Error::check_len(x.dim(), estimate.len())?;
    let est: Vec<Cplx<f64>> = estimate
        .iter()
        .map(|z| Cplx::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()))
        .collect();
    let norm = norm_sqr(&est).sqrt();
    if norm == 0.0 {
        return Ok(0.0);
    }
    // The truth is unit-norm; normalizing it too makes positive rescalings of
    // the truth compare bit-exactly.
    let truth: Vec<Cplx<f64>> = x
        .to_dense()
        .iter()
        .map(|t| Cplx::new(t.re.to_f64_lossy(), t.im.to_f64_lossy()))
        .collect();
    let truth_norm = norm_sqr(&truth).sqrt();
    let dist = truth
        .iter()
        .zip(&est)
        .map(|(t, e)| (t / truth_norm - e / norm).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok((10.0 * dist.log10()).max(ERROR_DB_FLOOR))
}

/// Runs one estimator with the packed kernel for quantized back-projection.
pub fn reconstruct<T: Real>(
    scheme: SchemeKind,
    op: &SensingOperator<T>,
    x: &SparseSignal<T>,
    s: usize,
    seeds: ReconSeeds,
) -> Result<ReconResult<T>> {
    reconstruct_with(scheme, op, x, s, seeds, Backend::Packed)
}

pub fn reconstruct_with<T: Real>(
    scheme: SchemeKind,
    op: &SensingOperator<T>,
    x: &SparseSignal<T>,
    s: usize,
    seeds: ReconSeeds,
    backend: Backend,
) -> Result<ReconResult<T>> {
    Error::check_len(op.dim(), x.dim())?;
    let m = op.measurements();
    // Analog sensing; quantization models the converter.
    let y = op.apply(&x.to_dense())?;

    let back_projection = match scheme {
        SchemeKind::Pbp => op.adjoint_apply(&y, None)?,
        _ => {
            let meas = UniformQuantizer::binary_for(&y, DitherPolicy::FreshUniform { seed: seeds.measurement })
                .map_err(|_| Error::Degenerate("measurements are identically zero".into()))?;
            let b = meas.quantize_vector(&y);
            match scheme {
                SchemeKind::Pbpq => op.adjoint_apply(&b, None)?,
                SchemeKind::Qpbpq => {
                    let dither = DitherPolicy::FreshUniform { seed: seeds.matrix };
                    quantized_back_projection(op, &b, meas.half(), dither, backend)?
                }
                SchemeKind::QpbpqNoMatrixDither => {
                    quantized_back_projection(op, &b, meas.half(), DitherPolicy::None, backend)?
                }
                SchemeKind::Pbp => unreachable!(),
            }
        }
    };

    let (estimate, support) = pbp_core(&back_projection, m, s);
    let error_db = error_db(x, &estimate)?;
    Ok(ReconResult {
        estimate,
        support,
        scheme,
        error_db,
    })
}

fn quantized_back_projection<T: Real>(
    op: &SensingOperator<T>,
    b: &[Cplx<T>],
    b_scale: T,
    dither: DitherPolicy,
    backend: Backend,
) -> Result<Vec<Cplx<T>>> {
    if let SensingOperator::ButterflyChain(chain) = op {
        let quantized = SensingOperator::ButterflyChain(chain.quantized(dither)?);
        return quantized.adjoint_apply(b, None);
    }
    let phi = op.to_dense();
    let q = UniformQuantizer::binary_for(phi.as_slice(), dither)?;
    let psi = q.quantize_matrix(&phi);
    match backend {
        Backend::Dense => psi.adjoint_mul_vec(b),
        Backend::Packed => {
            let a = BinaryMatrix::pack(&psi, q.half())?;
            let z = BinaryVector::pack(b, b_scale)?;
            binary_adjoint_multiply(&a, &z)
        }
    }
}
