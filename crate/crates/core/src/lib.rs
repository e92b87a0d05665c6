//! 1-bit quantized compressive sensing.
//!
//! Sparse complex signals are measured through a sensing operator, the
//! measurements and (optionally) the operator itself are quantized to one
//! bit per real/imaginary part with a uniform dither, and the signal is
//! recovered by projected back-projection `x_hat = (1/m) H_s(A^H b)`.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the double-precision types used by the experiment harness and CLI.

pub mod bitkernel;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod matrix;
pub mod operators;
pub mod quantizer;
pub mod recon;
pub mod scalar;
pub mod seed;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type Complex64 = Cplx<f64>;
pub type Complex32 = Cplx<f32>;

pub type SensingOperator64 = operators::SensingOperator<f64>;
pub type SensingOperator32 = operators::SensingOperator<f32>;
pub type ComplexMatrix64 = matrix::ComplexMatrix<f64>;
pub type Quantizer64 = quantizer::UniformQuantizer<f64>;
pub type Quantizer32 = quantizer::UniformQuantizer<f32>;
pub type SparseSignal64 = recon::SparseSignal<f64>;
pub type SparseSignal32 = recon::SparseSignal<f32>;
pub type ReconResult64 = recon::ReconResult<f64>;
pub type BinaryMatrix64 = bitkernel::BinaryMatrix<f64>;
pub type BinaryVector64 = bitkernel::BinaryVector<f64>;
