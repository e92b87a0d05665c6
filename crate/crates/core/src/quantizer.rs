//! Dithered uniform scalar quantization.
//!
//! `Q(u) = floor((u + xi) / alpha) * alpha + alpha / 2` with `xi` uniform on
//! `[-alpha/2, alpha/2)`. Complex values are quantized per real and imaginary
//! part with independent dithers. When `max(|Re u|, |Im u|) <= alpha / 2` the
//! output lands in `(alpha/2) {±1 ± i}`, i.e. one bit per part.

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::{inf_norm, Cplx, Real};
use crate::seed;

/// Where the per-component dither comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DitherPolicy {
    /// Independent uniform dither per component, a pure function of
    /// `(seed, row, column, real/imaginary)`.
    FreshUniform { seed: u64 },
    /// Zero dither everywhere.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformQuantizer<T> {
    resolution: T,
    dither: DitherPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Re = 0,
    Im = 1,
}

/// Quantizes one real value with an explicit dither.
pub fn quantize_real<T: Real>(u: T, resolution: T, dither: T) -> Result<T> {
    check_resolution(resolution)?;
    Ok(quantize_unchecked(u, resolution, dither))
}

#[inline]
fn quantize_unchecked<T: Real>(u: T, alpha: T, xi: T) -> T {
    let half = alpha / T::of(2.0);
    ((u + xi) / alpha).floor() * alpha + half
}

fn check_resolution<T: Real>(resolution: T) -> Result<()> {
    if resolution > T::zero() && resolution.is_finite() {
        Ok(())
    } else {
        Err(Error::config(
            "resolution",
            format!("must be positive and finite, got {resolution}"),
        ))
    }
}

/// Smallest resolution for which every component quantizes to one bit:
/// twice the largest `max(|Re|, |Im|)`.
pub fn choose_binary_resolution<T: Real>(values: &[Cplx<T>]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::Degenerate("cannot size a quantizer for empty input".into()));
    }
    if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Degenerate("non-finite entry".into()));
    }
    let peak = inf_norm(values);
    if peak == T::zero() {
        return Err(Error::Degenerate("all-zero input gives a zero resolution".into()));
    }
    Ok(peak * T::of(2.0))
}

impl<T: Real> UniformQuantizer<T> {
    pub fn new(resolution: T, dither: DitherPolicy) -> Result<Self> {
        check_resolution(resolution)?;
        Ok(Self { resolution, dither })
    }

    /// Quantizer whose resolution makes `values` binary.
    pub fn binary_for(values: &[Cplx<T>], dither: DitherPolicy) -> Result<Self> {
        Self::new(choose_binary_resolution(values)?, dither)
    }

    #[inline]
    pub fn resolution(&self) -> T {
        self.resolution
    }

    #[inline]
    pub fn dither_policy(&self) -> DitherPolicy {
        self.dither
    }

    /// Half the resolution; the magnitude of each part of a binary output.
    #[inline]
    pub fn half(&self) -> T {
        self.resolution / T::of(2.0)
    }

    #[inline]
    fn dither_at(&self, row: u64, col: u64, part: Part) -> T {
        match self.dither {
            DitherPolicy::None => T::zero(),
            DitherPolicy::FreshUniform { seed } => {
                let u = seed::unit_uniform(seed::derive(seed, &[row, col, part as u64]));
                let half = self.half();
                let xi = T::of(u - 0.5) * self.resolution;
                // Rounding may land on the closed end; keep the interval half-open.
                if xi >= half {
                    -half
                } else {
                    xi
                }
            }
        }
    }

    /// Quantizes a real value with a caller-supplied dither.
    #[inline]
    pub fn quantize_with(&self, u: T, dither: T) -> T {
        quantize_unchecked(u, self.resolution, dither)
    }

    /// Quantizes a complex entry located at `(row, col)` of its container.
    #[inline]
    pub fn quantize_at(&self, u: Cplx<T>, row: usize, col: usize) -> Cplx<T> {
        let (r, c) = (row as u64, col as u64);
        Cplx::new(
            self.quantize_with(u.re, self.dither_at(r, c, Part::Re)),
            self.quantize_with(u.im, self.dither_at(r, c, Part::Im)),
        )
    }

    /// Component `i` of a vector uses the dither key of entry `(i, 0)`.
    pub fn quantize_vector(&self, u: &[Cplx<T>]) -> Vec<Cplx<T>> {
        u.iter()
            .enumerate()
            .map(|(i, &z)| self.quantize_at(z, i, 0))
            .collect()
    }

    pub fn quantize_matrix(&self, phi: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        ComplexMatrix::from_fn(phi.rows(), phi.cols(), |r, c| {
            self.quantize_at(phi.get(r, c), r, c)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Cplx::new(re, im)
    }

    #[test]
    fn quantize_real_examples() {
        assert_eq!(quantize_real(0.3, 2.0, 0.0).unwrap(), 1.0);
        assert_eq!(quantize_real(-0.3, 2.0, 0.0).unwrap(), -1.0);
        assert_eq!(quantize_real(0.0, 1.0, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn non_positive_resolution_is_rejected() {
        assert!(quantize_real(0.3, 0.0, 0.0).is_err());
        assert!(quantize_real(0.3, -1.0, 0.0).is_err());
        assert!(UniformQuantizer::new(f64::NAN, DitherPolicy::None).is_err());
    }

    #[test]
    fn complex_vector_example() {
        let q = UniformQuantizer::new(2.0, DitherPolicy::None).unwrap();
        assert_eq!(q.quantize_vector(&[c(0.3, -0.2)]), vec![c(1.0, -1.0)]);
        assert!(q.quantize_vector(&[]).is_empty());
    }

    #[test]
    fn matrix_example_and_dft_binary() {
        let q = UniformQuantizer::new(2.0, DitherPolicy::None).unwrap();
        let one = ComplexMatrix::from_vec(1, 1, vec![c(0.3, -0.2)]).unwrap();
        assert_eq!(q.quantize_matrix(&one).get(0, 0), c(1.0, -1.0));

        let n = 16;
        let dft = ComplexMatrix::from_fn(n, n, |r, k| {
            Cplx::from_polar(1.0, -2.0 * std::f64::consts::PI * (r * k) as f64 / n as f64)
        });
        let qd = UniformQuantizer::new(2.0, DitherPolicy::FreshUniform { seed: 9 }).unwrap();
        for z in qd.quantize_matrix(&dft).as_slice() {
            assert_eq!(z.re.abs(), 1.0);
            assert_eq!(z.im.abs(), 1.0);
        }
    }

    #[test]
    fn sample_mean_is_unbiased() {
        // Independent oracle: plain sample mean over fresh dithers.
        let n = 100_000;
        let u = vec![c(0.4, 0.4); n];
        let q = UniformQuantizer::new(2.0, DitherPolicy::FreshUniform { seed: 1 }).unwrap();
        let out = q.quantize_vector(&u);
        let mean_re = out.iter().map(|z| z.re).sum::<f64>() / n as f64;
        let mean_im = out.iter().map(|z| z.im).sum::<f64>() / n as f64;
        assert!((mean_re - 0.4).abs() <= 0.01, "{mean_re}");
        assert!((mean_im - 0.4).abs() <= 0.01, "{mean_im}");
    }

    #[test]
    fn matrix_entrywise_mean_is_unbiased() {
        let phi = ComplexMatrix::from_fn(4, 4, |r, k| c(0.9 - 0.1 * r as f64, 0.25 * k as f64 - 0.4));
        let nu = choose_binary_resolution(phi.as_slice()).unwrap();
        let reps = 10_000;
        let mut acc = ComplexMatrix::<f64>::zeros(4, 4);
        for t in 0..reps {
            let q = UniformQuantizer::new(nu, DitherPolicy::FreshUniform { seed: t }).unwrap();
            let qm = q.quantize_matrix(&phi);
            for r in 0..4 {
                for k in 0..4 {
                    acc.set(r, k, acc.get(r, k) + qm.get(r, k));
                }
            }
        }
        for r in 0..4 {
            for k in 0..4 {
                let mean = acc.get(r, k) / reps as f64;
                let d = mean - phi.get(r, k);
                assert!(d.re.abs() <= 0.01 * nu && d.im.abs() <= 0.01 * nu, "({r},{k}) {d}");
            }
        }
    }

    #[test]
    fn binary_resolution_examples() {
        assert_eq!(choose_binary_resolution(&[c(0.3, -0.2), c(-0.7, 0.1)]).unwrap(), 1.4);
        assert!(choose_binary_resolution::<f64>(&[c(0.0, 0.0)]).is_err());
        assert!(choose_binary_resolution::<f64>(&[]).is_err());
    }

    #[test]
    fn binary_resolution_matches_scan_on_gaussian_draw() {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = seed::rng(5);
        let vals: Vec<Cplx<f64>> = (0..32 * 16)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                c(re, im)
            })
            .collect();
        let mut peak = 0.0f64;
        for z in &vals {
            if z.re.abs() > peak {
                peak = z.re.abs();
            }
            if z.im.abs() > peak {
                peak = z.im.abs();
            }
        }
        assert_eq!(choose_binary_resolution(&vals).unwrap(), 2.0 * peak);
    }

    #[test]
    fn same_seed_same_output_in_any_order() {
        let u: Vec<_> = (0..50).map(|i| c(i as f64 * 0.01, -0.2)).collect();
        let q = UniformQuantizer::new(1.0, DitherPolicy::FreshUniform { seed: 77 }).unwrap();
        let fwd = q.quantize_vector(&u);
        let rev: Vec<_> = (0..u.len()).rev().map(|i| q.quantize_at(u[i], i, 0)).collect();
        let rev: Vec<_> = rev.into_iter().rev().collect();
        assert_eq!(fwd, rev);
    }

    #[test]
    fn works_in_single_precision() {
        let q = UniformQuantizer::new(2.0f32, DitherPolicy::FreshUniform { seed: 3 }).unwrap();
        for z in q.quantize_vector(&[Cplx::new(0.5f32, -1.0), Cplx::new(1.0, 0.0)]) {
            assert_eq!(z.re.abs(), 1.0);
            assert_eq!(z.im.abs(), 1.0);
        }
    }

    proptest! {
        #[test]
        fn error_bounded_and_on_grid(u in -50.0f64..50.0, t in 0.0f64..1.0, alpha in 0.01f64..10.0) {
            let xi = (t - 0.5) * alpha;
            let out = quantize_real(u, alpha, xi).unwrap();
            prop_assert!((out - u).abs() <= alpha);
            let cell = (out - alpha / 2.0) / alpha;
            prop_assert!((cell - cell.round()).abs() < 1e-9);
        }

        #[test]
        fn binary_when_within_half_resolution(
            re in -1.0f64..=1.0, im in -1.0f64..=1.0, alpha in 0.01f64..10.0, seed in any::<u64>()
        ) {
            let u = c(re * alpha / 2.0, im * alpha / 2.0);
            let q = UniformQuantizer::new(alpha, DitherPolicy::FreshUniform { seed }).unwrap();
            let out = q.quantize_at(u, 0, 0);
            prop_assert_eq!(out.re.abs(), alpha / 2.0);
            prop_assert_eq!(out.im.abs(), alpha / 2.0);
            prop_assert!(out.norm() <= alpha / 2f64.sqrt() * (1.0 + 1e-15));
        }
    }
}
