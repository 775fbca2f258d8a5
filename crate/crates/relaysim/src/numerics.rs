//! Scalar and complex-valued statistical primitives.
//!
//! Conventions used throughout the crate:
//!
//! - A circularly symmetric complex Gaussian `CN(mean, variance)` carries its
//!   TOTAL variance: real and imaginary parts are independent real Gaussians
//!   with variance `variance / 2` each. Under this convention a product
//!   channel `g * w + v` with `w ~ CN(0, sw)` and `v ~ CN(0, sv)` has total
//!   variance `|g|^2 * sw + sv`, which the closed-form likelihoods rely on.
//! - Empirical quantiles use linear interpolation of order statistics at rank
//!   `(n - 1) * alpha` (the common "type 7" estimator), so the 0.5-quantile of
//!   `{1,...,5}` is exactly 3.
//! - Sample covariance divides by `n - 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::rng::RngStream;
use crate::Result;

/// Natural log of pi.
pub(crate) const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Mean and total variance of a circularly symmetric complex Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ComplexGaussianSpec {
    /// Mean of the distribution.
    pub mean: Complex64,
    /// Total variance; each real component carries half of it.
    pub variance: f64,
}

impl ComplexGaussianSpec {
    /// Build a spec, rejecting non-finite means and non-positive variances.
    pub fn new(mean: Complex64, variance: f64) -> Result<Self> {
        if !mean.re.is_finite() || !mean.im.is_finite() {
            return Err(Error::invalid(format!("complex gaussian mean {mean} is not finite")));
        }
        if !variance.is_finite() || variance <= 0.0 {
            return Err(Error::invalid(format!(
                "complex gaussian variance must be finite and > 0, got {variance}"
            )));
        }
        Ok(ComplexGaussianSpec { mean, variance })
    }
}

/// One draw from `CN(mean, variance)` using an already-instantiated generator.
#[inline]
pub fn draw_cn<R: Rng + ?Sized>(mean: Complex64, variance: f64, rng: &mut R) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(mean.re + s * re, mean.im + s * im)
}

/// `n` draws from a complex Gaussian on a deterministic stream.
///
/// Two calls with equal `spec`, `n` and `stream` return bitwise-identical
/// vectors.
pub fn sample_cn(spec: ComplexGaussianSpec, n: usize, stream: RngStream) -> Result<Vec<Complex64>> {
    // Re-validate: specs can be built from deserialized data via struct literal.
    let spec = ComplexGaussianSpec::new(spec.mean, spec.variance)?;
    let mut rng = stream.rng();
    Ok((0..n).map(|_| draw_cn(spec.mean, spec.variance, &mut rng)).collect())
}

/// Log density of `CN(mean, variance)` at `z`:
/// `-ln(pi * variance) - |z - mean|^2 / variance`.
#[inline]
pub fn cn_log_density(z: Complex64, mean: Complex64, variance: f64) -> f64 {
    -(LN_PI + variance.ln()) - (z - mean).norm_sqr() / variance
}

/// Density of `CN(mean, variance)` at `z`.
#[inline]
pub fn cn_density(z: Complex64, mean: Complex64, variance: f64) -> f64 {
    cn_log_density(z, mean, variance).exp()
}

/// Quantile of already-sorted data by linear interpolation of order
/// statistics at rank `(n - 1) * alpha`.
///
/// The caller guarantees `sorted` is ascending and non-empty and
/// `0 <= alpha <= 1`.
#[inline]
pub fn quantile_of_sorted(sorted: &[f64], alpha: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&alpha));
    let h = (sorted.len() - 1) as f64 * alpha;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Empirical `alpha`-quantile of `data`.
///
/// Monotone in `alpha` and equivariant under affine maps with positive slope.
pub fn empirical_quantile(data: &[f64], alpha: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InsufficientData("quantile of empty data".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("quantile level {alpha} outside [0, 1]")));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("quantile input contains non-finite values"));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(quantile_of_sorted(&sorted, alpha))
}

/// Unbiased sample covariance (divisor `n - 1`) of row vectors `draws`.
///
/// All rows must share one dimension `d`; at least two rows are required. The
/// result is symmetric and positive semidefinite up to rounding. For a
/// full-rank estimate the number of rows should exceed `d`.
pub fn sample_covariance(draws: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = draws.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "sample covariance needs at least 2 draws, got {n}"
        )));
    }
    let d = draws[0].len();
    if draws.iter().any(|row| row.len() != d) {
        return Err(Error::invalid("covariance rows have mismatched dimensions"));
    }
    let mut mean = vec![0.0; d];
    for row in draws {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = DMatrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for row in draws {
        for ((c, x), m) in centered.iter_mut().zip(row).zip(&mean) {
            *c = x - m;
        }
        for i in 0..d {
            for j in i..d {
                cov[(i, j)] += centered[i] * centered[j];
            }
        }
    }
    let scale = 1.0 / (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] * scale;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}
