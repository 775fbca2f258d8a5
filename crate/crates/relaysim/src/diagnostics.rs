//! Chain-quality instrumentation: autocorrelation of scalar chain series,
//! empirical distribution functions with their maximal discrepancy
//! (Kolmogorov–Smirnov statistic), and windowed acceptance rates.
//!
//! Everything here is pure and operates on immutable inputs, so the
//! functions are safe to call from parallel experiment workers.

use std::ops::Range;

use crate::error::Error;
use crate::samplers::ChainTrace;
use crate::Result;

/// A post-burn-in scalar chain (one real coordinate of the sampler state),
/// validated to be finite and long enough for second-moment statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSeries {
    values: Vec<f64>,
}

impl ScalarSeries {
    /// Wraps a vector of chain samples. Requires at least two finite values.
    pub fn new(values: Vec<f64>) -> Result<ScalarSeries> {
        if values.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "a scalar series needs at least 2 samples, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NumericDomain(format!(
                "scalar series contains a non-finite sample ({bad})"
            )));
        }
        Ok(ScalarSeries { values })
    }

    /// The underlying samples, in chain order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false: construction requires at least two samples.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sample mean.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Mean squared deviation from the mean (denominator `n`, not `n - 1`):
    /// this is the normalizer that makes [`acf`] exactly 1 at lag zero.
    pub fn population_variance(&self) -> f64 {
        let mu = self.mean();
        self.values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / self.values.len() as f64
    }
}

/// Autocorrelation estimate of a scalar chain at integer lag `tau`:
///
/// ```text
/// acf(x, tau) = sum_{n=0}^{N-tau-1} (x[n] - mean)(x[n+tau] - mean)
///               / ((N - tau) * population_variance)
/// ```
///
/// Normalizing by the variance (rather than the standard deviation) makes
/// `acf(x, 0) == 1` for every non-constant series, which is the convention
/// the mixing-speed plots assume. The `N - tau` term is the number of
/// products actually averaged, so estimates at moderate lags stay unbiased
/// in scale.
///
/// Errors on constant series (undefined correlation) and on `tau` outside
/// `0..len`.
pub fn acf(series: &ScalarSeries, tau: usize) -> Result<f64> {
    let x = series.values();
    let n = x.len();
    if tau >= n {
        return Err(Error::invalid(format!(
            "lag {tau} is out of range for a series of length {n}"
        )));
    }
    let mu = series.mean();
    let var = series.population_variance();
    if var <= 0.0 || !var.is_finite() {
        return Err(Error::NumericDomain(
            "autocorrelation of a constant series is undefined (zero variance)".into(),
        ));
    }
    let mut acc = 0.0;
    for i in 0..n - tau {
        acc += (x[i] - mu) * (x[i + tau] - mu);
    }
    Ok(acc / ((n - tau) as f64 * var))
}

/// Autocorrelations at every lag `0..=max_lag`, in order. Convenience for
/// building (lag, acf) tables; shares the mean/variance computation across
/// lags.
pub fn acf_profile(series: &ScalarSeries, max_lag: usize) -> Result<Vec<f64>> {
    let x = series.values();
    let n = x.len();
    if max_lag >= n {
        return Err(Error::invalid(format!(
            "maximum lag {max_lag} is out of range for a series of length {n}"
        )));
    }
    let mu = series.mean();
    let var = series.population_variance();
    if var <= 0.0 || !var.is_finite() {
        return Err(Error::NumericDomain(
            "autocorrelation of a constant series is undefined (zero variance)".into(),
        ));
    }
    let centered: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let mut out = Vec::with_capacity(max_lag + 1);
    for tau in 0..=max_lag {
        let mut acc = 0.0;
        for i in 0..n - tau {
            acc += centered[i] * centered[i + tau];
        }
        out.push(acc / ((n - tau) as f64 * var));
    }
    Ok(out)
}

/// Empirical distribution function of a finite sample: a right-continuous
/// step function that jumps by `1/n` at each (sorted) sample value and
/// reaches exactly 1 at the largest one.
#[derive(Debug, Clone, PartialEq)]
pub struct Edf {
    /// Distinct sample values, strictly increasing.
    support: Vec<f64>,
    /// `cumulative[i]` = fraction of samples `<= support[i]`; non-decreasing,
    /// ends at 1.
    cumulative: Vec<f64>,
}

impl Edf {
    /// Builds the EDF of a non-empty finite sample.
    pub fn from_samples(samples: &[f64]) -> Result<Edf> {
        if samples.is_empty() {
            return Err(Error::InsufficientData(
                "cannot build an empirical distribution from zero samples".into(),
            ));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::NumericDomain(format!(
                "empirical distribution sample is not finite ({bad})"
            )));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare totally"));
        let n = sorted.len() as f64;
        let mut support = Vec::new();
        let mut cumulative = Vec::new();
        let mut seen = 0usize;
        let mut i = 0usize;
        while i < sorted.len() {
            let v = sorted[i];
            let mut j = i;
            while j < sorted.len() && sorted[j] == v {
                j += 1;
            }
            seen += j - i;
            support.push(v);
            cumulative.push(seen as f64 / n);
            i = j;
        }
        // The final jump lands on exactly n/n; pin it against rounding.
        *cumulative.last_mut().expect("non-empty") = 1.0;
        Ok(Edf { support, cumulative })
    }

    /// Fraction of samples `<= x` (right-continuous evaluation).
    pub fn eval(&self, x: f64) -> f64 {
        // partition_point returns the count of support values <= x.
        let idx = self.support.partition_point(|&v| v <= x);
        if idx == 0 { 0.0 } else { self.cumulative[idx - 1] }
    }

    /// Distinct sample values in increasing order.
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// Cumulative fractions aligned with [`Edf::support`]; non-decreasing
    /// and ending at exactly 1.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}

/// Kolmogorov–Smirnov statistic between two EDFs: the supremum of
/// `|F_a(x) - F_b(x)|`. For step functions the supremum is attained on the
/// union of the two supports, so evaluating there (no binning) is exact.
pub fn edf_max_distance(a: &Edf, b: &Edf) -> f64 {
    let mut best = 0.0f64;
    let mut ia = 0usize;
    let mut ib = 0usize;
    let mut fa = 0.0f64;
    let mut fb = 0.0f64;
    while ia < a.support.len() || ib < b.support.len() {
        let va = a.support.get(ia).copied().unwrap_or(f64::INFINITY);
        let vb = b.support.get(ib).copied().unwrap_or(f64::INFINITY);
        // Advance every EDF whose next jump is at the current grid point.
        if va <= vb {
            fa = a.cumulative[ia];
            ia += 1;
        }
        if vb <= va {
            fb = b.cumulative[ib];
            ib += 1;
        }
        best = best.max((fa - fb).abs());
    }
    best
}

/// Kolmogorov–Smirnov statistic between an EDF and a continuous reference
/// CDF: the supremum of `|F_emp(x) - cdf(x)|`. For a step function against
/// a continuous curve the supremum is attained at a jump point, approached
/// from either side, so both one-sided gaps are checked at every jump.
pub fn edf_max_distance_to_cdf(edf: &Edf, cdf: impl Fn(f64) -> f64) -> f64 {
    let mut best = 0.0f64;
    let mut below = 0.0f64;
    for (&x, &above) in edf.support.iter().zip(&edf.cumulative) {
        let fx = cdf(x);
        best = best.max((above - fx).abs()).max((below - fx).abs());
        below = above;
    }
    best
}

/// Fraction of accepted proposals among the trace iterations in `window`
/// (half-open, in recorded-iteration indices). Errors when the window is
/// empty or reaches past the end of the trace.
pub fn acceptance_rate(trace: &ChainTrace, window: Range<usize>) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::invalid("acceptance window is empty"));
    }
    let n = trace.n_iterations();
    if window.end > n {
        return Err(Error::invalid(format!(
            "acceptance window {}..{} reaches past the trace length {n}",
            window.start, window.end
        )));
    }
    let flags = &trace.accepted()[window.clone()];
    let hits = flags.iter().filter(|&&a| a).count();
    Ok(hits as f64 / window.len() as f64)
}
