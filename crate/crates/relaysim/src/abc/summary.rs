//! Summary statistics of received frames.
//!
//! A summary maps a frame (a complex `L x K` matrix) to a real vector that
//! distances are computed on. The default summary takes the empirical
//! quantile vector at levels `0.1, ..., 0.9` of the real parts and of the
//! imaginary parts, concatenated (dimension 18). The identity summary keeps
//! the flattened raw frame.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::Observation;
use crate::numerics::quantile_of_sorted;
use crate::Result;

/// Which statistic the summary computes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SummaryKind {
    /// Empirical quantiles at the given ascending levels in `[0, 1]`.
    QuantileGrid {
        /// Quantile levels, strictly increasing.
        levels: Vec<f64>,
    },
    /// The flattened raw frame; no compression.
    Identity,
}

/// How complex entries are turned into reals before summarizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexHandling {
    /// Treat real and imaginary parts as separate real datasets.
    SplitReIm,
    /// Summarize the moduli only.
    Modulus,
}

/// Full description of a summary statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarySpec {
    /// The statistic.
    #[serde(default = "SummaryKind::default_grid")]
    pub kind: SummaryKind,
    /// Complex-to-real handling.
    #[serde(default = "default_handling")]
    pub complex: ComplexHandling,
}

fn default_handling() -> ComplexHandling {
    ComplexHandling::SplitReIm
}

impl SummaryKind {
    /// The default nine-level grid `0.1, 0.2, ..., 0.9`.
    pub fn default_grid() -> Self {
        SummaryKind::QuantileGrid { levels: (1..=9).map(|i| i as f64 / 10.0).collect() }
    }
}

impl Default for SummarySpec {
    fn default() -> Self {
        SummarySpec { kind: SummaryKind::default_grid(), complex: default_handling() }
    }
}

impl SummarySpec {
    /// Identity summary with split real/imaginary parts.
    pub fn identity() -> Self {
        SummarySpec { kind: SummaryKind::Identity, complex: ComplexHandling::SplitReIm }
    }

    /// Check the quantile levels are valid.
    pub fn validate(&self) -> Result<()> {
        if let SummaryKind::QuantileGrid { levels } = &self.kind {
            if levels.is_empty() {
                return Err(Error::invalid("quantile grid needs at least one level"));
            }
            if levels.iter().any(|a| !(0.0..=1.0).contains(a)) {
                return Err(Error::invalid("quantile levels must lie in [0, 1]"));
            }
            if levels.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid("quantile levels must be strictly increasing"));
            }
        }
        Ok(())
    }

    /// Summary dimension for an `l x k` frame.
    pub fn dim(&self, l: usize, k: usize) -> usize {
        let per_set = match &self.kind {
            SummaryKind::QuantileGrid { levels } => levels.len(),
            SummaryKind::Identity => l * k,
        };
        match self.complex {
            ComplexHandling::SplitReIm => 2 * per_set,
            ComplexHandling::Modulus => per_set,
        }
    }
}

/// Reusable summarizer holding scratch space; cheap to call in a tight loop.
#[derive(Debug, Clone)]
pub struct Summarizer {
    spec: SummarySpec,
    dim: usize,
    scratch_a: Vec<f64>,
    scratch_b: Vec<f64>,
}

impl Summarizer {
    /// Build a summarizer for `l x k` frames.
    pub fn new(spec: SummarySpec, l: usize, k: usize) -> Result<Self> {
        spec.validate()?;
        if l == 0 || k == 0 {
            return Err(Error::invalid("summaries need a non-empty frame"));
        }
        let n = l * k;
        Ok(Summarizer { dim: spec.dim(l, k), spec, scratch_a: vec![0.0; n], scratch_b: vec![0.0; n] })
    }

    /// Output dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The spec this summarizer was built with.
    pub fn spec(&self) -> &SummarySpec {
        &self.spec
    }

    /// Summarize a flat row-major frame into `out` (length [`Self::dim`]).
    pub fn summarize_into(&mut self, frame: &[Complex64], out: &mut [f64]) {
        debug_assert_eq!(frame.len(), self.scratch_a.len());
        debug_assert_eq!(out.len(), self.dim);
        match (&self.spec.kind, self.spec.complex) {
            (SummaryKind::Identity, ComplexHandling::SplitReIm) => {
                for (i, z) in frame.iter().enumerate() {
                    out[2 * i] = z.re;
                    out[2 * i + 1] = z.im;
                }
            }
            (SummaryKind::Identity, ComplexHandling::Modulus) => {
                for (i, z) in frame.iter().enumerate() {
                    out[i] = z.norm();
                }
            }
            (SummaryKind::QuantileGrid { levels }, ComplexHandling::SplitReIm) => {
                for (i, z) in frame.iter().enumerate() {
                    self.scratch_a[i] = z.re;
                    self.scratch_b[i] = z.im;
                }
                self.scratch_a.sort_unstable_by(f64::total_cmp);
                self.scratch_b.sort_unstable_by(f64::total_cmp);
                let q = levels.len();
                for (j, &alpha) in levels.iter().enumerate() {
                    out[j] = quantile_of_sorted(&self.scratch_a, alpha);
                    out[q + j] = quantile_of_sorted(&self.scratch_b, alpha);
                }
            }
            (SummaryKind::QuantileGrid { levels }, ComplexHandling::Modulus) => {
                for (i, z) in frame.iter().enumerate() {
                    self.scratch_a[i] = z.norm();
                }
                self.scratch_a.sort_unstable_by(f64::total_cmp);
                for (j, &alpha) in levels.iter().enumerate() {
                    out[j] = quantile_of_sorted(&self.scratch_a, alpha);
                }
            }
        }
    }
}

/// Summarize a whole observation; convenience wrapper over [`Summarizer`].
pub fn summarize(y: &Observation, spec: &SummarySpec) -> Result<Vec<f64>> {
    let (l, k) = (y.relays(), y.symbols_per_frame());
    let mut s = Summarizer::new(spec.clone(), l, k)?;
    let flat = y.to_flat();
    if flat.len() != l * k {
        return Err(Error::invalid("observation rows have unequal lengths"));
    }
    let mut out = vec![0.0; s.dim()];
    s.summarize_into(&flat, &mut out);
    Ok(out)
}
