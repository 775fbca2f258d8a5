//! Distances between summary vectors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Serializable description of a distance; covariance-dependent metrics are
/// resolved against an estimated summary covariance at run time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MetricSpec {
    /// Sum of squared componentwise errors.
    Euclidean,
    /// Squared errors weighted by the reciprocal summary variances.
    ScaledEuclidean,
    /// Quadratic form with the inverse summary covariance.
    Mahalanobis,
    /// Minkowski distance of order `p >= 1`.
    Lp {
        /// The order.
        p: f64,
    },
    /// Sum of absolute componentwise errors.
    CityBlock,
}

impl MetricSpec {
    /// True if resolving this metric requires a summary covariance estimate.
    pub fn needs_covariance(&self) -> bool {
        matches!(self, MetricSpec::ScaledEuclidean | MetricSpec::Mahalanobis)
    }
}

impl std::fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Matches the serialized (snake_case) tags used in configs.
        match self {
            MetricSpec::Euclidean => f.write_str("euclidean"),
            MetricSpec::ScaledEuclidean => f.write_str("scaled_euclidean"),
            MetricSpec::Mahalanobis => f.write_str("mahalanobis"),
            MetricSpec::Lp { p } => write!(f, "lp_{p}"),
            MetricSpec::CityBlock => f.write_str("city_block"),
        }
    }
}

/// A ready-to-evaluate distance between equal-length summary vectors.
///
/// `Euclidean` and `ScaledEuclidean` are quadratic forms (no square root), as
/// is `Mahalanobis`; `Lp` and `CityBlock` are true metrics and satisfy the
/// triangle inequality.
#[derive(Debug, Clone)]
pub enum DistanceMetric {
    /// `sum_i d_i^2`.
    Euclidean,
    /// `sum_i weights_i * d_i^2` with positive weights.
    ScaledEuclidean {
        /// Per-component positive weights.
        weights: Vec<f64>,
    },
    /// `d^T Sigma^{-1} d`.
    Mahalanobis(Box<MahalanobisForm>),
    /// `(sum_i |d_i|^p)^{1/p}`, `p >= 1`.
    Lp {
        /// The order.
        p: f64,
    },
    /// `sum_i |d_i|`.
    CityBlock,
}

/// Precomputed state for the Mahalanobis quadratic form.
#[derive(Debug, Clone)]
pub struct MahalanobisForm {
    inv: DMatrix<f64>,
    regularized: bool,
}

impl DistanceMetric {
    /// Scaled-Euclidean metric with explicit weights.
    pub fn scaled_euclidean(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::invalid("scaled-euclidean weights must be finite and > 0"));
        }
        Ok(DistanceMetric::ScaledEuclidean { weights })
    }

    /// Scaled-Euclidean metric from a summary covariance: weights are the
    /// reciprocal diagonal, i.e. the Mahalanobis form with the off-diagonal
    /// covariance entries zeroed out.
    pub fn scaled_euclidean_from_cov(cov: &DMatrix<f64>) -> Result<Self> {
        Self::scaled_euclidean(cov.diagonal().iter().map(|v| 1.0 / v).collect())
    }

    /// Mahalanobis metric from a summary covariance.
    ///
    /// The matrix must be symmetric. If it is not positive definite, an
    /// escalating diagonal ridge is applied (a warning is logged and
    /// [`DistanceMetric::was_regularized`] reports it); if it stays singular
    /// the constructor fails.
    pub fn mahalanobis(cov: DMatrix<f64>) -> Result<Self> {
        let d = cov.nrows();
        if d == 0 || cov.ncols() != d {
            return Err(Error::invalid("covariance must be square and non-empty"));
        }
        let asym = (&cov - cov.transpose()).abs().max();
        if asym > 1e-8 * (1.0 + cov.abs().max()) {
            return Err(Error::invalid(format!("covariance is not symmetric (max gap {asym})")));
        }
        let trace: f64 = cov.trace();
        if !(trace > 0.0) {
            return Err(Error::NumericDomain(
                "covariance has non-positive trace; no meaningful scale to invert".into(),
            ));
        }
        let mut ridge = 0.0;
        let mut attempt = cov.clone();
        for round in 0..7 {
            if let Some(chol) = nalgebra::Cholesky::new(attempt.clone()) {
                if round > 0 {
                    log::warn!(
                        "covariance was not positive definite; applied ridge {ridge:.3e} to invert"
                    );
                }
                return Ok(DistanceMetric::Mahalanobis(Box::new(MahalanobisForm {
                    inv: chol.inverse(),
                    regularized: round > 0,
                })));
            }
            ridge = if ridge == 0.0 { 1e-10 * trace / d as f64 } else { ridge * 100.0 };
            attempt = cov.clone();
            for i in 0..d {
                attempt[(i, i)] += ridge;
            }
        }
        Err(Error::NumericDomain(
            "covariance is singular even after ridge regularization".into(),
        ))
    }

    /// True if building this metric required a regularizing ridge.
    pub fn was_regularized(&self) -> bool {
        match self {
            DistanceMetric::Mahalanobis(f) => f.regularized,
            _ => false,
        }
    }

    /// Minkowski metric of order `p >= 1`.
    pub fn lp(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::invalid(format!("Lp order must be >= 1, got {p}")));
        }
        Ok(DistanceMetric::Lp { p })
    }

    /// The dimension this metric is fixed to, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            DistanceMetric::ScaledEuclidean { weights } => Some(weights.len()),
            DistanceMetric::Mahalanobis(f) => Some(f.inv.nrows()),
            _ => None,
        }
    }

    /// Distance between two summary vectors.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::invalid(format!(
                "summary dimensions differ: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        if let Some(d) = self.fixed_dim() {
            if d != a.len() {
                return Err(Error::invalid(format!(
                    "metric is fixed to dimension {d} but summaries have {}",
                    a.len()
                )));
            }
        }
        Ok(self.distance_unchecked(a, b))
    }

    /// Distance without dimension checks; callers verify dimensions once.
    #[inline]
    pub fn distance_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            DistanceMetric::Euclidean => {
                a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
            }
            DistanceMetric::ScaledEuclidean { weights } => a
                .iter()
                .zip(b)
                .zip(weights)
                .map(|((x, y), w)| w * (x - y) * (x - y))
                .sum(),
            DistanceMetric::Mahalanobis(form) => {
                let n = a.len();
                let inv = &form.inv;
                let mut acc = 0.0;
                // Column-major walk over the symmetric inverse.
                for j in 0..n {
                    let dj = a[j] - b[j];
                    let col = inv.column(j);
                    let mut inner = 0.0;
                    for i in 0..n {
                        inner += col[i] * (a[i] - b[i]);
                    }
                    acc += inner * dj;
                }
                acc
            }
            DistanceMetric::Lp { p } => {
                let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(*p)).sum();
                s.powf(1.0 / p)
            }
            DistanceMetric::CityBlock => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn all_metrics(dim: usize) -> Vec<DistanceMetric> {
        vec![
            DistanceMetric::Euclidean,
            DistanceMetric::scaled_euclidean(vec![0.5; dim]).unwrap(),
            DistanceMetric::mahalanobis(DMatrix::identity(dim, dim) * 2.0).unwrap(),
            DistanceMetric::lp(3.0).unwrap(),
            DistanceMetric::CityBlock,
        ]
    }

    #[test]
    fn frozen_values_on_a_simple_pair() {
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 0.0, 3.0];
        assert_eq!(DistanceMetric::Euclidean.distance(&a, &b).unwrap(), 5.0);
        assert_eq!(DistanceMetric::CityBlock.distance(&a, &b).unwrap(), 3.0);
        let lp2 = DistanceMetric::lp(2.0).unwrap().distance(&a, &b).unwrap();
        assert_relative_eq!(lp2, 5.0_f64.sqrt(), epsilon = 1e-12);
        let se = DistanceMetric::scaled_euclidean(vec![1.0, 0.25, 9.0]).unwrap();
        assert_eq!(se.distance(&a, &b).unwrap(), 1.0 + 1.0 + 0.0);
        // Identity covariance: Mahalanobis equals plain Euclidean.
        let m = DistanceMetric::mahalanobis(DMatrix::identity(3, 3)).unwrap();
        assert_relative_eq!(m.distance(&a, &b).unwrap(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn mahalanobis_with_diagonal_cov_equals_scaled_euclidean() {
        let diag = [0.5, 2.0, 4.0];
        let cov = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&diag));
        let m = DistanceMetric::mahalanobis(cov.clone()).unwrap();
        let se = DistanceMetric::scaled_euclidean_from_cov(&cov).unwrap();
        let a = [1.3, -0.2, 5.0];
        let b = [0.1, 0.7, 4.0];
        assert_relative_eq!(
            m.distance(&a, &b).unwrap(),
            se.distance(&a, &b).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn mahalanobis_regularizes_or_fails_on_degenerate_covariance() {
        // Rank-1: regularization kicks in and is reported.
        let v = nalgebra::DVector::from_row_slice(&[1.0, 2.0]);
        let rank1 = &v * v.transpose();
        let m = DistanceMetric::mahalanobis(rank1).unwrap();
        assert!(m.was_regularized());
        assert!(m.distance(&[1.0, 0.0], &[0.0, 0.0]).unwrap() > 0.0);
        // Zero matrix: no scale at all.
        assert!(DistanceMetric::mahalanobis(DMatrix::zeros(2, 2)).is_err());
        // Asymmetric input is rejected.
        let mut asym = DMatrix::identity(2, 2);
        asym[(0, 1)] = 0.5;
        assert!(DistanceMetric::mahalanobis(asym).is_err());
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let m = DistanceMetric::mahalanobis(DMatrix::identity(3, 3)).unwrap();
        assert!(m.distance(&[1.0, 2.0], &[0.0, 0.0]).is_err());
        assert!(DistanceMetric::Euclidean.distance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn lp_rejects_orders_below_one() {
        assert!(DistanceMetric::lp(0.5).is_err());
        assert!(DistanceMetric::lp(f64::NAN).is_err());
        assert!(DistanceMetric::lp(1.0).is_ok());
    }

    proptest! {
        #[test]
        fn metric_axioms(
            a in proptest::collection::vec(-100.0..100.0f64, 4),
            b in proptest::collection::vec(-100.0..100.0f64, 4),
            c in proptest::collection::vec(-100.0..100.0f64, 4),
        ) {
            for m in all_metrics(4) {
                let dab = m.distance(&a, &b).unwrap();
                let dba = m.distance(&b, &a).unwrap();
                prop_assert!(dab >= 0.0);
                prop_assert!((dab - dba).abs() <= 1e-9 * (1.0 + dab.abs()));
                prop_assert!(m.distance(&a, &a).unwrap().abs() < 1e-12);
                // True metrics also satisfy the triangle inequality.
                if matches!(m, DistanceMetric::Lp { .. } | DistanceMetric::CityBlock) {
                    let dac = m.distance(&a, &c).unwrap();
                    let dcb = m.distance(&c, &b).unwrap();
                    prop_assert!(dab <= dac + dcb + 1e-9);
                }
            }
        }

        #[test]
        fn city_block_is_l1(
            a in proptest::collection::vec(-10.0..10.0f64, 5),
            b in proptest::collection::vec(-10.0..10.0f64, 5),
        ) {
            let l1 = DistanceMetric::lp(1.0).unwrap().distance(&a, &b).unwrap();
            let cb = DistanceMetric::CityBlock.distance(&a, &b).unwrap();
            prop_assert!((l1 - cb).abs() < 1e-9);
        }
    }
}
