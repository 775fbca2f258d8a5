//! Distance-to-weight kernels and the annealed tolerance schedule.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// How a summary distance is converted to an acceptance weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// Indicator kernel: weight 1 iff the distance is within the tolerance
    /// (boundary inclusive), else 0.
    Hard,
    /// Exponential kernel `exp(-rho / epsilon^2)`.
    Soft,
}

impl std::fmt::Display for WeightKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Matches the serialized (snake_case) names used in configs.
        f.write_str(match self {
            WeightKind::Hard => "hard",
            WeightKind::Soft => "soft",
        })
    }
}

/// A weighting kernel at a fixed tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightingFunction {
    /// Kernel shape.
    pub kind: WeightKind,
    /// Tolerance `epsilon > 0`.
    pub epsilon: f64,
}

impl WeightingFunction {
    /// Build a kernel, rejecting non-positive tolerances.
    pub fn new(kind: WeightKind, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::invalid(format!("tolerance must be finite and > 0, got {epsilon}")));
        }
        Ok(WeightingFunction { kind, epsilon })
    }

    /// Weight of a distance under this kernel.
    pub fn weight(&self, rho: f64) -> Result<f64> {
        if !rho.is_finite() || rho < 0.0 {
            return Err(Error::invalid(format!("distance must be finite and >= 0, got {rho}")));
        }
        Ok(weight_with(self.kind, rho, self.epsilon))
    }
}

/// Kernel weight at an explicit tolerance; used where the tolerance anneals.
#[inline]
pub fn weight_with(kind: WeightKind, rho: f64, epsilon: f64) -> f64 {
    match kind {
        WeightKind::Hard => {
            if rho <= epsilon {
                1.0
            } else {
                0.0
            }
        }
        WeightKind::Soft => (-rho / (epsilon * epsilon)).exp(),
    }
}

/// Linearly annealed tolerance: at one-based iteration `n` of a run of
/// `n_total`, the tolerance is `max(n_total - 10 * n, epsilon_min)`.
///
/// Samplers apply the schedule during burn-in only and hold `epsilon_min`
/// afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSchedule {
    /// Total number of iterations the schedule is defined over.
    pub n_total: usize,
    /// Floor tolerance.
    pub epsilon_min: f64,
}

impl ToleranceSchedule {
    /// Build a schedule, rejecting a non-positive floor.
    pub fn new(n_total: usize, epsilon_min: f64) -> Result<Self> {
        if n_total == 0 {
            return Err(Error::invalid("schedule needs at least one iteration"));
        }
        if !epsilon_min.is_finite() || epsilon_min <= 0.0 {
            return Err(Error::invalid(format!(
                "epsilon_min must be finite and > 0, got {epsilon_min}"
            )));
        }
        Ok(ToleranceSchedule { n_total, epsilon_min })
    }

    /// Tolerance at one-based iteration `n`, `1 <= n <= n_total`.
    #[inline]
    pub fn tolerance_at(&self, n: usize) -> f64 {
        assert!(
            n >= 1 && n <= self.n_total,
            "iteration {n} outside schedule range 1..={}",
            self.n_total
        );
        (self.n_total as f64 - 10.0 * n as f64).max(self.epsilon_min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn hard_kernel_is_boundary_inclusive() {
        let w = WeightingFunction::new(WeightKind::Hard, 0.5).unwrap();
        assert_eq!(w.weight(0.5).unwrap(), 1.0);
        assert_eq!(w.weight(0.0).unwrap(), 1.0);
        assert_eq!(w.weight(0.5 + 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn soft_kernel_frozen_values() {
        // rho = epsilon^2 gives exactly exp(-1).
        let eps = 0.7;
        let w = WeightingFunction::new(WeightKind::Soft, eps).unwrap();
        assert_relative_eq!(w.weight(eps * eps).unwrap(), (-1.0_f64).exp(), epsilon = 1e-15);
        assert_eq!(w.weight(0.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(WeightingFunction::new(WeightKind::Hard, 0.0).is_err());
        assert!(WeightingFunction::new(WeightKind::Soft, -1.0).is_err());
        let w = WeightingFunction::new(WeightKind::Soft, 1.0).unwrap();
        assert!(w.weight(-0.1).is_err());
        assert!(w.weight(f64::NAN).is_err());
    }

    #[test]
    fn schedule_frozen_values() {
        let s = ToleranceSchedule::new(20_000, 0.25).unwrap();
        assert_eq!(s.tolerance_at(1), 19_990.0);
        assert_eq!(s.tolerance_at(2), 19_980.0);
        assert_eq!(s.tolerance_at(1_999), 10.0);
        assert_eq!(s.tolerance_at(2_000), 0.25);
        assert_eq!(s.tolerance_at(20_000), 0.25);
    }

    #[test]
    #[should_panic(expected = "outside schedule range")]
    fn schedule_rejects_iteration_zero() {
        ToleranceSchedule::new(100, 1.0).unwrap().tolerance_at(0);
    }

    proptest! {
        #[test]
        fn weights_are_in_unit_interval_and_monotone(
            rho_a in 0.0..1e6f64,
            delta in 0.0..1e6f64,
            eps in 1e-3..1e3f64,
        ) {
            for kind in [WeightKind::Hard, WeightKind::Soft] {
                let wa = weight_with(kind, rho_a, eps);
                let wb = weight_with(kind, rho_a + delta, eps);
                prop_assert!((0.0..=1.0).contains(&wa));
                prop_assert!(wb <= wa, "weight must not increase with distance");
            }
        }

        #[test]
        fn schedule_is_non_increasing(n_total in 2..10_000usize, eps in 1e-3..10.0f64) {
            let s = ToleranceSchedule::new(n_total, eps).unwrap();
            let mut prev = f64::INFINITY;
            for n in 1..=n_total.min(500) {
                let t = s.tolerance_at(n);
                prop_assert!(t >= s.epsilon_min);
                prop_assert!(t <= prev);
                prev = t;
            }
            prop_assert_eq!(s.tolerance_at(n_total), eps);
        }
    }
}
