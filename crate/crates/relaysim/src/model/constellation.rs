//! Symbol alphabets and codewords over them.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// A real symbol alphabet, e.g. 4-PAM `{-3, -1, 1, 3}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    points: Vec<f64>,
}

impl Constellation {
    /// Build an alphabet from its points. At least two distinct finite points
    /// are required and the mean symbol energy must be positive.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("constellation needs at least 2 points"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("constellation points must be finite"));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::invalid(format!(
                        "constellation points must be distinct, found {} twice",
                        points[i]
                    )));
                }
            }
        }
        let c = Constellation { points };
        if c.mean_energy() <= 0.0 {
            return Err(Error::invalid("constellation mean energy must be > 0"));
        }
        Ok(c)
    }

    /// The 4-PAM alphabet `{-3, -1, 1, 3}` used as the default throughout.
    pub fn pam4() -> Self {
        Constellation { points: vec![-3.0, -1.0, 1.0, 3.0] }
    }

    /// Number of symbols `M`.
    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// Symbol value at index `i`.
    pub fn point(&self, i: usize) -> f64 {
        self.points[i]
    }

    /// All symbol values in index order.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Index of an exact symbol value, if present.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.points.iter().position(|&p| p == value)
    }

    /// Average symbol energy `E_s = mean(p^2)` under equal weighting.
    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p * p).sum::<f64>() / self.points.len() as f64
    }
}

/// A length-`K` tuple of constellation indices.
///
/// Ordering is lexicographic in the indices, which is the tie-break order used
/// everywhere a single codeword must be picked from a set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Codeword(pub Vec<usize>);

impl Codeword {
    /// Codeword from its lexicographic rank in the `M^K` enumeration
    /// (index of the last symbol varies fastest).
    pub fn from_rank(rank: usize, m: usize, k: usize) -> Self {
        let mut idx = vec![0; k];
        let mut r = rank;
        for slot in idx.iter_mut().rev() {
            *slot = r % m;
            r /= m;
        }
        Codeword(idx)
    }

    /// Lexicographic rank of this codeword in the `M^K` enumeration.
    pub fn rank(&self, m: usize) -> usize {
        self.0.iter().fold(0, |acc, &i| acc * m + i)
    }

    /// Number of symbols `K`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True if the codeword has no symbols.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Constellation indices.
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Symbol values under `constellation`.
    pub fn symbols(&self, constellation: &Constellation) -> Vec<f64> {
        self.0.iter().map(|&i| constellation.point(i)).collect()
    }

    /// Number of positions where two codewords disagree.
    pub fn symbol_errors(&self, other: &Codeword) -> usize {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pam4_energy_is_five() {
        assert_eq!(Constellation::pam4().mean_energy(), 5.0);
    }

    #[test]
    fn rejects_degenerate_alphabets() {
        assert!(Constellation::new(vec![1.0]).is_err());
        assert!(Constellation::new(vec![1.0, 1.0]).is_err());
        assert!(Constellation::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(Constellation::new(vec![-1.0, 1.0]).is_ok());
    }

    #[test]
    fn rank_round_trips() {
        let (m, k) = (4, 3);
        for rank in 0..m_pow(m, k) {
            let cw = Codeword::from_rank(rank, m, k);
            assert_eq!(cw.rank(m), rank);
        }
        // Last symbol varies fastest: rank 1 is (0, 0, 1).
        assert_eq!(Codeword::from_rank(1, m, k).indices(), &[0, 0, 1]);
    }

    fn m_pow(m: usize, k: usize) -> usize {
        (0..k).fold(1, |a, _| a * m)
    }

    #[test]
    fn ordering_is_lexicographic() {
        let a = Codeword(vec![1, 2]);
        let b = Codeword(vec![2, 2]);
        let c = Codeword(vec![1, 3]);
        assert!(a < b);
        assert!(a < c);
        assert!(c < b);
    }

    #[test]
    fn symbol_errors_counts_positions() {
        let a = Codeword(vec![0, 1, 2]);
        let b = Codeword(vec![0, 2, 2]);
        assert_eq!(a.symbol_errors(&b), 1);
        assert_eq!(a.symbol_errors(&a), 0);
    }

    #[test]
    fn symbols_map_through_constellation() {
        let c = Constellation::pam4();
        assert_eq!(Codeword(vec![2, 2]).symbols(&c), vec![1.0, 1.0]);
        assert_eq!(Codeword(vec![1, 2]).symbols(&c), vec![-1.0, 1.0]);
        assert_eq!(c.index_of(3.0), Some(3));
        assert_eq!(c.index_of(0.5), None);
    }
}
