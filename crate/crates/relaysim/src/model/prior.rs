//! Prior distributions over codewords.

use rand::Rng;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::Error;
use crate::model::constellation::{Codeword, Constellation};
use crate::Result;

/// Tolerance on the total prior mass after construction.
const MASS_TOL: f64 = 1e-12;

/// A probability mass function over all `M^K` codewords, stored densely in
/// lexicographic rank order.
///
/// Deserialization revalidates the pmf, so a prior loaded from JSON is as
/// trustworthy as one built through the constructors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodewordPrior {
    /// Symbols per codeword.
    k: usize,
    /// Alphabet size the ranks are taken over.
    m: usize,
    /// `pmf[rank]` is the prior probability of the codeword with that rank.
    pmf: Vec<f64>,
    /// Cached `ln(pmf)`, `-inf` outside the support.
    #[serde(skip)]
    ln_pmf: Vec<f64>,
}

impl<'de> Deserialize<'de> for CodewordPrior {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Doc {
            k: usize,
            m: usize,
            pmf: Vec<f64>,
        }
        let doc = Doc::deserialize(d)?;
        CodewordPrior::from_pmf(doc.m, doc.k, doc.pmf).map_err(D::Error::custom)
    }
}

impl CodewordPrior {
    /// Prior from an explicit dense pmf in rank order.
    pub fn from_pmf(m: usize, k: usize, pmf: Vec<f64>) -> Result<Self> {
        if m < 2 || k == 0 {
            return Err(Error::invalid(format!("prior needs m >= 2 and k >= 1, got m={m} k={k}")));
        }
        let expect = checked_pow(m, k)?;
        if pmf.len() != expect {
            return Err(Error::invalid(format!(
                "prior pmf has {} entries, expected m^k = {expect}",
                pmf.len()
            )));
        }
        if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("prior probabilities must be finite and >= 0"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(format!("prior mass sums to {total}, expected 1")));
        }
        let ln_pmf = pmf.iter().map(|p| p.ln()).collect();
        Ok(CodewordPrior { k, m, pmf, ln_pmf })
    }

    /// Uniform prior over all `M^K` codewords.
    pub fn uniform(m: usize, k: usize) -> Result<Self> {
        let n = checked_pow(m, k)?;
        Self::from_pmf(m, k, vec![1.0 / n as f64; n])
    }

    /// Prior that puts the listed mass on the listed codewords (given as
    /// symbol values) and spreads the remaining mass equally over all other
    /// codewords.
    pub fn spiked(
        constellation: &Constellation,
        k: usize,
        spikes: &[(&[f64], f64)],
    ) -> Result<Self> {
        let m = constellation.order();
        let n = checked_pow(m, k)?;
        let spike_mass: f64 = spikes.iter().map(|(_, p)| p).sum();
        if spikes.iter().any(|(_, p)| *p < 0.0) || spike_mass > 1.0 + MASS_TOL {
            return Err(Error::invalid("spike masses must be >= 0 and sum to at most 1"));
        }
        let rest = n - spikes.len();
        let fill = if rest == 0 { 0.0 } else { (1.0 - spike_mass) / rest as f64 };
        let mut pmf = vec![fill; n];
        for (symbols, p) in spikes {
            if symbols.len() != k {
                return Err(Error::invalid(format!(
                    "spike codeword has {} symbols, expected {k}",
                    symbols.len()
                )));
            }
            let mut indices = Vec::with_capacity(k);
            for &v in *symbols {
                let i = constellation
                    .index_of(v)
                    .ok_or_else(|| Error::invalid(format!("symbol {v} not in constellation")))?;
                indices.push(i);
            }
            let rank = Codeword(indices).rank(m);
            if pmf[rank] != fill {
                return Err(Error::invalid("duplicate spike codeword"));
            }
            pmf[rank] = *p;
        }
        Self::from_pmf(m, k, pmf)
    }

    /// Symbols per codeword.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Alphabet size.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of codewords `M^K`.
    pub fn support_size(&self) -> usize {
        self.pmf.len()
    }

    /// Dense pmf in rank order.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Probability of a codeword.
    pub fn prob(&self, s: &Codeword) -> f64 {
        self.pmf[s.rank(self.m)]
    }

    /// Log probability of a codeword; `-inf` outside the support.
    pub fn ln_prob(&self, s: &Codeword) -> f64 {
        self.ln_pmf[s.rank(self.m)]
    }

    /// Log probability by rank; `-inf` outside the support.
    pub fn ln_prob_rank(&self, rank: usize) -> f64 {
        self.ln_pmf[rank]
    }

    /// The most probable codeword, lexicographically smallest on ties.
    pub fn mode(&self) -> Codeword {
        let mut best = 0;
        for (rank, p) in self.pmf.iter().enumerate() {
            if *p > self.pmf[best] {
                best = rank;
            }
        }
        Codeword::from_rank(best, self.m, self.k)
    }

    /// One draw from the prior by inverse-CDF walk.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Codeword {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (rank, p) in self.pmf.iter().enumerate() {
            acc += p;
            if u < acc {
                return Codeword::from_rank(rank, self.m, self.k);
            }
        }
        // Mass sums to 1 up to rounding; fall back to the last supported rank.
        let last = self.pmf.iter().rposition(|p| *p > 0.0).unwrap_or(self.pmf.len() - 1);
        Codeword::from_rank(last, self.m, self.k)
    }
}

/// `m^k` with an overflow guard.
fn checked_pow(m: usize, k: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..k {
        acc = acc
            .checked_mul(m)
            .ok_or_else(|| Error::invalid(format!("m^k overflows for m={m}, k={k}")))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn default_prior() -> CodewordPrior {
        CodewordPrior::spiked(&Constellation::pam4(), 2, &[(&[1.0, 1.0], 0.3), (&[-1.0, 1.0], 0.3)])
            .unwrap()
    }

    #[test]
    fn spiked_prior_masses() {
        let p = default_prior();
        assert_eq!(p.support_size(), 16);
        assert_eq!(p.prob(&Codeword(vec![2, 2])), 0.3);
        assert_eq!(p.prob(&Codeword(vec![1, 2])), 0.3);
        let fill = 0.4 / 14.0;
        assert!((p.prob(&Codeword(vec![0, 0])) - fill).abs() < 1e-15);
        assert!((p.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mode_breaks_ties_lexicographically() {
        // Both spikes carry 0.3; (1, 2) precedes (2, 2).
        assert_eq!(default_prior().mode(), Codeword(vec![1, 2]));
        let u = CodewordPrior::uniform(4, 2).unwrap();
        assert_eq!(u.mode(), Codeword(vec![0, 0]));
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(CodewordPrior::from_pmf(4, 1, vec![0.5, 0.2, 0.2, 0.2]).is_err());
        assert!(CodewordPrior::from_pmf(4, 1, vec![-0.1, 0.5, 0.3, 0.3]).is_err());
        assert!(CodewordPrior::from_pmf(4, 1, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn sampling_frequencies_match_pmf() {
        let p = default_prior();
        let n = 100_000;
        let mut rng = RngStream::new(17).rng();
        let mut counts = vec![0usize; p.support_size()];
        for _ in 0..n {
            counts[p.sample(&mut rng).rank(4)] += 1;
        }
        let tv = counts
            .iter()
            .zip(p.pmf())
            .map(|(c, q)| (*c as f64 / n as f64 - q).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "tv = {tv}");
    }

    #[test]
    fn serde_round_trip_restores_log_cache() {
        let p = default_prior();
        let json = serde_json::to_string(&p).unwrap();
        let back: CodewordPrior = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.ln_prob(&Codeword(vec![2, 2])), 0.3_f64.ln());
        // Tampered mass is rejected on load.
        let bad = json.replace("0.3,", "0.9,");
        assert!(serde_json::from_str::<CodewordPrior>(&bad).is_err());
    }

    #[test]
    fn zero_probability_codewords_stay_unsampled() {
        let p = CodewordPrior::from_pmf(2, 1, vec![1.0, 0.0]).unwrap();
        let mut rng = RngStream::new(3).rng();
        for _ in 0..1000 {
            assert_eq!(p.sample(&mut rng).indices(), &[0]);
        }
        assert_eq!(p.ln_prob(&Codeword(vec![1])), f64::NEG_INFINITY);
    }
}
