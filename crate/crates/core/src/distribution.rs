//! Probability distributions on the integer lattice.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance used when a distribution is re-validated after loading from disk.
pub const LOAD_NORM_TOL: f64 = 1e-9;

/// Probabilities on the contiguous sites `start..start + probs.len()`.
///
/// Sites with zero probability (for example the parity-forbidden sites of a
/// walk started from a point mass) are kept, so the CDF is defined on every
/// integer of the window. `parity` records that only sites `n` with
/// `n mod 2 == parity` can carry mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    start: i64,
    probs: Vec<f64>,
    parity: Option<u8>,
}

impl Distribution {
    /// Wraps non-negative weights. Normalization is not enforced here; see
    /// [`Distribution::check_normalized`].
    pub fn new(start: i64, probs: Vec<f64>) -> Result<Self> {
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::invalid(format!(
                "probability at site {} is {p}",
                start + i as i64
            )));
        }
        Ok(Distribution { start, probs, parity: None })
    }

    /// Divides the weights by their sum.
    pub fn normalized(start: i64, mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::invalid("weights have zero or non-finite total"));
        }
        for w in &mut weights {
            *w /= total;
        }
        Distribution::new(start, weights)
    }

    pub fn point(at: i64) -> Self {
        Distribution {
            start: at,
            probs: vec![1.0],
            parity: Some(at.rem_euclid(2) as u8),
        }
    }

    pub(crate) fn from_parts(start: i64, probs: Vec<f64>, parity: Option<u8>) -> Self {
        Distribution { start, probs, parity }
    }

    pub fn with_parity(mut self, parity: Option<u8>) -> Self {
        self.parity = parity.map(|p| p % 2);
        self
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last site of the window (inclusive).
    pub fn end(&self) -> i64 {
        self.start + self.probs.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn parity(&self) -> Option<u8> {
        self.parity
    }

    /// Probability at site `n`; zero outside the window.
    pub fn prob(&self, n: i64) -> f64 {
        let i = n - self.start;
        if i < 0 || i >= self.probs.len() as i64 {
            0.0
        } else {
            self.probs[i as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(i, &p)| (self.start + i as i64, p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let total = self.total();
        if (total - 1.0).abs() > tol {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, expected 1 within {tol:e}"
            )));
        }
        Ok(())
    }

    /// `sum_n n^j p(n)`. Cancellation makes orders above 8 unreliable.
    pub fn moment(&self, j: u32) -> f64 {
        self.iter().map(|(n, p)| (n as f64).powi(j as i32) * p).sum()
    }

    /// `sum_n ((n - shift) / scale)^j p(n)`.
    pub fn scaled_moment(&self, j: u32, shift: f64, scale: f64) -> f64 {
        self.iter()
            .map(|(n, p)| ((n as f64 - shift) / scale).powi(j as i32) * p)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter().map(|(n, p)| (n as f64 - m).powi(2) * p).sum()
    }

    /// `sum_n |p(n) - q(n)|` over the union of both windows.
    pub fn l1_distance(&self, other: &Distribution) -> f64 {
        let lo = self.start.min(other.start);
        let hi = self.end().max(other.end());
        (lo..=hi).map(|n| (self.prob(n) - other.prob(n)).abs()).sum()
    }

    /// Half the L1 distance.
    pub fn total_variation(&self, other: &Distribution) -> f64 {
        0.5 * self.l1_distance(other)
    }

    /// The same distribution with `extra` zero-probability sites on each side.
    pub fn padded(&self, extra: usize) -> Distribution {
        let mut probs = vec![0.0; extra];
        probs.extend_from_slice(&self.probs);
        probs.extend(std::iter::repeat(0.0).take(extra));
        Distribution {
            start: self.start - extra as i64,
            probs,
            parity: self.parity,
        }
    }

    /// True if every site of the wrong parity carries exactly zero mass.
    pub fn respects_parity(&self) -> bool {
        match self.parity {
            None => true,
            Some(par) => self
                .iter()
                .all(|(n, p)| n.rem_euclid(2) as u8 == par || p == 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_and_lookup() {
        let d = Distribution::new(-3, vec![0.125, 0.0, 0.625, 0.0, 0.125, 0.0, 0.125]).unwrap();
        assert_eq!(d.end(), 3);
        assert_eq!(d.prob(-1), 0.625);
        assert_eq!(d.prob(10), 0.0);
        assert!((d.moment(1) + 0.5).abs() < 1e-15);
        assert_eq!(d.moment(0), 1.0);
        assert!(d.check_normalized(1e-12).is_ok());
    }

    #[test]
    fn point_mass_moments_vanish() {
        let d = Distribution::point(0);
        for j in 1..=8 {
            assert_eq!(d.moment(j), 0.0);
        }
    }

    #[test]
    fn rejects_negative() {
        assert!(Distribution::new(0, vec![0.5, -0.1]).is_err());
        assert!(Distribution::new(0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn distances() {
        let a = Distribution::new(0, vec![0.5, 0.5]).unwrap();
        let b = Distribution::new(1, vec![0.5, 0.5]).unwrap();
        assert!((a.l1_distance(&b) - 1.0).abs() < 1e-15);
        assert!((a.total_variation(&b) - 0.5).abs() < 1e-15);
        assert_eq!(a.padded(3).l1_distance(&a), 0.0);
    }

    #[test]
    fn normalization_check() {
        let d = Distribution::new(0, vec![0.5, 0.4]).unwrap();
        assert!(d.check_normalized(1e-9).is_err());
        let n = Distribution::normalized(0, vec![1.0, 3.0]).unwrap();
        assert_eq!(n.probs(), &[0.25, 0.75]);
    }
}
