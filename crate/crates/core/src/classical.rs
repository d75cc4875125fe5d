//! Classical walks: the biased simple random walk, the lazy walk with a
//! final-time-dependent jump rate, and its continuous-time limit.

use serde::Serialize;

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::laws::LimitLaw;
use crate::specfun::{bessel_i_scaled, ln_gamma};
use crate::stats::{report_row, ConvergenceReport, Scaling};

/// Law of `X_t = Y_1 + ... + Y_t` with `P(Y = +1) = p`, `P(Y = -1) = 1 - p`:
/// `P(X_t = 2k - t) = C(t, k) p^k (1-p)^(t-k)`.
pub fn rw_distribution(p: f64, t: u64) -> Result<Distribution> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0, 1], got {p}")));
    }
    let n = t as usize;
    let mut probs = vec![0.0; 2 * n + 1];
    let parity = Some((t % 2) as u8);
    if p == 0.0 || p == 1.0 {
        probs[if p == 1.0 { 2 * n } else { 0 }] = 1.0;
        return Ok(Distribution::new(-(t as i64), probs)?.with_parity(parity));
    }
    // Start from the mode, where the log-space value is accurate, and walk
    // outwards with the ratio P(k+1)/P(k) = (t-k)/(k+1) * p/(1-p).
    let tf = t as f64;
    let mode = (((tf + 1.0) * p).floor() as usize).min(n);
    let kf = mode as f64;
    let ln_mode = ln_gamma(tf + 1.0)? - ln_gamma(kf + 1.0)? - ln_gamma(tf - kf + 1.0)?
        + kf * p.ln()
        + (tf - kf) * (1.0 - p).ln();
    let odds = p / (1.0 - p);
    let mut binom = vec![0.0; n + 1];
    binom[mode] = ln_mode.exp();
    for k in mode..n {
        binom[k + 1] = binom[k] * (n - k) as f64 / (k + 1) as f64 * odds;
    }
    for k in (0..mode).rev() {
        binom[k] = binom[k + 1] * (k + 1) as f64 / (n - k) as f64 / odds;
    }
    let total: f64 = binom.iter().sum();
    for (k, b) in binom.into_iter().enumerate() {
        probs[2 * k] = b / total;
    }
    Ok(Distribution::new(-(t as i64), probs)?.with_parity(parity))
}

/// Lazy walk `p_m(x) = (1 - r(T)) p_{m-1}(x) + r(T)/2 (p_{m-1}(x-1) + p_{m-1}(x+1))`
/// with `r(T) = r / T^alpha`, run to `m = T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LazyRun {
    pub final_time: u64,
    pub alpha: f64,
    pub r: f64,
}

impl LazyRun {
    pub fn new(final_time: u64, alpha: f64, r: f64) -> Result<Self> {
        let run = LazyRun { final_time, alpha, r };
        run.validate()?;
        Ok(run)
    }

    pub fn validate(&self) -> Result<()> {
        if self.final_time == 0 {
            return Err(Error::invalid("lazy walk needs T >= 1"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        // r = 1 is allowed: with alpha = 0 it is the simple walk.
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(Error::invalid(format!("r must lie in (0, 1], got {}", self.r)));
        }
        Ok(())
    }

    /// Jump probability per step.
    pub fn rate(&self) -> f64 {
        self.r / (self.final_time as f64).powf(self.alpha)
    }

    /// `p_0, p_1, ..., p_T`.
    pub fn steps(&self) -> LazySteps {
        LazySteps { rate: self.rate(), remaining: self.final_time + 1, current: None }
    }
}

/// Iterator over the intermediate laws of a [`LazyRun`].
#[derive(Debug, Clone)]
pub struct LazySteps {
    rate: f64,
    remaining: u64,
    current: Option<(i64, Vec<f64>)>,
}

impl Iterator for LazySteps {
    type Item = Distribution;

    fn next(&mut self) -> Option<Distribution> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let next = match self.current.take() {
            None => (0, vec![1.0]),
            Some((lo, p)) => {
                let stay = 1.0 - self.rate;
                let hop = 0.5 * self.rate;
                let mut q = vec![0.0; p.len() + 2];
                for (i, &v) in p.iter().enumerate() {
                    q[i] += hop * v;
                    q[i + 1] += stay * v;
                    q[i + 2] += hop * v;
                }
                (lo - 1, q)
            }
        };
        let d = Distribution::from_parts(next.0, next.1.clone(), None);
        self.current = Some(next);
        Some(d)
    }
}

/// `p_T` of the lazy walk.
pub fn lazy_rw(run: &LazyRun) -> Result<Distribution> {
    run.validate()?;
    let rate = run.rate();
    let stay = 1.0 - rate;
    let hop = 0.5 * rate;
    let n = run.final_time as usize;
    let mut p = vec![0.0; 2 * n + 1];
    let mut q = vec![0.0; 2 * n + 1];
    p[n] = 1.0;
    for m in 1..=n {
        // Support after m steps is n-m..=n+m.
        for i in n - m..=n + m {
            let left = if i > n - m { p[i - 1] } else { 0.0 };
            let right = if i < n + m { p[i + 1] } else { 0.0 };
            q[i] = stay * p[i] + hop * (left + right);
        }
        std::mem::swap(&mut p, &mut q);
    }
    Distribution::new(-(n as i64), p)
}

/// Continuous-time walk `m_t(x) = e^{-t} I_|x|(t)`.
pub fn ctrw_pmf(t: f64, x: i64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t must be finite and non-negative, got {t}")));
    }
    let n = i32::try_from(x.unsigned_abs()).map_err(|_| Error::invalid("site out of range"))?;
    bessel_i_scaled(n, t)
}

/// Kolmogorov distance between the exactly standardized binomial walk and
/// the standard normal law.
pub fn clt_report(p: f64, t: u64) -> Result<ConvergenceReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p must lie in (0, 1), got {p}")));
    }
    if t < 10 {
        return Err(Error::invalid(format!("CLT report needs t >= 10, got {t}")));
    }
    let d = rw_distribution(p, t)?;
    let law = LimitLaw::normal(0.0, 1.0)?;
    let scaling = Scaling::Standardized { p };
    let (ks, deltas) = report_row(&d, t as f64, &scaling, &law)?;
    Ok(ConvergenceReport {
        law,
        scaling,
        scaling_description: scaling.describe(),
        times: vec![t as f64],
        ks: vec![ks],
        moment_deltas: vec![deltas],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fair_two_steps() {
        let d = rw_distribution(0.5, 2).unwrap();
        assert_eq!((d.prob(-2), d.prob(0), d.prob(2)), (0.25, 0.5, 0.25));
        assert_eq!(d.prob(1), 0.0);
    }

    #[test]
    fn certain_step() {
        let d = rw_distribution(1.0, 5).unwrap();
        assert_eq!(d.prob(5), 1.0);
        assert_eq!(d.total(), 1.0);
        assert!(rw_distribution(1.2, 3).is_err());
    }

    #[test]
    fn binomial_mean_variance() {
        let d = rw_distribution(0.5, 1000).unwrap();
        assert!(d.mean().abs() < 1e-12);
        assert!((d.variance() - 1000.0).abs() < 1e-9);
        let d = rw_distribution(0.9, 1000).unwrap();
        assert!((d.mean() - 800.0).abs() < 1e-9);
        assert!((d.variance() - 360.0).abs() < 1e-8);
    }

    #[test]
    fn lazy_one_step() {
        let d = lazy_rw(&LazyRun::new(1, 0.0, 0.3).unwrap()).unwrap();
        assert!((d.prob(-1) - 0.15).abs() < 1e-15);
        assert!((d.prob(0) - 0.7).abs() < 1e-15);
        assert!((d.prob(1) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn lazy_unit_rate_is_simple_walk() {
        let lazy = lazy_rw(&LazyRun::new(200, 0.0, 1.0).unwrap()).unwrap();
        let rw = rw_distribution(0.5, 200).unwrap();
        assert!(lazy.l1_distance(&rw) < 1e-12);
    }

    #[test]
    fn steps_iterator_matches_final_law() {
        let run = LazyRun::new(30, 0.5, 0.8).unwrap();
        let all: Vec<Distribution> = run.steps().collect();
        assert_eq!(all.len(), 31);
        for p in &all {
            assert!(p.check_normalized(1e-12).is_ok());
            assert!(p.probs().iter().all(|&v| v >= 0.0));
        }
        assert!(all[30].l1_distance(&lazy_rw(&run).unwrap()) < 1e-14);
    }

    #[test]
    fn ctrw_values() {
        assert_eq!(ctrw_pmf(0.0, 0).unwrap(), 1.0);
        assert!((ctrw_pmf(1.0, 0).unwrap() - 0.465_759_607_593_640_6).abs() < 1e-12);
        for t in [1.0, 5.0, 20.0] {
            let s: f64 = (-200..=200).map(|x| ctrw_pmf(t, x).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-10, "t={t}: {s}");
        }
    }

    #[test]
    fn clt_improves() {
        let small = clt_report(0.5, 10).unwrap().ks[0];
        let big = clt_report(0.5, 10_000).unwrap().ks[0];
        assert!(big < 0.01 && small > big);
        assert!(clt_report(0.9, 10_000).unwrap().ks[0] < 0.02);
    }
}
