//! Closed-form limit laws of quantum and classical walks.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::coin::{Coin2, CoinState};
use crate::error::{Error, Result};
use crate::quad::{integrate_band, simpson_estimate, QuadEstimate};
use crate::specfun::{bessel_i_scaled, bessel_j_orders};

/// Target absolute accuracy of quadrature-based CDFs and moments.
pub const LAW_QUAD_TOL: f64 = 1e-11;

/// Limit laws, tagged by family.
///
/// `Konno`, `Arcsine`, `FtdA` and `Normal` are absolutely continuous;
/// `BesselParity`, `ModBessel` and `Delta` live on the integers (`Delta` on
/// an arbitrary point).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LimitLaw {
    /// Density `sqrt(1-r^2) (1 - drift x) / (pi (1-x^2) sqrt(r^2-x^2))` on `(-r, r)`.
    Konno { r: f64, drift: f64 },
    /// Density `1 / (pi sqrt(|gamma|^2 - x^2))` on `(-|gamma|, |gamma|)`.
    Arcsine { gamma: Complex64 },
    /// Density `(1 - c x / y) / (pi sqrt(y^2 - x^2))` on `(-y, y)` with
    /// `c = q_L conj(q_R) + conj(q_L) q_R`.
    FtdA { y: f64, q_l: Complex64, q_r: Complex64 },
    /// Mean `mu`, variance `nu`.
    Normal { mu: f64, nu: f64 },
    /// `J(x; t)` restricted to `x = parity (mod 2)`.
    BesselParity { t_eff: f64, q_l: Complex64, q_r: Complex64, parity: u8 },
    /// `e^{-r} I_|n|(r)` on the integers.
    ModBessel { r: f64 },
    /// Unit mass at `at`.
    Delta { at: f64 },
}

/// Drift coefficient of the ballistic limit of a walk with coin `coin`
/// started in `init`:
/// `|q_L|^2 - |q_R|^2 + (a q_L conj(b q_R) + conj(a q_L) b q_R) / |a|^2`.
pub fn konno_drift(coin: &Coin2, init: &CoinState) -> Result<f64> {
    let a = coin.a();
    let b = coin.b();
    let abs2 = a.norm_sqr();
    if abs2 < 1e-24 {
        return Err(Error::DegenerateCoin("|a| = 0 has no ballistic band".into()));
    }
    let (ql, qr) = (init.q_l(), init.q_r());
    let cross = a * ql * (b * qr).conj();
    Ok(ql.norm_sqr() - qr.norm_sqr() + 2.0 * cross.re / abs2)
}

fn state_coherence(q_l: Complex64, q_r: Complex64) -> f64 {
    2.0 * (q_l * q_r.conj()).re
}

fn check_state(q_l: Complex64, q_r: Complex64) -> Result<()> {
    CoinState::new(q_l, q_r).map(|_| ())
}

/// Half-width of the integer window that carries all but ~1e-16 of a
/// Bessel-type law with argument `z`.
fn bessel_cutoff(z: f64) -> i64 {
    (z.ceil() + 40.0 + 10.0 * z.cbrt()).ceil() as i64
}

impl LimitLaw {
    pub fn konno(r: f64, drift: f64) -> Result<Self> {
        let law = LimitLaw::Konno { r, drift };
        law.validate()?;
        Ok(law)
    }

    /// Konno law of a walk with coin `coin` started in `init`.
    pub fn konno_for(coin: &Coin2, init: &CoinState) -> Result<Self> {
        LimitLaw::konno(coin.a().norm(), konno_drift(coin, init)?)
    }

    pub fn arcsine(gamma: Complex64) -> Result<Self> {
        let law = LimitLaw::Arcsine { gamma };
        law.validate()?;
        Ok(law)
    }

    pub fn ftd_a(y: f64, init: &CoinState) -> Result<Self> {
        let law = LimitLaw::FtdA { y, q_l: init.q_l(), q_r: init.q_r() };
        law.validate()?;
        Ok(law)
    }

    pub fn normal(mu: f64, nu: f64) -> Result<Self> {
        let law = LimitLaw::Normal { mu, nu };
        law.validate()?;
        Ok(law)
    }

    pub fn bessel_parity(t_eff: f64, init: &CoinState, parity: u8) -> Result<Self> {
        let law = LimitLaw::BesselParity { t_eff, q_l: init.q_l(), q_r: init.q_r(), parity: parity % 2 };
        law.validate()?;
        Ok(law)
    }

    pub fn mod_bessel(r: f64) -> Result<Self> {
        let law = LimitLaw::ModBessel { r };
        law.validate()?;
        Ok(law)
    }

    pub fn delta(at: f64) -> Result<Self> {
        let law = LimitLaw::Delta { at };
        law.validate()?;
        Ok(law)
    }

    pub fn name(&self) -> &'static str {
        match self {
            LimitLaw::Konno { .. } => "konno",
            LimitLaw::Arcsine { .. } => "arcsine",
            LimitLaw::FtdA { .. } => "ftd_a",
            LimitLaw::Normal { .. } => "normal",
            LimitLaw::BesselParity { .. } => "bessel_parity",
            LimitLaw::ModBessel { .. } => "mod_bessel",
            LimitLaw::Delta { .. } => "delta",
        }
    }

    /// Checks the parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::invalid(m));
        match *self {
            LimitLaw::Konno { r, drift } => {
                if !(r > 0.0 && r < 1.0) {
                    return fail(format!("Konno law needs 0 < r < 1, got {r}"));
                }
                // 1 - drift x >= 0 on (-r, r); every coin and initial state satisfies this.
                if !(drift.is_finite() && drift.abs() * r <= 1.0 + 1e-12) {
                    return fail(format!("Konno drift coefficient must satisfy |drift| r <= 1, got drift {drift} with r {r}"));
                }
            }
            LimitLaw::Arcsine { gamma } => {
                if !(gamma.norm() > 0.0 && gamma.norm().is_finite()) {
                    return fail(format!("arcsine law needs gamma != 0, got {gamma}"));
                }
            }
            LimitLaw::FtdA { y, q_l, q_r } => {
                if !(y > 0.0 && y.is_finite()) {
                    return fail(format!("FTD law needs y > 0, got {y}"));
                }
                check_state(q_l, q_r)?;
            }
            LimitLaw::Normal { mu, nu } => {
                if !(mu.is_finite() && nu > 0.0 && nu.is_finite()) {
                    return fail(format!("normal law needs finite mean and variance > 0, got ({mu}, {nu})"));
                }
            }
            LimitLaw::BesselParity { t_eff, q_l, q_r, parity } => {
                if !(t_eff > 0.0 && t_eff.is_finite()) {
                    return fail(format!("Bessel law needs t > 0, got {t_eff}"));
                }
                if parity > 1 {
                    return fail(format!("parity must be 0 or 1, got {parity}"));
                }
                check_state(q_l, q_r)?;
            }
            LimitLaw::ModBessel { r } => {
                if !(r > 0.0 && r.is_finite()) {
                    return fail(format!("modified Bessel law needs r > 0, got {r}"));
                }
            }
            LimitLaw::Delta { at } => {
                if !at.is_finite() {
                    return fail("delta law needs a finite location".into());
                }
            }
        }
        Ok(())
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, LimitLaw::BesselParity { .. } | LimitLaw::ModBessel { .. } | LimitLaw::Delta { .. })
    }

    /// Band edge of the continuous laws with compact support.
    pub fn band_edge(&self) -> Option<f64> {
        match *self {
            LimitLaw::Konno { r, .. } => Some(r),
            LimitLaw::Arcsine { gamma } => Some(gamma.norm()),
            LimitLaw::FtdA { y, .. } => Some(y),
            _ => None,
        }
    }

    /// `pdf(x) * sqrt(edge^2 - x^2)` for the band laws.
    fn band_regular(&self, x: f64) -> f64 {
        match *self {
            LimitLaw::Konno { r, drift } => (1.0 - r * r).sqrt() * (1.0 - drift * x) / (PI * (1.0 - x * x)),
            LimitLaw::Arcsine { .. } => 1.0 / PI,
            LimitLaw::FtdA { y, q_l, q_r } => (1.0 - state_coherence(q_l, q_r) * x / y) / PI,
            _ => unreachable!("band_regular on a law without a band"),
        }
    }

    /// Density of continuous laws, probability mass of discrete ones.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::invalid("pdf needs a finite argument"));
        }
        if let Some(edge) = self.band_edge() {
            if x.abs() == edge {
                return Err(Error::SingularEndpoint { x });
            }
            if x.abs() > edge {
                return Ok(0.0);
            }
            return Ok(self.band_regular(x) / (edge * edge - x * x).sqrt());
        }
        match *self {
            LimitLaw::Normal { mu, nu } => Ok((-(x - mu).powi(2) / (2.0 * nu)).exp() / (2.0 * PI * nu).sqrt()),
            LimitLaw::Delta { at } => Ok(if x == at { 1.0 } else { 0.0 }),
            _ => {
                if x.fract() != 0.0 {
                    return Ok(0.0);
                }
                self.pmf(x as i64)
            }
        }
    }

    /// Mass at integer `n` for the lattice laws.
    pub fn pmf(&self, n: i64) -> Result<f64> {
        match *self {
            LimitLaw::BesselParity { t_eff, q_l, q_r, parity } => {
                if n.rem_euclid(2) as u8 != parity {
                    return Ok(0.0);
                }
                let m = n.unsigned_abs() as usize + 1;
                let js = bessel_j_orders(m, t_eff)?;
                let j = |k: i64| -> f64 {
                    let v = js[k.unsigned_abs() as usize];
                    if k < 0 && k % 2 != 0 {
                        -v
                    } else {
                        v
                    }
                };
                let c = state_coherence(q_l, q_r);
                let x = n as f64;
                let val = (1.0 - c * 2.0 * x / t_eff) * j(n).powi(2)
                    + q_l.norm_sqr() * j(n - 1).powi(2)
                    + q_r.norm_sqr() * j(n + 1).powi(2);
                Ok(val.max(0.0))
            }
            LimitLaw::ModBessel { r } => bessel_i_scaled(n.clamp(i32::MIN as i64, i32::MAX as i64) as i32, r),
            LimitLaw::Delta { at } => Ok(if n as f64 == at { 1.0 } else { 0.0 }),
            _ => Err(Error::invalid(format!("{} is not a lattice law", self.name()))),
        }
    }

    /// All atoms `(n, mass)` with non-negligible mass, in increasing order.
    pub fn atoms(&self) -> Result<Vec<(f64, f64)>> {
        match *self {
            LimitLaw::BesselParity { t_eff, q_l, q_r, parity } => {
                let cut = bessel_cutoff(t_eff);
                let js = bessel_j_orders(cut as usize + 2, t_eff)?;
                let j2 = |k: i64| js[k.unsigned_abs() as usize].powi(2);
                let c = state_coherence(q_l, q_r);
                Ok((-cut..=cut)
                    .filter(|n| n.rem_euclid(2) as u8 == parity)
                    .map(|n| {
                        let x = n as f64;
                        let m = (1.0 - c * 2.0 * x / t_eff) * j2(n)
                            + q_l.norm_sqr() * j2(n - 1)
                            + q_r.norm_sqr() * j2(n + 1);
                        (x, m.max(0.0))
                    })
                    .collect())
            }
            LimitLaw::ModBessel { r } => {
                let cut = bessel_cutoff(r);
                (-cut..=cut)
                    .map(|n| Ok((n as f64, bessel_i_scaled(n as i32, r)?)))
                    .collect()
            }
            LimitLaw::Delta { at } => Ok(vec![(at, 1.0)]),
            _ => Ok(Vec::new()),
        }
    }

    /// Points where the CDF is not differentiable: band edges or atoms.
    pub fn breakpoints(&self) -> Result<Vec<f64>> {
        if let Some(edge) = self.band_edge() {
            return Ok(vec![-edge, edge]);
        }
        Ok(self.atoms()?.into_iter().filter(|(_, m)| *m > 0.0).map(|(x, _)| x).collect())
    }

    fn band_cdf(&self, x: f64) -> QuadEstimate {
        let edge = self.band_edge().expect("band law");
        integrate_band(|u| self.band_regular(u), edge, x, LAW_QUAD_TOL)
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_impl(x, false)
    }

    /// `P(X < x)`; equals [`LimitLaw::cdf`] for continuous laws.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.cdf_impl(x, true)
    }

    fn cdf_impl(&self, x: f64, strict: bool) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match *self {
            LimitLaw::Arcsine { gamma } => {
                let g = gamma.norm();
                if x <= -g {
                    0.0
                } else if x >= g {
                    1.0
                } else {
                    (x / g).asin() / PI + 0.5
                }
            }
            LimitLaw::Konno { .. } | LimitLaw::FtdA { .. } => {
                let edge = self.band_edge().unwrap();
                if x <= -edge {
                    0.0
                } else if x >= edge {
                    1.0
                } else {
                    self.band_cdf(x).value.clamp(0.0, 1.0)
                }
            }
            LimitLaw::Normal { mu, nu } => 0.5 * erfc(-(x - mu) / (2.0 * nu).sqrt()),
            LimitLaw::Delta { at } => {
                if x > at || (!strict && x == at) {
                    1.0
                } else {
                    0.0
                }
            }
            LimitLaw::BesselParity { .. } | LimitLaw::ModBessel { .. } => {
                let atoms = self.atoms().unwrap_or_default();
                let s: f64 = atoms
                    .iter()
                    .filter(|(n, _)| if strict { *n < x } else { *n <= x })
                    .map(|(_, m)| m)
                    .sum();
                s.clamp(0.0, 1.0)
            }
        }
    }

    /// CDF at each of the ascending points `xs`.
    ///
    /// Band laws integrate only the increments between neighbouring points,
    /// so the cost does not grow with the number of points.
    pub fn cdf_sorted(&self, xs: &[f64]) -> Result<Vec<f64>> {
        if xs.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::invalid("cdf_sorted needs ascending points"));
        }
        match *self {
            LimitLaw::Konno { .. } | LimitLaw::FtdA { .. } => {
                let edge = self.band_edge().unwrap();
                let mut out = Vec::with_capacity(xs.len());
                let mut theta = -std::f64::consts::FRAC_PI_2;
                let mut acc = 0.0;
                for &x in xs {
                    let next = (x / edge).clamp(-1.0, 1.0).asin();
                    if next > theta {
                        let est = simpson_estimate(|th: f64| self.band_regular(edge * th.sin()), theta, next, 1e-13, 1);
                        if !est.converged {
                            return Err(Error::Quadrature { achieved: est.error, wanted: 1e-13 });
                        }
                        acc += est.value;
                        theta = next;
                    }
                    out.push(if x <= -edge {
                        0.0
                    } else if x >= edge {
                        1.0
                    } else {
                        acc.clamp(0.0, 1.0)
                    });
                }
                Ok(out)
            }
            LimitLaw::BesselParity { .. } | LimitLaw::ModBessel { .. } => {
                let atoms = self.atoms()?;
                let mut out = Vec::with_capacity(xs.len());
                let mut i = 0;
                let mut acc = 0.0;
                for &x in xs {
                    while i < atoms.len() && atoms[i].0 <= x {
                        acc += atoms[i].1;
                        i += 1;
                    }
                    out.push(acc.clamp(0.0, 1.0));
                }
                Ok(out)
            }
            _ => Ok(xs.iter().map(|&x| self.cdf(x)).collect()),
        }
    }

    /// `E[X^j]`.
    pub fn moment(&self, j: u32) -> Result<f64> {
        if j > 8 {
            return Err(Error::invalid(format!("moment order {j} exceeds 8")));
        }
        if let Some(edge) = self.band_edge() {
            let est = integrate_band(|u| u.powi(j as i32) * self.band_regular(u), edge, edge, LAW_QUAD_TOL);
            if !est.converged {
                return Err(Error::Quadrature { achieved: est.error, wanted: LAW_QUAD_TOL });
            }
            return Ok(est.value);
        }
        match *self {
            LimitLaw::Normal { mu, nu } => {
                // E[(mu + sqrt(nu) Z)^j] with E[Z^{2m}] = (2m-1)!!
                let sd = nu.sqrt();
                let mut total = 0.0;
                let mut binom = 1.0;
                for k in 0..=j {
                    if k > 0 {
                        binom = binom * (j - k + 1) as f64 / k as f64;
                    }
                    if k % 2 == 0 {
                        let dfact: f64 = (1..k).step_by(2).map(|m| m as f64).product();
                        total += binom * mu.powi((j - k) as i32) * sd.powi(k as i32) * dfact;
                    }
                }
                Ok(total)
            }
            _ => Ok(self.atoms()?.iter().map(|(x, m)| x.powi(j as i32) * m).sum()),
        }
    }
}

/// `law_moment(law, j)`: `E[X^j]` under `law`.
pub fn law_moment(law: &LimitLaw, j: u32) -> Result<f64> {
    law.moment(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::{hadamard, make_coin};
    use crate::specfun::bessel_j;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn all_continuous() -> Vec<LimitLaw> {
        vec![
            LimitLaw::konno(FRAC_1_SQRT_2, 0.0).unwrap(),
            LimitLaw::konno(0.3, -1.0).unwrap(),
            LimitLaw::konno(0.9, 0.6).unwrap(),
            LimitLaw::arcsine(c(0.0, 2.0)).unwrap(),
            LimitLaw::ftd_a(0.5, &CoinState::normalized(c(1.0, 0.0), c(1.0, 0.0)).unwrap()).unwrap(),
            LimitLaw::ftd_a(1.0, &CoinState::left()).unwrap(),
            LimitLaw::normal(0.3, 2.0).unwrap(),
        ]
    }

    #[test]
    fn pdf_examples() {
        let k = LimitLaw::konno(FRAC_1_SQRT_2, 0.0).unwrap();
        assert!((k.pdf(0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        let a = LimitLaw::arcsine(c(1.0, 0.0)).unwrap();
        assert!((a.pdf(0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        let n = LimitLaw::normal(0.0, 1.0).unwrap();
        assert!((n.pdf(0.0).unwrap() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let bp = LimitLaw::bessel_parity(0.5, &CoinState::left(), 0).unwrap();
        let want = bessel_j(0, 0.5).unwrap().powi(2) + bessel_j(-1, 0.5).unwrap().powi(2);
        assert!((bp.pdf(0.0).unwrap() - want).abs() < 1e-15);
        assert_eq!(bp.pdf(1.0).unwrap(), 0.0);
        let mb = LimitLaw::mod_bessel(1.0).unwrap();
        assert!((mb.pdf(0.0).unwrap() - 0.465_759_607_593_640_8).abs() < 1e-12);
        assert!(matches!(k.pdf(FRAC_1_SQRT_2), Err(Error::SingularEndpoint { .. })));
        assert_eq!(k.pdf(0.9).unwrap(), 0.0);
    }

    #[test]
    fn construction_checks() {
        assert!(LimitLaw::konno(0.5, 2.5).is_err());
        assert!(LimitLaw::konno(0.5, 1.5).is_ok());
        assert!(LimitLaw::konno(1.0, 0.0).is_err());
        assert!(LimitLaw::arcsine(c(0.0, 0.0)).is_err());
        assert!(LimitLaw::normal(0.0, 0.0).is_err());
        assert!(LimitLaw::mod_bessel(-1.0).is_err());
    }

    #[test]
    fn cdf_examples() {
        let a = LimitLaw::arcsine(c(1.0, 0.0)).unwrap();
        assert_eq!(a.cdf(0.0), 0.5);
        let k = LimitLaw::konno(FRAC_1_SQRT_2, 0.0).unwrap();
        assert!((k.cdf(0.0) - 0.5).abs() < 1e-10);
        assert_eq!(k.cdf(-FRAC_1_SQRT_2), 0.0);
        assert_eq!(k.cdf(FRAC_1_SQRT_2), 1.0);
        let d = LimitLaw::delta(0.0).unwrap();
        assert_eq!((d.cdf_left(0.0), d.cdf(0.0)), (0.0, 1.0));
    }

    #[test]
    fn band_cdf_reaches_one_at_edge() {
        for law in all_continuous() {
            if let Some(edge) = law.band_edge() {
                let est = law.band_cdf(edge);
                assert!((est.value - 1.0).abs() < 1e-9, "{law:?}: {}", est.value);
                assert!(est.converged);
            }
        }
    }

    #[test]
    fn cdfs_are_monotone_and_pdfs_non_negative() {
        for law in all_continuous() {
            let (lo, hi) = match law.band_edge() {
                Some(e) => (-1.2 * e, 1.2 * e),
                None => (-8.0, 8.0),
            };
            let mut prev = 0.0;
            for i in 0..400 {
                let x = lo + (hi - lo) * (i as f64 + 0.5) / 400.0;
                let f = law.cdf(x);
                assert!(f >= prev - 1e-12, "{law:?} at {x}");
                assert!(law.pdf(x).unwrap() >= 0.0);
                prev = f;
            }
            assert!((law.cdf(1e3) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn konno_cdf_matches_pdf_quadrature() {
        let law = LimitLaw::konno(0.9, 0.6).unwrap();
        // Independent check: midpoint rule in theta on [-pi/2, asin(x/r)].
        let x = 0.25;
        let th_hi = (x / 0.9f64).asin();
        let n = 200_000;
        let h = (th_hi + PI / 2.0) / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let th = -PI / 2.0 + (i as f64 + 0.5) * h;
            let u = 0.9 * th.sin();
            s += law.pdf(u).unwrap() * 0.9 * th.cos() * h;
        }
        assert!((law.cdf(x) - s).abs() < 1e-9);
    }

    #[test]
    fn moment_examples() {
        let k = LimitLaw::konno(FRAC_1_SQRT_2, 0.0).unwrap();
        assert!((k.moment(2).unwrap() - (1.0 - FRAC_1_SQRT_2)).abs() < 1e-10);
        let g = c(0.6, -1.1);
        let a = LimitLaw::arcsine(g).unwrap();
        assert!((a.moment(2).unwrap() - g.norm_sqr() / 2.0).abs() < 1e-10);
        let n = LimitLaw::normal(0.7, 2.0).unwrap();
        assert!((n.moment(1).unwrap() - 0.7).abs() < 1e-15);
        assert!((n.moment(2).unwrap() - (2.0 + 0.49)).abs() < 1e-12);
        assert!((n.moment(4).unwrap() - (0.7f64.powi(4) + 6.0 * 0.49 * 2.0 + 3.0 * 4.0)).abs() < 1e-12);
        for law in all_continuous() {
            assert!((law.moment(0).unwrap() - 1.0).abs() < 1e-10, "{law:?}");
        }
    }

    #[test]
    fn hadamard_drift_values() {
        let h = hadamard();
        assert!(konno_drift(&h, &CoinState::symmetric()).unwrap().abs() < 1e-15);
        assert!((konno_drift(&h, &CoinState::left()).unwrap() - 1.0).abs() < 1e-15);
        assert!((konno_drift(&h, &CoinState::right()).unwrap() + 1.0).abs() < 1e-15);
        // With drift the first moment is -(1 - 1/sqrt 2) for |L>.
        let law = LimitLaw::konno_for(&h, &CoinState::left()).unwrap();
        assert!((law.moment(1).unwrap() + 1.0 - FRAC_1_SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn drift_keeps_density_non_negative() {
        for i in 0..50 {
            let th = 0.1 + i as f64 * 0.03;
            let a = Complex64::from_polar(th.cos(), 0.3 * i as f64);
            let b = Complex64::from_polar(th.sin(), -0.7 * i as f64);
            let coin = make_coin(a, b, Complex64::from_polar(1.0, 0.11 * i as f64)).unwrap();
            let init = CoinState::normalized(c(0.3, 0.1 * i as f64), c(-0.5, 0.2)).unwrap();
            let drift = konno_drift(&coin, &init).unwrap();
            assert!(drift.abs() * coin.a().norm() <= 1.0 + 1e-12);
            assert!(LimitLaw::konno_for(&coin, &init).is_ok());
        }
    }

    #[test]
    fn bessel_parity_masses_sum_to_one() {
        let states = [
            CoinState::left(),
            CoinState::right(),
            CoinState::symmetric(),
            CoinState::normalized(c(1.0, 0.0), c(1.0, 0.0)).unwrap(),
        ];
        for init in states {
            for &t in &[0.5, 3.0, 25.0] {
                for parity in 0..2 {
                    let law = LimitLaw::bessel_parity(t, &init, parity).unwrap();
                    let total: f64 = law.atoms().unwrap().iter().map(|a| a.1).sum();
                    assert!((total - 1.0).abs() < 1e-8, "t={t} parity={parity}: {total}");
                    assert!((law.cdf(1e6) - 1.0).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn ftd_without_coherence_is_arcsine() {
        let law = LimitLaw::ftd_a(0.7, &CoinState::symmetric()).unwrap();
        let arc = LimitLaw::arcsine(c(0.7, 0.0)).unwrap();
        for i in 1..100 {
            let x = -0.7 + 1.4 * i as f64 / 100.0;
            assert!((law.pdf(x).unwrap() - arc.pdf(x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn ftd_normalization() {
        let init = CoinState::normalized(c(0.8, 0.0), c(0.6, 0.0)).unwrap();
        for &y in &[0.3, 0.5, 1.0] {
            let law = LimitLaw::ftd_a(y, &init).unwrap();
            assert!((law.moment(0).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn discrete_cdfs_step() {
        let law = LimitLaw::mod_bessel(1.0).unwrap();
        let p0 = law.pmf(0).unwrap();
        assert!((law.cdf(0.0) - law.cdf_left(0.0) - p0).abs() < 1e-14);
        assert!((law.cdf(0.5) - law.cdf(0.0)).abs() < 1e-15);
        assert!((law.moment(1).unwrap()).abs() < 1e-14);
        assert!((law.moment(2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn serializes_with_tag() {
        let s = serde_json::to_string(&LimitLaw::konno(0.5, 0.1).unwrap()).unwrap();
        assert_eq!(s, r#"{"law":"konno","r":0.5,"drift":0.1}"#);
    }
}
