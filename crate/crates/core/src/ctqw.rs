//! Continuous-time quantum walk
//! `-i d/dt psi(x) = (gamma psi(x-1) + conj(gamma) psi(x+1)) / 2`
//! and the final-time-dependent discrete walk it approximates.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coin::{ftd_coin, CoinField, CoinState};
use crate::distribution::Distribution;
use crate::dtqw::{evolve, WalkerState};
use crate::error::{Error, Result};
use crate::laws::LimitLaw;
use crate::specfun::bessel_j_orders;
use crate::stats::{ks_distance, lattice_l1};

/// Largest tail mass tolerated outside a simulation window.
pub const TAIL_TOL: f64 = 1e-12;
/// Largest norm drift tolerated by [`ctqw_integrate`].
pub const DRIFT_TOL: f64 = 1e-6;
/// Regime bound `T r(T)` for the two-CTQW decomposition.
pub const DECOMPOSITION_MAX_TR: f64 = 0.1;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default window padding beyond the light cone `|gamma| t`.
pub fn window_pad(gamma_t: f64) -> i64 {
    40i64.max((10.0 * gamma_t.cbrt()).ceil() as i64)
}

/// Default window `[-h, h]` with `h = ceil(|gamma| t) + pad`.
pub fn default_window(gamma: Complex64, t: f64) -> (i64, i64) {
    let z = gamma.norm() * t;
    let h = z.ceil() as i64 + window_pad(z);
    (-h, h)
}

/// Scalar amplitudes on `lo..lo + amps.len()` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CtqwState {
    pub t: f64,
    pub gamma: Complex64,
    pub lo: i64,
    pub amps: Vec<Complex64>,
}

impl CtqwState {
    pub fn hi(&self) -> i64 {
        self.lo + self.amps.len() as i64 - 1
    }

    pub fn amplitude(&self, x: i64) -> Complex64 {
        let i = x - self.lo;
        if i < 0 || i >= self.amps.len() as i64 {
            ZERO
        } else {
            self.amps[i as usize]
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn distribution(&self) -> Distribution {
        Distribution::from_parts(self.lo, self.amps.iter().map(|a| a.norm_sqr()).collect(), None)
    }

    /// Discrete L2 distance, counting amplitude outside either window.
    pub fn l2_distance(&self, other: &CtqwState) -> f64 {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        (lo..=hi)
            .map(|x| (self.amplitude(x) - other.amplitude(x)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &CtqwState) -> f64 {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        (lo..=hi)
            .map(|x| (self.amplitude(x) - other.amplitude(x)).norm())
            .fold(0.0, f64::max)
    }
}

fn check_window(lo: i64, hi: i64) -> Result<()> {
    if lo > 0 || hi < 0 {
        return Err(Error::invalid(format!("window [{lo}, {hi}] must contain the origin")));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// Propagator from a point mass: `K_t(x) = (i e^{i arg gamma})^x J_x(|gamma| t)`,
/// as `J` values for `|x| <= reach` and the unit phase `i e^{i arg gamma}`.
fn kernel(gamma: Complex64, t: f64, reach: usize) -> Result<(Vec<f64>, Complex64)> {
    let z = gamma.norm() * t;
    let js = bessel_j_orders(reach, z)?;
    let phase = if gamma.norm() > 0.0 {
        Complex64::i() * gamma / gamma.norm()
    } else {
        Complex64::i()
    };
    Ok((js, phase))
}

fn kernel_at(js: &[f64], phase: Complex64, x: i64) -> Complex64 {
    let n = x.unsigned_abs() as usize;
    if n >= js.len() {
        return ZERO;
    }
    let mut j = js[n];
    if x < 0 && n % 2 == 1 {
        j = -j;
    }
    phase.powi(x as i32) * j
}

/// Solution from a superposition of point masses on the window `[lo, hi]`.
pub fn propagate(gamma: Complex64, t: f64, init: &[(i64, Complex64)], lo: i64, hi: i64) -> Result<CtqwState> {
    check_time(t)?;
    if lo > hi {
        return Err(Error::invalid("empty window"));
    }
    let reach = init
        .iter()
        .map(|(x0, _)| (lo - x0).unsigned_abs().max((hi - x0).unsigned_abs()))
        .max()
        .unwrap_or(0) as usize;
    let (js, phase) = kernel(gamma, t, reach)?;
    let amps = (lo..=hi)
        .map(|x| init.iter().map(|&(x0, c)| c * kernel_at(&js, phase, x - x0)).sum())
        .collect();
    Ok(CtqwState { t, gamma, lo, amps })
}

/// Exact solution from `delta_{x,0}` by the Jacobi-Anger expansion.
///
/// With `psi(k) = sum_x psi(x) e^{-ikx}` the solution is
/// `exp(i |gamma| t cos(k - arg gamma))`, whose Fourier coefficients are
/// `psi_t(x) = (i e^{i arg gamma})^x J_x(|gamma| t)`.
pub fn ctqw_exact(gamma: Complex64, t: f64, window: Option<(i64, i64)>) -> Result<CtqwState> {
    check_time(t)?;
    let (lo, hi) = window.unwrap_or_else(|| default_window(gamma, t));
    check_window(lo, hi)?;
    let state = propagate(gamma, t, &[(0, Complex64::new(1.0, 0.0))], lo, hi)?;
    let tail = 1.0 - state.norm_sqr();
    if tail > TAIL_TOL {
        let (_, need) = default_window(gamma, t);
        return Err(Error::Window {
            required: need,
            message: format!("tail mass {tail:e} outside [{lo}, {hi}]"),
        });
    }
    Ok(state)
}

/// Classical fourth-order Runge-Kutta on the lattice ODE with zero boundary
/// values, `ceil(t / dt)` equal steps.
pub fn ctqw_integrate(gamma: Complex64, t: f64, dt: f64, window: Option<(i64, i64)>) -> Result<CtqwState> {
    check_time(t)?;
    if !(dt > 0.0 && dt <= 0.01) {
        return Err(Error::invalid(format!("dt must lie in (0, 0.01], got {dt}")));
    }
    let (lo, hi) = window.unwrap_or_else(|| default_window(gamma, t));
    check_window(lo, hi)?;
    // The analytic tail outside the window bounds the truncation error.
    let reach = lo.unsigned_abs().max(hi.unsigned_abs()) as usize;
    let (js, _) = kernel(gamma, t, reach)?;
    let inside: f64 = (lo..=hi).map(|x| js[x.unsigned_abs() as usize].powi(2)).sum();
    if 1.0 - inside > TAIL_TOL {
        let (_, need) = default_window(gamma, t);
        return Err(Error::Window {
            required: need,
            message: format!("tail mass {:e} outside [{lo}, {hi}]", 1.0 - inside),
        });
    }

    let len = (hi - lo + 1) as usize;
    let mut psi = vec![ZERO; len];
    psi[(-lo) as usize] = Complex64::new(1.0, 0.0);
    let steps = (t / dt).ceil().max(if t > 0.0 { 1.0 } else { 0.0 }) as usize;
    let h = if steps > 0 { t / steps as f64 } else { 0.0 };

    let half_g = 0.5 * gamma;
    let half_gc = 0.5 * gamma.conj();
    // d psi / dt = i (gamma psi(x-1) + conj(gamma) psi(x+1)) / 2
    let rhs = |p: &[Complex64], out: &mut [Complex64]| {
        let n = p.len();
        for x in 0..n {
            let left = if x > 0 { p[x - 1] } else { ZERO };
            let right = if x + 1 < n { p[x + 1] } else { ZERO };
            out[x] = Complex64::i() * (half_g * left + half_gc * right);
        }
    };
    let mut k1 = vec![ZERO; len];
    let mut k2 = vec![ZERO; len];
    let mut k3 = vec![ZERO; len];
    let mut k4 = vec![ZERO; len];
    let mut tmp = vec![ZERO; len];
    for _ in 0..steps {
        rhs(&psi, &mut k1);
        for i in 0..len {
            tmp[i] = psi[i] + 0.5 * h * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..len {
            tmp[i] = psi[i] + 0.5 * h * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..len {
            tmp[i] = psi[i] + h * k3[i];
        }
        rhs(&tmp, &mut k4);
        for i in 0..len {
            psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    let state = CtqwState { t, gamma, lo, amps: psi };
    let drift = (state.norm_sqr() - inside).abs();
    if drift > DRIFT_TOL {
        return Err(Error::StepSize { drift });
    }
    Ok(state)
}

/// Final-time-dependent walk with `sqrt(r(T)) = r / T^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FtdRun {
    pub final_time: u64,
    pub alpha: f64,
    pub r: f64,
}

impl FtdRun {
    pub fn new(final_time: u64, alpha: f64, r: f64) -> Result<Self> {
        let run = FtdRun { final_time, alpha, r };
        run.validate()?;
        Ok(run)
    }

    pub fn validate(&self) -> Result<()> {
        if self.final_time == 0 {
            return Err(Error::invalid("FTD run needs T >= 1"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::invalid(format!("r must lie in (0, 1), got {}", self.r)));
        }
        let rate = self.rate();
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::invalid(format!("r(T) = {rate} lies outside (0, 1)")));
        }
        Ok(())
    }

    /// `sqrt(r(T)) = r / T^alpha`.
    pub fn sqrt_rate(&self) -> f64 {
        self.r / (self.final_time as f64).powf(self.alpha)
    }

    /// `r(T)`, the squared diagonal of the coin.
    pub fn rate(&self) -> f64 {
        self.sqrt_rate().powi(2)
    }

    /// `t = T sqrt(r(T))`.
    pub fn t_eff(&self) -> f64 {
        self.final_time as f64 * self.sqrt_rate()
    }

    pub fn field(&self) -> Result<CoinField> {
        CoinField::homogeneous(ftd_coin(self.rate())?)
    }
}

/// Final state of the FTD walk.
pub fn ftd_state(run: &FtdRun, init: &CoinState) -> Result<WalkerState> {
    run.validate()?;
    evolve(init, &run.field()?, run.final_time)
}

/// Final distribution of the FTD walk.
pub fn ftd_run(run: &FtdRun, init: &CoinState) -> Result<Distribution> {
    Ok(ftd_state(run, init)?.distribution())
}

/// The two CTQW components of an FTD walk and their recombination.
#[derive(Debug, Clone)]
pub struct FtdDecomposition {
    /// `Psi^(+)`, both coin components evolved with `gamma = +i`.
    pub plus: WalkerState,
    /// `Psi^(-)`, both coin components evolved with `gamma = -i`.
    pub minus: WalkerState,
    /// `(Psi^(+) + (-1)^T Psi^(-)) / 2`.
    pub recombined_state: WalkerState,
    /// Its position distribution.
    pub recombined: Distribution,
    /// L1 distance between `recombined` and the direct walk.
    pub l1_to_direct: f64,
}

/// Two-CTQW approximation of an FTD walk at time `t = T sqrt(r(T))`.
///
/// Component `(+-)` starts from `L: q_L d_{x,0} +- q_R d_{x,-1}` and
/// `R: q_R d_{x,0} +- q_L d_{x,1}` and evolves as a CTQW with
/// `gamma = +-i`; each coin component evolves independently.
pub fn ftd_decomposition(run: &FtdRun, init: &CoinState) -> Result<FtdDecomposition> {
    run.validate()?;
    let tr = run.final_time as f64 * run.rate();
    if !(tr < DECOMPOSITION_MAX_TR) {
        return Err(Error::Precondition(format!(
            "decomposition needs T r(T) < {DECOMPOSITION_MAX_TR}, got {tr}"
        )));
    }
    let t = run.t_eff();
    let (_, h) = default_window(Complex64::new(1.0, 0.0), t);
    let h = h + 1;
    let (ql, qr) = (init.q_l(), init.q_r());
    let component = |sign: f64| -> Result<WalkerState> {
        let gamma = Complex64::new(0.0, sign);
        let l = propagate(gamma, t, &[(0, ql), (-1, sign * qr)], -h, h)?;
        let r = propagate(gamma, t, &[(0, qr), (1, sign * ql)], -h, h)?;
        WalkerState::from_amplitudes(run.final_time, -h, l.amps, r.amps)
    };
    let plus = component(1.0)?;
    let minus = component(-1.0)?;
    let parity = if run.final_time % 2 == 0 { 1.0 } else { -1.0 };
    let mix = |p: &[Complex64], m: &[Complex64]| -> Vec<Complex64> {
        p.iter().zip(m).map(|(a, b)| 0.5 * (a + parity * b)).collect()
    };
    let recombined_state = WalkerState::from_amplitudes(
        run.final_time,
        -h,
        mix(plus.left(), minus.left()),
        mix(plus.right(), minus.right()),
    )?;
    let recombined = recombined_state.distribution();
    let direct = ftd_run(run, init)?;
    let l1_to_direct = recombined.l1_distance(&direct);
    Ok(FtdDecomposition { plus, minus, recombined_state, recombined, l1_to_direct })
}

/// Regime of the FTD walk with `sqrt(r(T)) = r / T^alpha`, and how far the
/// final distribution is from its limit law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverRow {
    pub alpha: f64,
    pub final_time: u64,
    pub r: f64,
    pub law: LimitLaw,
    /// `ks` (Kolmogorov distance after rescaling by `scale`) or `l1`.
    pub metric: &'static str,
    pub scale: f64,
    pub value: f64,
    /// Probability of the origin.
    pub p0: f64,
}

/// `alpha = 0`: Konno law of `X / T`; `0 < alpha < 1`: the arcsine-type law of
/// `X / T^(1 - alpha)` on `(-r, r)`; `alpha = 1`: Bessel law of `X` itself;
/// `alpha > 1`: a point mass at the origin.
pub fn crossover_row(final_time: u64, alpha: f64, r: f64, init: &CoinState) -> Result<CrossoverRow> {
    let run = FtdRun::new(final_time, alpha, r)?;
    let d = ftd_run(&run, init)?;
    let t = final_time as f64;
    let (law, metric, scale, value) = if alpha == 0.0 {
        let law = LimitLaw::konno_for(&ftd_coin(run.rate())?, init)?;
        (law, "ks", t, ks_distance(&d, t, &law)?)
    } else if alpha < 1.0 {
        let law = LimitLaw::ftd_a(r, init)?;
        let scale = t.powf(1.0 - alpha);
        (law, "ks", scale, ks_distance(&d, scale, &law)?)
    } else if alpha == 1.0 {
        let law = LimitLaw::bessel_parity(run.t_eff(), init, (final_time % 2) as u8)?;
        (law, "l1", 1.0, lattice_l1(&d, &law)?)
    } else {
        let law = LimitLaw::delta(0.0)?;
        (law, "ks", 1.0, ks_distance(&d, 1.0, &law)?)
    };
    Ok(CrossoverRow { alpha, final_time, r, law, metric, scale, value, p0: d.prob(0) })
}

/// One [`crossover_row`] per exponent, computed in parallel.
pub fn crossover(final_time: u64, r: f64, alphas: &[f64], init: &CoinState) -> Result<Vec<CrossoverRow>> {
    alphas.par_iter().map(|&a| crossover_row(final_time, a, r, init)).collect()
}
