//! Continuum limit of the walk with coin `C(eps) = exp(-i eps sigma_x)`:
//! the 1+1 dimensional Dirac-type equation `i d/dt psi = H psi`,
//! `H(p) = sigma_x - p sigma_z`, solved exactly in momentum space.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::coin::{dirac_coin, CoinField, CoinState};
use crate::dtqw::{evolve_from, WalkerState};
use crate::error::{Error, Result};
use crate::stats::log_log_slope;

/// Cells that must separate the light cone of the data from the grid edge.
pub const EDGE_CELLS: usize = 5;
/// Tail mass ignored when locating the support of the data.
pub const SUPPORT_TAIL: f64 = 1e-14;
/// Width of the Gaussian envelope used by [`continuum_compare`].
pub const DEFAULT_SIGMA: f64 = 0.1;

/// Two-component field sampled at `x_min + j dx`, `j = 0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub x_min: f64,
    pub dx: f64,
    pub t: f64,
    pub values: Vec<[Complex64; 2]>,
}

impl SpinorField {
    pub fn new(x_min: f64, dx: f64, values: Vec<[Complex64; 2]>) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) || !x_min.is_finite() {
            return Err(Error::invalid(format!("bad grid: x_min = {x_min}, dx = {dx}")));
        }
        if values.len() < 2 {
            return Err(Error::invalid("grid needs at least two points"));
        }
        Ok(SpinorField { x_min, dx, t: 0.0, values })
    }

    /// `exp(-x^2 / (4 sigma^2)) (q_L, q_R)` on `[-half_width, half_width]`
    /// with spacing `dx`, normalized on the grid. `|psi|^2` has standard deviation `sigma`.
    pub fn gaussian(sigma: f64, init: &CoinState, dx: f64, half_width: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        let cells = (half_width / dx).round() as i64;
        if cells < 1 {
            return Err(Error::invalid("half-width smaller than one cell"));
        }
        let values: Vec<[Complex64; 2]> = (-cells..=cells)
            .map(|j| {
                let x = j as f64 * dx;
                let env = (-x * x / (4.0 * sigma * sigma)).exp();
                [init.q_l() * env, init.q_r() * env]
            })
            .collect();
        let mut field = SpinorField::new(-(cells as f64) * dx, dx, values)?;
        let norm = field.norm().sqrt();
        for v in &mut field.values {
            v[0] /= norm;
            v[1] /= norm;
        }
        Ok(field)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.len() - 1)
    }

    /// `sum_j |psi_j|^2 dx`.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v[0].norm_sqr() + v[1].norm_sqr()).sum::<f64>() * self.dx
    }

    /// Discrete L2 distance on a common grid.
    pub fn l2_distance(&self, other: &SpinorField) -> Result<f64> {
        if self.len() != other.len() || (self.dx - other.dx).abs() > 1e-12 * self.dx || (self.x_min - other.x_min).abs() > 1e-9 * self.dx {
            return Err(Error::invalid("fields live on different grids"));
        }
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr())
            .sum();
        Ok((s * self.dx).sqrt())
    }

    /// Smallest `[lo, hi]` outside of which at most `tail` of the mass lies on either side.
    pub fn support(&self, tail: f64) -> (f64, f64) {
        let w: Vec<f64> = self.values.iter().map(|v| (v[0].norm_sqr() + v[1].norm_sqr()) * self.dx).collect();
        let mut acc = 0.0;
        let mut lo = 0;
        while lo + 1 < w.len() && acc + w[lo] <= tail {
            acc += w[lo];
            lo += 1;
        }
        acc = 0.0;
        let mut hi = w.len() - 1;
        while hi > lo && acc + w[hi] <= tail {
            acc += w[hi];
            hi -= 1;
        }
        (self.x(lo), self.x(hi))
    }

    /// Mass outside `[lo, hi]`.
    pub fn mass_outside(&self, lo: f64, hi: f64) -> f64 {
        (0..self.len())
            .filter(|&j| self.x(j) < lo || self.x(j) > hi)
            .map(|j| self.values[j][0].norm_sqr() + self.values[j][1].norm_sqr())
            .sum::<f64>()
            * self.dx
    }
}

/// Angular momenta of the FFT bins of an `n`-point grid with spacing `dx`.
fn fft_momenta(n: usize, dx: f64) -> Vec<f64> {
    let period = n as f64 * dx;
    (0..n)
        .map(|m| {
            let m = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            2.0 * PI * m / period
        })
        .collect()
}

/// Exact evolution `exp(-i t H(p))` on the periodic FFT grid.
///
/// `H(p)^2 = (1 + p^2) I`, so `exp(-i t H) = cos(E t) - i sin(E t) H / E` with
/// `E = sqrt(1 + p^2)`.
pub fn dirac_spectral(init: &SpinorField, t: f64) -> Result<SpinorField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t must be finite and non-negative, got {t}")));
    }
    let norm = init.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!("initial field has norm {norm}, expected 1")));
    }
    let (lo, hi) = init.support(SUPPORT_TAIL);
    let margin = EDGE_CELLS as f64 * init.dx;
    if lo - t < init.x_min + margin || hi + t > init.x_max() - margin {
        let needed = (lo.abs().max(hi.abs()) + t + margin) / init.dx;
        return Err(Error::Window {
            required: needed.ceil() as i64,
            message: format!(
                "light cone [{:.4}, {:.4}] reaches within {EDGE_CELLS} cells of [{:.4}, {:.4}]",
                lo - t,
                hi + t,
                init.x_min,
                init.x_max()
            ),
        });
    }

    Ok(propagate(init, t))
}

/// The momentum-space propagator without support checks; the grid is periodic.
fn propagate(init: &SpinorField, t: f64) -> SpinorField {
    let n = init.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut up: Vec<Complex64> = init.values.iter().map(|v| v[0]).collect();
    let mut down: Vec<Complex64> = init.values.iter().map(|v| v[1]).collect();
    fwd.process(&mut up);
    fwd.process(&mut down);
    for (p, (u, d)) in fft_momenta(n, init.dx).into_iter().zip(up.iter_mut().zip(down.iter_mut())) {
        let e = (1.0 + p * p).sqrt();
        let c = (e * t).cos();
        let s = (e * t).sin() / e;
        // H = [[-p, 1], [1, p]]
        let hu = -p * *u + *d;
        let hd = *u + p * *d;
        let mi = Complex64::new(0.0, -s);
        let (nu, nd) = (c * *u + mi * hu, c * *d + mi * hd);
        *u = nu;
        *d = nd;
    }
    inv.process(&mut up);
    inv.process(&mut down);
    let scale = 1.0 / n as f64;
    let values = up.into_iter().zip(down).map(|(u, d)| [u * scale, d * scale]).collect();
    SpinorField { x_min: init.x_min, dx: init.dx, t: init.t + t, values }
}

/// Runs the walk with coin `C(eps)` for `t / eps` steps on lattice spacing
/// `eps`, starting from `sqrt(eps) psi(n eps)`, and returns the result
/// divided by `sqrt(eps)` on the grid of `init`.
pub fn walk_field(init: &SpinorField, t: f64) -> Result<SpinorField> {
    let eps = init.dx;
    let steps = step_count(t, eps)?;
    let lo = (init.x_min / eps).round() as i64;
    let sq = eps.sqrt();
    let left = init.values.iter().map(|v| v[0] * sq).collect();
    let right = init.values.iter().map(|v| v[1] * sq).collect();
    let state = WalkerState::from_amplitudes(0, lo, left, right)?;
    let field = CoinField::homogeneous(dirac_coin(eps))?;
    let state = evolve_from(state, &field, steps)?;
    let values = (0..init.len())
        .map(|j| {
            let (l, r) = state.amplitude(lo + j as i64);
            [l / sq, r / sq]
        })
        .collect();
    Ok(SpinorField { x_min: init.x_min, dx: eps, t: init.t + t, values })
}

fn step_count(t: f64, eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t must be finite and non-negative, got {t}")));
    }
    let tau = t / eps;
    let rounded = tau.round();
    if (tau - rounded).abs() > 1e-9 * tau.max(1.0) {
        return Err(Error::invalid(format!("t / eps = {tau} is not an integer")));
    }
    Ok(rounded as u64)
}

/// Walk-versus-continuum errors along a sequence of lattice spacings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub t: f64,
    pub sigma: f64,
    pub eps: Vec<f64>,
    pub l2_error: Vec<f64>,
    /// Slope of `ln l2_error` against `ln eps`.
    pub fitted_order: f64,
}

impl OrderReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.l2_error.windows(2).all(|w| w[1] < w[0])
    }
}

/// Compares the walk with `dirac_spectral` at time `t` for each spacing.
///
/// The grid is `[-X, X]` with `X = t + 12 sigma + 10 eps`, which keeps the
/// light cone of the Gaussian away from the edges.
pub fn continuum_compare(eps_list: &[f64], t: f64, init: &CoinState, sigma: f64) -> Result<OrderReport> {
    if eps_list.len() < 3 {
        return Err(Error::invalid("need at least three lattice spacings"));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("lattice spacings must be strictly decreasing"));
    }
    for &eps in eps_list {
        step_count(t, eps)?;
    }
    let l2_error: Vec<f64> = eps_list
        .par_iter()
        .map(|&eps| {
            let half = t + 12.0 * sigma + 10.0 * eps;
            let psi0 = SpinorField::gaussian(sigma, init, eps, half)?;
            let exact = dirac_spectral(&psi0, t)?;
            let walk = walk_field(&psi0, t)?;
            walk.l2_distance(&exact)
        })
        .collect::<Result<_>>()?;
    let fitted_order = if l2_error.iter().all(|e| *e > 0.0) {
        log_log_slope(eps_list, &l2_error)?
    } else {
        f64::NAN
    };
    Ok(OrderReport { t, sigma, eps: eps_list.to_vec(), l2_error, fitted_order })
}
