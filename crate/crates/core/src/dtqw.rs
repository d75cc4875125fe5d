//! Discrete-time quantum walk: coin then shift on a dense, growing window.

use num_complex::Complex64;

use crate::coin::{CoinField, CoinState, StepCoins};
use crate::distribution::Distribution;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Two-component amplitudes on the sites `lo..lo + len` after `t` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    t: u64,
    lo: i64,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
    parity: Option<u8>,
}

impl WalkerState {
    /// `|0> (x) (q_L |L> + q_R |R>)` at `t = 0`.
    pub fn at_origin(init: &CoinState) -> Self {
        WalkerState {
            t: 0,
            lo: 0,
            left: vec![init.q_l()],
            right: vec![init.q_r()],
            parity: Some(0),
        }
    }

    /// Arbitrary amplitudes on `lo..lo + left.len()`.
    pub fn from_amplitudes(t: u64, lo: i64, left: Vec<Complex64>, right: Vec<Complex64>) -> Result<Self> {
        if left.len() != right.len() || left.is_empty() {
            return Err(Error::invalid("left and right amplitude arrays must be non-empty and equally long"));
        }
        Ok(WalkerState { t, lo, left, right, parity: None })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// First site of the window.
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Last site of the window (inclusive).
    pub fn hi(&self) -> i64 {
        self.lo + self.left.len() as i64 - 1
    }

    /// Index of site 0 in the amplitude arrays (may lie outside them).
    pub fn origin_offset(&self) -> i64 {
        -self.lo
    }

    pub fn left(&self) -> &[Complex64] {
        &self.left
    }

    pub fn right(&self) -> &[Complex64] {
        &self.right
    }

    /// `(amp_L(n), amp_R(n))`; zero outside the window.
    pub fn amplitude(&self, n: i64) -> (Complex64, Complex64) {
        let i = n - self.lo;
        if i < 0 || i >= self.left.len() as i64 {
            (ZERO, ZERO)
        } else {
            (self.left[i as usize], self.right[i as usize])
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64, Complex64)> + '_ {
        self.left
            .iter()
            .zip(&self.right)
            .enumerate()
            .map(move |(i, (&l, &r))| (self.lo + i as i64, l, r))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.left.iter().chain(&self.right).map(|a| a.norm_sqr()).sum()
    }

    /// `Pr[n] = |amp_L(n)|^2 + |amp_R(n)|^2` on the whole window.
    pub fn distribution(&self) -> Distribution {
        let probs = self
            .left
            .iter()
            .zip(&self.right)
            .map(|(l, r)| l.norm_sqr() + r.norm_sqr())
            .collect();
        Distribution::from_parts(self.lo, probs, self.parity)
    }

    /// Applies `W C_{t+1}` in place.
    pub fn step_in_place(&mut self, field: &CoinField) -> Result<()> {
        let step = self.t + 1;
        match field.coins_for_step(self.lo, self.hi(), step)? {
            StepCoins::Uniform(c) => {
                let (a, b, cc, d) = (c.a(), c.b(), c.c(), c.d());
                for (l, r) in self.left.iter_mut().zip(self.right.iter_mut()) {
                    let (x, y) = (*l, *r);
                    *l = a * x + b * y;
                    *r = cc * x + d * y;
                }
            }
            StepCoins::PerSite(coins) => {
                for ((l, r), c) in self.left.iter_mut().zip(self.right.iter_mut()).zip(&coins) {
                    let (x, y) = c.apply(*l, *r);
                    *l = x;
                    *r = y;
                }
            }
        }
        // L moves to n - 1, R to n + 1; the window grows by one site on each side.
        self.left.extend_from_slice(&[ZERO, ZERO]);
        self.right.extend_from_slice(&[ZERO, ZERO]);
        self.right.rotate_right(2);
        self.lo -= 1;
        self.t = step;
        self.parity = self.parity.map(|p| 1 - p);
        Ok(())
    }
}

/// One application of `U_{t+1} = W C_{t+1}`.
pub fn step(mut state: WalkerState, field: &CoinField) -> Result<WalkerState> {
    state.step_in_place(field)?;
    Ok(state)
}

/// `t` steps from `|0> (x) init`.
pub fn evolve(init: &CoinState, field: &CoinField, t: u64) -> Result<WalkerState> {
    evolve_from(WalkerState::at_origin(init), field, t)
}

/// `t` further steps from an arbitrary state.
pub fn evolve_from(mut state: WalkerState, field: &CoinField, t: u64) -> Result<WalkerState> {
    let reserve = 2 * t as usize;
    state.left.reserve(reserve);
    state.right.reserve(reserve);
    for _ in 0..t {
        state.step_in_place(field)?;
    }
    Ok(state)
}

/// Evolves to the largest checkpoint, calling `visit` at every checkpoint.
pub fn evolve_with_checkpoints<F>(init: &CoinState, field: &CoinField, checkpoints: &[u64], mut visit: F) -> Result<()>
where
    F: FnMut(&WalkerState) -> Result<()>,
{
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut state = WalkerState::at_origin(init);
    for &cp in &sorted {
        let todo = cp - state.t;
        state = evolve_from(state, field, todo)?;
        visit(&state)?;
    }
    Ok(())
}
