//! 2x2 unitary coins, coin fields and initial coin states.
//!
//! A coin acts on the column `(amp_L, amp_R)^T` as
//!
//! ```text
//! | a  b |
//! | c  d |
//! ```
//!
//! with `|L> = (1, 0)^T`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on every unitarity relation of a stored coin.
pub const UNITARY_TOL: f64 = 1e-12;
/// Tolerance on the inputs of [`make_coin`].
pub const INPUT_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A dense 2x2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn identity() -> Self {
        Mat2::diag(ONE, ONE)
    }

    pub fn diag(p: Complex64, q: Complex64) -> Self {
        Mat2([[p, ZERO], [ZERO, q]])
    }

    #[inline]
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Largest entry of `|M^dagger M - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let p = self.adjoint() * *self;
        let id = Mat2::identity();
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((p.0[i][j] - id.0[i][j]).norm());
            }
        }
        worst
    }

    /// Largest entry-wise distance to `other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

/// One of the relations a 2x2 coin has to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    /// `|a|^2 + |c|^2 = 1`
    ColumnNorm,
    /// `a conj(b) + c conj(d) = 0`
    Orthogonality,
    /// `|ad - bc| = 1`
    DeterminantModulus,
    /// `c = -Delta conj(b)`
    LowerLeft,
    /// `d = Delta conj(a)`
    LowerRight,
}

impl Relation {
    pub fn describe(self) -> &'static str {
        match self {
            Relation::ColumnNorm => "|a|^2 + |c|^2 = 1",
            Relation::Orthogonality => "a conj(b) + c conj(d) = 0",
            Relation::DeterminantModulus => "|ad - bc| = 1",
            Relation::LowerLeft => "c = -Delta conj(b)",
            Relation::LowerRight => "d = Delta conj(a)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub relation: Relation,
    pub residual: f64,
}

/// Residual of each coin relation; passes when all are below [`UNITARY_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitarityReport {
    pub residuals: Vec<Residual>,
}

impl UnitarityReport {
    pub fn passes(&self) -> bool {
        self.residuals.iter().all(|r| r.residual < UNITARY_TOL)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Residual> {
        self.residuals.iter().filter(|r| !(r.residual < UNITARY_TOL))
    }

    pub fn residual(&self, relation: Relation) -> f64 {
        self.residuals
            .iter()
            .find(|r| r.relation == relation)
            .map(|r| r.residual)
            .unwrap_or(f64::NAN)
    }
}

/// A 2x2 unitary coin `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoinEntries", into = "CoinEntries")]
pub struct Coin2 {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

#[derive(Serialize, Deserialize)]
struct CoinEntries {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl TryFrom<CoinEntries> for Coin2 {
    type Error = Error;

    fn try_from(e: CoinEntries) -> Result<Self> {
        Coin2::new(e.a, e.b, e.c, e.d)
    }
}

impl From<Coin2> for CoinEntries {
    fn from(c: Coin2) -> Self {
        CoinEntries { a: c.a, b: c.b, c: c.c, d: c.d }
    }
}

impl Coin2 {
    /// Builds a coin from all four entries and checks every relation.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let coin = Coin2 { a, b, c, d };
        let failure = coin.validate().failures().next().copied();
        match failure {
            None => Ok(coin),
            Some(f) => Err(Error::InvalidCoin {
                relation: f.relation.describe(),
                residual: f.residual,
            }),
        }
    }

    /// Wraps four entries without checking them. Use [`Coin2::validate`] to
    /// inspect the result.
    pub fn from_entries_unchecked(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Coin2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Coin2 { a: ONE, b: ZERO, c: ZERO, d: ONE }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }
    pub fn b(&self) -> Complex64 {
        self.b
    }
    pub fn c(&self) -> Complex64 {
        self.c
    }
    pub fn d(&self) -> Complex64 {
        self.d
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.a, self.b, self.c, self.d)
    }

    /// `Delta = ad - bc`.
    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    #[inline]
    pub fn apply(&self, l: Complex64, r: Complex64) -> (Complex64, Complex64) {
        (self.a * l + self.b * r, self.c * l + self.d * r)
    }

    pub fn validate(&self) -> UnitarityReport {
        validate_unitary(self)
    }
}

/// Builds the coin `[[a, b], [-Delta conj(b), Delta conj(a)]]`.
pub fn make_coin(a: Complex64, b: Complex64, det_phase: Complex64) -> Result<Coin2> {
    let norm = a.norm_sqr() + b.norm_sqr();
    if (norm - 1.0).abs() > INPUT_TOL {
        return Err(Error::InvalidCoin {
            relation: "|a|^2 + |b|^2 = 1",
            residual: (norm - 1.0).abs(),
        });
    }
    let modulus = det_phase.norm();
    if (modulus - 1.0).abs() > INPUT_TOL {
        return Err(Error::InvalidCoin {
            relation: "|Delta| = 1",
            residual: (modulus - 1.0).abs(),
        });
    }
    Ok(Coin2 {
        a,
        b,
        c: -det_phase * b.conj(),
        d: det_phase * a.conj(),
    })
}

/// `(1/sqrt 2) [[1, 1], [1, -1]]`.
pub fn hadamard() -> Coin2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Coin2 { a: h, b: h, c: h, d: -h }
}

/// Final-time-dependent coin `[[sqrt r, sqrt(1-r)], [sqrt(1-r), -sqrt r]]`.
pub fn ftd_coin(r: f64) -> Result<Coin2> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid(format!("ftd_coin: rate must lie in (0, 1), got {r}")));
    }
    let s = Complex64::new(r.sqrt(), 0.0);
    let o = Complex64::new((1.0 - r).sqrt(), 0.0);
    Ok(Coin2 { a: s, b: o, c: o, d: -s })
}

/// `C(eps) = [[cos eps, -i sin eps], [-i sin eps, cos eps]] = exp(-i eps sigma_x)`.
pub fn dirac_coin(eps: f64) -> Coin2 {
    let c = Complex64::new(eps.cos(), 0.0);
    let s = Complex64::new(0.0, -eps.sin());
    Coin2 { a: c, b: s, c: s, d: c }
}

pub fn validate_unitary(coin: &Coin2) -> UnitarityReport {
    let Coin2 { a, b, c, d } = *coin;
    let delta = a * d - b * c;
    let residuals = vec![
        Residual {
            relation: Relation::ColumnNorm,
            residual: (a.norm_sqr() + c.norm_sqr() - 1.0).abs(),
        },
        Residual {
            relation: Relation::Orthogonality,
            residual: (a * b.conj() + c * d.conj()).norm(),
        },
        Residual {
            relation: Relation::DeterminantModulus,
            residual: (delta.norm() - 1.0).abs(),
        },
        Residual {
            relation: Relation::LowerLeft,
            residual: (c + delta * b.conj()).norm(),
        },
        Residual {
            relation: Relation::LowerRight,
            residual: (d - delta * a.conj()).norm(),
        },
    ];
    UnitarityReport { residuals }
}

/// Initial coin state `q_L |L> + q_R |R>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoinStateRepr", into = "CoinStateRepr")]
pub struct CoinState {
    q_l: Complex64,
    q_r: Complex64,
}

#[derive(Serialize, Deserialize)]
struct CoinStateRepr {
    q_l: Complex64,
    q_r: Complex64,
}

impl TryFrom<CoinStateRepr> for CoinState {
    type Error = Error;
    fn try_from(r: CoinStateRepr) -> Result<Self> {
        CoinState::new(r.q_l, r.q_r)
    }
}

impl From<CoinState> for CoinStateRepr {
    fn from(s: CoinState) -> Self {
        CoinStateRepr { q_l: s.q_l, q_r: s.q_r }
    }
}

impl CoinState {
    pub fn new(q_l: Complex64, q_r: Complex64) -> Result<Self> {
        let norm = q_l.norm_sqr() + q_r.norm_sqr();
        if (norm - 1.0).abs() > UNITARY_TOL {
            return Err(Error::invalid(format!(
                "coin state must satisfy |q_L|^2 + |q_R|^2 = 1, got {norm}"
            )));
        }
        Ok(CoinState { q_l, q_r })
    }

    /// Rescales `(q_l, q_r)` to unit norm.
    pub fn normalized(q_l: Complex64, q_r: Complex64) -> Result<Self> {
        let norm = (q_l.norm_sqr() + q_r.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid("coin state has zero or non-finite norm"));
        }
        Ok(CoinState { q_l: q_l / norm, q_r: q_r / norm })
    }

    /// `|L>`
    pub fn left() -> Self {
        CoinState { q_l: ONE, q_r: ZERO }
    }

    /// `|R>`
    pub fn right() -> Self {
        CoinState { q_l: ZERO, q_r: ONE }
    }

    /// `(|L> + i|R>) / sqrt 2`, the symmetric initial state for the Hadamard walk.
    pub fn symmetric() -> Self {
        CoinState {
            q_l: Complex64::new(FRAC_1_SQRT_2, 0.0),
            q_r: Complex64::new(0.0, FRAC_1_SQRT_2),
        }
    }

    pub fn q_l(&self) -> Complex64 {
        self.q_l
    }
    pub fn q_r(&self) -> Complex64 {
        self.q_r
    }

    pub fn as_array(&self) -> [Complex64; 2] {
        [self.q_l, self.q_r]
    }

    /// `q_L conj(q_R) + conj(q_L) q_R`, the coherence term of the drift.
    pub fn coherence(&self) -> f64 {
        2.0 * (self.q_l * self.q_r.conj()).re
    }
}

/// Which coin acts at each site and step.
///
/// Steps are numbered from 1: the transition from `t` to `t + 1` queries
/// step `t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoinField {
    Homogeneous(Coin2),
    /// `schedule[s - 1]` is the coin at step `s`.
    TimeDependent(Vec<Coin2>),
    /// Coins per site; sites outside the map are an error.
    SiteDependent(BTreeMap<i64, Coin2>),
    /// Homogeneous [`ftd_coin`] with rate `r(T)`, defined for steps `1..=T`.
    Ftd { final_time: u64, rate: f64 },
}

fn ensure_valid(coin: &Coin2, what: impl FnOnce() -> String) -> Result<()> {
    match coin.validate().failures().next().copied() {
        None => Ok(()),
        Some(f) => Err(Error::Configuration(format!(
            "{}: relation `{}` violated (residual {:e})",
            what(),
            f.relation.describe(),
            f.residual
        ))),
    }
}

/// Coins in effect for one step.
#[derive(Debug, Clone)]
pub enum StepCoins {
    Uniform(Coin2),
    /// One coin per site of the queried window, in site order.
    PerSite(Vec<Coin2>),
}

impl CoinField {
    pub fn homogeneous(coin: Coin2) -> Result<Self> {
        ensure_valid(&coin, || "homogeneous coin".into())?;
        Ok(CoinField::Homogeneous(coin))
    }

    pub fn time_dependent(schedule: Vec<Coin2>) -> Result<Self> {
        for (i, c) in schedule.iter().enumerate() {
            ensure_valid(c, || format!("coin at step {}", i + 1))?;
        }
        Ok(CoinField::TimeDependent(schedule))
    }

    pub fn site_dependent(map: BTreeMap<i64, Coin2>) -> Result<Self> {
        for (site, c) in &map {
            ensure_valid(c, || format!("coin at site {site}"))?;
        }
        Ok(CoinField::SiteDependent(map))
    }

    pub fn ftd(final_time: u64, rate: f64) -> Result<Self> {
        if final_time == 0 {
            return Err(Error::invalid("FTD field needs a final time of at least 1"));
        }
        ftd_coin(rate)?;
        Ok(CoinField::Ftd { final_time, rate })
    }

    /// Coin at `site` for step `step` (1-based).
    pub fn coin_at(&self, site: i64, step: u64) -> Result<Coin2> {
        if step == 0 {
            return Err(Error::Configuration("coin fields are indexed from step 1".into()));
        }
        match self {
            CoinField::Homogeneous(c) => Ok(*c),
            CoinField::TimeDependent(schedule) => schedule.get((step - 1) as usize).copied().ok_or_else(|| {
                Error::Configuration(format!(
                    "time-dependent schedule covers {} steps, step {step} requested",
                    schedule.len()
                ))
            }),
            CoinField::SiteDependent(map) => map
                .get(&site)
                .copied()
                .ok_or_else(|| Error::Configuration(format!("no coin defined at site {site} (step {step})"))),
            CoinField::Ftd { final_time, rate } => {
                if step > *final_time {
                    return Err(Error::Configuration(format!(
                        "FTD field ends at T = {final_time}, step {step} requested"
                    )));
                }
                ftd_coin(*rate)
            }
        }
    }

    /// All coins needed to advance the sites `lo..=hi` at step `step`.
    pub fn coins_for_step(&self, lo: i64, hi: i64, step: u64) -> Result<StepCoins> {
        match self {
            CoinField::SiteDependent(_) => (lo..=hi)
                .map(|n| self.coin_at(n, step))
                .collect::<Result<Vec<_>>>()
                .map(StepCoins::PerSite),
            _ => self.coin_at(lo, step).map(StepCoins::Uniform),
        }
    }
}
