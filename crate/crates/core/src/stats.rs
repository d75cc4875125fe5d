//! Kolmogorov distances between rescaled walk distributions and limit laws,
//! moment tables and convergence sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::laws::{law_moment, LimitLaw};

/// Moment orders tabulated in a [`ConvergenceReport`].
pub const REPORT_MOMENTS: [u32; 3] = [1, 2, 4];

/// `sup_x |F_d(x * scale) - F_law(x)|`.
pub fn ks_distance(d: &Distribution, scale: f64, law: &LimitLaw) -> Result<f64> {
    ks_distance_affine(d, 0.0, scale, law)
}

/// Kolmogorov distance between the law of `(X - shift) / scale`, `X ~ d`,
/// and `law`.
///
/// Both CDFs are step functions or monotone between the points where either
/// jumps, so it is enough to compare both one-sided limits at the atoms of
/// `d` and the breakpoints of `law`.
pub fn ks_distance_affine(d: &Distribution, shift: f64, scale: f64, law: &LimitLaw) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!("scale must be positive and finite, got {scale}")));
    }
    if !shift.is_finite() {
        return Err(Error::invalid("shift must be finite"));
    }
    law.validate()?;

    // Empirical atoms in the rescaled coordinate. Zero-mass sites change
    // neither one-sided limit and are skipped.
    let emp: Vec<(f64, f64)> = d
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(n, p)| ((n as f64 - shift) / scale, p))
        .collect();

    let mut points: Vec<f64> = emp.iter().map(|(x, _)| *x).collect();
    points.extend(law.breakpoints()?);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let law_right = law.cdf_sorted(&points)?;
    let discrete = law.is_discrete();

    let mut sup: f64 = 0.0;
    let mut i = 0;
    let mut f_left = 0.0;
    let mut g_prev = 0.0;
    for (k, &x) in points.iter().enumerate() {
        let mut f_right = f_left;
        while i < emp.len() && emp[i].0 <= x {
            f_right += emp[i].1;
            i += 1;
        }
        let g_right = law_right[k];
        let g_left = if discrete { g_prev } else { g_right };
        sup = sup.max((f_left - g_left).abs()).max((f_right - g_right).abs());
        f_left = f_right;
        g_prev = g_right;
    }
    Ok(sup.clamp(0.0, 1.0))
}

/// `sum_n |d(n) - law(n)|` for a law on the integers, counting the mass of
/// `d` on sites where the law has no atom.
pub fn lattice_l1(d: &Distribution, law: &LimitLaw) -> Result<f64> {
    if !law.is_discrete() {
        return Err(Error::invalid(format!("{} is not a lattice law", law.name())));
    }
    let atoms = law.atoms()?;
    let mut covered = 0.0;
    let mut dist = 0.0;
    for &(x, m) in &atoms {
        if x.fract() != 0.0 {
            return Err(Error::invalid("law has an atom off the lattice"));
        }
        let p = d.prob(x as i64);
        covered += p;
        dist += (p - m).abs();
    }
    Ok(dist + (d.total() - covered).max(0.0))
}

/// Rule mapping a time `t` to the affine rescaling `(X - shift) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scaling {
    /// `X`.
    Unit,
    /// `X / t`.
    Linear,
    /// `X / sqrt(t)`.
    Sqrt,
    /// `X / T^(1 - alpha)`.
    FtdPower { alpha: f64 },
    /// `X / (T sqrt(r(T)))`, `sqrt(r(T)) = r / T^alpha`.
    FtdEffective { alpha: f64, r: f64 },
    /// `X / sqrt(T r(T))`, `r(T) = r / T^alpha`.
    LazyCentral { alpha: f64, r: f64 },
    /// `(X - t(2p-1)) / sqrt(4 t p (1-p))`.
    Standardized { p: f64 },
}

impl Scaling {
    /// `(shift, scale)` at time `t`.
    pub fn affine(&self, t: f64) -> (f64, f64) {
        match *self {
            Scaling::Unit => (0.0, 1.0),
            Scaling::Linear => (0.0, t),
            Scaling::Sqrt => (0.0, t.sqrt()),
            Scaling::FtdPower { alpha } => (0.0, t.powf(1.0 - alpha)),
            Scaling::FtdEffective { alpha, r } => (0.0, t * r / t.powf(alpha)),
            Scaling::LazyCentral { alpha, r } => (0.0, (t * r / t.powf(alpha)).sqrt()),
            Scaling::Standardized { p } => (t * (2.0 * p - 1.0), (4.0 * t * p * (1.0 - p)).sqrt()),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Scaling::Unit => "1".into(),
            Scaling::Linear => "t".into(),
            Scaling::Sqrt => "sqrt(t)".into(),
            Scaling::FtdPower { alpha } => format!("T^(1-{alpha})"),
            Scaling::FtdEffective { alpha, r } => format!("T*{r}/T^{alpha}"),
            Scaling::LazyCentral { alpha, r } => format!("sqrt(T*{r}/T^{alpha})"),
            Scaling::Standardized { p } => format!("(X-t(2*{p}-1))/sqrt(4t*{p}*(1-{p}))"),
        }
    }
}

/// Per-time Kolmogorov distances and moment deviations from a limit law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub law: LimitLaw,
    pub scaling: Scaling,
    pub scaling_description: String,
    pub times: Vec<f64>,
    pub ks: Vec<f64>,
    /// `|E[((X - shift)/scale)^j] - law_moment(j)|` for `j` in [`REPORT_MOMENTS`].
    pub moment_deltas: Vec<[f64; 3]>,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Columns `t,ks,m1,m2,m4`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,ks,m1,m2,m4\n");
        for ((t, ks), m) in self.times.iter().zip(&self.ks).zip(&self.moment_deltas) {
            out.push_str(&format!("{t},{ks:e},{:e},{:e},{:e}\n", m[0], m[1], m[2]));
        }
        out
    }

    pub fn final_ks(&self) -> Option<f64> {
        self.ks.last().copied()
    }

    /// True if no distance exceeds the previous one by more than the factor
    /// `1 + slack`.
    pub fn ks_non_increasing(&self, slack: f64) -> bool {
        self.ks.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
    }
}

/// One row of a report.
pub fn report_row(d: &Distribution, t: f64, scaling: &Scaling, law: &LimitLaw) -> Result<(f64, [f64; 3])> {
    let (shift, scale) = scaling.affine(t);
    let ks = ks_distance_affine(d, shift, scale, law)?;
    let mut deltas = [0.0; 3];
    for (slot, &j) in deltas.iter_mut().zip(&REPORT_MOMENTS) {
        *slot = (d.scaled_moment(j, shift, scale) - law_moment(law, j)?).abs();
    }
    Ok((ks, deltas))
}

/// Builds the distribution at every time in parallel and compares it with
/// `law` under `scaling`. Errors carry the offending time.
pub fn convergence_sweep<F>(builder: F, times: &[f64], scaling: Scaling, law: LimitLaw) -> Result<ConvergenceReport>
where
    F: Fn(f64) -> Result<Distribution> + Sync,
{
    if times.is_empty() {
        return Err(Error::invalid("sweep needs at least one time"));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("sweep times must be strictly increasing"));
    }
    law.validate()?;
    let rows: Vec<(f64, [f64; 3])> = times
        .par_iter()
        .map(|&t| {
            builder(t)
                .and_then(|d| report_row(&d, t, &scaling, &law))
                .map_err(|e| Error::Sweep { t, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    let (ks, moment_deltas) = rows.into_iter().unzip();
    Ok(ConvergenceReport {
        law,
        scaling,
        scaling_description: scaling.describe(),
        times: times.to_vec(),
        ks,
        moment_deltas,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("log-log fit needs two or more paired points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("log-log fit needs positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("log-log fit needs distinct abscissae"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::{hadamard, CoinField, CoinState};
    use crate::dtqw::evolve;
    use num_complex::Complex64;

    fn fair_coin_flips(t: usize) -> Distribution {
        // Pascal's triangle, an oracle independent of the classical module.
        let mut row = vec![1.0f64];
        for _ in 0..t {
            let mut next = vec![0.0; row.len() + 1];
            for (i, v) in row.iter().enumerate() {
                next[i] += 0.5 * v;
                next[i + 1] += 0.5 * v;
            }
            row = next;
        }
        let mut probs = vec![0.0; 2 * t + 1];
        for (k, p) in row.into_iter().enumerate() {
            probs[2 * k] = p;
        }
        Distribution::new(-(t as i64), probs).unwrap()
    }

    #[test]
    fn delta_against_point_masses() {
        let law = LimitLaw::delta(0.0).unwrap();
        assert_eq!(ks_distance(&Distribution::point(0), 1.0, &law).unwrap(), 0.0);
        assert_eq!(ks_distance(&Distribution::point(1), 1.0, &law).unwrap(), 1.0);
        let d = Distribution::new(-1, vec![0.1, 0.85, 0.05]).unwrap();
        assert!((ks_distance(&d, 1.0, &law).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn one_sided_limits_are_checked() {
        // Point mass at 0 vs uniform arcsine: sup is 1/2 at x = 0 from either side.
        let law = LimitLaw::arcsine(Complex64::new(1.0, 0.0)).unwrap();
        let ks = ks_distance(&Distribution::point(0), 1.0, &law).unwrap();
        assert!((ks - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_padding_is_invisible() {
        let d = evolve(&CoinState::symmetric(), &CoinField::homogeneous(hadamard()).unwrap(), 50)
            .unwrap()
            .distribution();
        let law = LimitLaw::konno(std::f64::consts::FRAC_1_SQRT_2, 0.0).unwrap();
        let a = ks_distance(&d, 50.0, &law).unwrap();
        let b = ks_distance(&d.padded(17), 50.0, &law).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fair_walk_clt() {
        let d = fair_coin_flips(400);
        let law = LimitLaw::normal(0.0, 1.0).unwrap();
        let ks = ks_distance(&d, 20.0, &law).unwrap();
        // Lattice CDF jumps are about 2/sqrt(2 pi t) = 0.04.
        assert!(ks > 0.01 && ks < 0.05, "{ks}");
    }

    #[test]
    fn discrete_law_self_distance() {
        let law = LimitLaw::mod_bessel(2.0).unwrap();
        let atoms = law.atoms().unwrap();
        let start = atoms[0].0 as i64;
        let d = Distribution::new(start, atoms.iter().map(|a| a.1).collect()).unwrap();
        assert!(ks_distance(&d, 1.0, &law).unwrap() < 1e-14);
        let shifted = Distribution::new(start + 1, atoms.iter().map(|a| a.1).collect()).unwrap();
        assert!(ks_distance(&shifted, 1.0, &law).unwrap() > 0.1);
    }

    #[test]
    fn lattice_l1_counts_uncovered_mass() {
        let law = LimitLaw::delta(0.0).unwrap();
        let d = Distribution::new(-1, vec![0.25, 0.5, 0.25]).unwrap();
        assert!((lattice_l1(&d, &law).unwrap() - 1.0).abs() < 1e-15);
        assert!(lattice_l1(&d, &LimitLaw::normal(0.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn scalings() {
        assert_eq!(Scaling::Linear.affine(4.0), (0.0, 4.0));
        assert_eq!(Scaling::Sqrt.affine(4.0), (0.0, 2.0));
        assert_eq!(Scaling::FtdPower { alpha: 0.5 }.affine(100.0), (0.0, 10.0));
        let (_, s) = Scaling::FtdEffective { alpha: 1.0, r: 0.5 }.affine(1000.0);
        assert!((s - 0.5).abs() < 1e-12);
        let (_, s) = Scaling::LazyCentral { alpha: 0.5, r: 0.5 }.affine(1e4);
        assert!((s - 50f64.sqrt()).abs() < 1e-12);
        assert_eq!(Scaling::Standardized { p: 0.5 }.affine(100.0), (0.0, 10.0));
    }

    #[test]
    fn sweep_reports_in_order_and_names_failures() {
        let field = CoinField::homogeneous(hadamard()).unwrap();
        let law = LimitLaw::konno_for(&hadamard(), &CoinState::symmetric()).unwrap();
        let rep = convergence_sweep(
            |t| Ok(evolve(&CoinState::symmetric(), &field, t as u64)?.distribution()),
            &[25.0, 50.0, 100.0],
            Scaling::Linear,
            law,
        )
        .unwrap();
        assert_eq!(rep.times, vec![25.0, 50.0, 100.0]);
        assert!(rep.ks.iter().all(|k| (0.0..=1.0).contains(k)));
        assert!(rep.to_csv().starts_with("t,ks,m1,m2,m4\n25,"));
        let err = convergence_sweep(
            |t| if t > 60.0 { Err(Error::invalid("boom")) } else { Ok(Distribution::point(0)) },
            &[25.0, 50.0, 100.0],
            Scaling::Linear,
            law,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Sweep { t, .. } if t == 100.0));
        assert!(convergence_sweep(|_| Ok(Distribution::point(0)), &[2.0, 1.0], Scaling::Unit, law).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.0)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() + 1.0).abs() < 1e-12);
    }
}
