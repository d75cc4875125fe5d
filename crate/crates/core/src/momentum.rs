//! Momentum-space analysis of a homogeneous walk.
//!
//! With `psi(k) = sum_n psi(n) e^{-ikn}` one step acts as
//! `U(k) = diag(e^{ik}, e^{-ik}) C`, and the position operator is `i d/dk`.
//! Eigenphases of `U(k)` give the group velocities `i lambda'/lambda` whose
//! pushforward of the spectral weights is the ballistic limit density.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::coin::{Coin2, CoinState, Mat2};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance on the unitarity of matrices passed to [`eig2`].
pub const EIG_UNITARY_TOL: f64 = 1e-10;
/// Uniform grid used for branch tracking by eigenvector overlap.
pub const TRACKING_GRID: usize = 4096;

/// `U(k) = diag(e^{ik}, e^{-ik}) C`.
pub fn symbol(coin: &Coin2, k: f64) -> Mat2 {
    let p = Complex64::from_polar(1.0, k);
    Mat2::diag(p, p.conj()) * coin.matrix()
}

/// `d^l U / dk^l = diag((i)^l e^{ik}, (-i)^l e^{-ik}) C`.
pub fn symbol_derivative(coin: &Coin2, k: f64, l: u32) -> Mat2 {
    let p = Complex64::from_polar(1.0, k);
    let il = Complex64::i().powu(l);
    let mil = (-Complex64::i()).powu(l);
    Mat2::diag(il * p, mil * p.conj()) * coin.matrix()
}

/// One eigenpair of a 2x2 unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenBranch {
    /// 1 or 2.
    pub index: u8,
    pub lambda: Complex64,
    pub vector: [Complex64; 2],
}

impl EigenBranch {
    /// `|<v|q>|^2`.
    pub fn weight(&self, q: &CoinState) -> f64 {
        (self.vector[0].conj() * q.q_l() + self.vector[1].conj() * q.q_r()).norm_sqr()
    }

    pub fn residual(&self, m: &Mat2) -> f64 {
        let mv = m.apply(self.vector);
        ((mv[0] - self.lambda * self.vector[0]).norm_sqr() + (mv[1] - self.lambda * self.vector[1]).norm_sqr()).sqrt()
    }
}

/// Eigenpairs of a 2x2 unitary.
///
/// Writing `m = e^{i theta/2} V` with `det V = 1`, the eigenvalues are
/// `e^{i theta/2} e^{+-i phi}` with `cos phi = tr(V)/2` and `phi` in `[0, pi]`.
/// Branch 1 carries `+phi`. For symbols `U(k)` of a fixed coin this labeling
/// is continuous in `k`.
pub fn eig2(m: &Mat2) -> Result<[EigenBranch; 2]> {
    let res = m.unitarity_residual();
    if !(res < EIG_UNITARY_TOL) {
        return Err(Error::invalid(format!("eig2 needs a unitary matrix, residual {res:e}")));
    }
    Ok(eig2_with_phase(m, m.det().arg()))
}

/// Eigenpairs of `U(k)`, labeled with the coin's determinant phase so that a
/// determinant on the branch cut cannot swap the labels between samples.
pub fn branches(coin: &Coin2, k: f64) -> [EigenBranch; 2] {
    eig2_with_phase(&symbol(coin, k), coin.det().arg())
}

fn eig2_with_phase(m: &Mat2, theta: f64) -> [EigenBranch; 2] {
    let half = Complex64::from_polar(1.0, 0.5 * theta);
    let cos_phi = ((m.trace() * half.conj()).re / 2.0).clamp(-1.0, 1.0);
    let phi = cos_phi.acos();
    let l1 = half * Complex64::from_polar(1.0, phi);
    let l2 = half * Complex64::from_polar(1.0, -phi);
    [
        EigenBranch { index: 1, lambda: l1, vector: eigenvector(m, l1, 0) },
        EigenBranch { index: 2, lambda: l2, vector: eigenvector(m, l2, 1) },
    ]
}

fn eigenvector(m: &Mat2, lambda: Complex64, fallback: usize) -> [Complex64; 2] {
    let [[a, b], [c, d]] = m.0;
    let u = [b, lambda - a];
    let w = [lambda - d, c];
    let nu = u[0].norm_sqr() + u[1].norm_sqr();
    let nw = w[0].norm_sqr() + w[1].norm_sqr();
    let (v, n) = if nu >= nw { (u, nu) } else { (w, nw) };
    if n < 1e-28 {
        // m is a multiple of the identity; any basis works.
        let mut e = [ZERO, ZERO];
        e[fallback] = ONE;
        return e;
    }
    let n = n.sqrt();
    [v[0] / n, v[1] / n]
}

/// Branch pairs on the uniform grid `k_j = -pi + 2 pi j / n`, labeled by
/// maximal eigenvector overlap with the previous sample.
pub fn track_branches(coin: &Coin2, n: usize) -> Vec<[EigenBranch; 2]> {
    let theta = coin.det().arg();
    let mut out: Vec<[EigenBranch; 2]> = Vec::with_capacity(n);
    for j in 0..n {
        let k = -PI + 2.0 * PI * j as f64 / n as f64;
        let mut pair = eig2_with_phase(&symbol(coin, k), theta);
        if let Some(prev) = out.last() {
            let overlap = |x: &EigenBranch, y: &EigenBranch| {
                (x.vector[0].conj() * y.vector[0] + x.vector[1].conj() * y.vector[1]).norm()
            };
            let keep = overlap(&prev[0], &pair[0]) + overlap(&prev[1], &pair[1]);
            let swap = overlap(&prev[0], &pair[1]) + overlap(&prev[1], &pair[0]);
            if swap > keep {
                pair.swap(0, 1);
                pair[0].index = 1;
                pair[1].index = 2;
            }
        }
        out.push(pair);
    }
    out
}

/// `kappa = k - theta/2 + arg a`; the eigenphases depend on `k` only through it.
fn kappa(coin: &Coin2, k: f64) -> f64 {
    k - 0.5 * coin.det().arg() + coin.a().arg()
}

fn check_branch(branch: u8) -> Result<()> {
    if branch == 1 || branch == 2 {
        Ok(())
    } else {
        Err(Error::invalid(format!("branch must be 1 or 2, got {branch}")))
    }
}

fn check_nondegenerate(coin: &Coin2) -> Result<f64> {
    let abs_a = coin.a().norm();
    if abs_a < 1e-12 {
        return Err(Error::DegenerateCoin(
            "|a| = 0: every step moves deterministically by one site".into(),
        ));
    }
    Ok(abs_a)
}

/// Group velocity `i lambda_xi'(k) / lambda_xi(k)`.
///
/// Branch 1 equals `-|a| sin(kappa) / sqrt(1 - |a|^2 cos^2(kappa))` and
/// branch 2 is its negative.
pub fn group_velocity(coin: &Coin2, k: f64, branch: u8) -> Result<f64> {
    check_branch(branch)?;
    let abs_a = check_nondegenerate(coin)?;
    let kap = kappa(coin, k);
    let v1 = velocity_of_kappa(abs_a, kap);
    Ok(if branch == 1 { v1 } else { -v1 })
}

fn velocity_of_kappa(abs_a: f64, kap: f64) -> f64 {
    let c = kap.cos();
    let den = (1.0 - abs_a * abs_a * c * c).max(0.0).sqrt();
    if den == 0.0 {
        // |a| = 1 at kappa = 0 or pi: the limit of the expression is +-1 times 0/0;
        // the free mover has |v| = 1 with the sign of -sin.
        return -kap.sin().signum() * abs_a;
    }
    -abs_a * kap.sin() / den
}

/// `d v_1 / d kappa = -|a| cos(kappa) (1 - |a|^2) / (1 - |a|^2 cos^2 kappa)^{3/2}`.
fn velocity_slope(abs_a: f64, kap: f64) -> f64 {
    let c = kap.cos();
    let q = 1.0 - abs_a * abs_a * c * c;
    -abs_a * c * (1.0 - abs_a * abs_a) / (q * q.sqrt())
}

/// `lim_t E[(X_t / t)^j] = sum_xi int v_xi(k)^j |<v_xi(k)|q>|^2 dk / 2 pi`.
pub fn limit_moment(coin: &Coin2, init: &CoinState, j: u32) -> Result<f64> {
    if j > 8 {
        return Err(Error::invalid(format!("moment order {j} exceeds 8")));
    }
    let abs_a = check_nondegenerate(coin)?;
    let integrand = |k: f64| {
        let [b1, b2] = branches(coin, k);
        let v = velocity_of_kappa(abs_a, kappa(coin, k));
        let vj = v.powi(j as i32);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        vj * b1.weight(init) + sign * vj * b2.weight(init)
    };
    let total = adaptive_simpson(integrand, -PI, PI, 1e-11, 32)?;
    Ok(total / (2.0 * PI))
}

/// Limit density obtained by inverting `x = v_xi(k)` numerically.
///
/// Each branch takes every value in `(-|a|, |a|)` exactly twice, once on each
/// monotone piece `kappa in (-pi/2, pi/2)` and `kappa in (pi/2, 3pi/2)`, so the
/// density is `sum over the four roots of w / (2 pi |dv/dk|)` with the
/// weights `w` taken from numerically computed eigenvectors.
pub fn limit_density_numeric(coin: &Coin2, init: &CoinState, grid: &[f64]) -> Result<Vec<f64>> {
    let abs_a = check_nondegenerate(coin)?;
    let shift = -0.5 * coin.det().arg() + coin.a().arg();
    grid.iter()
        .map(|&x| {
            if !x.is_finite() {
                return Err(Error::invalid("non-finite grid point"));
            }
            if x.abs() >= abs_a {
                return Err(Error::SingularEndpoint { x });
            }
            let mut density = 0.0;
            for branch in [1u8, 2] {
                let target = if branch == 1 { x } else { -x };
                for (lo, hi) in [(-FRAC_PI_2, FRAC_PI_2), (FRAC_PI_2, 3.0 * FRAC_PI_2)] {
                    let kap = bisect(|kp| velocity_of_kappa(abs_a, kp) - target, lo, hi);
                    let k = kap - shift;
                    let slope = velocity_slope(abs_a, kap).abs();
                    let w = branches(coin, k)[(branch - 1) as usize].weight(init);
                    density += w / (2.0 * PI * slope);
                }
            }
            Ok(density)
        })
        .collect()
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `E[X_t^j]` for `j <= 4` from the momentum representation.
///
/// `psi_t(k) = U(k)^t q` and its first two `k`-derivatives are propagated
/// together; with `X = i d/dk` the moments are `Re(i<psi|psi'>)`,
/// `||psi'||^2`, `Re(i<psi'|psi''>)` and `||psi''||^2`, averaged over a uniform
/// grid of `n_k` momenta. The trapezoid rule is exact once `n_k > 2t`.
pub fn finite_time_moment(coin: &Coin2, init: &CoinState, t: u64, j: u32, n_k: usize) -> Result<f64> {
    if j > 4 {
        return Err(Error::invalid(format!("finite-time moments are available for j <= 4, got {j}")));
    }
    if n_k == 0 {
        return Err(Error::invalid("n_k must be positive"));
    }
    if j == 0 {
        return Ok(1.0);
    }
    let dot = |x: &[Complex64; 2], y: &[Complex64; 2]| x[0].conj() * y[0] + x[1].conj() * y[1];
    let mut acc = 0.0;
    for m in 0..n_k {
        let k = -PI + 2.0 * PI * m as f64 / n_k as f64;
        let u0 = symbol(coin, k);
        let u1 = symbol_derivative(coin, k, 1);
        let u2 = symbol_derivative(coin, k, 2);
        let mut p0 = init.as_array();
        let mut p1 = [ZERO, ZERO];
        let mut p2 = [ZERO, ZERO];
        for _ in 0..t {
            let a = u0.apply(p2);
            let b = u1.apply(p1);
            let c = u2.apply(p0);
            let n2 = [a[0] + 2.0 * b[0] + c[0], a[1] + 2.0 * b[1] + c[1]];
            let a = u0.apply(p1);
            let b = u1.apply(p0);
            let n1 = [a[0] + b[0], a[1] + b[1]];
            p0 = u0.apply(p0);
            p1 = n1;
            p2 = n2;
        }
        acc += match j {
            1 => (Complex64::i() * dot(&p0, &p1)).re,
            2 => dot(&p1, &p1).re,
            3 => (Complex64::i() * dot(&p1, &p2)).re,
            _ => dot(&p2, &p2).re,
        };
    }
    Ok(acc / n_k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::{hadamard, make_coin};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_coins() -> Vec<Coin2> {
        vec![
            hadamard(),
            make_coin(c(0.3, 0.0), c(0.0, 0.91f64.sqrt()), c(1.0, 0.0)).unwrap(),
            make_coin(c(0.6, 0.5), c(-0.2, (1.0f64 - 0.61 - 0.04).sqrt()), Complex64::from_polar(1.0, 2.1)).unwrap(),
            make_coin(c(0.9 * 0.6, -0.9 * 0.8), c(0.19f64.sqrt(), 0.0), Complex64::from_polar(1.0, -2.9)).unwrap(),
        ]
    }

    fn fd_velocity(coin: &Coin2, k: f64, branch: u8) -> f64 {
        let h = 1e-6;
        let lp = branches(coin, k + h)[(branch - 1) as usize].lambda;
        let lm = branches(coin, k - h)[(branch - 1) as usize].lambda;
        // i lambda'/lambda = -d(arg lambda)/dk
        -((lp / lm).arg()) / (2.0 * h)
    }

    #[test]
    fn symbol_examples() {
        let h = hadamard();
        assert!(symbol(&h, 0.0).max_abs_diff(&h.matrix()) < 1e-16);
        let id = Coin2::identity();
        let k = 0.4;
        let s = symbol(&id, k);
        assert!(s.max_abs_diff(&Mat2::diag(Complex64::from_polar(1.0, k), Complex64::from_polar(1.0, -k))) < 1e-16);
        let m = symbol(&h, FRAC_PI_2);
        let want = Mat2::diag(c(0.0, 1.0), c(0.0, -1.0)) * h.matrix();
        assert!(m.max_abs_diff(&want) < 1e-15);
        for coin in sample_coins() {
            for i in 0..50 {
                let k = -PI + i as f64 * 0.13;
                assert!(symbol(&coin, k).unitarity_residual() < 1e-12);
            }
        }
    }

    #[test]
    fn eig2_examples() {
        let [b1, b2] = eig2(&hadamard().matrix()).unwrap();
        let mut ls = [b1.lambda.re, b2.lambda.re];
        ls.sort_by(f64::total_cmp);
        assert!((ls[0] + 1.0).abs() < 1e-14 && (ls[1] - 1.0).abs() < 1e-14);

        let k = 0.9;
        let d = Mat2::diag(Complex64::from_polar(1.0, k), Complex64::from_polar(1.0, -k));
        let [b1, b2] = eig2(&d).unwrap();
        let args = [b1.lambda.arg(), b2.lambda.arg()];
        assert!(args.iter().any(|a| (a - k).abs() < 1e-12));
        assert!(args.iter().any(|a| (a + k).abs() < 1e-12));

        let m = symbol(&hadamard(), 0.7);
        let [b1, b2] = eig2(&m).unwrap();
        assert!((b1.lambda.norm() - 1.0).abs() < 1e-12);
        assert!((b2.lambda.norm() - 1.0).abs() < 1e-12);
        assert!((b1.lambda * b2.lambda - m.det()).norm() < 1e-12);
        assert!(b1.residual(&m) < 1e-10 && b2.residual(&m) < 1e-10);
    }

    #[test]
    fn eig2_rejects_non_unitary() {
        let m = Mat2::new(ONE, ONE, ZERO, ONE);
        assert!(eig2(&m).is_err());
    }

    #[test]
    fn eigen_residuals_everywhere() {
        for coin in sample_coins() {
            for i in 0..400 {
                let k = -PI + 2.0 * PI * i as f64 / 400.0;
                let m = symbol(&coin, k);
                for b in branches(&coin, k) {
                    assert!(b.residual(&m) < 1e-10, "k={k}");
                    let n = b.vector[0].norm_sqr() + b.vector[1].norm_sqr();
                    assert!((n - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn overlap_tracking_agrees_with_phase_labels() {
        for coin in sample_coins() {
            let tracked = track_branches(&coin, TRACKING_GRID);
            for (j, pair) in tracked.iter().enumerate() {
                let k = -PI + 2.0 * PI * j as f64 / TRACKING_GRID as f64;
                let analytic = branches(&coin, k);
                assert!((pair[0].lambda - analytic[0].lambda).norm() < 1e-12, "k={k}");
                assert!((pair[1].lambda - analytic[1].lambda).norm() < 1e-12, "k={k}");
            }
        }
    }

    #[test]
    fn closed_form_velocity_matches_finite_difference() {
        for coin in sample_coins() {
            for i in 0..200 {
                let k = -PI + 0.031 + 2.0 * PI * i as f64 / 200.0;
                for br in [1, 2] {
                    let v = group_velocity(&coin, k, br).unwrap();
                    let fd = fd_velocity(&coin, k, br);
                    assert!((v - fd).abs() < 1e-6, "k={k} branch {br}: {v} vs {fd}");
                    assert!(v.abs() <= coin.a().norm() + 1e-15);
                }
                let sum = group_velocity(&coin, k, 1).unwrap() + group_velocity(&coin, k, 2).unwrap();
                assert_eq!(sum, 0.0);
            }
        }
    }

    #[test]
    fn free_mover_velocity() {
        let id = Coin2::identity();
        for &k in &[-2.0, -0.5, 0.3, 1.7] {
            let v = group_velocity(&id, k, 1).unwrap();
            assert!((v.abs() - 1.0).abs() < 1e-12);
        }
        let swap = make_coin(ZERO, ONE, c(-1.0, 0.0)).unwrap();
        assert!(matches!(group_velocity(&swap, 0.1, 1), Err(Error::DegenerateCoin(_))));
    }

    #[test]
    fn hadamard_limit_moments() {
        let h = hadamard();
        let target = 1.0 - FRAC_1_SQRT_2;
        assert!(limit_moment(&h, &CoinState::symmetric(), 1).unwrap().abs() < 1e-10);
        assert!((limit_moment(&h, &CoinState::symmetric(), 2).unwrap() - target).abs() < 1e-9);
        assert!((limit_moment(&h, &CoinState::left(), 1).unwrap() + target).abs() < 1e-9);
        assert!((limit_moment(&h, &CoinState::right(), 1).unwrap() - target).abs() < 1e-9);
        assert!((limit_moment(&h, &CoinState::left(), 0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn numeric_density_at_center_and_normalization() {
        let h = hadamard();
        let d = limit_density_numeric(&h, &CoinState::symmetric(), &[0.0]).unwrap();
        assert!((d[0] - 1.0 / PI).abs() < 1e-12);
        for coin in sample_coins() {
            let abs_a = coin.a().norm();
            for init in [CoinState::left(), CoinState::right(), CoinState::symmetric()] {
                // x = |a| sin(theta) with the Jacobian |a| cos(theta) taken exactly. Within
                // 1e-3 of the edges x itself cannot be represented accurately enough to
                // invert v(k), so the two end slivers use the (even in delta) edge value.
                let g = |th: f64| {
                    let f = limit_density_numeric(&coin, &init, &[abs_a * th.sin()]).unwrap()[0];
                    f * abs_a * th.cos()
                };
                let delta = 1e-3;
                let edge = FRAC_PI_2 - delta;
                let mut est = crate::quad::simpson_estimate(g, -edge, edge, 1e-8, 8);
                assert!(est.converged);
                est.value += delta * (g(-edge) + g(edge));
                assert!((est.value - 1.0).abs() < 1e-6, "{}", est.value);
            }
        }
        assert!(matches!(
            limit_density_numeric(&h, &CoinState::left(), &[FRAC_1_SQRT_2]),
            Err(Error::SingularEndpoint { .. })
        ));
    }

    #[test]
    fn finite_time_moments_match_direct_evolution() {
        use crate::coin::CoinField;
        for coin in sample_coins() {
            let field = CoinField::homogeneous(coin).unwrap();
            for init in [CoinState::left(), CoinState::symmetric()] {
                for &t in &[1u64, 7, 50] {
                    let d = crate::dtqw::evolve(&init, &field, t).unwrap().distribution();
                    for j in 1..=4 {
                        let direct = d.moment(j);
                        let fourier = finite_time_moment(&coin, &init, t, j, 256).unwrap();
                        let scale = (t as f64).powi(j as i32).max(1.0);
                        assert!((direct - fourier).abs() < 1e-10 * scale, "t={t} j={j}: {direct} vs {fourier}");
                    }
                }
            }
        }
    }
}
