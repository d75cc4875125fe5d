//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32, out: &mut QuadEstimate) {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        if depth >= MAX_DEPTH && delta.abs() > 15.0 * tol {
            out.converged = false;
        }
        out.value += left + right + delta / 15.0;
        out.error += delta.abs() / 15.0;
        return;
    }
    refine(
        f,
        Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left },
        0.5 * tol,
        depth + 1,
        out,
    );
    refine(
        f,
        Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right },
        0.5 * tol,
        depth + 1,
        out,
    );
}

/// Integrates `f` over `[a, b]`, splitting into `panels` equal pieces first.
/// Never fails; inspect `converged` on the result.
pub fn simpson_estimate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, panels: usize) -> QuadEstimate {
    let mut out = QuadEstimate { value: 0.0, error: 0.0, converged: true };
    if a == b {
        return out;
    }
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let panel_tol = tol / panels as f64;
    let mut fa = f(a);
    for i in 0..panels {
        let pa = a + h * i as f64;
        let pb = if i + 1 == panels { b } else { a + h * (i + 1) as f64 };
        let pm = 0.5 * (pa + pb);
        let fm = f(pm);
        let fb = f(pb);
        let whole = simpson(pa, pb, fa, fm, fb);
        refine(&f, Panel { a: pa, b: pb, fa, fm, fb, whole }, panel_tol, 0, &mut out);
        fa = fb;
    }
    out
}

/// As [`simpson_estimate`], but a non-converged result is an error.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, panels: usize) -> Result<f64> {
    let est = simpson_estimate(f, a, b, tol, panels);
    if est.converged && est.value.is_finite() {
        Ok(est.value)
    } else {
        Err(Error::Quadrature { achieved: est.error, wanted: tol })
    }
}

/// Integral over `(-edge, upper]` of a density of the form
/// `regular(x) / sqrt(edge^2 - x^2)`.
///
/// The substitution `x = edge * sin(theta)` absorbs the band-edge singularity,
/// leaving `int regular(edge * sin(theta)) dtheta`.
pub fn integrate_band<F: Fn(f64) -> f64>(regular: F, edge: f64, upper: f64, tol: f64) -> QuadEstimate {
    let theta_hi = (upper / edge).clamp(-1.0, 1.0).asin();
    simpson_estimate(
        |theta: f64| regular(edge * theta.sin()),
        -std::f64::consts::FRAC_PI_2,
        theta_hi,
        tol,
        8,
    )
}
