//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Thresholds are fixed. A failing criterion is reported with its measured
//! value, and the process still exits 0 so that the remaining test targets of
//! `cargo test --workspace` run; set `QWALK_ACCEPTANCE_STRICT=1` to exit 1
//! when anything fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qwalk::classical::{lazy_rw, rw_distribution, LazyRun};
use qwalk::coin::{dirac_coin, ftd_coin, hadamard, make_coin, validate_unitary, Coin2, CoinField, CoinState};
use qwalk::ctqw::{crossover_row, ctqw_exact, ctqw_integrate, ftd_decomposition, FtdRun};
use qwalk::dirac::continuum_compare;
use qwalk::distribution::Distribution;
use qwalk::dtqw::evolve;
use qwalk::laws::LimitLaw;
use qwalk::momentum::{limit_density_numeric, limit_moment};
use qwalk::specfun::{bessel_i_scaled, bessel_j_orders};
use qwalk::stats::{ks_distance, report_row, Scaling};
use qwalk::Result;

type Check = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn three_inits() -> [(&'static str, CoinState); 3] {
    [
        ("|L>", CoinState::left()),
        ("|R>", CoinState::right()),
        ("(|L>+i|R>)/sqrt2", CoinState::symmetric()),
    ]
}

fn hadamard_field() -> CoinField {
    CoinField::homogeneous(hadamard()).expect("hadamard field")
}

fn ac1() -> Result<Outcome> {
    let start = Instant::now();
    let d = evolve(&CoinState::left(), &hadamard_field(), 3)?.distribution();
    let elapsed = start.elapsed();
    // U = W C with L -> n-1: |L> -> (|L,-1> + |R,+1>)/sqrt2 -> ... by hand.
    let expected = [(-3, 0.125), (-1, 0.625), (1, 0.125), (3, 0.125)];
    let mut err: f64 = 0.0;
    for n in -4..=4 {
        let want = expected.iter().find(|e| e.0 == n).map_or(0.0, |e| e.1);
        err = err.max((d.prob(n) - want).abs());
    }
    Ok(Outcome {
        pass: err <= 1e-12 && elapsed < Duration::from_millis(1),
        detail: format!("max |dPr| = {err:.1e} (<= 1e-12), evolve took {elapsed:?} (< 1 ms)"),
    })
}

fn ac2() -> Result<Outcome> {
    let init = CoinState::symmetric();
    let t = 2000.0;
    let d = evolve(&init, &hadamard_field(), t as u64)?.distribution();
    let m2 = d.scaled_moment(2, 0.0, t);
    let law = LimitLaw::konno_for(&hadamard(), &init)?;
    let quad = law.moment(2)?;
    let spectral = limit_moment(&hadamard(), &init, 2)?;
    let closed = 1.0 - FRAC_1_SQRT_2;
    let rel = (m2 - quad).abs() / quad;
    let agree = (quad - spectral).abs();
    Ok(Outcome {
        pass: rel < 0.005 && agree < 1e-8 && (quad - closed).abs() < 1e-8,
        detail: format!(
            "E[(X/t)^2] = {m2:.8} at t = 2000, quadrature {quad:.10}, spectral {spectral:.10}, \
             1 - 1/sqrt2 = {closed:.10}; rel dev {rel:.2e} (< 5e-3), quadrature vs spectral {agree:.1e} (< 1e-8)"
        ),
    })
}

fn ac3() -> Result<Outcome> {
    let field = hadamard_field();
    let t = 1000u64;
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, init) in three_inits() {
        let law = LimitLaw::konno_for(&hadamard(), &init)?;
        let ks = ks_distance(&evolve(&init, &field, t)?.distribution(), t as f64, &law)?;
        pass &= ks < 0.03;
        parts.push(format!("{name} KS {ks:.4}"));
    }
    Ok(Outcome { pass, detail: format!("t = 1000: {} (each < 0.03)", parts.join(", ")) })
}

fn ac4() -> Result<Outcome> {
    let coins: Vec<(f64, Coin2)> = vec![
        (0.3, make_coin(c(0.3 * 0.4f64.cos(), 0.3 * 0.4f64.sin()), Complex64::from_polar(0.91f64.sqrt(), -1.1), Complex64::from_polar(1.0, 0.7))?),
        (FRAC_1_SQRT_2, hadamard()),
        (0.9, make_coin(c(0.9, 0.0), c(0.0, 0.19f64.sqrt()), Complex64::from_polar(1.0, -0.3))?),
    ];
    let mut worst: f64 = 0.0;
    for (abs_a, coin) in &coins {
        let grid: Vec<f64> = (0..101).map(|j| abs_a * (-1.0 + 2.0 * (j as f64 + 0.5) / 101.0)).collect();
        for (_, init) in three_inits() {
            let law = LimitLaw::konno_for(coin, &init)?;
            let numeric = limit_density_numeric(coin, &init, &grid)?;
            for (x, n) in grid.iter().zip(&numeric) {
                worst = worst.max((law.pdf(*x)? - n).abs());
            }
        }
    }
    Ok(Outcome {
        pass: worst < 1e-6,
        detail: format!("max |closed form - eigenvector density| = {worst:.1e} over 3 coins x 3 states x 101 points (< 1e-6)"),
    })
}

fn ac5() -> Result<Outcome> {
    let gamma = c(1.0, 0.0);
    let d = ctqw_exact(gamma, 400.0, None)?.distribution();
    let ks = ks_distance(&d, 400.0, &LimitLaw::arcsine(gamma)?)?;
    let exact = ctqw_exact(gamma, 20.0, None)?;
    let rk4 = ctqw_integrate(gamma, 20.0, 0.002, None)?;
    let l2 = exact.l2_distance(&rk4);
    Ok(Outcome {
        pass: ks < 0.02 && l2 < 1e-7,
        detail: format!("KS vs arcsine at t = 400: {ks:.4} (< 0.02); exact vs RK4 L2 at t = 20: {l2:.1e} (< 1e-7)"),
    })
}

fn ac6() -> Result<Outcome> {
    let init = CoinState::left();
    let limits = [(0.0, 0.04), (0.5, 0.04), (1.0, 0.01), (2.0, 0.999)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (alpha, bound) in limits {
        let row = crossover_row(1000, alpha, 0.5, &init)?;
        let ok = if alpha > 1.0 { row.p0 > bound } else { row.value < bound };
        pass &= ok;
        let shown = if alpha > 1.0 {
            format!("Pr(0) {:.8} (> {bound})", row.p0)
        } else {
            format!("{} {:.4e} (< {bound})", row.metric, row.value)
        };
        parts.push(format!("alpha {alpha} -> {}: {shown}{}", row.law.name(), if ok { "" } else { " FAIL" }));
    }
    Ok(Outcome { pass, detail: format!("T = 1000, r = 0.5, |L>: {}", parts.join("; ")) })
}

fn ac7() -> Result<Outcome> {
    let run = FtdRun::new(10_000, 0.75, 0.5)?;
    let mut worst: f64 = 0.0;
    let mut mass: f64 = 0.0;
    for (_, init) in three_inits() {
        let dec = ftd_decomposition(&run, &init)?;
        worst = worst.max(dec.l1_to_direct);
        mass = mass.max((dec.recombined.total() - 1.0).abs());
    }
    Ok(Outcome {
        pass: worst < 0.05,
        detail: format!("T = 1e4, alpha = 0.75, r = 0.5: max L1 over 3 states {worst:.2e} (< 0.05), |mass - 1| <= {mass:.1e}"),
    })
}

fn ac8() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, init) in three_inits() {
        let rep = continuum_compare(&[0.04, 0.02, 0.01], 1.0, &init, 0.1)?;
        let ok = rep.strictly_decreasing() && (0.7..=1.3).contains(&rep.fitted_order);
        pass &= ok;
        let errs: Vec<String> = rep.l2_error.iter().map(|e| format!("{e:.5}")).collect();
        parts.push(format!("{name} L2 [{}] order {:.3}", errs.join(", "), rep.fitted_order));
    }
    Ok(Outcome { pass, detail: format!("t = 1: {} (decreasing, order in [0.7, 1.3])", parts.join("; ")) })
}

fn ac9() -> Result<Outcome> {
    let bessel = lazy_rw(&LazyRun::new(10_000, 1.0, 1.0)?)?;
    let law = LimitLaw::mod_bessel(1.0)?;
    let mut covered = 0.0;
    let mut l1 = 0.0;
    for (n, p) in bessel.iter() {
        let q = law.pmf(n)?;
        covered += q;
        l1 += (p - q).abs();
    }
    let tv = 0.5 * (l1 + (1.0 - covered).max(0.0));

    let (alpha, r) = (0.5, 0.5);
    let lazy = lazy_rw(&LazyRun::new(10_000, alpha, r)?)?;
    let (ks_lazy, _) = report_row(&lazy, 10_000.0, &Scaling::LazyCentral { alpha, r }, &LimitLaw::normal(0.0, 1.0)?)?;

    let p = 0.5;
    let fair = rw_distribution(p, 10_000)?;
    let (ks_clt, _) = report_row(&fair, 10_000.0, &Scaling::Standardized { p }, &LimitLaw::normal(0.0, 1.0)?)?;
    let p0 = lazy.prob(0);
    Ok(Outcome {
        pass: tv < 0.01 && ks_lazy < 0.02 && ks_clt < 0.01,
        detail: format!(
            "lazy alpha 1, r 1: TV to ModBessel(1) {tv:.2e} (< 0.01); lazy alpha 0.5, r 0.5: KS {ks_lazy:.5} (< 0.02, \
             atom Pr(0) = {p0:.4}); fair RW t = 1e4: KS {ks_clt:.5} (< 0.01)"
        ),
    })
}

/// Deterministic grid version of the invariants; randomized versions live in
/// the `properties` test target.
fn ac10() -> Result<Outcome> {
    let coins = [
        hadamard(),
        ftd_coin(0.3)?,
        dirac_coin(0.1),
        make_coin(c(0.6, 0.0), c(0.0, 0.8), Complex64::from_polar(1.0, 1.0))?,
    ];
    let inits = [
        CoinState::left(),
        CoinState::right(),
        CoinState::symmetric(),
        CoinState::new(c(0.6, 0.0), c(0.0, -0.8))?,
    ];
    let mut failures = Vec::new();
    let mut checks = 0usize;
    let mut worst_norm: f64 = 0.0;
    for (i, coin) in coins.iter().enumerate() {
        checks += 1;
        if !validate_unitary(coin).passes() {
            failures.push(format!("coin {i} not unitary"));
        }
        let field = CoinField::homogeneous(*coin)?;
        for init in &inits {
            for t in [0u64, 1, 2, 7, 50, 301] {
                checks += 1;
                let d = evolve(init, &field, t)?.distribution();
                let dev = (d.total() - 1.0).abs();
                worst_norm = worst_norm.max(dev);
                let support = d.iter().all(|(n, p)| p == 0.0 || n.unsigned_abs() <= t);
                let parity = d.iter().all(|(n, p)| p == 0.0 || (n + t as i64).rem_euclid(2) == 0);
                if dev > 1e-12 || !support || !parity {
                    failures.push(format!("coin {i} t {t}: norm dev {dev:.1e}, support {support}, parity {parity}"));
                }
            }
        }
    }
    for t in [0.5, 5.0, 40.0, 250.0] {
        checks += 1;
        let dev = (ctqw_exact(c(0.3, -0.9), t, None)?.norm_sqr() - 1.0).abs();
        worst_norm = worst_norm.max(dev);
        if dev > 1e-10 {
            failures.push(format!("ctqw t {t}: norm dev {dev:.1e}"));
        }
    }
    let mut worst_bessel: f64 = 0.0;
    for z in [0.1, 1.0, 7.9, 8.1, 15.0, 40.0, 300.0, 1000.0] {
        checks += 2;
        let orders = bessel_j_orders((z as usize) + 60, z)?;
        let sum_j2 = orders[0] * orders[0] + 2.0 * orders[1..].iter().map(|j| j * j).sum::<f64>();
        let h = (z + 60.0 + 10.0 * z.sqrt()) as i32;
        let poisson: f64 = (-h..=h).map(|n| bessel_i_scaled(n, z)).sum::<Result<f64>>()?;
        let e1 = (sum_j2 - 1.0).abs();
        let e2 = (poisson - 1.0).abs();
        worst_bessel = worst_bessel.max(e1).max(e2);
        if e1 > 1e-10 || e2 > 1e-10 {
            failures.push(format!("z {z}: |sum J^2 - 1| {e1:.1e}, |sum e^-z I - 1| {e2:.1e}"));
        }
    }
    for t in [1u64, 10, 501] {
        checks += 2;
        let rw = rw_distribution(0.3, t)?;
        let lazy = lazy_rw(&LazyRun::new(t, 0.4, 0.7)?)?;
        for (name, d) in [("rw", &rw), ("lazy", &lazy)] {
            let dev = (d.total() - 1.0).abs();
            if dev > 1e-12 || !respects_support(d, t) {
                failures.push(format!("{name} t {t}: norm dev {dev:.1e}"));
            }
        }
    }
    Ok(Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!(
                "{checks} grid checks; worst norm deviation {worst_norm:.1e}, worst Bessel identity error {worst_bessel:.1e} (< 1e-10)"
            )
        } else {
            failures.join("; ")
        },
    })
}

fn respects_support(d: &Distribution, t: u64) -> bool {
    d.iter().all(|(n, p)| p == 0.0 || n.unsigned_abs() <= t)
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, f64, Check); 10] = [
        ("AC1", "Hadamard 3-step exactness", 0.0, ac1),
        ("AC2", "Hadamard second moment", 30.0, ac2),
        ("AC3", "Hadamard weak convergence", 60.0, ac3),
        ("AC4", "Konno density oracle equivalence", 10.0, ac4),
        ("AC5", "CTQW arcsine law and integrator", 30.0, ac5),
        ("AC6", "FTD crossover", 120.0, ac6),
        ("AC7", "Two-CTQW decomposition", 120.0, ac7),
        ("AC8", "Dirac continuum order", 60.0, ac8),
        ("AC9", "Classical crossovers and CLT", 30.0, ac9),
        ("AC10", "Invariant grids and Bessel identities", 0.0, ac10),
    ];
    let mut failed = Vec::new();
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let over = budget > 0.0 && secs > budget;
        let (pass, detail) = match result {
            Ok(o) => (o.pass && !over, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget_note = if budget > 0.0 { format!(", budget {budget} s") } else { String::new() };
        println!(
            "{id} {} {name}: {detail} [{secs:.2} s{budget_note}]",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: 10/10 PASS");
    } else {
        println!("acceptance: {}/10 PASS; failing: {}", 10 - failed.len(), failed.join(", "));
    }
    let strict = std::env::var("QWALK_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && !failed.is_empty() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
