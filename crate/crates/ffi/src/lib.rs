//! C ABI over `qwalk`.
//!
//! Objects are opaque handles created by `qw_*_new*` and released with the
//! matching `qw_*_free`. Every fallible call returns a [`QwStatus`]; on failure
//! the message is kept per thread and can be copied out with
//! [`qw_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qwalk::coin::{dirac_coin, ftd_coin, hadamard, Coin2, CoinField, CoinState};
use qwalk::ctqw::{ctqw_exact, FtdRun};
use qwalk::classical::{lazy_rw, rw_distribution, LazyRun};
use qwalk::distribution::Distribution;
use qwalk::dtqw::WalkerState;
use qwalk::laws::LimitLaw;
use qwalk::stats::ks_distance;
use qwalk::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidCoin = 3,
    Configuration = 4,
    Numeric = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A validated 2x2 unitary coin.
pub struct QwCoin(Coin2);

/// A discrete-time walk: its coin schedule and current state.
pub struct QwWalk {
    field: CoinField,
    state: WalkerState,
}

/// A probability distribution on a contiguous range of sites.
pub struct QwDistribution(Distribution);

/// A limit law.
pub struct QwLaw(LimitLaw);

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut buf = e.borrow_mut();
        buf.clear();
        buf.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn status_of(err: &Error) -> QwStatus {
    match err {
        Error::InvalidArgument(_) => QwStatus::InvalidArgument,
        Error::InvalidCoin { .. } | Error::DegenerateCoin(_) => QwStatus::InvalidCoin,
        e if e.is_config() => QwStatus::Configuration,
        _ => QwStatus::Numeric,
    }
}

struct Fail(QwStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QwStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QwStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QwStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_value<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = value;
    Ok(())
}

fn state(ql_re: f64, ql_im: f64, qr_re: f64, qr_im: f64) -> Result<CoinState, Fail> {
    Ok(CoinState::new(Complex64::new(ql_re, ql_im), Complex64::new(qr_re, qr_im))?)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qw_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The Hadamard coin.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_coin_hadamard(out: *mut *mut QwCoin) -> QwStatus {
    guard(|| put(out, QwCoin(hadamard())))
}

/// Coin `[[a, b], [c, d]]`, rejected unless unitary.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qw_coin_new(
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    c_re: f64,
    c_im: f64,
    d_re: f64,
    d_im: f64,
    out: *mut *mut QwCoin,
) -> QwStatus {
    guard(|| {
        let coin = Coin2::new(
            Complex64::new(a_re, a_im),
            Complex64::new(b_re, b_im),
            Complex64::new(c_re, c_im),
            Complex64::new(d_re, d_im),
        )?;
        put(out, QwCoin(coin))
    })
}

/// `[[sqrt r, sqrt(1-r)], [sqrt(1-r), -sqrt r]]` for `r` in (0, 1).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_coin_ftd(r: f64, out: *mut *mut QwCoin) -> QwStatus {
    guard(|| put(out, QwCoin(ftd_coin(r)?)))
}

/// `exp(-i eps sigma_x)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_coin_dirac(eps: f64, out: *mut *mut QwCoin) -> QwStatus {
    guard(|| {
        if !eps.is_finite() {
            return Err(Fail(QwStatus::InvalidArgument, format!("eps must be finite, got {eps}")));
        }
        put(out, QwCoin(dirac_coin(eps)))
    })
}

/// # Safety
/// `coin` must be null or come from a `qw_coin_*` constructor, and is
/// invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn qw_coin_free(coin: *mut QwCoin) {
    if !coin.is_null() {
        drop(Box::from_raw(coin));
    }
}

/// Walk at the origin with coin state `(q_L, q_R)` and a homogeneous coin.
///
/// # Safety
/// `coin` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_walk_new(
    coin: *const QwCoin,
    ql_re: f64,
    ql_im: f64,
    qr_re: f64,
    qr_im: f64,
    out: *mut *mut QwWalk,
) -> QwStatus {
    guard(|| {
        let coin = deref(coin, "coin")?;
        let init = state(ql_re, ql_im, qr_re, qr_im)?;
        let field = CoinField::homogeneous(coin.0)?;
        put(out, QwWalk { field, state: WalkerState::at_origin(&init) })
    })
}

/// Final-time-dependent walk with `sqrt r(T) = r / T^alpha`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qw_walk_new_ftd(
    final_time: u64,
    alpha: f64,
    r: f64,
    ql_re: f64,
    ql_im: f64,
    qr_re: f64,
    qr_im: f64,
    out: *mut *mut QwWalk,
) -> QwStatus {
    guard(|| {
        let run = FtdRun::new(final_time, alpha, r)?;
        let init = state(ql_re, ql_im, qr_re, qr_im)?;
        put(out, QwWalk { field: run.field()?, state: WalkerState::at_origin(&init) })
    })
}

/// Advances the walk by `steps`.
///
/// # Safety
/// `walk` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qw_walk_step(walk: *mut QwWalk, steps: u64) -> QwStatus {
    guard(|| {
        let walk = walk.as_mut().ok_or_else(|| null("walk"))?;
        for _ in 0..steps {
            walk.state.step_in_place(&walk.field)?;
        }
        Ok(())
    })
}

/// Current time.
///
/// # Safety
/// `walk` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_walk_time(walk: *const QwWalk, out: *mut u64) -> QwStatus {
    guard(|| put_value(out, deref(walk, "walk")?.state.t()))
}

/// Amplitudes at site `n`; zero outside the support.
///
/// # Safety
/// `walk` must be a live handle and `out` point to 4 writable doubles
/// (re L, im L, re R, im R).
#[no_mangle]
pub unsafe extern "C" fn qw_walk_amplitude(walk: *const QwWalk, n: i64, out: *mut f64) -> QwStatus {
    guard(|| {
        let (l, r) = deref(walk, "walk")?.state.amplitude(n);
        if out.is_null() {
            return Err(null("out"));
        }
        for (i, v) in [l.re, l.im, r.re, r.im].into_iter().enumerate() {
            *out.add(i) = v;
        }
        Ok(())
    })
}

/// Position distribution of the current state.
///
/// # Safety
/// `walk` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_walk_distribution(walk: *const QwWalk, out: *mut *mut QwDistribution) -> QwStatus {
    guard(|| put(out, QwDistribution(deref(walk, "walk")?.state.distribution())))
}

/// # Safety
/// `walk` must be null or come from `qw_walk_new*`.
#[no_mangle]
pub unsafe extern "C" fn qw_walk_free(walk: *mut QwWalk) {
    if !walk.is_null() {
        drop(Box::from_raw(walk));
    }
}

/// CTQW from the origin, `|psi(x)|^2 = J_x(|gamma| t)^2`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_ctqw_exact(gamma_re: f64, gamma_im: f64, t: f64, out: *mut *mut QwDistribution) -> QwStatus {
    guard(|| put(out, QwDistribution(ctqw_exact(Complex64::new(gamma_re, gamma_im), t, None)?.distribution())))
}

/// Simple random walk with right-step probability `p` after `t` steps.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_random_walk(p: f64, t: u64, out: *mut *mut QwDistribution) -> QwStatus {
    guard(|| put(out, QwDistribution(rw_distribution(p, t)?)))
}

/// Lazy random walk with `r(T) = r / T^alpha`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_lazy_walk(final_time: u64, alpha: f64, r: f64, out: *mut *mut QwDistribution) -> QwStatus {
    guard(|| put(out, QwDistribution(lazy_rw(&LazyRun::new(final_time, alpha, r)?)?)))
}

/// First site and number of sites.
///
/// # Safety
/// `dist` must be a live handle; `start` and `len` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qw_distribution_range(dist: *const QwDistribution, start: *mut i64, len: *mut usize) -> QwStatus {
    guard(|| {
        let d = &deref(dist, "dist")?.0;
        put_value(start, d.start())?;
        put_value(len, d.len())
    })
}

/// Copies the probabilities into `buf`; fails with `BufferTooSmall` when
/// `cap` is less than the length.
///
/// # Safety
/// `dist` must be a live handle and `buf` point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qw_distribution_copy(dist: *const QwDistribution, buf: *mut f64, cap: usize) -> QwStatus {
    guard(|| {
        let probs = deref(dist, "dist")?.0.probs();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if cap < probs.len() {
            return Err(Fail(QwStatus::BufferTooSmall, format!("need {} values, got {cap}", probs.len())));
        }
        ptr::copy_nonoverlapping(probs.as_ptr(), buf, probs.len());
        Ok(())
    })
}

/// Moment `sum n^j p_n`.
///
/// # Safety
/// `dist` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_distribution_moment(dist: *const QwDistribution, j: u32, out: *mut f64) -> QwStatus {
    guard(|| put_value(out, deref(dist, "dist")?.0.moment(j)))
}

/// # Safety
/// `dist` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn qw_distribution_free(dist: *mut QwDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Konno law of the walk with `coin` from coin state `(q_L, q_R)`.
///
/// # Safety
/// `coin` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_law_konno(
    coin: *const QwCoin,
    ql_re: f64,
    ql_im: f64,
    qr_re: f64,
    qr_im: f64,
    out: *mut *mut QwLaw,
) -> QwStatus {
    guard(|| {
        let coin = deref(coin, "coin")?;
        let init = state(ql_re, ql_im, qr_re, qr_im)?;
        put(out, QwLaw(LimitLaw::konno_for(&coin.0, &init)?))
    })
}

/// Arcsine law on `(-|gamma|, |gamma|)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_law_arcsine(gamma_re: f64, gamma_im: f64, out: *mut *mut QwLaw) -> QwStatus {
    guard(|| put(out, QwLaw(LimitLaw::arcsine(Complex64::new(gamma_re, gamma_im))?)))
}

/// Normal law with mean `mu` and variance `nu`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_law_normal(mu: f64, nu: f64, out: *mut *mut QwLaw) -> QwStatus {
    guard(|| put(out, QwLaw(LimitLaw::normal(mu, nu)?)))
}

/// Distribution function at `x`.
///
/// # Safety
/// `law` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_law_cdf(law: *const QwLaw, x: f64, out: *mut f64) -> QwStatus {
    guard(|| put_value(out, deref(law, "law")?.0.cdf(x)))
}

/// Density at `x` (continuous laws only).
///
/// # Safety
/// `law` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_law_pdf(law: *const QwLaw, x: f64, out: *mut f64) -> QwStatus {
    guard(|| put_value(out, deref(law, "law")?.0.pdf(x)?))
}

/// # Safety
/// `law` must be null or come from a `qw_law_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn qw_law_free(law: *mut QwLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

/// Kolmogorov distance between `dist` rescaled by `1/scale` and `law`.
///
/// # Safety
/// `dist` and `law` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qw_ks_distance(dist: *const QwDistribution, scale: f64, law: *const QwLaw, out: *mut f64) -> QwStatus {
    guard(|| {
        let d = deref(dist, "dist")?;
        let l = deref(law, "law")?;
        put_value(out, ks_distance(&d.0, scale, &l.0)?)
    })
}
