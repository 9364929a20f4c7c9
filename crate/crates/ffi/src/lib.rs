//! C ABI over `weak_distill`.
//!
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free` function. Every fallible call returns a [`WdStatus`];
//! on failure a message is kept per thread and can be read with
//! [`wd_last_error_message`]. Panics are caught and reported as
//! [`WdStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use weak_distill::bounds::{bound_estimation, bound_rejection, BoundInputs, RejectionVariant};
use weak_distill::estimation::estimate_distribution;
use weak_distill::{
    retry_budget, tvd, DiscreteDistribution, Error, QuasiDecomposition, ScenarioParams, StreamRng,
    WeakSampler,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Numerical = 4,
    Panic = 5,
}

/// Two-term quasiprobability decomposition.
pub struct WdDecomposition(QuasiDecomposition);

/// Rejection sampler with fixed acceptance ratios.
pub struct WdSampler(WeakSampler);

/// Seeded random stream.
pub struct WdRng(StreamRng);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(WdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DimensionMismatch { .. } => WdStatus::DimensionMismatch,
            Error::InvalidParameter { .. }
            | Error::InvalidDistribution(_)
            | Error::DimensionOverflow(_)
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_) => WdStatus::InvalidArgument,
            _ => WdStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(WdStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            WdStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Copies `values` into a caller buffer that must hold exactly `len` entries.
unsafe fn output(values: &[f64], out: *mut f64, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    if len != values.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            actual: len,
        }
        .into());
    }
    slice::from_raw_parts_mut(out, len).copy_from_slice(values);
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    *as_mut(out, what)? = value;
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn wd_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a decomposition from `c₊`, `c₋` and two distributions of length
/// `len` (a power of two).
///
/// # Safety
/// `sigma_plus` and `sigma_minus` must point to `len` readable doubles and
/// `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn wd_decomposition_new(
    c_plus: f64,
    c_minus: f64,
    sigma_plus: *const f64,
    sigma_minus: *const f64,
    len: usize,
    out: *mut *mut WdDecomposition,
) -> WdStatus {
    guard(|| {
        let sp = DiscreteDistribution::new(input(sigma_plus, len, "sigma_plus")?.to_vec())?;
        let sm = DiscreteDistribution::new(input(sigma_minus, len, "sigma_minus")?.to_vec())?;
        let d = QuasiDecomposition::new(c_plus, c_minus, sp, sm)?;
        write(out, Box::into_raw(Box::new(WdDecomposition(d))), "out")
    })
}

/// Builds a benchmark scenario (`"depolarizing"`, `"isotropic"` or `"iqp"`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn wd_decomposition_scenario(
    name: *const c_char,
    seed: u64,
    out: *mut *mut WdDecomposition,
) -> WdStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| Failure(WdStatus::InvalidArgument, "name is not UTF-8".into()))?;
        let d = ScenarioParams::default_for(name)?
            .build(seed)?
            .decomposition;
        write(out, Box::into_raw(Box::new(WdDecomposition(d))), "out")
    })
}

/// # Safety
/// `d` must be null or a handle from this library that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wd_decomposition_free(d: *mut WdDecomposition) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wd_decomposition_len(
    d: *const WdDecomposition,
    out: *mut usize,
) -> WdStatus {
    guard(|| write(out, as_ref(d, "d")?.0.len(), "out"))
}

/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wd_decomposition_gamma(
    d: *const WdDecomposition,
    out: *mut f64,
) -> WdStatus {
    guard(|| write(out, as_ref(d, "d")?.0.gamma(), "out"))
}

/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wd_decomposition_c_minus(
    d: *const WdDecomposition,
    out: *mut f64,
) -> WdStatus {
    guard(|| write(out, as_ref(d, "d")?.0.c_minus(), "out"))
}

/// Writes the signed target `c₊σ₊ − c₋σ₋`.
///
/// # Safety
/// `d` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wd_decomposition_target(
    d: *const WdDecomposition,
    out: *mut f64,
    len: usize,
) -> WdStatus {
    guard(|| output(&as_ref(d, "d")?.0.target_values(), out, len))
}

/// Writes the sampled mixture `(c₊σ₊ + c₋σ₋)/γ`.
///
/// # Safety
/// `d` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wd_decomposition_mixture(
    d: *const WdDecomposition,
    out: *mut f64,
    len: usize,
) -> WdStatus {
    guard(|| output(as_ref(d, "d")?.0.mixture().probs(), out, len))
}

/// Returns a new random stream; never null.
#[no_mangle]
pub extern "C" fn wd_rng_new(seed: u64, stream: u64) -> *mut WdRng {
    Box::into_raw(Box::new(WdRng(StreamRng::new(seed, stream))))
}

/// # Safety
/// `rng` must be null or a handle from [`wd_rng_new`] that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wd_rng_free(rng: *mut WdRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// Estimates acceptance ratios from `n` signed draws and builds a sampler.
///
/// # Safety
/// `d` and `rng` must be live handles and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn wd_sampler_estimate(
    d: *const WdDecomposition,
    n: u64,
    rng: *mut WdRng,
    out: *mut *mut WdSampler,
) -> WdStatus {
    guard(|| {
        let d = as_ref(d, "d")?.0.clone();
        let rng = &mut as_mut(rng, "rng")?.0;
        let s = WeakSampler::estimate(d, n, rng);
        write(out, Box::into_raw(Box::new(WdSampler(s))), "out")
    })
}

/// Builds a sampler with the exact acceptance ratios.
///
/// # Safety
/// `d` must be a live handle and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn wd_sampler_ideal(
    d: *const WdDecomposition,
    out: *mut *mut WdSampler,
) -> WdStatus {
    guard(|| {
        let s = WeakSampler::ideal(as_ref(d, "d")?.0.clone())?;
        write(out, Box::into_raw(Box::new(WdSampler(s))), "out")
    })
}

/// # Safety
/// `s` must be null or a handle from this library that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wd_sampler_free(s: *mut WdSampler) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wd_sampler_ratios(
    s: *const WdSampler,
    out: *mut f64,
    len: usize,
) -> WdStatus {
    guard(|| output(as_ref(s, "s")?.0.ratios(), out, len))
}

/// Writes the exact law of accepted outcomes.
///
/// # Safety
/// `s` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wd_sampler_output_distribution(
    s: *const WdSampler,
    out: *mut f64,
    len: usize,
) -> WdStatus {
    guard(|| output(as_ref(s, "s")?.0.output_distribution()?.probs(), out, len))
}

/// Upper bound on the sampler's TVD from the target; `+inf` when vacuous.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wd_sampler_tvd_error_bound(
    s: *const WdSampler,
    out: *mut f64,
) -> WdStatus {
    guard(|| write(out, as_ref(s, "s")?.0.tvd_error_bound()?, "out"))
}

/// Draws one accepted outcome using at most `max_attempts` proposals.
///
/// # Safety
/// `s` and `rng` must be live handles; `out_index` must be writable and
/// `out_attempts` null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_sampler_sample(
    s: *const WdSampler,
    rng: *mut WdRng,
    max_attempts: u64,
    out_index: *mut u64,
    out_attempts: *mut u64,
) -> WdStatus {
    guard(|| {
        let s = &as_ref(s, "s")?.0;
        let rng = &mut as_mut(rng, "rng")?.0;
        let accepted = s.run_rejection(max_attempts, rng)?;
        write(out_index, accepted.outcome.index() as u64, "out_index")?;
        if !out_attempts.is_null() {
            *out_attempts = accepted.attempts;
        }
        Ok(())
    })
}

/// Clipped, normalized estimate of the target from `n ≥ 1` signed draws.
///
/// # Safety
/// `d` and `rng` must be live handles and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wd_estimate_distribution(
    d: *const WdDecomposition,
    n: u64,
    rng: *mut WdRng,
    out: *mut f64,
    len: usize,
) -> WdStatus {
    guard(|| {
        let d = &as_ref(d, "d")?.0;
        let rng = &mut as_mut(rng, "rng")?.0;
        let e = estimate_distribution(d, n, rng)?;
        output(e.clipped_normalized().probs(), out, len)
    })
}

/// Total variation distance between two distributions of length `len`.
///
/// # Safety
/// `p` and `q` must point to `len` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn wd_tvd(
    p: *const f64,
    q: *const f64,
    len: usize,
    out: *mut f64,
) -> WdStatus {
    guard(|| {
        let p = DiscreteDistribution::new(input(p, len, "p")?.to_vec())?;
        let q = DiscreteDistribution::new(input(q, len, "q")?.to_vec())?;
        write(out, tvd(&p, &q)?, "out")
    })
}

/// Number of rejection attempts that succeed with probability `1 − δ₂`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wd_retry_budget(
    gamma: f64,
    c_minus: f64,
    epsilon: f64,
    delta2: f64,
    out: *mut u64,
) -> WdStatus {
    guard(|| write(out, retry_budget(gamma, c_minus, epsilon, delta2)?, "out"))
}

/// Sample cost of the estimation baseline for accuracy `ε` and confidence `δ`.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wd_bound_estimation(
    d: *const WdDecomposition,
    epsilon: f64,
    delta: f64,
    out: *mut f64,
) -> WdStatus {
    guard(|| {
        let inputs = BoundInputs::from_decomposition(&as_ref(d, "d")?.0, epsilon, delta)?;
        write(out, bound_estimation(&inputs), "out")
    })
}

/// Rejection-method sample cost for variant 1, 2 or 3, minimized over the
/// failure-probability split. The chosen `δ₁` goes to `out_delta1` when it is
/// not null.
///
/// # Safety
/// `d` must be a live handle, `out` writable and `out_delta1` null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_bound_rejection(
    d: *const WdDecomposition,
    variant: u8,
    epsilon: f64,
    delta: f64,
    out: *mut f64,
    out_delta1: *mut f64,
) -> WdStatus {
    guard(|| {
        let v = RejectionVariant::from_index(variant).ok_or_else(|| {
            Failure(
                WdStatus::InvalidArgument,
                format!("variant {variant} is not 1, 2 or 3"),
            )
        })?;
        let inputs = BoundInputs::from_decomposition(&as_ref(d, "d")?.0, epsilon, delta)?;
        let b = bound_rejection(&inputs, v)?;
        write(out, b.value, "out")?;
        if !out_delta1.is_null() {
            *out_delta1 = b.delta1;
        }
        Ok(())
    })
}
