//! C ABI for `xeb-core`.
//!
//! Tables and batches are opaque heap handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns
//! an [`XebStatus`]; on failure a message for the calling thread is available
//! from [`xeb_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::ptr;

use xeb_core::xeb::XebMode as Mode;
use xeb_core::{DigitString, EnumerationCap, Error, SampleBatch, WeightTable};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XebStatus {
    Ok = 0,
    InvalidParameter = 1,
    OutOfRange = 2,
    ResourceLimit = 3,
    Io = 4,
    Format = 5,
    NullPointer = 6,
    Panic = 7,
}

/// Estimator selector, passed as `uint32_t`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XebMode {
    EmpiricalNaive = 0,
    EmpiricalLogspace = 1,
    TrueBruteforce = 2,
    TrueClosedform = 3,
}

/// Opaque weight table.
pub struct XebTable {
    inner: WeightTable,
}

/// Opaque batch of samples with their log-probabilities.
pub struct XebBatch {
    inner: SampleBatch,
}

/// One XEB value. `samples` is 0 for true values; `stderr` is NaN when
/// `has_stderr` is false.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct XebEstimate {
    pub n: usize,
    pub d: usize,
    pub samples: u64,
    pub mode: u32,
    pub value: f64,
    pub log1p_value: f64,
    pub stderr: f64,
    pub has_stderr: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct XebAdvantage {
    pub log10_enum_seconds: f64,
    pub log10_enum_years: f64,
    pub log10_per_sample_seconds: f64,
    pub log10_advantage: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> XebStatus {
    match err {
        Error::InvalidParameter(_) => XebStatus::InvalidParameter,
        Error::OutOfRange { .. } => XebStatus::OutOfRange,
        Error::ResourceLimit { .. } => XebStatus::ResourceLimit,
        Error::Io { .. } => XebStatus::Io,
        Error::Format { .. } => XebStatus::Format,
    }
}

struct Failure(XebStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(XebStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(XebStatus::InvalidParameter, msg.into())
}

/// Runs `body`, recording any error or panic for `xeb_last_error`.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> XebStatus {
    match panic::catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => XebStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {msg}"));
            XebStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<String, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| invalid("path is not valid UTF-8"))
}

fn mode_arg(mode: u32) -> Result<Mode, Failure> {
    Ok(match mode {
        0 => Mode::EmpiricalNaive,
        1 => Mode::EmpiricalLogspace,
        2 => Mode::TrueBruteforce,
        3 => Mode::TrueClosedform,
        _ => return Err(invalid(format!("unknown mode {mode}"))),
    })
}

fn mode_code(mode: Mode) -> u32 {
    match mode {
        Mode::EmpiricalNaive => XebMode::EmpiricalNaive as u32,
        Mode::EmpiricalLogspace => XebMode::EmpiricalLogspace as u32,
        Mode::TrueBruteforce => XebMode::TrueBruteforce as u32,
        Mode::TrueClosedform => XebMode::TrueClosedform as u32,
    }
}

fn estimate(e: &xeb_core::XebEstimate) -> XebEstimate {
    XebEstimate {
        n: e.n,
        d: e.d,
        samples: e.samples.unwrap_or(0) as u64,
        mode: mode_code(e.mode),
        value: e.value,
        log1p_value: e.log1p_value,
        stderr: e.stderr.unwrap_or(f64::NAN),
        has_stderr: e.stderr.is_some(),
    }
}

fn put_table(slot: &mut *mut XebTable, inner: WeightTable) {
    *slot = Box::into_raw(Box::new(XebTable { inner }));
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn xeb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn xeb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Random table with `n` rows of `d` weights, reproducible from `seed`.
///
/// # Safety
/// `out_table` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xeb_table_generate(n: usize, d: usize, seed: u64, out_table: *mut *mut XebTable) -> XebStatus {
    guard(|| {
        let slot = out(out_table, "out_table")?;
        put_table(slot, xeb_core::generate_weight_table(n, d, seed)?);
        Ok(())
    })
}

/// Table with uniform rows.
///
/// # Safety
/// `out_table` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xeb_table_uniform(n: usize, d: usize, out_table: *mut *mut XebTable) -> XebStatus {
    guard(|| {
        let slot = out(out_table, "out_table")?;
        put_table(slot, WeightTable::uniform(n, d)?);
        Ok(())
    })
}

/// Table from `n * d` row-major weights; each row must sum to 1.
///
/// # Safety
/// `weights` must point to `n * d` readable doubles; `out_table` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xeb_table_from_weights(
    n: usize,
    d: usize,
    weights: *const f64,
    seed: u64,
    out_table: *mut *mut XebTable,
) -> XebStatus {
    guard(|| {
        let slot = out(out_table, "out_table")?;
        if weights.is_null() {
            return Err(null("weights"));
        }
        let len = n.checked_mul(d).ok_or_else(|| invalid("n * d overflows"))?;
        let flat = std::slice::from_raw_parts(weights, len);
        let rows: Vec<Vec<f64>> = if d == 0 { Vec::new() } else { flat.chunks(d).map(<[f64]>::to_vec).collect() };
        if rows.len() != n {
            return Err(invalid(format!("expected {n} rows of {d} weights")));
        }
        put_table(slot, WeightTable::from_rows(&rows, seed)?);
        Ok(())
    })
}

/// Reads a table from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_table` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn xeb_table_load(path: *const c_char, out_table: *mut *mut XebTable) -> XebStatus {
    guard(|| {
        let slot = out(out_table, "out_table")?;
        put_table(slot, WeightTable::load(path_arg(path)?)?);
        Ok(())
    })
}

/// Writes a table as JSON, atomically.
///
/// # Safety
/// `table` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn xeb_table_save(table: *const XebTable, path: *const c_char) -> XebStatus {
    guard(|| {
        let t = deref(table, "table")?;
        t.inner.save(path_arg(path)?)?;
        Ok(())
    })
}

/// Releases a table. Null is ignored.
///
/// # Safety
/// `table` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xeb_table_free(table: *mut XebTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of digits, or 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn xeb_table_n(table: *const XebTable) -> usize {
    table.as_ref().map_or(0, |t| t.inner.n())
}

/// Alphabet size, or 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn xeb_table_d(table: *const XebTable) -> usize {
    table.as_ref().map_or(0, |t| t.inner.d())
}

/// Seed the table was generated from, or 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn xeb_table_seed(table: *const XebTable) -> u64 {
    table.as_ref().map_or(0, |t| t.inner.seed())
}

/// Draws `count` samples. Sample `m` depends only on the table, `seed` and
/// `m`.
///
/// # Safety
/// `table` must be a live handle; `out_batch` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xeb_batch_draw(
    table: *const XebTable,
    count: usize,
    seed: u64,
    out_batch: *mut *mut XebBatch,
) -> XebStatus {
    guard(|| {
        let t = deref(table, "table")?;
        let slot = out(out_batch, "out_batch")?;
        let inner = xeb_core::draw_batch(&t.inner, count, seed)?;
        *slot = Box::into_raw(Box::new(XebBatch { inner }));
        Ok(())
    })
}

/// Releases a batch. Null is ignored.
///
/// # Safety
/// `batch` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xeb_batch_free(batch: *mut XebBatch) {
    if !batch.is_null() {
        drop(Box::from_raw(batch));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `batch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn xeb_batch_len(batch: *const XebBatch) -> usize {
    batch.as_ref().map_or(0, |b| b.inner.len())
}

/// Copies all natural-log probabilities into `buf`, which must hold
/// `xeb_batch_len` doubles.
///
/// # Safety
/// `batch` must be a live handle; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn xeb_batch_log_probs(batch: *const XebBatch, buf: *mut f64, len: usize) -> XebStatus {
    guard(|| {
        let b = deref(batch, "batch")?;
        let src = b.inner.log_probs();
        if len < src.len() {
            return Err(invalid(format!("buffer holds {len} values, batch has {}", src.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

/// Copies the `n` digits of sample `index` into `buf`, least significant
/// first.
///
/// # Safety
/// `batch` must be a live handle; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn xeb_batch_digits(batch: *const XebBatch, index: usize, buf: *mut u32, len: usize) -> XebStatus {
    guard(|| {
        let b = deref(batch, "batch")?;
        if index >= b.inner.len() {
            return Err(invalid(format!("sample {index} out of range for a batch of {}", b.inner.len())));
        }
        let src = b.inner.digits(index);
        if len < src.len() {
            return Err(invalid(format!("buffer holds {len} digits, samples have {}", src.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

/// Natural log of the probability of a digit string (least significant
/// first). `-inf` for impossible strings.
///
/// # Safety
/// `table` must be a live handle; `digits` readable for `len` values;
/// `out_log_prob` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xeb_log_prob(
    table: *const XebTable,
    digits: *const u32,
    len: usize,
    out_log_prob: *mut f64,
) -> XebStatus {
    guard(|| {
        let t = deref(table, "table")?;
        let slot = out(out_log_prob, "out_log_prob")?;
        if digits.is_null() && len > 0 {
            return Err(null("digits"));
        }
        let s = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(digits, len).to_vec() };
        *slot = xeb_core::log_prob(&t.inner, &DigitString::new(s, t.inner.d())?)?;
        Ok(())
    })
}

/// Empirical XEB of a batch drawn from `table`. `mode` is
/// `XEB_MODE_EMPIRICAL_NAIVE` or `XEB_MODE_EMPIRICAL_LOGSPACE`.
///
/// # Safety
/// Handles must be live; `out_estimate` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xeb_empirical_xeb(
    table: *const XebTable,
    batch: *const XebBatch,
    mode: u32,
    out_estimate: *mut XebEstimate,
) -> XebStatus {
    guard(|| {
        let t = deref(table, "table")?;
        let b = deref(batch, "batch")?;
        let slot = out(out_estimate, "out_estimate")?;
        let mode = mode_arg(mode)?;
        if !mode.is_empirical() {
            return Err(invalid(format!("{mode} is not an empirical mode")));
        }
        *slot = estimate(&xeb_core::empirical_xeb(&t.inner, &b.inner, mode)?);
        Ok(())
    })
}

/// True XEB of `table`. `mode` is `XEB_MODE_TRUE_BRUTEFORCE` (bounded by
/// `cap` pmf entries; 0 selects the default cap) or
/// `XEB_MODE_TRUE_CLOSEDFORM`.
///
/// # Safety
/// `table` must be a live handle; `out_estimate` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xeb_true_xeb(
    table: *const XebTable,
    mode: u32,
    cap: u64,
    out_estimate: *mut XebEstimate,
) -> XebStatus {
    guard(|| {
        let t = deref(table, "table")?;
        let slot = out(out_estimate, "out_estimate")?;
        let e = match mode_arg(mode)? {
            Mode::TrueClosedform => xeb_core::true_xeb_closed_form(&t.inner),
            Mode::TrueBruteforce => {
                let cap = if cap == 0 { EnumerationCap::default() } else { EnumerationCap::new(cap)? };
                xeb_core::true_xeb_bruteforce(&t.inner, cap)?
            }
            other => return Err(invalid(format!("{other} is not a true-XEB mode"))),
        };
        *slot = estimate(&e);
        Ok(())
    })
}

/// `log10` seconds to enumerate `d^n_target` outcomes given `ref_seconds`
/// at `n_ref`.
///
/// # Safety
/// `out_log10_seconds` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xeb_extrapolate_enum_time(
    ref_seconds: f64,
    n_ref: usize,
    n_target: usize,
    d: usize,
    out_log10_seconds: *mut f64,
) -> XebStatus {
    guard(|| {
        let slot = out(out_log10_seconds, "out_log10_seconds")?;
        *slot = xeb_core::extrapolate_enum_time(ref_seconds, n_ref, n_target, d)?;
        Ok(())
    })
}

/// Enumeration-over-sampling ratio, all in `log10`.
///
/// # Safety
/// `out_advantage` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn xeb_advantage(
    log10_enum_seconds: f64,
    per_sample_seconds: f64,
    out_advantage: *mut XebAdvantage,
) -> XebStatus {
    guard(|| {
        let slot = out(out_advantage, "out_advantage")?;
        let r = xeb_core::advantage_ratio(log10_enum_seconds, per_sample_seconds)?;
        *slot = XebAdvantage {
            log10_enum_seconds: r.log10_enum_seconds,
            log10_enum_years: r.log10_enum_years,
            log10_per_sample_seconds: r.log10_per_sample_seconds,
            log10_advantage: r.log10_advantage,
        };
        Ok(())
    })
}
