//! C interface to `lamcount`.
//!
//! Objects are opaque handles created by `*_new`/`*_parse` functions and
//! released with the matching `*_free`. Every fallible call returns an
//! [`LcStatus`]; on failure `lc_last_error` describes the error on the
//! calling thread. Strings returned through out-parameters are owned by
//! the caller and must be released with `lc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lamcount::asymptotics::{self, AsymptoticsError, DEFAULT_TOL};
use lamcount::counting::{CountError, Counter};
use lamcount::sampler::{self, SamplerError, SamplerTables, SizeWindow};
use lamcount::term::{self, RenderStyle};
use lamcount::{SizeSpec, Term};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidSpec = 2,
    Parse = 3,
    Decode = 4,
    ResourceLimit = 5,
    Numeric = 6,
    AttemptsExhausted = 7,
    InvalidArgument = 8,
    Panic = 9,
}

/// Counting family selector for [`lc_count`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcFamily {
    /// Terms with openness at most `m`.
    MOpen = 0,
    /// All terms; `m` is ignored.
    Unrestricted = 1,
    /// m-open terms with every index at most `param`.
    BoundedSuccessors = 2,
    /// m-open terms with exactly `param` abstractions.
    QAbstractions = 3,
    /// m-open terms with at most `param` abstractions.
    AtMostQ = 4,
    NormalForm = 5,
    /// The superclass with truncation level `param`.
    Superclass = 6,
    /// Terms that are not m-open.
    NotMOpen = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcStyle {
    /// Decimal indices: `λλ2 1`.
    Integers = 0,
    /// Successor strings: `λλ((S0) 0)`.
    Successors = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcSingularData {
    pub rho: f64,
    pub a_inf: f64,
    pub b_inf: f64,
    pub tolerance: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcNormalFormSingularity {
    pub rho_tilde: f64,
    pub ratio: f64,
}

/// A validated size model.
pub struct LcSpec {
    spec: SizeSpec,
}

/// A lambda term.
pub struct LcTerm {
    term: Term,
}

/// Boltzmann sampler; each call to `lc_sampler_sample` uses the next
/// random stream of the seed.
pub struct LcSampler {
    tables: SamplerTables,
    seed: u64,
    next_stream: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (LcStatus, String);

fn fail<T>(status: LcStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err((status, msg.into()))
}

/// Runs `body`, recording its error message and turning panics into
/// [`LcStatus::Panic`].
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LcStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            LcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| (LcStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| (LcStatus::NullPointer, format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(LcStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (LcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior nul").into_raw()
}

fn count_failure(e: CountError) -> Failure {
    match e {
        CountError::ResourceLimit { .. } => (LcStatus::ResourceLimit, e.to_string()),
        CountError::InvalidArgument(_) => (LcStatus::InvalidArgument, e.to_string()),
    }
}

fn asymptotics_failure(e: AsymptoticsError) -> Failure {
    match e {
        AsymptoticsError::InvalidArgument(_) => (LcStatus::InvalidArgument, e.to_string()),
        _ => (LcStatus::Numeric, e.to_string()),
    }
}

fn sampler_failure(e: SamplerError) -> Failure {
    match e {
        SamplerError::AttemptsExhausted { .. } => (LcStatus::AttemptsExhausted, e.to_string()),
        SamplerError::InvalidArgument(_) => (LcStatus::InvalidArgument, e.to_string()),
        SamplerError::Asymptotics(e) => asymptotics_failure(e),
        SamplerError::NormalizationFailure { .. } => (LcStatus::Numeric, e.to_string()),
    }
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn lc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn lc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_spec_new(a: i64, b: i64, c: i64, d: i64, out: *mut *mut LcSpec) -> LcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let spec = SizeSpec::new(a, b, c, d).map_err(|e| (LcStatus::InvalidSpec, e.to_string()))?;
        *out = Box::into_raw(Box::new(LcSpec { spec }));
        Ok(())
    })
}

/// Looks up `natural`, `less-natural` or `binary`.
///
/// # Safety
/// `name` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_spec_preset(name: *const c_char, out: *mut *mut LcSpec) -> LcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let name = text(name, "name")?;
        let spec = lamcount::size_model::preset_spec(name).map_err(|e| (LcStatus::InvalidSpec, e.to_string()))?;
        *out = Box::into_raw(Box::new(LcSpec { spec }));
        Ok(())
    })
}

/// # Safety
/// `spec` must be null or a handle from `lc_spec_new`/`lc_spec_preset`
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn lc_spec_free(spec: *mut LcSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Exact count as a decimal string, written to `out`.
///
/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_count(
    spec: *const LcSpec,
    family: LcFamily,
    param: u64,
    m: u64,
    n: u64,
    out: *mut *mut c_char,
) -> LcStatus {
    guard(|| {
        let spec = deref(spec, "spec")?.spec;
        let out = out_ptr(out, "out")?;
        let mut c = Counter::new(spec);
        let v = match family {
            LcFamily::MOpen => c.m_open(m, n),
            LcFamily::Unrestricted => c.unrestricted(n),
            LcFamily::BoundedSuccessors => c.bounded_successors(m, param, n),
            LcFamily::QAbstractions => c.q_abstractions(m, param, n),
            LcFamily::AtMostQ => c.at_most_q(m, param, n),
            LcFamily::NormalForm => c.normal_form(m, n),
            LcFamily::Superclass => c.superclass(param, m, n),
            LcFamily::NotMOpen => c.not_m_open(m, n),
        }
        .map_err(count_failure)?;
        *out = c_string(v.to_string());
        Ok(())
    })
}

/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_dominant_singularity(spec: *const LcSpec, out: *mut LcSingularData) -> LcStatus {
    guard(|| {
        let spec = deref(spec, "spec")?.spec;
        let out = out_ptr(out, "out")?;
        let sd = asymptotics::dominant_singularity(&spec, DEFAULT_TOL).map_err(asymptotics_failure)?;
        *out = LcSingularData { rho: sd.rho, a_inf: sd.a_inf, b_inf: sd.b_inf, tolerance: sd.tolerance };
        Ok(())
    })
}

/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_normal_form_singularity(
    spec: *const LcSpec,
    out: *mut LcNormalFormSingularity,
) -> LcStatus {
    guard(|| {
        let spec = deref(spec, "spec")?.spec;
        let out = out_ptr(out, "out")?;
        let nf = asymptotics::normal_form_singularity(&spec, DEFAULT_TOL).map_err(asymptotics_failure)?;
        *out = LcNormalFormSingularity { rho_tilde: nf.rho_tilde, ratio: nf.ratio };
        Ok(())
    })
}

/// Superclass estimate `C(m, N)` of the constant in
/// `L_{m,n} ~ C n^(-3/2) rho^(-n)`.
///
/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_leading_constant(spec: *const LcSpec, m: u64, top: u64, out: *mut f64) -> LcStatus {
    guard(|| {
        let spec = deref(spec, "spec")?.spec;
        let out = out_ptr(out, "out")?;
        *out = asymptotics::leading_constant_estimate(&spec, m, top).map_err(asymptotics_failure)?;
        Ok(())
    })
}

/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_sampler_new(spec: *const LcSpec, top: u64, seed: u64, out: *mut *mut LcSampler) -> LcStatus {
    guard(|| {
        let spec = deref(spec, "spec")?.spec;
        let out = out_ptr(out, "out")?;
        let tables = sampler::build_tables(&spec, top, DEFAULT_TOL).map_err(sampler_failure)?;
        *out = Box::into_raw(Box::new(LcSampler { tables, seed, next_stream: 0 }));
        Ok(())
    })
}

/// Draws a term with openness at most `m` and size in `[min_size, max_size]`.
///
/// # Safety
/// `s` must be a live sampler; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_sampler_sample(
    s: *mut LcSampler,
    m: u64,
    min_size: u64,
    max_size: u64,
    max_attempts: u64,
    out: *mut *mut LcTerm,
) -> LcStatus {
    guard(|| {
        let s = out_ptr(s, "sampler")?;
        let out = out_ptr(out, "out")?;
        let window = SizeWindow::new(min_size, max_size).map_err(sampler_failure)?;
        let stream = s.next_stream;
        s.next_stream += 1;
        let r = sampler::sample_term(&s.tables, m, window, s.seed, stream, max_attempts).map_err(sampler_failure)?;
        *out = Box::into_raw(Box::new(LcTerm { term: r.term }));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a live sampler.
#[no_mangle]
pub unsafe extern "C" fn lc_sampler_free(s: *mut LcSampler) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `src` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_term_parse(src: *const c_char, out: *mut *mut LcTerm) -> LcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let t = term::parse_term(text(src, "src")?).map_err(|e| (LcStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(LcTerm { term: t }));
        Ok(())
    })
}

/// # Safety
/// `t` must be a live term; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_term_render(t: *const LcTerm, style: LcStyle, out: *mut *mut c_char) -> LcStatus {
    guard(|| {
        let t = &deref(t, "term")?.term;
        let out = out_ptr(out, "out")?;
        let style = match style {
            LcStyle::Integers => RenderStyle::Integers,
            LcStyle::Successors => RenderStyle::Successors,
        };
        *out = c_string(term::render_term(t, style));
        Ok(())
    })
}

/// Size of `t` under `spec`; fails with `ResourceLimit` above `2^64 - 1`.
///
/// # Safety
/// `spec` and `t` must be live handles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_term_size(spec: *const LcSpec, t: *const LcTerm, out: *mut u64) -> LcStatus {
    guard(|| {
        let spec = deref(spec, "spec")?.spec;
        let t = &deref(t, "term")?.term;
        let out = out_ptr(out, "out")?;
        *out = u64::try_from(spec.term_size(t)).or_else(|_| fail(LcStatus::ResourceLimit, "size exceeds 64 bits"))?;
        Ok(())
    })
}

/// # Safety
/// `t` must be a live term; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_term_encode_blc(t: *const LcTerm, out: *mut *mut c_char) -> LcStatus {
    guard(|| {
        let t = &deref(t, "term")?.term;
        let out = out_ptr(out, "out")?;
        *out = c_string(term::encode_blc(t));
        Ok(())
    })
}

/// # Safety
/// `bits` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_term_decode_blc(bits: *const c_char, out: *mut *mut LcTerm) -> LcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let t = term::decode_blc(text(bits, "bits")?).map_err(|e| (LcStatus::Decode, e.to_string()))?;
        *out = Box::into_raw(Box::new(LcTerm { term: t }));
        Ok(())
    })
}

/// # Safety
/// `t` must be a live term; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_term_openness(t: *const LcTerm, out: *mut u64) -> LcStatus {
    guard(|| {
        let t = &deref(t, "term")?.term;
        *out_ptr(out, "out")? = t.openness();
        Ok(())
    })
}

/// # Safety
/// `t` must be a live term; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_term_is_normal_form(t: *const LcTerm, out: *mut bool) -> LcStatus {
    guard(|| {
        let t = &deref(t, "term")?.term;
        *out_ptr(out, "out")? = t.is_normal_form();
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a live term.
#[no_mangle]
pub unsafe extern "C" fn lc_term_free(t: *mut LcTerm) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}
