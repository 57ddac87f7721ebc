//! C ABI over the `shubin` symbol calculus.
//!
//! Symbols are opaque handles built from the JSON symbol format. Every call
//! returns a [`ShubinStatus`]; on failure the message and a stable error code
//! for the calling thread are available from [`shubin_last_error_message`]
//! and [`shubin_last_error_code`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use shubin::cmat::C64;
use shubin::functionals::{kv_tr, kv_tr_auto, wodzicki_res, TrOptions};
use shubin::oracle;
use shubin::schema::parse_symbol;
use shubin::spectra::{eta_continued, zeta_continued, MeromorphicSample, SpectralOptions};
use shubin::symring::ClassicalSymbol;
use shubin::Error;

/// Result of every exported call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShubinStatus {
    Ok = 0,
    /// A required pointer argument was null or a string was not UTF-8.
    InvalidArgument = 1,
    /// The input was rejected (bad JSON, dimension mismatch, unsupported symbol).
    Validation = 2,
    /// The computation failed (pole, non-ellipticity, divergent tail, ...).
    Numerical = 3,
    /// Internal panic; the handle arguments remain valid.
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShubinComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ShubinComplex {
    fn from(v: C64) -> Self {
        Self { re: v.re, im: v.im }
    }
}

impl From<ShubinComplex> for C64 {
    fn from(v: ShubinComplex) -> Self {
        C64::new(v.re, v.im)
    }
}

/// Opaque classical symbol.
pub struct ShubinSymbol(ClassicalSymbol);

struct LastError {
    code: CString,
    message: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

fn set_error(code: &str, message: &str) {
    let clean = |s: &str| CString::new(s.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(LastError { code: clean(code), message: clean(message) }));
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> ShubinStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ShubinStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error("invalid_argument", &format!("{what} is null or invalid"));
            ShubinStatus::InvalidArgument
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.code(), &e.to_string());
            if e.is_validation() {
                ShubinStatus::Validation
            } else {
                ShubinStatus::Numerical
            }
        }
        Err(_) => {
            set_error("panic", "internal panic");
            ShubinStatus::Panic
        }
    }
}

unsafe fn symbol<'a>(s: *const ShubinSymbol) -> Result<&'a ClassicalSymbol, Failure> {
    s.as_ref().map(|s| &s.0).ok_or(Failure::Null("symbol"))
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("output pointer"));
    }
    out.write(v);
    Ok(())
}

unsafe fn write_sample(
    s: MeromorphicSample,
    out_value: *mut ShubinComplex,
    out_uncertainty: *mut f64,
) -> Result<(), Failure> {
    write(out_value, s.value.into())?;
    if !out_uncertainty.is_null() {
        out_uncertainty.write(s.truncation_uncertainty);
    }
    Ok(())
}

/// Parse a symbol from a NUL-terminated JSON document.
///
/// # Safety
/// `json` must be a valid C string and `out` a writable pointer. The handle
/// written to `out` must be released with [`shubin_symbol_free`].
#[no_mangle]
pub unsafe extern "C" fn shubin_symbol_from_json(json: *const c_char, out: *mut *mut ShubinSymbol) -> ShubinStatus {
    guard(|| {
        if json.is_null() {
            return Err(Failure::Null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| Failure::Null("json (not UTF-8)"))?;
        let a = parse_symbol(text)?;
        write(out, Box::into_raw(Box::new(ShubinSymbol(a))))
    })
}

/// Release a symbol handle. Null is ignored.
///
/// # Safety
/// `symbol` must come from [`shubin_symbol_from_json`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn shubin_symbol_free(symbol: *mut ShubinSymbol) {
    if !symbol.is_null() {
        drop(Box::from_raw(symbol));
    }
}

/// Order m, dimension n and matrix size q of a symbol. Any output may be null.
///
/// # Safety
/// `symbol` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn shubin_symbol_info(
    symbol: *const ShubinSymbol,
    out_order: *mut ShubinComplex,
    out_n: *mut usize,
    out_q: *mut usize,
) -> ShubinStatus {
    guard(|| {
        let a = self::symbol(symbol)?;
        if !out_order.is_null() {
            out_order.write(a.order.into());
        }
        if !out_n.is_null() {
            out_n.write(a.n);
        }
        if !out_q.is_null() {
            out_q.write(a.q);
        }
        Ok(())
    })
}

/// Wodzicki residue.
///
/// # Safety
/// `symbol` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn shubin_residue(symbol: *const ShubinSymbol, out: *mut ShubinComplex) -> ShubinStatus {
    guard(|| write(out, wodzicki_res(self::symbol(symbol)?, None)?.into()))
}

/// Finite-part integral TR with `p` correction terms, or the minimal `p` when
/// `p` is negative. `out_uncertainty` may be null.
///
/// # Safety
/// `symbol` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn shubin_kv_tr(
    symbol: *const ShubinSymbol,
    p: i32,
    out_value: *mut ShubinComplex,
    out_uncertainty: *mut f64,
) -> ShubinStatus {
    guard(|| {
        let a = self::symbol(symbol)?;
        let opts = TrOptions::default();
        let v = if p < 0 { kv_tr_auto(a, &opts)? } else { kv_tr(a, p as usize, &opts)? };
        write(out_value, v.value.into())?;
        if !out_uncertainty.is_null() {
            out_uncertainty.write(v.uncertainty);
        }
        Ok(())
    })
}

/// ζ_θ(a, z) with default numerics, continued meromorphically where the
/// direct evaluation hits an integer-order pole of TR.
///
/// # Safety
/// `symbol` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn shubin_zeta(
    symbol: *const ShubinSymbol,
    z: ShubinComplex,
    theta: f64,
    out_value: *mut ShubinComplex,
    out_uncertainty: *mut f64,
) -> ShubinStatus {
    guard(|| {
        let s = zeta_continued(self::symbol(symbol)?, z.into(), theta, &SpectralOptions::default())?;
        write_sample(s, out_value, out_uncertainty)
    })
}

/// η(a, z) for a self-adjoint symbol; `theta` is the ray used for the power
/// of a♯a and must lie in (0, π).
///
/// # Safety
/// `symbol` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn shubin_eta(
    symbol: *const ShubinSymbol,
    z: ShubinComplex,
    theta: f64,
    out_value: *mut ShubinComplex,
    out_uncertainty: *mut f64,
) -> ShubinStatus {
    guard(|| {
        let s = eta_continued(self::symbol(symbol)?, z.into(), theta, &SpectralOptions::default())?;
        write_sample(s, out_value, out_uncertainty)
    })
}

/// The `count` smallest-modulus eigenvalues of the Hermite discretization
/// with `basis` functions (n = 1 only), written to `out[0..count]`.
///
/// # Safety
/// `symbol` must be a live handle and `out` must hold `count` elements.
#[no_mangle]
pub unsafe extern "C" fn shubin_oracle_eigenvalues(
    symbol: *const ShubinSymbol,
    basis: usize,
    count: usize,
    out: *mut ShubinComplex,
) -> ShubinStatus {
    guard(|| {
        let a = self::symbol(symbol)?;
        if out.is_null() {
            return Err(Failure::Null("output buffer"));
        }
        let ev = oracle::eigenvalues(&oracle::discretize(a, basis)?, count)?;
        for (i, v) in ev.into_iter().take(count).enumerate() {
            out.add(i).write(v.into());
        }
        Ok(())
    })
}

fn last_error_field(f: impl Fn(&LastError) -> *const c_char) -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), f))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn shubin_last_error_message() -> *const c_char {
    last_error_field(|e| e.message.as_ptr())
}

/// Stable error code (e.g. "pole_point", "not_elliptic") of the last failed
/// call on this thread, or null.
#[no_mangle]
pub extern "C" fn shubin_last_error_code() -> *const c_char {
    last_error_field(|e| e.code.as_ptr())
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn shubin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(json: &str) -> *mut ShubinSymbol {
        let text = CString::new(json).unwrap();
        let mut h = ptr::null_mut();
        assert_eq!(unsafe { shubin_symbol_from_json(text.as_ptr(), &mut h) }, ShubinStatus::Ok);
        h
    }

    fn last_code() -> String {
        unsafe { CStr::from_ptr(shubin_last_error_code()) }.to_str().unwrap().to_string()
    }

    #[test]
    fn residue_of_identity_is_zero() {
        let h = load(r#"{"n": 1, "components": [{"degree": [0, 0], "terms": [{"coeff": [[[1, 0]]], "beta": [0], "alpha": [0]}]}]}"#);
        let mut out = ShubinComplex::default();
        assert_eq!(unsafe { shubin_residue(h, &mut out) }, ShubinStatus::Ok);
        assert_eq!(out, ShubinComplex::default());
        assert!(shubin_last_error_message().is_null());
        unsafe { shubin_symbol_free(h) };
    }

    #[test]
    fn info_and_eigenvalues() {
        let h = load(r#"{"n": 1, "exact": "ho"}"#);
        let (mut m, mut n, mut q) = (ShubinComplex::default(), 0, 0);
        assert_eq!(unsafe { shubin_symbol_info(h, &mut m, &mut n, &mut q) }, ShubinStatus::Ok);
        assert_eq!((m.re, n, q), (2.0, 1, 1));
        let mut ev = [ShubinComplex::default(); 5];
        assert_eq!(unsafe { shubin_oracle_eigenvalues(h, 100, 5, ev.as_mut_ptr()) }, ShubinStatus::Ok);
        for (j, v) in ev.iter().enumerate() {
            assert!((v.re - (j + 1) as f64).abs() < 1e-10);
        }
        unsafe { shubin_symbol_free(h) };
    }

    #[test]
    fn kv_tr_of_inverse_square() {
        let h = load(r#"{"n": 1, "exact": {"name": "shifted_quadratic_power", "s": [-2, 0], "shift": 1, "scale": 1}}"#);
        let mut v = ShubinComplex::default();
        let mut unc = f64::NAN;
        assert_eq!(unsafe { shubin_kv_tr(h, -1, &mut v, &mut unc) }, ShubinStatus::Ok);
        assert!((v.re - 0.5).abs() < 1e-8 && v.im.abs() < 1e-12);
        assert!(unc.is_finite());
        unsafe { shubin_symbol_free(h) };
    }

    #[test]
    fn errors_are_reported() {
        let mut h = ptr::null_mut();
        let bad = CString::new("{not json").unwrap();
        assert_eq!(unsafe { shubin_symbol_from_json(bad.as_ptr(), &mut h) }, ShubinStatus::Validation);
        assert!(h.is_null());
        assert!(!shubin_last_error_message().is_null());

        let mut out = ShubinComplex::default();
        assert_eq!(unsafe { shubin_residue(ptr::null(), &mut out) }, ShubinStatus::InvalidArgument);
        assert_eq!(last_code(), "invalid_argument");

        let ho = load(r#"{"n": 1, "exact": "ho"}"#);
        assert_eq!(unsafe { shubin_residue(ho, ptr::null_mut()) }, ShubinStatus::InvalidArgument);
        let mut ev = [ShubinComplex::default(); 2];
        assert_eq!(unsafe { shubin_oracle_eigenvalues(ho, 10, 9, ev.as_mut_ptr()) }, ShubinStatus::Validation);
        assert_eq!(last_code(), "truncation_untrusted");
        unsafe { shubin_symbol_free(ho) };
    }

    #[test]
    fn version_is_a_c_string() {
        let v = unsafe { CStr::from_ptr(shubin_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
