//! C ABI over `latent-translate`.
//!
//! Every fallible function returns an [`LtStatus`]; on failure a description is
//! available from [`lt_last_error_message`] on the same thread. Objects cross
//! the boundary as opaque handles that the caller releases with the matching
//! `*_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use latent_translate::io::{self, Dtype};
use latent_translate::metrics;
use latent_translate::{
    fit_translator, AnchorCorrespondence, Error, EstimatorKind, LatentSpace, PipelineConfig, ScalingMode, Translator,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtStatus {
    Ok = 0,
    /// Null pointer, bad buffer size or inconsistent configuration.
    InvalidArgument = 1,
    /// Malformed or inconsistent input data, including unreadable files.
    Data = 2,
    /// Degenerate anchors or a failed decomposition.
    Numerical = 3,
    /// The library panicked; the call had no effect.
    Internal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtMethod {
    Affine = 0,
    Linear = 1,
    LOrtho = 2,
    Ortho = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtScaling {
    Standard = 0,
    UnitNorm = 1,
    None = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtDtype {
    F32 = 1,
    F64 = 2,
}

/// A validated `count x dim` matrix of encodings.
pub struct LtSpace(LatentSpace);

/// A fitted translation, including its pre- and post-processing.
pub struct LtTranslator(Translator);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> LtStatus {
    match err {
        Error::InvalidConfig(_) => LtStatus::InvalidArgument,
        Error::DegenerateAnchors { .. } | Error::SvdFailure => LtStatus::Numerical,
        _ => LtStatus::Data,
    }
}

struct Failure(LtStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure(status_of(&err), err.to_string())
    }
}

fn invalid(message: &str) -> Failure {
    Failure(LtStatus::InvalidArgument, message.to_owned())
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LtStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".to_owned());
            LtStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| invalid(&format!("`{name}` is null")))
}

unsafe fn path_arg(p: *const c_char) -> Result<String, Failure> {
    if p.is_null() {
        return Err(invalid("`path` is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| invalid("`path` is not valid UTF-8"))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(invalid("`out` is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn lt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `rows * cols` row-major values into a new space.
#[no_mangle]
pub unsafe extern "C" fn lt_space_new(data: *const f64, rows: usize, cols: usize, out: *mut *mut LtSpace) -> LtStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| invalid("`rows * cols` overflows"))?;
        if data.is_null() && len > 0 {
            return Err(invalid("`data` is null"));
        }
        let values = if len == 0 { &[][..] } else { std::slice::from_raw_parts(data, len) };
        let space = LatentSpace::from_row_slice(rows, cols, values)?;
        write_out(out, LtSpace(space))
    })
}

#[no_mangle]
pub unsafe extern "C" fn lt_space_free(space: *mut LtSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Row count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn lt_space_rows(space: *const LtSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.count())
}

/// Column count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn lt_space_cols(space: *const LtSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.dim())
}

/// Copies the values row-major into `out`, which must hold exactly `len = rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn lt_space_copy_data(space: *const LtSpace, out: *mut f64, len: usize) -> LtStatus {
    guard(|| {
        let space = &deref(space, "space")?.0;
        let values = space.to_row_major();
        if len != values.len() {
            return Err(invalid(&format!("buffer holds {len} values, space has {}", values.len())));
        }
        if out.is_null() && len > 0 {
            return Err(invalid("`out` is null"));
        }
        if len > 0 {
            std::slice::from_raw_parts_mut(out, len).copy_from_slice(&values);
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lt_space_read(path: *const c_char, out: *mut *mut LtSpace) -> LtStatus {
    guard(|| {
        let space = io::read_tensor(path_arg(path)?)?;
        write_out(out, LtSpace(space))
    })
}

#[no_mangle]
pub unsafe extern "C" fn lt_space_write(space: *const LtSpace, path: *const c_char, dtype: LtDtype) -> LtStatus {
    guard(|| {
        let space = &deref(space, "space")?.0;
        let dtype = match dtype {
            LtDtype::F32 => Dtype::F32,
            LtDtype::F64 => Dtype::F64,
        };
        io::write_tensor(space, path_arg(path)?, dtype)?;
        Ok(())
    })
}

/// Fits a translator on `n_anchors` pairs `(source_indices[i], target_indices[i])`.
#[no_mangle]
pub unsafe extern "C" fn lt_translator_fit(
    source: *const LtSpace,
    target: *const LtSpace,
    source_indices: *const usize,
    target_indices: *const usize,
    n_anchors: usize,
    method: LtMethod,
    scaling: LtScaling,
    out: *mut *mut LtTranslator,
) -> LtStatus {
    guard(|| {
        let source = &deref(source, "source")?.0;
        let target = &deref(target, "target")?.0;
        if n_anchors > 0 && (source_indices.is_null() || target_indices.is_null()) {
            return Err(invalid("anchor index arrays are null"));
        }
        let indices = |p: *const usize| {
            if n_anchors == 0 {
                Vec::new()
            } else {
                std::slice::from_raw_parts(p, n_anchors).to_vec()
            }
        };
        let anchors = AnchorCorrespondence::new(indices(source_indices), indices(target_indices))?;
        let kind = match method {
            LtMethod::Affine => EstimatorKind::Affine,
            LtMethod::Linear => EstimatorKind::Linear,
            LtMethod::LOrtho => EstimatorKind::LOrtho,
            LtMethod::Ortho => EstimatorKind::Ortho,
        };
        let scaling = match scaling {
            LtScaling::Standard => ScalingMode::Standard,
            LtScaling::UnitNorm => ScalingMode::UnitNorm,
            LtScaling::None => ScalingMode::None,
        };
        let fitted = fit_translator(source, target, &anchors, &PipelineConfig::new(kind, scaling))?;
        write_out(out, LtTranslator(fitted.translator))
    })
}

#[no_mangle]
pub unsafe extern "C" fn lt_translator_apply(
    translator: *const LtTranslator,
    space: *const LtSpace,
    out: *mut *mut LtSpace,
) -> LtStatus {
    guard(|| {
        let translator = &deref(translator, "translator")?.0;
        let space = &deref(space, "space")?.0;
        write_out(out, LtSpace(translator.apply(space)?))
    })
}

/// Input width of the translator, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn lt_translator_source_dim(translator: *const LtTranslator) -> usize {
    translator.as_ref().map_or(0, |t| t.0.source_raw_dim())
}

/// Output width of the translator, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn lt_translator_target_dim(translator: *const LtTranslator) -> usize {
    translator.as_ref().map_or(0, |t| t.0.target_raw_dim())
}

#[no_mangle]
pub unsafe extern "C" fn lt_translator_read(path: *const c_char, out: *mut *mut LtTranslator) -> LtStatus {
    guard(|| {
        let translator = io::read_translator(path_arg(path)?)?;
        write_out(out, LtTranslator(translator))
    })
}

#[no_mangle]
pub unsafe extern "C" fn lt_translator_write(translator: *const LtTranslator, path: *const c_char) -> LtStatus {
    guard(|| {
        let translator = &deref(translator, "translator")?.0;
        io::write_translator(translator, path_arg(path)?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lt_translator_free(translator: *mut LtTranslator) {
    if !translator.is_null() {
        drop(Box::from_raw(translator));
    }
}

unsafe fn metric(
    translated: *const LtSpace,
    target: *const LtSpace,
    out: *mut f64,
    f: fn(&LatentSpace, &LatentSpace) -> latent_translate::Result<f64>,
) -> LtStatus {
    guard(|| {
        let translated = &deref(translated, "translated")?.0;
        let target = &deref(target, "target")?.0;
        if out.is_null() {
            return Err(invalid("`out` is null"));
        }
        *out = f(translated, target)?;
        Ok(())
    })
}

/// Mean row-wise cosine similarity between two equally shaped spaces.
#[no_mangle]
pub unsafe extern "C" fn lt_latent_cosine(translated: *const LtSpace, target: *const LtSpace, out: *mut f64) -> LtStatus {
    metric(translated, target, out, metrics::latent_cosine)
}

/// Mean squared entry difference between two equally shaped spaces.
#[no_mangle]
pub unsafe extern "C" fn lt_latent_mse(translated: *const LtSpace, target: *const LtSpace, out: *mut f64) -> LtStatus {
    metric(translated, target, out, metrics::latent_mse)
}
