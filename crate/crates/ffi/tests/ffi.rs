use std::ffi::{CStr, CString};
use std::ptr;

use latent_translate::synth::{plant_pair, PlantSpec, TransformClass};
use latent_translate_ffi::*;

unsafe fn new_space(values: &[f64], rows: usize, cols: usize) -> *mut LtSpace {
    let mut out = ptr::null_mut();
    assert_eq!(lt_space_new(values.as_ptr(), rows, cols, &mut out), LtStatus::Ok);
    out
}

unsafe fn last_error() -> String {
    let p = lt_last_error_message();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

unsafe fn contents(space: *const LtSpace) -> Vec<f64> {
    let mut buf = vec![0.0; lt_space_rows(space) * lt_space_cols(space)];
    assert_eq!(lt_space_copy_data(space, buf.as_mut_ptr(), buf.len()), LtStatus::Ok);
    buf
}

#[test]
fn fit_apply_and_score_planted_pair() {
    let pair = plant_pair(&PlantSpec::new(TransformClass::Orthogonal, 200, 6, 9)).unwrap();
    unsafe {
        let x = new_space(&pair.source.to_row_major(), 200, 6);
        let y = new_space(&pair.target.to_row_major(), 200, 6);
        assert_eq!((lt_space_rows(x), lt_space_cols(x)), (200, 6));

        let idx: Vec<usize> = (0..24).collect();
        let mut t = ptr::null_mut();
        let status = lt_translator_fit(x, y, idx.as_ptr(), idx.as_ptr(), idx.len(), LtMethod::Ortho, LtScaling::None, &mut t);
        assert_eq!(status, LtStatus::Ok);
        assert_eq!((lt_translator_source_dim(t), lt_translator_target_dim(t)), (6, 6));

        let mut mapped = ptr::null_mut();
        assert_eq!(lt_translator_apply(t, x, &mut mapped), LtStatus::Ok);
        let (mut cos, mut mse) = (0.0, 1.0);
        assert_eq!(lt_latent_cosine(mapped, y, &mut cos), LtStatus::Ok);
        assert_eq!(lt_latent_mse(mapped, y, &mut mse), LtStatus::Ok);
        assert!(cos > 1.0 - 1e-12 && mse < 1e-20, "{cos} {mse}");

        lt_space_free(mapped);
        lt_translator_free(t);
        lt_space_free(x);
        lt_space_free(y);
    }
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let tensor = CString::new(dir.path().join("x.lten").to_str().unwrap()).unwrap();
    let json = CString::new(dir.path().join("t.json").to_str().unwrap()).unwrap();
    let values = [1.0, 2.0, -3.5, 4.25, 0.0, 6.0];
    unsafe {
        let x = new_space(&values, 3, 2);
        assert_eq!(lt_space_write(x, tensor.as_ptr(), LtDtype::F64), LtStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(lt_space_read(tensor.as_ptr(), &mut back), LtStatus::Ok);
        assert_eq!(contents(back), values);

        let idx = [0usize, 1, 2];
        let mut t = ptr::null_mut();
        let status = lt_translator_fit(x, x, idx.as_ptr(), idx.as_ptr(), 3, LtMethod::Linear, LtScaling::Standard, &mut t);
        assert_eq!(status, LtStatus::Ok);
        assert_eq!(lt_translator_write(t, json.as_ptr()), LtStatus::Ok);
        let mut t2 = ptr::null_mut();
        assert_eq!(lt_translator_read(json.as_ptr(), &mut t2), LtStatus::Ok);

        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(lt_translator_apply(t, x, &mut a), LtStatus::Ok);
        assert_eq!(lt_translator_apply(t2, x, &mut b), LtStatus::Ok);
        let (a_vals, b_vals) = (contents(a), contents(b));
        assert!(a_vals.iter().zip(&b_vals).all(|(p, q)| p.to_bits() == q.to_bits()));

        for s in [x, back, a, b] {
            lt_space_free(s);
        }
        lt_translator_free(t);
        lt_translator_free(t2);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(lt_space_new(ptr::null(), 2, 2, &mut out), LtStatus::InvalidArgument);
        assert!(last_error().contains("null"));
        assert!(out.is_null());

        let nan = [1.0, f64::NAN];
        assert_eq!(lt_space_new(nan.as_ptr(), 1, 2, &mut out), LtStatus::Data);

        let missing = CString::new("/nonexistent/x.lten").unwrap();
        assert_eq!(lt_space_read(missing.as_ptr(), &mut out), LtStatus::Data);

        let x = new_space(&[1.0, 2.0, 3.0, 4.0], 2, 2);
        let mut small = [0.0; 3];
        assert_eq!(lt_space_copy_data(x, small.as_mut_ptr(), 3), LtStatus::InvalidArgument);
        assert!(last_error().contains("buffer"));

        let zeros = new_space(&[0.0; 8], 4, 2);
        let idx = [0usize, 1, 2];
        let mut t = ptr::null_mut();
        let status = lt_translator_fit(zeros, zeros, idx.as_ptr(), idx.as_ptr(), 3, LtMethod::Linear, LtScaling::None, &mut t);
        assert_eq!(status, LtStatus::Numerical);
        assert!(t.is_null());

        let far = [0usize, 9];
        let status = lt_translator_fit(x, x, far.as_ptr(), far.as_ptr(), 2, LtMethod::Ortho, LtScaling::None, &mut t);
        assert_eq!(status, LtStatus::Data);

        let mut v = 0.0;
        assert_eq!(lt_latent_mse(x, zeros, &mut v), LtStatus::Data);
        assert_eq!(lt_latent_mse(x, x, ptr::null_mut()), LtStatus::InvalidArgument);
        assert_eq!(lt_space_rows(ptr::null()), 0);
        lt_space_free(ptr::null_mut());
        lt_translator_free(ptr::null_mut());

        lt_space_free(x);
        lt_space_free(zeros);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(lt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
