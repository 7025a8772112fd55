use std::ffi::{c_char, CStr, CString};
use std::ptr;

use breather_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let len = unsafe { kgb_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(len > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn quick_config() -> KgbConfig {
    KgbConfig {
        decay_budget: 40.0,
        hessian: 0,
        ..kgb_config_default()
    }
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(kgb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn profile_round_trip() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { kgb_profile_new(1, 1.0, 1e-8, &mut h) }, KgbStatus::Ok);
    unsafe {
        assert!((kgb_profile_m(h) - 1.0 / 16.0).abs() < 1e-12);
        // sech profile: ψ(0) > ψ(1) > 0
        let (c, r) = (kgb_profile_eval(h, 0.0), kgb_profile_eval(h, 1.0));
        assert!(c > r && r > 0.0);
        kgb_profile_free(h);
        assert!(kgb_profile_m(ptr::null()).is_nan());
    }
}

#[test]
fn breather_accessors() {
    let mode = CString::new("st").unwrap();
    let cfg = quick_config();
    let mut h = ptr::null_mut();
    let s = unsafe { kgb_breather_new(1, 1.0, 0.25, 0.2, mode.as_ptr(), &cfg, &mut h) };
    assert_eq!(s, KgbStatus::Ok);
    unsafe {
        let omega = kgb_breather_omega(h);
        assert!((omega - (1.0f64 - 0.04 / 16.0).sqrt()).abs() < 1e-12);
        let (mut pw, mut dc) = (f64::NAN, f64::NAN);
        assert_eq!(kgb_breather_residual(h, &mut pw, &mut dc), KgbStatus::Ok);
        assert!(pw < 1e-10 && dc < 1e-10);
        let (mut eh, mut es) = (f64::NAN, f64::NAN);
        assert_eq!(kgb_breather_errors(h, &mut eh, &mut es), KgbStatus::Ok);
        assert!(eh.is_finite() && es <= eh.max(es));

        let n = kgb_breather_sites(h);
        assert_eq!(n % 2, 1);
        let mut q = vec![0.0; n];
        assert_eq!(kgb_breather_displacement(h, 0.0, q.as_mut_ptr(), n), KgbStatus::Ok);
        // Site-centred and even.
        assert!(q[n / 2] > 0.0);
        assert!((q[0] - q[n - 1]).abs() < 1e-14);
        let mut half = vec![0.0; n];
        let t = std::f64::consts::PI / omega;
        assert_eq!(kgb_breather_displacement(h, t, half.as_mut_ptr(), n), KgbStatus::Ok);
        assert!((half[n / 2] + q[n / 2]).abs() < 1e-12);

        assert_eq!(kgb_breather_displacement(h, 0.0, q.as_mut_ptr(), n - 1), KgbStatus::InvalidArgument);
        assert!(last_error().contains("buffer"));

        let (mut ret, mut drift) = (f64::NAN, f64::NAN);
        assert_eq!(kgb_breather_integrate(h, 20000, 1, &mut ret, &mut drift), KgbStatus::Ok);
        assert!(ret < 1e-6 && drift < 1e-6, "{ret} {drift}");

        let dir = tempfile::tempdir().unwrap();
        let d = CString::new(dir.path().to_str().unwrap()).unwrap();
        let stem = CString::new("b").unwrap();
        assert_eq!(kgb_breather_write(h, d.as_ptr(), stem.as_ptr()), KgbStatus::Ok);
        assert!(dir.path().join("b.json").exists());
        kgb_breather_free(h);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mode = CString::new("st").unwrap();
    let cfg = quick_config();
    let mut h = ptr::null_mut();
    unsafe {
        // Coupling outside the admissible range.
        let s = kgb_breather_new(1, 1.0, 0.7, 0.1, mode.as_ptr(), &cfg, &mut h);
        assert_eq!(s, KgbStatus::Guard);
        assert!(h.is_null());
        assert!(!last_error().is_empty());

        let bad = CString::new("h1").unwrap();
        assert_eq!(kgb_breather_new(1, 1.0, 0.25, 0.1, bad.as_ptr(), &cfg, &mut h), KgbStatus::Guard);
        assert_eq!(
            kgb_breather_new(1, 1.0, 0.25, 0.1, ptr::null(), &cfg, &mut h),
            KgbStatus::InvalidArgument
        );
        assert_eq!(kgb_profile_new(1, 1.0, 1e-8, ptr::null_mut()), KgbStatus::InvalidArgument);
        let mut x = 0.0;
        assert_eq!(kgb_breather_residual(ptr::null(), &mut x, &mut x), KgbStatus::InvalidArgument);

        // A regular file where the directory should be.
        let tmp = tempfile::NamedTempFile::new().unwrap();
        let d = CString::new(tmp.path().join("sub").to_str().unwrap()).unwrap();
        let mut b = ptr::null_mut();
        assert_eq!(kgb_breather_new(1, 1.0, 0.25, 0.3, mode.as_ptr(), &cfg, &mut b), KgbStatus::Ok);
        assert_eq!(kgb_breather_write(b, d.as_ptr(), mode.as_ptr()), KgbStatus::Io);
        kgb_breather_free(b);
        kgb_breather_free(ptr::null_mut());
    }
}

#[test]
fn last_error_truncates() {
    unsafe {
        assert_eq!(kgb_profile_new(1, 1.0, 1e-8, ptr::null_mut()), KgbStatus::InvalidArgument);
        let mut buf = [1 as c_char; 4];
        let len = kgb_last_error(buf.as_mut_ptr(), buf.len());
        assert!(len > 3);
        assert_eq!(buf[3], 0);
        assert_eq!(kgb_last_error(ptr::null_mut(), 0), len);
    }
}
