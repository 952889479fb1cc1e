use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use vorotens_ffi::*;

fn last_error() -> String {
    let p = vt_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn disk(a: f64) -> *mut VtSample {
    let json = CString::new(r#"{"kind":"disk","center":[0,0],"radius":1}"#).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { vt_sample_digitize(json.as_ptr(), a, &mut s) }, VtStatus::Ok);
    s
}

#[test]
fn intrinsic_volumes_of_a_disk() {
    let s = disk(0.05);
    assert_eq!(unsafe { vt_sample_dim(s) }, 2);
    let radii = [0.15, 0.25, 0.4];
    let mut opts = vt_options_default();
    opts.radii = radii.as_ptr();
    opts.n_radii = radii.len();
    let mut est = ptr::null_mut();
    assert_eq!(unsafe { vt_estimate(s, &opts, &mut est) }, VtStatus::Ok);
    let truth = [1.0, std::f64::consts::PI, std::f64::consts::PI];
    for (k, t) in truth.iter().enumerate() {
        let mut v = 0.0;
        let mut len = 0;
        assert_eq!(unsafe { vt_estimate_coeffs(est, k, &mut v, 1, &mut len) }, VtStatus::Ok);
        assert_eq!(len, 1);
        assert!((v - t).abs() < 0.2, "k = {k}: {v}");
    }
    assert!(unsafe { vt_estimate_condition(est) } > 1.0);
    let json = unsafe { vt_estimate_to_json(est) };
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["variant"], "standard");
    unsafe {
        vt_string_free(json);
        vt_estimate_free(est);
        vt_sample_free(s);
    }
}

#[test]
fn coefficient_count_query() {
    let s = disk(0.1);
    let radii = [0.15, 0.25, 0.4];
    let mut opts = vt_options_default();
    opts.s = 2;
    opts.radii = radii.as_ptr();
    opts.n_radii = 3;
    let mut est = ptr::null_mut();
    assert_eq!(unsafe { vt_estimate(s, &opts, &mut est) }, VtStatus::Ok);
    let mut len = 0;
    assert_eq!(
        unsafe { vt_estimate_coeffs(est, 1, ptr::null_mut(), 0, &mut len) },
        VtStatus::Ok
    );
    assert_eq!(len, 3);
    assert_eq!(
        unsafe { vt_estimate_coeffs(est, 7, ptr::null_mut(), 0, &mut len) },
        VtStatus::InvalidInput
    );
    unsafe {
        vt_estimate_free(est);
        vt_sample_free(s);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut s = ptr::null_mut();
    let bad = CString::new(r#"{"kind":"blob"}"#).unwrap();
    assert_eq!(unsafe { vt_sample_digitize(bad.as_ptr(), 0.1, &mut s) }, VtStatus::InvalidInput);
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { vt_sample_digitize(ptr::null(), 0.1, &mut s) },
        VtStatus::NullPointer
    );

    let dup = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    assert_eq!(
        unsafe { vt_sample_new(2, dup.as_ptr(), 3, 0.0, &mut s) },
        VtStatus::InvalidInput
    );
    assert!(last_error().contains("distinct"));
    let coords = [0.0, 0.0, 1.0, 0.0];
    assert_eq!(
        unsafe { vt_sample_new(2, coords.as_ptr(), 2, 0.0, &mut s) },
        VtStatus::Ok
    );
    assert_eq!(unsafe { vt_sample_len(s) }, 2);
    let radii = [0.1, 0.2];
    let mut opts = vt_options_default();
    opts.radii = radii.as_ptr();
    opts.n_radii = 2;
    let mut est = ptr::null_mut();
    assert_eq!(unsafe { vt_estimate(s, &opts, &mut est) }, VtStatus::InvalidInput);
    assert!(last_error().contains("radii"));
    opts.mode = VtMode::Refined;
    let radii3 = [0.1, 0.2, 0.3];
    opts.radii = radii3.as_ptr();
    opts.n_radii = 3;
    assert_eq!(unsafe { vt_estimate(s, &opts, &mut est) }, VtStatus::Precondition);
    assert!(est.is_null());
    unsafe { vt_sample_free(s) };
    unsafe { vt_sample_free(ptr::null_mut()) };
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(vt_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compile and run a small C program against the generated header and the
/// static library, when a C compiler is available.
#[test]
fn header_compiles_and_links() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include");
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("capi_smoke");
    let lib_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"))
        .parent()
        .unwrap()
        .join(if cfg!(debug_assertions) { "debug" } else { "release" });
    let staticlib = lib_dir.join("libvorotens_ffi.a");
    if !staticlib.exists() {
        eprintln!("skipping: {} not built", staticlib.display());
        return;
    }
    let out = Command::new(&cc)
        .arg(root.join("tests").join("smoke.c"))
        .arg("-I")
        .arg(&header)
        .arg(&staticlib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stdout));
    assert!(String::from_utf8_lossy(&run.stdout).contains("euler"));
}
