use std::ffi::{c_void, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use marketfield_ffi::*;

fn params(beta: f64, tau: f64) -> *mut MfParams {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { mf_params_new(beta, tau, &mut p) }, MfStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn scalar_calls_round_trip() {
    let p = params(0.5, 0.25);
    unsafe {
        let mut k = 0.0;
        assert_eq!(mf_curvature(p, 0.5, 1.0, &mut k), MfStatus::Ok);
        assert!((k - 2.0).abs() < 1e-12);

        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(mf_hasimoto_psi(p, 1.0, 0.0, &mut re, &mut im), MfStatus::Ok);
        assert!((re.hypot(im) - 1.2961085473277708).abs() < 1e-12);

        let mut c = [0.0; 3];
        assert_eq!(mf_choice_components(p, 1.0, 0.0, c.as_mut_ptr()), MfStatus::Ok);
        assert!((c[0] - 0.5453188678689157).abs() < 1e-12);
        assert!((c[2] - 0.2384058440442351).abs() < 1e-12);

        let mut d = [0.0; 3];
        assert_eq!(mf_derived_fields(p, 1.0, 1.0, 1.0, 1.0, d.as_mut_ptr()), MfStatus::Ok);
        assert!((d[0] - 0.4380650173940212).abs() < 1e-12);
        assert_eq!(
            mf_derived_fields(p, 1.0, 1.0, 0.0, 0.0, d.as_mut_ptr()),
            MfStatus::ZeroRadius
        );

        let mut r = -1.0;
        assert_eq!(mf_demand_radius(1.0, 157.91367041742974, &mut r), MfStatus::Ok);
        assert_eq!(r, 0.0);
        assert_eq!(mf_demand_radius(1.5, 1.0, &mut r), MfStatus::OutOfDomain);
        mf_params_free(p);
    }
}

#[test]
fn parameter_updates_are_validated() {
    let p = params(0.5, 0.25);
    unsafe {
        let beta = CString::new("beta").unwrap();
        assert_eq!(mf_params_set(p, beta.as_ptr(), 1.0), MfStatus::Ok);
        let mut k = 0.0;
        mf_curvature(p, 0.0, 0.0, &mut k);
        assert!((k - 4.0).abs() < 1e-12);
        assert_eq!(mf_params_set(p, beta.as_ptr(), -1.0), MfStatus::InvalidParameter);
        mf_curvature(p, 0.0, 0.0, &mut k);
        assert!((k - 4.0).abs() < 1e-12, "rejected update must not stick");
        let bogus = CString::new("bogus").unwrap();
        assert_eq!(mf_params_set(p, bogus.as_ptr(), 1.0), MfStatus::UnknownKey);
        let msg = CStr::from_ptr(mf_last_error_message()).to_str().unwrap();
        assert!(msg.contains("bogus"), "{msg}");
        mf_params_free(p);
    }
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { mf_params_new(0.0, 0.25, &mut out) },
        MfStatus::InvalidParameter
    );
    assert!(out.is_null());
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        let mut k = 0.0;
        assert_eq!(mf_curvature(ptr::null(), 0.0, 0.0, &mut k), MfStatus::NullPointer);
        let p = params(0.5, 0.25);
        assert_eq!(mf_curvature(p, 0.0, 0.0, ptr::null_mut()), MfStatus::NullPointer);
        assert_eq!(
            mf_polarization_rotation(None, ptr::null_mut(), 1.0, &mut k),
            MfStatus::NullPointer
        );
        mf_params_free(p);
        mf_params_free(ptr::null_mut());
        mf_curve_free(ptr::null_mut());
        mf_figure_free(ptr::null_mut());
    }
}

#[test]
fn status_messages_are_static_strings() {
    for s in [
        MfStatus::Ok,
        MfStatus::ZeroRadius,
        MfStatus::Panic,
        MfStatus::BufferTooSmall,
    ] {
        let m = unsafe { CStr::from_ptr(mf_status_message(s)) };
        assert!(!m.to_bytes().is_empty());
    }
}

unsafe extern "C" fn scaled(s: f64, data: *mut c_void) -> f64 {
    *(data as *const f64) * s
}

#[test]
fn polarization_through_callback() {
    let mut factor = 2.0f64;
    let mut out = 0.0;
    let st = unsafe { mf_polarization_rotation(Some(scaled), &mut factor as *mut f64 as *mut c_void, 3.0, &mut out) };
    assert_eq!(st, MfStatus::Ok);
    assert!((out - 9.0).abs() < 1e-12);
}

#[test]
fn curve_handle() {
    let p = params(0.5, 0.25);
    unsafe {
        let mut c = ptr::null_mut();
        let mut rms = -1.0;
        assert_eq!(
            mf_curve_reconstruct(p, 0.0, -5.0, 5.0, 1e-2, &mut c, &mut rms),
            MfStatus::Ok
        );
        assert!(rms >= 0.0);
        let mut n = 0;
        mf_curve_len(c, &mut n);
        assert_eq!(n, 1001);
        let mut buf = vec![f64::NAN; 3 * n];
        assert_eq!(mf_curve_positions(c, buf.as_mut_ptr(), 3), MfStatus::BufferTooSmall);
        assert_eq!(mf_curve_positions(c, buf.as_mut_ptr(), buf.len()), MfStatus::Ok);
        assert_eq!(&buf[..3], &[0.0, 0.0, 0.0]);
        assert!(buf.iter().all(|v| v.is_finite()));
        let mut again = 0.0;
        mf_curve_rms(c, &mut again);
        assert_eq!(again, rms);
        mf_curve_free(c);

        let mut bad = ptr::null_mut();
        assert_eq!(
            mf_curve_reconstruct(p, 0.0, -5.0, 5.0, 0.0, &mut bad, ptr::null_mut()),
            MfStatus::InvalidStep
        );
        mf_params_free(p);
    }
}

#[test]
fn figure_handle() {
    let p = params(0.5, 0.25);
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(mf_figure_sample(4, p, -5.0, 5.0, 11, 0.0, 4.0, 5, &mut f), MfStatus::Ok);
        let (mut ns, mut nt) = (0, 0);
        mf_figure_dims(f, &mut ns, &mut nt);
        assert_eq!((ns, nt), (11, 5));
        let mut v = vec![0.0; ns * nt];
        assert_eq!(mf_figure_values(f, v.as_mut_ptr(), v.len()), MfStatus::Ok);
        assert!(v.iter().all(|x| x.is_finite() && *x >= 0.0));
        mf_figure_free(f);
        let mut g = ptr::null_mut();
        assert_eq!(
            mf_figure_sample(9, p, -5.0, 5.0, 11, 0.0, 4.0, 5, &mut g),
            MfStatus::InvalidParameter
        );
        mf_params_free(p);
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/marketfield.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "typedef struct MfParams MfParams;",
        "typedef struct MfCurve MfCurve;",
        "typedef struct MfFigure MfFigure;",
        "MF_STATUS_OK = 0",
        "mf_params_new",
        "mf_curvature",
        "mf_derived_fields",
        "mf_curve_positions",
        "mf_figure_values",
        "mf_polarization_rotation",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let st = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(header())
        .status();
    match st {
        Ok(st) => assert!(st.success()),
        Err(e) => eprintln!("skipping: no C compiler ({e})"),
    }
}

#[test]
fn c_program_links_against_staticlib() {
    // test binary lives in <target>/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libmarketfield_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: {} or cc unavailable", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <math.h>
#include <stdio.h>
#include "marketfield.h"
int main(void) {
    MfParams *p = NULL;
    if (mf_params_new(0.5, 0.25, &p) != MF_STATUS_OK) return 2;
    double k = 0.0;
    if (mf_curvature(p, 0.5, 1.0, &k) != MF_STATUS_OK) return 3;
    double d[3];
    MfStatus st = mf_derived_fields(p, 1.0, 1.0, 0.0, 0.0, d);
    printf("%.12f %d %s\n", k, (int)st, mf_last_error_message());
    mf_params_free(p);
    return fabs(k - 2.0) < 1e-12 && st == MF_STATUS_ZERO_RADIUS ? 0 : 1;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let build = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&bin).output().unwrap();
    let out = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{out}");
    assert!(out.starts_with("2.000000000000 3 "), "{out}");
}
