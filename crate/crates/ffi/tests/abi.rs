use std::ffi::{CStr, CString};
use std::ptr;

use ordrank_ffi::*;

fn model(link: &str, pattern: &str, k: usize) -> *mut OrdrankModel {
    let (l, p) = (CString::new(link).unwrap(), CString::new(pattern).unwrap());
    let mut m = ptr::null_mut();
    let s = unsafe { ordrank_model_new(l.as_ptr(), p.as_ptr(), k, &mut m) };
    assert_eq!(s, OrdrankStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = ordrank_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn pmf_and_probabilities() {
    let m = model("identity", "abs:0.1", 4);
    unsafe {
        assert_eq!(ordrank_model_k(m), 4);
        let mut pmf = [0.0; 8];
        assert_eq!(ordrank_model_pmf(m, 0.3, pmf.as_mut_ptr(), 8), OrdrankStatus::Ok);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let upper: f64 = pmf[4..].iter().sum();
        let mut p = 0.0;
        assert_eq!(ordrank_model_prob_positive(m, 0.3, &mut p), OrdrankStatus::Ok);
        assert!((p - upper).abs() < 1e-12);
        // σ(2φ) with the identity link.
        assert!((p - 1.0 / (1.0 + (-0.6f64).exp())).abs() < 1e-12);

        let mut small = [0.0; 3];
        assert_eq!(
            ordrank_model_pmf(m, 0.3, small.as_mut_ptr(), 3),
            OrdrankStatus::BufferTooSmall
        );
        assert!(last_error().contains("needed"));

        let mut snr = 0.0;
        assert_eq!(ordrank_model_snr(m, &mut snr), OrdrankStatus::Ok);
        assert!((snr - 4.5523).abs() < 1e-3);

        let mut mo = OrdrankMoments::default();
        assert_eq!(ordrank_model_moments(m, 0.3, &mut mo), OrdrankStatus::Ok);
        assert!(mo.variance > 0.0);
        ordrank_model_free(m);
    }
}

#[test]
fn seeded_sampling_is_reproducible() {
    let m = model("cubic", "uniform,K=3", 0);
    let mut a = [0i32; 500];
    let mut b = [0i32; 500];
    unsafe {
        assert_eq!(ordrank_model_sample(m, 0.5, 11, a.as_mut_ptr(), 500), OrdrankStatus::Ok);
        assert_eq!(ordrank_model_sample(m, 0.5, 11, b.as_mut_ptr(), 500), OrdrankStatus::Ok);
        ordrank_model_free(m);
    }
    assert_eq!(a, b);
    assert!(a.iter().all(|y| *y != 0 && y.abs() <= 3));
}

#[test]
fn json_constructor_and_errors() {
    let json = CString::new(r#"{"link":{"kind":"identity"},"pattern":{"K":2,"weights":[0.5,0.5]}}"#).unwrap();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(ordrank_model_new_from_json(json.as_ptr(), &mut m), OrdrankStatus::Ok);
        assert_eq!(ordrank_model_k(m), 2);
        ordrank_model_free(m);

        let bad = CString::new("{").unwrap();
        let mut m2 = ptr::null_mut();
        assert_eq!(ordrank_model_new_from_json(bad.as_ptr(), &mut m2), OrdrankStatus::Parse);
        assert!(m2.is_null());
        assert_eq!(ordrank_model_new_from_json(ptr::null(), &mut m2), OrdrankStatus::NullPointer);

        let (l, p) = (CString::new("identity").unwrap(), CString::new("abs:x").unwrap());
        assert_eq!(ordrank_model_new(l.as_ptr(), p.as_ptr(), 4, &mut m2), OrdrankStatus::InvalidPattern);
        assert!(last_error().contains("abs:x"));
        let mut p = 0.0;
        assert_eq!(ordrank_model_prob_positive(ptr::null(), 0.1, &mut p), OrdrankStatus::NullPointer);
        ordrank_model_free(ptr::null_mut());
    }
}

#[test]
fn minimal_snr_and_rates() {
    let mut v = 0.0;
    let mut w = [0.0; 4];
    unsafe {
        assert_eq!(ordrank_minimal_snr(4, false, &mut v, w.as_mut_ptr(), 4), OrdrankStatus::Ok);
        assert!((v - 16.0 / 9.0).abs() < 1e-12);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(ordrank_minimal_snr(4, true, &mut v, ptr::null_mut(), 0), OrdrankStatus::Ok);
        assert!((v - 120.0 / 49.0).abs() < 1e-12);
        assert_eq!(ordrank_minimal_snr(1, true, &mut v, ptr::null_mut(), 0), OrdrankStatus::Domain);
    }

    let m = model("identity", "abs:0.1", 4);
    let mut r = OrdrankRates::default();
    unsafe {
        assert_eq!(ordrank_model_rates(m, 0.15, 10.0, &mut r), OrdrankStatus::Ok);
        assert_eq!(ordrank_model_rates(m, 0.15, 1.0, &mut r), OrdrankStatus::InvalidArgument);
        ordrank_model_free(m);
    }
    assert!(r.converged && r.binary > r.ordinal && r.ordinal > 0.0);
    assert!(r.predicted_l0 > 0);
}

#[test]
fn kendall_tau_counts_ties() {
    let theta = [0.3, 0.0, -0.3];
    let mut t = -1.0;
    unsafe {
        assert_eq!(ordrank_kendall_tau([3.0, 2.0, 1.0].as_ptr(), theta.as_ptr(), 3, &mut t), OrdrankStatus::Ok);
        assert_eq!(t, 0.0);
        assert_eq!(ordrank_kendall_tau([1.0, 1.0, 0.0].as_ptr(), theta.as_ptr(), 3, &mut t), OrdrankStatus::Ok);
        assert!((t - 1.0 / 3.0).abs() < 1e-15);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/ordrank.h");
    let source = include_str!("../src/lib.rs");
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    let v = unsafe { CStr::from_ptr(ordrank_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let dir = std::env::temp_dir().join(format!("ordrank-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("check.c");
    std::fs::write(
        &src,
        "#include \"ordrank.h\"\nint main(void) { OrdrankModel *m = 0; OrdrankRates r; (void)r; ordrank_model_free(m); return ORDRANK_STATUS_OK; }\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .status()
        .expect("a C compiler on PATH");
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(status.success());
}
