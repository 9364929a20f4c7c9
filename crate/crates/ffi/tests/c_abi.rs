use std::ffi::CString;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use weak_distill_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let n = unsafe { wd_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(n.min(255));
    String::from_utf8(buf).unwrap()
}

fn two_qubit() -> *mut WdDecomposition {
    let sp = [0.4, 0.3, 0.2, 0.1];
    let sm = [0.2, 0.3, 0.3, 0.2];
    let mut d = ptr::null_mut();
    let st = unsafe { wd_decomposition_new(2.0, 1.0, sp.as_ptr(), sm.as_ptr(), 4, &mut d) };
    assert_eq!(st, WdStatus::Ok);
    d
}

#[test]
fn decomposition_queries() {
    let d = two_qubit();
    let (mut len, mut gamma, mut cm) = (0usize, 0.0, 0.0);
    let mut target = [0.0; 4];
    let mut mixture = [0.0; 4];
    unsafe {
        assert_eq!(wd_decomposition_len(d, &mut len), WdStatus::Ok);
        assert_eq!(wd_decomposition_gamma(d, &mut gamma), WdStatus::Ok);
        assert_eq!(wd_decomposition_c_minus(d, &mut cm), WdStatus::Ok);
        assert_eq!(
            wd_decomposition_target(d, target.as_mut_ptr(), 4),
            WdStatus::Ok
        );
        assert_eq!(
            wd_decomposition_mixture(d, mixture.as_mut_ptr(), 4),
            WdStatus::Ok
        );
        assert_eq!(
            wd_decomposition_target(d, target.as_mut_ptr(), 3),
            WdStatus::DimensionMismatch
        );
        wd_decomposition_free(d);
    }
    assert_eq!((len, gamma, cm), (4, 3.0, 1.0));
    let expected = [0.6, 0.3, 0.1, 0.0];
    for (t, e) in target.iter().zip(expected) {
        assert!((t - e).abs() < 1e-12);
    }
    assert!((mixture.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn invalid_inputs_report_status_and_message() {
    let sp = [0.5, 0.5];
    let mut d = ptr::null_mut();
    let st = unsafe { wd_decomposition_new(2.0, 0.5, sp.as_ptr(), sp.as_ptr(), 2, &mut d) };
    assert_eq!(st, WdStatus::InvalidArgument);
    assert!(d.is_null());
    assert!(!last_error().is_empty());

    let st = unsafe { wd_decomposition_new(1.0, 0.0, ptr::null(), sp.as_ptr(), 2, &mut d) };
    assert_eq!(st, WdStatus::NullPointer);
    assert!(last_error().contains("sigma_plus"));

    let mut g = 0.0;
    assert_eq!(
        unsafe { wd_decomposition_gamma(ptr::null(), &mut g) },
        WdStatus::NullPointer
    );

    let name = CString::new("ghz").unwrap();
    let st = unsafe { wd_decomposition_scenario(name.as_ptr(), 0, &mut d) };
    assert_eq!(st, WdStatus::InvalidArgument);
}

#[test]
fn ideal_sampler_reproduces_target() {
    let d = two_qubit();
    let mut s = ptr::null_mut();
    let mut out = [0.0; 4];
    let mut target = [0.0; 4];
    let mut bound = -1.0;
    unsafe {
        assert_eq!(wd_sampler_ideal(d, &mut s), WdStatus::Ok);
        assert_eq!(
            wd_sampler_output_distribution(s, out.as_mut_ptr(), 4),
            WdStatus::Ok
        );
        assert_eq!(
            wd_decomposition_target(d, target.as_mut_ptr(), 4),
            WdStatus::Ok
        );
        assert_eq!(wd_sampler_tvd_error_bound(s, &mut bound), WdStatus::Ok);
        let mut dist = 1.0;
        assert_eq!(
            wd_tvd(out.as_ptr(), target.as_ptr(), 4, &mut dist),
            WdStatus::Ok
        );
        assert!(dist < 1e-12);
        assert!(bound.abs() < 1e-12);

        let rng = wd_rng_new(3, 0);
        let (mut idx, mut attempts) = (0u64, 0u64);
        assert_eq!(
            wd_sampler_sample(s, rng, 1_000, &mut idx, &mut attempts),
            WdStatus::Ok
        );
        assert!(idx < 3 && attempts >= 1);
        wd_rng_free(rng);
        wd_sampler_free(s);
        wd_decomposition_free(d);
    }
}

#[test]
fn estimated_sampler_and_estimate_are_seeded() {
    let d = two_qubit();
    let run = |seed| unsafe {
        let rng = wd_rng_new(seed, 0);
        let mut s = ptr::null_mut();
        assert_eq!(wd_sampler_estimate(d, 500, rng, &mut s), WdStatus::Ok);
        let mut ratios = [0.0; 4];
        assert_eq!(wd_sampler_ratios(s, ratios.as_mut_ptr(), 4), WdStatus::Ok);
        let mut est = [0.0; 4];
        assert_eq!(
            wd_estimate_distribution(d, 500, rng, est.as_mut_ptr(), 4),
            WdStatus::Ok
        );
        wd_sampler_free(s);
        wd_rng_free(rng);
        (ratios, est)
    };
    assert_eq!(run(7), run(7));
    let (ratios, est) = run(7);
    assert!(ratios.iter().all(|r| (0.0..=1.0).contains(r)));
    assert!((est.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let rng = wd_rng_new(0, 0);
    let mut est = [0.0; 4];
    let st = unsafe { wd_estimate_distribution(d, 0, rng, est.as_mut_ptr(), 4) };
    assert_eq!(st, WdStatus::InvalidArgument);
    unsafe {
        wd_rng_free(rng);
        wd_decomposition_free(d);
    }
}

#[test]
fn scenario_and_bounds() {
    let name = CString::new("isotropic").unwrap();
    let mut d = ptr::null_mut();
    let mut gamma = 0.0;
    let mut m = 0u64;
    let (mut est, mut rej, mut d1) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(
            wd_decomposition_scenario(name.as_ptr(), 1, &mut d),
            WdStatus::Ok
        );
        assert_eq!(wd_decomposition_gamma(d, &mut gamma), WdStatus::Ok);
        assert_eq!(wd_retry_budget(2.0, 0.5, 0.1, 0.1, &mut m), WdStatus::Ok);
        assert_eq!(wd_bound_estimation(d, 0.1, 0.1, &mut est), WdStatus::Ok);
        assert_eq!(
            wd_bound_rejection(d, 2, 0.1, 0.1, &mut rej, &mut d1),
            WdStatus::Ok
        );
        assert_eq!(
            wd_bound_rejection(d, 4, 0.1, 0.1, &mut rej, ptr::null_mut()),
            WdStatus::InvalidArgument
        );
        wd_decomposition_free(d);
    }
    assert!((gamma - 101.0 / 99.0).abs() < 1e-12);
    assert_eq!(m, 3);
    assert!(est.is_finite() && est > 0.0);
    assert!(rej.is_finite() && d1 > 0.0 && d1 < 0.1);
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/weak_distill.h");
    for sym in [
        "wd_last_error_message",
        "wd_decomposition_new",
        "wd_decomposition_scenario",
        "wd_decomposition_free",
        "wd_decomposition_target",
        "wd_rng_new",
        "wd_sampler_estimate",
        "wd_sampler_output_distribution",
        "wd_sampler_sample",
        "wd_estimate_distribution",
        "wd_tvd",
        "wd_retry_budget",
        "wd_bound_rejection",
        "typedef struct WdDecomposition WdDecomposition",
        "WD_STATUS_NULL_POINTER = 1",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }
}

const C_SMOKE: &str = r#"
#include <stdio.h>
#include "weak_distill.h"

int main(void) {
    WdDecomposition *d = NULL;
    if (wd_decomposition_scenario("iqp", 2, &d) != WD_STATUS_OK) return 1;
    size_t len = 0;
    wd_decomposition_len(d, &len);
    WdSampler *s = NULL;
    if (wd_sampler_ideal(d, &s) != WD_STATUS_OK) return 2;
    WdRng *rng = wd_rng_new(1, 0);
    uint64_t idx = 0, attempts = 0;
    if (wd_sampler_sample(s, rng, 1000000, &idx, &attempts) != WD_STATUS_OK) return 3;
    if (idx >= len) return 4;
    if (wd_decomposition_new(1.0, 0.0, NULL, NULL, 2, &d) != WD_STATUS_NULL_POINTER) return 5;
    printf("len=%zu\n", len);
    wd_rng_free(rng);
    wd_sampler_free(s);
    return 0;
}
"#;

/// Compiles a C program against the generated header and static library.
/// Skipped when no C compiler is on the PATH.
#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("libweak_distill_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = tempdir();
    let src = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&src, C_SMOKE).unwrap();
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "len=32");
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wd-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
