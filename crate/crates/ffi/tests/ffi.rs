use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use snell_ffi::*;

const ONE_PERIOD: &str = r#"{
  "horizon": 1,
  "nodes": [
    {"id": 0, "parent": null, "r_prob": null, "payoff": 2},
    {"id": 1, "parent": 0, "r_prob": 0.5, "payoff": 10},
    {"id": 2, "parent": 0, "r_prob": 0.5, "payoff": 0}
  ],
  "kernel_sets": {"0": [[0.3, 0.7], [0.7, 0.3]]}
}"#;

fn from_json(text: &str) -> (SnellStatus, *mut SnellModel) {
    let c = CString::new(text).unwrap();
    let mut m = ptr::null_mut();
    let status = unsafe { snell_model_from_json(c.as_ptr(), &mut m) };
    (status, m)
}

fn last_error() -> String {
    let p = snell_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn binomial(steps: u32, p_lo: f64, p_hi: f64) -> SnellBinomialParams {
    SnellBinomialParams {
        steps,
        s0: 100.0,
        up: 1.1,
        down: 0.9,
        p_lo,
        p_hi,
        strike: 100.0,
        payoff: SnellPayoff::Put,
    }
}

#[test]
fn one_period_values() {
    let (status, m) = from_json(ONE_PERIOD);
    assert_eq!(status, SnellStatus::Ok);
    unsafe {
        let mut v = 0.0;
        assert_eq!(snell_lower_value(m, &mut v), SnellStatus::Ok);
        assert_eq!(v, 3.0);
        assert_eq!(snell_lower_envelope(m, 1, &mut v), SnellStatus::Ok);
        assert_eq!(v, 10.0);
        assert_eq!(snell_member_value(m, 1, &mut v), SnellStatus::Ok);
        assert_eq!(v, 7.0);

        let mut count = 0u64;
        assert_eq!(snell_model_member_count(m, &mut count), SnellStatus::Ok);
        assert_eq!(count, 2);
        let mut nodes = 0usize;
        assert_eq!(snell_model_node_count(m, &mut nodes), SnellStatus::Ok);
        assert_eq!(nodes, 3);
        let mut label = 0u64;
        assert_eq!(snell_model_node_label(m, 2, &mut label), SnellStatus::Ok);
        assert_eq!(label, 2);
        snell_model_free(m);
    }
}

#[test]
fn region_needs_a_large_enough_buffer() {
    let (_, m) = from_json(ONE_PERIOD);
    unsafe {
        let mut len = 0usize;
        assert_eq!(snell_tau_down_region(m, ptr::null_mut(), 0, &mut len), SnellStatus::BufferTooSmall);
        assert_eq!(len, 2);
        let mut buf = vec![0u64; len];
        assert_eq!(snell_tau_down_region(m, buf.as_mut_ptr(), buf.len(), &mut len), SnellStatus::Ok);
        assert_eq!(buf, [1, 2]);
        snell_model_free(m);
    }
}

#[test]
fn binomial_with_point_interval_is_classical() {
    // One step, p = 0.5: put pays 10 in the down state, so the value is 5.
    let p = binomial(1, 0.5, 0.5);
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(snell_model_binomial(&p, &mut m), SnellStatus::Ok);
        let mut v = 0.0;
        snell_lower_value(m, &mut v);
        assert!((v - 5.0).abs() < 1e-12);
        snell_model_free(m);
    }
}

#[test]
fn invalid_inputs_report_status_and_message() {
    let (status, m) = from_json("{\"horizon\": 1}");
    assert_eq!(status, SnellStatus::Validation);
    assert!(m.is_null());
    assert!(last_error().contains("nodes"));

    let p = binomial(0, 0.4, 0.6);
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { snell_model_binomial(&p, &mut m) }, SnellStatus::Validation);
    assert!(last_error().contains("steps"));

    let missing = CString::new("/nonexistent/model.json").unwrap();
    assert_eq!(unsafe { snell_model_load(missing.as_ptr(), &mut m) }, SnellStatus::Io);

    let (_, m) = from_json(ONE_PERIOD);
    let mut v = 0.0;
    unsafe {
        assert_eq!(snell_lower_envelope(m, 99, &mut v), SnellStatus::NotFound);
        assert_eq!(snell_member_value(m, 2, &mut v), SnellStatus::NotFound);
        assert_eq!(snell_lower_value(ptr::null(), &mut v), SnellStatus::NullPointer);
        assert_eq!(snell_lower_value(m, ptr::null_mut()), SnellStatus::NullPointer);
        snell_model_free(m);
        snell_model_free(ptr::null_mut());
    }
}

#[test]
fn json_round_trip_through_the_handle() {
    let (_, m) = from_json(ONE_PERIOD);
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(snell_model_to_json(m, &mut s), SnellStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        snell_string_free(s);
        let (status, again) = from_json(&text);
        assert_eq!(status, SnellStatus::Ok);
        let (mut a, mut b) = (0.0, 0.0);
        snell_lower_value(m, &mut a);
        snell_lower_value(again, &mut b);
        assert_eq!(a, b);
        snell_model_free(again);
        snell_model_free(m);
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(snell_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/snell.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["snell_model_from_json", "snell_tau_down_region", "snell_last_error_message", "SNELL_STATUS_BUDGET"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler on PATH; syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
