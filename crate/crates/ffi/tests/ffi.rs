use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use colombeau_ffi::*;

fn last_error() -> String {
    let mut needed = 0usize;
    unsafe {
        colombeau_last_error(ptr::null_mut(), 0, &mut needed);
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(
            colombeau_last_error(buf.as_mut_ptr(), needed, &mut needed),
            ColombeauStatus::Ok
        );
        CStr::from_ptr(buf.as_ptr()).to_str().unwrap().to_string()
    }
}

#[test]
fn formula_ids_with_buffer_protocol() {
    let n = colombeau_formula_count();
    assert!(n >= 20);
    let mut needed = 0usize;
    let mut small = [0 as c_char; 2];
    unsafe {
        assert_eq!(
            colombeau_formula_id(0, small.as_mut_ptr(), 2, &mut needed),
            ColombeauStatus::BufferTooSmall
        );
        assert_eq!(needed, 4);
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(
            colombeau_formula_id(0, buf.as_mut_ptr(), needed, ptr::null_mut()),
            ColombeauStatus::Ok
        );
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "MIK");
        assert_eq!(
            colombeau_formula_id(n, buf.as_mut_ptr(), needed, ptr::null_mut()),
            ColombeauStatus::OutOfRange
        );
    }
}

#[test]
fn oracle_and_errors() {
    let mut tf = ptr::null_mut();
    let id = CString::new("mine").unwrap();
    let poly = [1.0, 0.5];
    unsafe {
        assert_eq!(
            colombeau_test_function_new(id.as_ptr(), poly.as_ptr(), 2, 0.0, 1.0, &mut tf),
            ColombeauStatus::Ok
        );
        let (mut re, mut im, mut psi0) = (0.0, 0.0, 0.0);
        assert_eq!(
            colombeau_test_function_eval(tf, 0, 0.0, &mut psi0),
            ColombeauStatus::Ok
        );
        let th1 = CString::new("TH1+").unwrap();
        let p = 2i32;
        assert_eq!(
            colombeau_oracle(th1.as_ptr(), &p, ptr::null(), tf, &mut re, &mut im),
            ColombeauStatus::Ok
        );
        assert!((re - 0.75 * psi0).abs() < 1e-12);

        let xpdq = CString::new("XPDQ").unwrap();
        let status = colombeau_oracle(xpdq.as_ptr(), &p, ptr::null(), tf, &mut re, &mut im);
        assert_eq!(status, ColombeauStatus::InvalidParams);
        assert!(last_error().contains("needs q"));

        assert_eq!(
            colombeau_oracle(th1.as_ptr(), &p, ptr::null(), ptr::null(), &mut re, &mut im),
            ColombeauStatus::NullPointer
        );
        let bad = [0xffu8 as c_char, 0];
        assert_eq!(
            colombeau_oracle(bad.as_ptr(), &p, ptr::null(), tf, &mut re, &mut im),
            ColombeauStatus::InvalidUtf8
        );
        colombeau_test_function_free(tf);

        let mut bad_tf = ptr::null_mut();
        let status =
            colombeau_test_function_new(id.as_ptr(), poly.as_ptr(), 2, 0.0, -1.0, &mut bad_tf);
        assert_eq!(status, ColombeauStatus::Numerical);
        assert!(bad_tf.is_null());
    }
}

#[test]
fn suite_report_round_trip() {
    let cfg = CString::new(
        r#"
[[formulas]]
id = "CMUC"
p = [0]
[[mollifiers]]
variant = "plain"
[[test_functions]]
id = "even"
poly = [1.0]
center = 0.0
radius = 1.0
"#,
    )
    .unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(
            colombeau_run_suite(cfg.as_ptr(), &mut report),
            ColombeauStatus::Ok
        );
        let (mut n, mut passed) = (0usize, 0usize);
        assert_eq!(
            colombeau_report_summary(report, &mut n, &mut passed),
            ColombeauStatus::Ok
        );
        assert_eq!((n, passed), (1, 1));
        let mut needed = 0usize;
        assert_eq!(
            colombeau_report_json(report, ptr::null_mut(), 0, &mut needed),
            ColombeauStatus::BufferTooSmall
        );
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(
            colombeau_report_json(report, buf.as_mut_ptr(), needed, &mut needed),
            ColombeauStatus::Ok
        );
        let json = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert!(json.contains("\"formula_id\": \"CMUC\""));
        colombeau_report_free(report);

        let empty = CString::new("formulas = []").unwrap();
        let mut r2 = ptr::null_mut();
        assert_eq!(
            colombeau_run_suite(empty.as_ptr(), &mut r2),
            ColombeauStatus::Config
        );
        assert!(r2.is_null());
        assert!(last_error().contains("formulas"));
    }
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/colombeau.h"))
            .unwrap();
    for name in [
        "colombeau_last_error",
        "colombeau_formula_count",
        "colombeau_formula_id",
        "colombeau_test_function_new",
        "colombeau_test_function_default",
        "colombeau_test_function_eval",
        "colombeau_test_function_free",
        "colombeau_oracle",
        "colombeau_run_suite",
        "colombeau_report_summary",
        "colombeau_report_json",
        "colombeau_report_free",
        "typedef struct ColombeauReport ColombeauReport;",
        "COLOMBEAU_STATUS_BUFFER_TOO_SMALL = 7",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compile and run a C program against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libcolombeau_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!(
            "skipping: no static library at {} or no C compiler",
            lib.display()
        );
        return;
    }
    let out = tempfile_path("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(
        run.status.success(),
        "exit {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stdout)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}

fn tempfile_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("colombeau-ffi-{name}-{}", std::process::id()))
}
