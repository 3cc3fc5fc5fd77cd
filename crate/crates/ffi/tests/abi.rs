use std::ffi::{CStr, CString};
use std::ptr;

use weakkam_ffi::*;

const CONFIG: &str = r#"
[grid]
n = 32

[plan]
delta = 0.1
t_max = 12.8

[hamiltonians.pendulum]
family = "mechanical"
potential = [{ amplitude = 1.0, wave = [1, 0], kind = "cos" }]

[hamiltonians.exp_pendulum]
family = "composed"
map = "exp"
inner = "pendulum"

[hamiltonians.wide]
family = "mechanical"
potential = [{ amplitude = 1.0, wave = [1, 0], kind = "cos" }]
p_max = 2.0
"#;

fn pipeline(name: &str) -> *mut WkPipeline {
    let cfg = CString::new(CONFIG).unwrap();
    let name = CString::new(name).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { wk_pipeline_create(cfg.as_ptr(), name.as_ptr(), &mut p) }, WkStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(wk_last_error()) }.to_str().unwrap().to_string()
}

#[test]
fn pendulum_critical_value_and_aubry_set() {
    let p = pipeline("pendulum");
    unsafe {
        let mut n = 0;
        assert_eq!(wk_pipeline_nodes(p, &mut n), WkStatus::Ok);
        assert_eq!(n, 32);
        let mut c = 0.0;
        assert_eq!(wk_critical_value(p, &mut c), WkStatus::Ok);
        assert!((c - 1.0).abs() < 1e-6);

        let mut w = ptr::null_mut();
        assert_eq!(wk_weakkam_compute(p, &mut w), WkStatus::Ok);
        let mut cw = 0.0;
        assert_eq!(wk_weakkam_critical_value(w, &mut cw), WkStatus::Ok);
        assert_eq!(cw, c);
        let mut conv = 0;
        assert_eq!(wk_weakkam_barrier_converged(w, &mut conv), WkStatus::Ok);
        assert_eq!(conv, 1);

        let mut count = 0;
        assert_eq!(wk_weakkam_aubry(w, ptr::null_mut(), 0, &mut count), WkStatus::BufferTooSmall);
        assert_eq!(count, 1);
        let mut members = vec![usize::MAX; count];
        assert_eq!(wk_weakkam_aubry(w, members.as_mut_ptr(), members.len(), &mut count), WkStatus::Ok);
        assert_eq!(members, vec![0]);

        let mut barrier = vec![0.0; n * n];
        assert_eq!(wk_weakkam_barrier(w, barrier.as_mut_ptr(), barrier.len()), WkStatus::Ok);
        assert_eq!(barrier[0], 0.0);
        assert!(barrier.iter().all(|v| v.is_finite()));
        wk_weakkam_free(w);
        wk_pipeline_free(p);
    }
}

#[test]
fn kernels_compose_and_apply() {
    let p = pipeline("pendulum");
    unsafe {
        let (mut a, mut b, mut ab) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(wk_kernel_at(p, 0.2, &mut a), WkStatus::Ok);
        assert_eq!(wk_kernel_at(p, 0.4, &mut b), WkStatus::Ok);
        assert_eq!(wk_kernel_compose(a, a, &mut ab), WkStatus::Ok);
        let mut t = 0.0;
        assert_eq!(wk_kernel_time(ab, &mut t), WkStatus::Ok);
        assert!((t - 0.4).abs() < 1e-12);
        let mut n = 0;
        assert_eq!(wk_kernel_size(ab, &mut n), WkStatus::Ok);
        let mut x = vec![0.0; n * n];
        let mut y = vec![0.0; n * n];
        assert_eq!(wk_kernel_entries(ab, x.as_mut_ptr(), x.len()), WkStatus::Ok);
        assert_eq!(wk_kernel_entries(b, y.as_mut_ptr(), y.len()), WkStatus::Ok);
        assert_eq!(x, y);
        assert_eq!(wk_kernel_entries(b, y.as_mut_ptr(), 3), WkStatus::BufferTooSmall);

        // point datum at node 0 picks out row 0
        let mut u = vec![f64::INFINITY; n];
        u[0] = 0.0;
        let mut v = vec![0.0; n];
        assert_eq!(wk_kernel_apply(b, u.as_ptr(), n, v.as_mut_ptr()), WkStatus::Ok);
        assert_eq!(v, y[..n].to_vec());
        assert_eq!(wk_kernel_apply(b, u.as_ptr(), n - 1, v.as_mut_ptr()), WkStatus::InvalidArgument);

        wk_kernel_free(a);
        wk_kernel_free(b);
        wk_kernel_free(ab);
        wk_pipeline_free(p);
    }
}

#[test]
fn reversal_and_commutation() {
    let h = pipeline("pendulum");
    let g = pipeline("exp_pendulum");
    unsafe {
        let mut r = 1.0;
        assert_eq!(wk_commutation_residual(h, h, 0.8, 0.4, &mut r), WkStatus::Ok);
        assert_eq!(r, 0.0);
        assert_eq!(wk_commutation_residual(h, g, 0.8, 0.4, &mut r), WkStatus::Ok);
        assert!(r > 0.0 && r < 0.1, "{r}");

        let mut rev = ptr::null_mut();
        assert_eq!(wk_pipeline_reversed(h, &mut rev), WkStatus::Ok);
        let (mut c1, mut c2) = (0.0, 0.0);
        wk_critical_value(h, &mut c1);
        wk_critical_value(rev, &mut c2);
        assert_eq!(c1.to_bits(), c2.to_bits());
        wk_pipeline_free(rev);
        wk_pipeline_free(h);
        wk_pipeline_free(g);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut p = ptr::null_mut();
        let bad = CString::new("[grid]\nn = 1\n").unwrap();
        let name = CString::new("x").unwrap();
        assert_eq!(wk_pipeline_create(bad.as_ptr(), name.as_ptr(), &mut p), WkStatus::Config);
        assert!(last_error().contains("configuration"));
        assert!(p.is_null());

        let cfg = CString::new(CONFIG).unwrap();
        let missing = CString::new("nope").unwrap();
        assert_eq!(wk_pipeline_create(cfg.as_ptr(), missing.as_ptr(), &mut p), WkStatus::Config);
        assert!(last_error().contains("nope"));

        // momentum box narrower than the velocity box: sup hits the edge
        let wide = CString::new("wide").unwrap();
        assert_eq!(wk_pipeline_create(cfg.as_ptr(), wide.as_ptr(), &mut p), WkStatus::Numerical);
        assert!(last_error().contains("boundary"));

        assert_eq!(wk_pipeline_create(ptr::null(), name.as_ptr(), &mut p), WkStatus::NullPointer);
        let mut c = 0.0;
        assert_eq!(wk_critical_value(ptr::null(), &mut c), WkStatus::NullPointer);

        let h = pipeline("pendulum");
        let mut k = ptr::null_mut();
        assert_eq!(wk_kernel_at(h, 0.15, &mut k), WkStatus::Numerical);
        assert!(k.is_null());
        wk_pipeline_free(h);
        wk_pipeline_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_abi() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/weakkam.h")).unwrap();
    for sym in [
        "wk_last_error",
        "wk_pipeline_create",
        "wk_pipeline_free",
        "wk_kernel_compose",
        "wk_weakkam_aubry",
        "wk_commutation_residual",
        "WK_STATUS_BUFFER_TOO_SMALL",
        "typedef struct WkPipeline WkPipeline",
    ] {
        assert!(header.contains(sym), "{sym} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", "-"])
        .arg(concat!("-I", env!("CARGO_MANIFEST_DIR"), "/include"))
        .stdin(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .and_then(|mut child| {
            use std::io::Write;
            child.stdin.take().unwrap().write_all(b"#include \"weakkam.h\"\nint main(void) { return wk_last_error() == 0; }\n")?;
            child.wait_with_output()
        })
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
