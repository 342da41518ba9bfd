use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use lmg_battery_ffi::*;

fn model(n: usize, h: f64) -> LmgModel {
    LmgModel {
        n,
        lambda: 1.0,
        gamma: 0.0,
        h,
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(lmg_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn new_quench(n: usize, h_i: f64, h_c: f64, points: usize) -> *mut LmgQuench {
    let mut q = ptr::null_mut();
    assert_eq!(
        unsafe { lmg_quench_new(model(n, h_i), h_c, 10.0, points, &mut q) },
        LmgStatus::Ok
    );
    q
}

#[test]
fn spectrum_roundtrip() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(lmg_spectrum_new(model(10, 0.5), &mut s), LmgStatus::Ok);
        let len = lmg_spectrum_len(s);
        assert_eq!(len, 11);
        let mut ev = vec![0.0; len];
        assert_eq!(lmg_spectrum_eigenvalues(s, ev.as_mut_ptr(), len), LmgStatus::Ok);
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        lmg_spectrum_free(s);
    }
}

#[test]
fn quench_outputs_agree_with_core() {
    let q = new_quench(20, 0.5, 2.0, 11);
    unsafe {
        let len = lmg_quench_len(q);
        assert_eq!(len, 11);
        let mut w = vec![0.0; len];
        assert_eq!(lmg_quench_work(q, w.as_mut_ptr(), len), LmgStatus::Ok);
        assert!(w[0].abs() < 1e-12);
        assert!(w.iter().all(|&x| x >= -1e-12));

        let levels = lmg_quench_levels(q);
        let (mut values, mut probs) = (vec![0.0; levels], vec![0.0; levels]);
        assert_eq!(
            lmg_quench_work_distribution(q, values.as_mut_ptr(), probs.as_mut_ptr(), levels),
            LmgStatus::Ok
        );
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);

        let (mut mean, mut var) = (0.0, 0.0);
        assert_eq!(lmg_quench_long_time(q, &mut mean, &mut var), LmgStatus::Ok);
        assert!(mean > 0.0 && var >= 0.0);

        let mut e = vec![0.0; len];
        assert_eq!(
            lmg_quench_subsystem(
                q,
                20,
                LmgNormalization::Subsystem as u32,
                e.as_mut_ptr(),
                ptr::null_mut(),
                len
            ),
            LmgStatus::Ok
        );
        for (e, w) in e.iter().zip(&w) {
            assert!((e - w).abs() < 1e-9);
        }
        lmg_quench_free(q);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut q = ptr::null_mut();
        assert_eq!(
            lmg_quench_new(model(0, 0.5), 1.0, 10.0, 5, &mut q),
            LmgStatus::InvalidArgument
        );
        assert!(q.is_null());
        assert!(last_error().contains("particle count"));

        assert_eq!(
            lmg_quench_new(model(4, 0.5), 1.0, 10.0, 5, ptr::null_mut()),
            LmgStatus::NullPointer
        );
        assert_eq!(
            lmg_spectrum_eigenvalues(ptr::null(), ptr::null_mut(), 0),
            LmgStatus::NullPointer
        );

        let mut s = ptr::null_mut();
        assert_eq!(lmg_spectrum_new(model(100, 1.7e308), &mut s), LmgStatus::NumericFailure);
        assert!(last_error().contains("non-finite"));

        let q = new_quench(6, 0.5, 1.0, 5);
        let mut short = [0.0; 3];
        assert_eq!(
            lmg_quench_work(q, short.as_mut_ptr(), short.len()),
            LmgStatus::BufferTooSmall
        );
        assert!(last_error().contains("5 needed"));
        assert_eq!(
            lmg_quench_subsystem(q, 3, 7, ptr::null_mut(), ptr::null_mut(), 0),
            LmgStatus::InvalidArgument
        );
        assert_eq!(
            lmg_quench_subsystem(q, 9, 0, ptr::null_mut(), ptr::null_mut(), 0),
            LmgStatus::InvalidArgument
        );
        lmg_quench_free(q);

        lmg_quench_free(ptr::null_mut());
        lmg_spectrum_free(ptr::null_mut());
        assert_eq!(lmg_quench_len(ptr::null()), 0);
    }
}

#[test]
fn bath_run_reports_summary_and_series() {
    let points = 51;
    let (mut w, mut n) = (vec![0.0; points], vec![0.0; points]);
    let mut summary = LmgBathSummary::default();
    let status = unsafe {
        lmg_bath_run(
            model(4, 0.5),
            1.0,
            0.5,
            4,
            12,
            5.0,
            points,
            &mut summary,
            w.as_mut_ptr(),
            n.as_mut_ptr(),
            ptr::null_mut(),
            points,
        )
    };
    assert_eq!(status, LmgStatus::Ok, "{}", last_error());
    assert!((n[0] - 4.0).abs() < 1e-12);
    assert!(summary.w_max > 0.0);
    assert_eq!(summary.w_max, w.iter().cloned().fold(f64::MIN, f64::max));
    assert!(summary.ergotropy_at_w_max <= summary.w_max + 1e-9);

    let cutoff_too_small = unsafe {
        lmg_bath_run(
            model(4, 0.5),
            1.0,
            0.5,
            4,
            8,
            5.0,
            points,
            &mut summary,
            ptr::null_mut(),
            ptr::null_mut(),
            ptr::null_mut(),
            0,
        )
    };
    assert_eq!(cutoff_too_small, LmgStatus::InvalidArgument);
}

#[test]
fn isotropic_energy_and_version() {
    let mut e = 0.0;
    assert_eq!(unsafe { lmg_isotropic_energy(10, 1.5, 0, &mut e) }, LmgStatus::Ok);
    let mut s = ptr::null_mut();
    unsafe {
        lmg_spectrum_new(
            LmgModel {
                n: 10,
                lambda: 1.0,
                gamma: 1.0,
                h: 1.5,
            },
            &mut s,
        );
        let mut ev = vec![0.0; 11];
        lmg_spectrum_eigenvalues(s, ev.as_mut_ptr(), 11);
        assert!((ev[0] - e).abs() < 1e-10);
        lmg_spectrum_free(s);
    }
    assert_eq!(
        unsafe { lmg_isotropic_energy(10, 1.0, 0, &mut e) },
        LmgStatus::InvalidArgument
    );
    let version = unsafe { CStr::from_ptr(lmg_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include/lmg_battery.h");
    assert!(header.exists(), "header not generated");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in [
        "lmg_quench_new",
        "lmg_bath_run",
        "LMG_STATUS_BUFFER_TOO_SMALL",
        "typedef struct LmgQuench LmgQuench",
    ] {
        assert!(text.contains(symbol), "{symbol} missing from header");
    }
    let include = format!("-I{}", root.join("include").display());
    let example = root.join("examples/quench.c");
    for (compiler, std) in [("cc", "-std=c99"), ("c++", "-std=c++17")] {
        let lang = if compiler == "cc" { "c" } else { "c++" };
        let status = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", std, &include, "-x", lang])
            .arg(&example)
            .status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(_) => eprintln!("{compiler} not available; skipping"),
        }
    }
}
