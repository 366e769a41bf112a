use std::ffi::{CStr, CString};
use std::ptr;

use spinsqueeze_ffi::*;

fn last_error() -> String {
    let p = ss_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn unknown_preset_sets_code_and_message() {
    let name = CString::new("fig9z").unwrap();
    let mut s = ptr::null_mut();
    let st = unsafe { ss_scenario_from_preset(name.as_ptr(), &mut s) };
    assert_eq!(st, SsStatus::UnknownPreset);
    assert!(s.is_null());
    assert!(last_error().contains("fig9z"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ss_scenario_from_preset(ptr::null(), &mut s) }, SsStatus::NullPointer);
    let name = CString::new("fig2a").unwrap();
    assert_eq!(unsafe { ss_scenario_from_preset(name.as_ptr(), ptr::null_mut()) }, SsStatus::NullPointer);
    assert_eq!(unsafe { ss_run(ptr::null(), ptr::null_mut()) }, SsStatus::NullPointer);
    unsafe {
        ss_scenario_free(ptr::null_mut());
        ss_result_free(ptr::null_mut());
        ss_wigner_free(ptr::null_mut());
        ss_string_free(ptr::null_mut());
    }
}

#[test]
fn toml_errors_carry_the_path() {
    let text = CString::new("[system]\ndim = 40\nnbar = -1.0\n[probe]\npoints = \"many\"\n").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ss_scenario_from_toml(text.as_ptr(), &mut s) }, SsStatus::Config);
    assert!(last_error().contains("probe.points"), "{}", last_error());
}

#[test]
fn run_sideband_preset() {
    let name = CString::new("figs4_sideband").unwrap();
    let mut s = ptr::null_mut();
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(ss_scenario_from_preset(name.as_ptr(), &mut s), SsStatus::Ok);
        assert_eq!(ss_run(s, &mut r), SsStatus::Ok);
        let q = CString::new("max_population_error").unwrap();
        let (mut v, mut sig) = (f64::NAN, f64::NAN);
        assert_eq!(ss_result_quantity(r, q.as_ptr(), &mut v, &mut sig), SsStatus::Ok);
        assert!(v > 0.0 && v < 0.01, "{v}");
        let missing = CString::new("nope").unwrap();
        assert_eq!(ss_result_quantity(r, missing.as_ptr(), &mut v, ptr::null_mut()), SsStatus::NotFound);
        let mut js = ptr::null_mut();
        assert_eq!(ss_result_json(r, &mut js), SsStatus::Ok);
        let text = CStr::from_ptr(js).to_str().unwrap().to_owned();
        ss_string_free(js);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["name"], "figs4_sideband");
        ss_result_free(r);
        ss_scenario_free(s);
    }
}

#[test]
fn vacuum_wigner_through_the_abi() {
    let n = 41;
    let ax: Vec<f64> = (0..n).map(|k| -3.0 + 6.0 * k as f64 / (n - 1) as f64).collect();
    let mut chi = Vec::with_capacity(2 * n * n);
    for &bi in &ax {
        for &br in &ax {
            chi.push((-(br * br + bi * bi) / 2.0).exp());
            chi.push(0.0);
        }
    }
    let mut w = ptr::null_mut();
    unsafe {
        assert_eq!(ss_wigner_from_chi(ax.as_ptr(), n, ax.as_ptr(), n, chi.as_ptr(), 200, &mut w), SsStatus::Ok);
        let (mut nx, mut np) = (0, 0);
        assert_eq!(ss_wigner_dims(w, &mut nx, &mut np), SsStatus::Ok);
        assert_eq!((nx, np), (441, 441));
        let (mut x, mut p, mut v) = (vec![0.0; nx], vec![0.0; np], vec![0.0; nx * np]);
        assert_eq!(ss_wigner_copy(w, x.as_mut_ptr(), p.as_mut_ptr(), v.as_mut_ptr()), SsStatus::Ok);
        ss_wigner_free(w);
        let (ix, ip) =
            (x.iter().position(|&q| q.abs() < 1e-12).unwrap(), p.iter().position(|&q| q.abs() < 1e-12).unwrap());
        assert!((v[ip * nx + ix] - std::f64::consts::FRAC_1_PI).abs() < 1e-2);
    }
    let bad = [0.0, 1.0, 3.0];
    assert_eq!(
        unsafe { ss_wigner_from_chi(bad.as_ptr(), 3, bad.as_ptr(), 3, chi.as_ptr(), 4, &mut w) },
        SsStatus::InvalidArgument
    );
}

#[test]
fn closed_form_helpers() {
    assert!((ss_squeezing_db(1.09) - 9.467).abs() < 1e-3);
    let t = [0.0, 10e-6, 20e-6];
    let mut p = [0.0; 3];
    let st = unsafe { ss_analytic_splitting(0.0, 0.0, 0.0, 1.0, 2e5, 0.0, t.as_ptr(), 3, p.as_mut_ptr()) };
    assert_eq!(st, SsStatus::Ok);
    assert!((p[0] - 1.0).abs() < 1e-15);
    // vacuum: p = ½(1 + e^{−2|β|²}), β = Ωt/2
    let b: f64 = 0.5 * 2e5 * 10e-6;
    assert!((p[1] - 0.5 * (1.0 + (-2.0 * b * b).exp())).abs() < 1e-12);
    let st = unsafe { ss_analytic_splitting(-1.0, 0.0, 0.0, 1.0, 2e5, 0.0, t.as_ptr(), 3, p.as_mut_ptr()) };
    assert_eq!(st, SsStatus::InvalidArgument);
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/spinsqueeze.h")).unwrap();
    for f in [
        "ss_last_error_message",
        "ss_version",
        "ss_scenario_from_preset",
        "ss_scenario_from_toml",
        "ss_scenario_set_noise",
        "ss_scenario_free",
        "ss_run",
        "ss_result_quantity",
        "ss_result_json",
        "ss_result_free",
        "ss_string_free",
        "ss_wigner_from_chi",
        "ss_wigner_dims",
        "ss_wigner_copy",
        "ss_wigner_free",
        "ss_squeezing_db",
        "ss_analytic_splitting",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(h.contains("typedef struct SsScenario SsScenario"));
}
