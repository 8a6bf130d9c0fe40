use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use impulse_geo_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        ig_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn builtin(m: &str, p: &str, n: &str) -> *mut IgWave {
    let (m, p, n) = (CString::new(m).unwrap(), CString::new(p).unwrap(), CString::new(n).unwrap());
    let mut w = ptr::null_mut();
    let st = unsafe { ig_wave_builtin(m.as_ptr(), p.as_ptr(), n.as_ptr(), &mut w) };
    assert_eq!(st, IgStatus::Ok, "{}", last_error());
    w
}

#[test]
fn flat_linear_round_trip() {
    let w = builtin("euclidean", "linear", "mollifier");
    unsafe {
        assert_eq!(ig_wave_dim(w), 2);
        let (x0, xd0) = ([0.0, 0.0], [1.0, 0.0]);
        let mut path = ptr::null_mut();
        let st = ig_integrate(w, 0.05, x0.as_ptr(), xd0.as_ptr(), 0.0, 0.0, 1.0, 0.0, &mut path);
        assert_eq!(st, IgStatus::Ok);

        // before the strip the geodesic is the straight line
        let (mut x, mut xd, mut v) = ([0.0; 2], [0.0; 2], 0.0);
        assert_eq!(ig_path_state_at(path, -0.5, x.as_mut_ptr(), xd.as_mut_ptr(), &mut v, ptr::null_mut()), IgStatus::Ok);
        assert!((x[0] - 0.5).abs() < 1e-12 && x[1].abs() < 1e-12);
        assert_eq!(v, 0.0);

        // after it the velocity has been kicked by ∇f/2
        assert_eq!(ig_path_state_at(path, 1.0, ptr::null_mut(), xd.as_mut_ptr(), ptr::null_mut(), ptr::null_mut()), IgStatus::Ok);
        assert!((xd[0] - 1.5).abs() < 1e-8, "{xd:?}");

        let mut drift = f64::NAN;
        assert_eq!(ig_path_energy_drift(path, &mut drift), IgStatus::Ok);
        assert!(drift < 1e-8);

        assert_eq!(ig_path_state_at(path, 2.0, x.as_mut_ptr(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), IgStatus::OutOfRange);
        assert!(last_error().contains("outside"));

        let (mut jump, mut kink) = (0.0, 0.0);
        assert_eq!(ig_limit_coefficients(w, x0.as_ptr(), xd0.as_ptr(), &mut jump, &mut kink), IgStatus::Ok);
        assert!((jump + 0.5).abs() < 1e-12 && (kink + 0.625).abs() < 1e-12);

        ig_path_free(path);
        ig_wave_free(w);
    }
}

#[test]
fn certificate_matches_closed_form() {
    let w = builtin("euclidean", "linear", "mollifier");
    let mut c = IgCertificate::default();
    let (x0, xd0) = ([0.0, 0.0], [1.0, 0.0]);
    unsafe {
        assert_eq!(ig_certify(w, x0.as_ptr(), xd0.as_ptr(), 0.25, 1.0, 1.0, &mut c), IgStatus::Ok);
        ig_wave_free(w);
    }
    // flat: F₁ = 0, F₂ = ∇f/2 with |∇f| = 1, K = 1 for the mollifier;
    // the straight line reaches -ε with unchanged velocity
    let (speed, nf2, k) = (1.0f64, 0.5, 1.0);
    let alpha = 1.0f64.min(1.0 / (speed + k * nf2));
    assert_eq!(c.eps, 0.25);
    assert_eq!((c.norm_f1, c.norm_f2, c.k), (0.0, nf2, k));
    assert!((c.alpha - alpha).abs() < 1e-12, "{c:?}");
    assert_eq!(c.eps0, c.alpha / 2.0);
}

#[test]
fn config_text_builds_a_wave() {
    let toml = CString::new(
        r#"
schema_version = 1
net = "mollifier"
eps = 0.1
[manifold]
name = "hyperbolic-half-plane"
[profile]
name = "gaussian-bump"
amplitude = 1.0
width = 0.5
center = [0.0, 1.0]
[data]
x0 = [0.1, 0.9]
xdot0 = [0.3, 0.2]
"#,
    )
    .unwrap();
    let mut w = ptr::null_mut();
    unsafe {
        assert_eq!(ig_wave_from_config(toml.as_ptr(), &mut w), IgStatus::Ok, "{}", last_error());
        assert_eq!(ig_wave_dim(w), 2);
        ig_wave_free(w);
    }
}

#[test]
fn errors_are_reported_not_raised() {
    let mut w = ptr::null_mut();
    unsafe {
        let bad = CString::new("schema_version = 99").unwrap();
        assert_eq!(ig_wave_from_config(bad.as_ptr(), &mut w), IgStatus::InvalidInput);
        assert!(w.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(ig_wave_from_config(ptr::null(), &mut w), IgStatus::NullPointer);
        assert!(last_error().contains("null"));

        let m = CString::new("torus").unwrap();
        assert_eq!(ig_wave_builtin(m.as_ptr(), m.as_ptr(), m.as_ptr(), &mut w), IgStatus::InvalidInput);

        // a point outside the half-plane
        let hw = builtin("hyperbolic-half-plane", "linear", "mollifier");
        let (x0, xd0) = ([0.0, -1.0], [1.0, 0.0]);
        let mut path = ptr::null_mut();
        let st = ig_integrate(hw, 0.1, x0.as_ptr(), xd0.as_ptr(), 0.0, 0.0, 1.0, 0.0, &mut path);
        assert_eq!(st, IgStatus::Domain, "{}", last_error());
        assert!(path.is_null());

        // ε outside (0, ½]
        let st = ig_integrate(hw, 0.0, [0.0, 1.0].as_ptr(), xd0.as_ptr(), 0.0, 0.0, 1.0, 0.0, &mut path);
        assert_eq!(st, IgStatus::InvalidInput);
        ig_wave_free(hw);

        ig_wave_free(ptr::null_mut());
        ig_path_free(ptr::null_mut());
        assert_eq!(ig_wave_dim(ptr::null()), 0);
    }
}

#[test]
fn truncated_error_buffer_is_terminated() {
    unsafe {
        let mut w = ptr::null_mut();
        ig_wave_from_config(ptr::null(), &mut w);
        let full = ig_last_error_message(ptr::null_mut(), 0);
        let mut buf = [0x7f as c_char; 5];
        assert_eq!(ig_last_error_message(buf.as_mut_ptr(), buf.len()), full);
        assert_eq!(buf[4], 0);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes().len(), 4);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(ig_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_entry_point_and_compiles() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/impulse_geo.h")).unwrap();
    for sym in [
        "ig_last_error_message",
        "ig_version",
        "ig_wave_builtin",
        "ig_wave_from_config",
        "ig_wave_free",
        "ig_wave_dim",
        "ig_integrate",
        "ig_path_free",
        "ig_path_state_at",
        "ig_path_energy_drift",
        "ig_certify",
        "ig_limit_coefficients",
        "typedef struct IgWave IgWave",
        "typedef struct IgPath IgPath",
        "IG_STATUS_OK = 0",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }

    let Ok(cc) = which_cc() else { return };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"impulse_geo.h\"\nint main(void) { IgCertificate c; (void)c; return IG_STATUS_OK; }\n",
    )
    .unwrap();
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
