use std::ffi::{CStr, CString};
use std::ptr;

use tqb_core::problem::{preset, Model, Params};
use tqb_core::stepper::run;
use tqb_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tqb_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn create(model: &str, overrides: &[(&str, f64)]) -> Result<*mut TqbSimulation, (i32, String)> {
    let model = CString::new(model).unwrap();
    let keys: Vec<CString> = overrides.iter().map(|(k, _)| CString::new(*k).unwrap()).collect();
    let key_ptrs: Vec<_> = keys.iter().map(|k| k.as_ptr()).collect();
    let values: Vec<f64> = overrides.iter().map(|(_, v)| *v).collect();
    let mut out = ptr::null_mut();
    let code = unsafe {
        tqb_simulation_new(
            model.as_ptr(),
            key_ptrs.as_ptr(),
            values.as_ptr(),
            overrides.len(),
            &mut out,
        )
    };
    if code == TQB_OK {
        Ok(out)
    } else {
        assert!(out.is_null());
        Err((code, last_error()))
    }
}

#[test]
fn advance_matches_library_run() {
    let sim = create("brusselator", &[("n", 40.0), ("t_end", 1.0)]).unwrap();
    unsafe {
        assert_eq!(tqb_simulation_dt(sim), 0.01);
        assert_eq!(tqb_simulation_advance_to(sim, 1.0), TQB_OK);
        assert_eq!(tqb_simulation_time(sim), 1.0);
        let len = tqb_simulation_knot_count(sim);
        assert_eq!(len, 41);
        let (mut x, mut u, mut v) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
        assert_eq!(
            tqb_simulation_nodal(sim, x.as_mut_ptr(), u.as_mut_ptr(), v.as_mut_ptr(), len),
            TQB_OK
        );
        let over: Params = [("n".to_string(), 40.0), ("t_end".to_string(), 1.0)].into();
        let p = preset(Model::Brusselator, &over).unwrap();
        let traj = run(&p.setup, &p.solver).unwrap();
        assert_eq!(x, traj.knots);
        assert_eq!(u, traj.last.u);
        assert_eq!(v, traj.last.v);

        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(tqb_simulation_evaluate(sim, x[7], &mut a, &mut b), TQB_OK);
        assert!((a - u[7]).abs() < 1e-12 && (b - v[7]).abs() < 1e-12);
        assert_eq!(tqb_simulation_evaluate(sim, 2.0, &mut a, &mut b), TQB_ERR_CONFIG);
        tqb_simulation_free(sim);
    }
}

#[test]
fn single_steps_advance_the_clock() {
    let sim = create("linear", &[("n", 32.0)]).unwrap();
    unsafe {
        for _ in 0..3 {
            assert_eq!(tqb_simulation_step(sim, 0.01), TQB_OK);
        }
        assert!((tqb_simulation_time(sim) - 0.03).abs() < 1e-15);
        assert_eq!(tqb_simulation_step(sim, -1.0), TQB_ERR_CONFIG);
        assert!(!last_error().is_empty());
        tqb_simulation_free(sim);
    }
}

#[test]
fn configuration_errors_are_reported() {
    let (code, msg) = create("lorenz", &[]).unwrap_err();
    assert_eq!(code, TQB_ERR_CONFIG);
    assert!(msg.contains("lorenz"), "{msg}");
    let (code, msg) = create("schnakenberg", &[("zeta", 1.0)]).unwrap_err();
    assert_eq!(code, TQB_ERR_CONFIG);
    assert!(msg.contains("zeta"), "{msg}");
    let (code, _) = create("linear", &[("n", 3.0)]).unwrap_err();
    assert_eq!(code, TQB_ERR_CONFIG);
}

#[test]
fn null_and_short_buffers() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            tqb_simulation_new(ptr::null(), ptr::null(), ptr::null(), 0, &mut out),
            TQB_ERR_NULL
        );
        assert_eq!(tqb_simulation_step(ptr::null_mut(), 0.1), TQB_ERR_NULL);
        assert!(tqb_simulation_time(ptr::null()).is_nan());
        assert_eq!(tqb_simulation_knot_count(ptr::null()), 0);
        tqb_simulation_free(ptr::null_mut());

        let sim = create("schnakenberg", &[("n", 50.0)]).unwrap();
        let mut u = vec![0.0; 10];
        assert_eq!(
            tqb_simulation_nodal(sim, ptr::null_mut(), u.as_mut_ptr(), ptr::null_mut(), 10),
            TQB_ERR_BUFFER
        );
        let mut u = vec![0.0; 51];
        assert_eq!(
            tqb_simulation_nodal(sim, ptr::null_mut(), u.as_mut_ptr(), ptr::null_mut(), 51),
            TQB_OK
        );
        assert!(last_error().is_empty());
        tqb_simulation_free(sim);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(tqb_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
