use std::ffi::{CStr, CString};
use std::ptr;

use sandpile_ffi::*;

fn cs(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last() -> String {
    unsafe { CStr::from_ptr(sp_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn stabilize_line_of_three() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(sp_model_builtin(cs("von-neumann").as_ptr(), 1, 1, &mut m), SpStatus::Ok);
        assert_eq!(sp_model_threshold(m), 2);
        assert_eq!(sp_model_dim(m), 1);
        assert!(sp_model_is_complete(m));

        let mut c = ptr::null_mut();
        let text = cs("sandpile-config v1 d=1\n-1 1\n0 3\n1 1\n");
        assert_eq!(sp_config_parse(text.as_ptr(), &mut c), SpStatus::Ok);
        assert_eq!(sp_config_total(c), 5);

        let mut s = ptr::null_mut();
        let mut t = 0u64;
        assert_eq!(sp_stabilize(m, c, SpPolicy::Parallel, 0, &mut s, &mut t), SpStatus::Ok);
        let mut s2 = ptr::null_mut();
        let mut t2 = 0u64;
        assert_eq!(sp_stabilize(m, c, SpPolicy::SequentialLexMin, 0, &mut s2, &mut t2), SpStatus::Ok);
        // 0 fires twice, then each of ±1 once
        assert_eq!(t, 4);
        assert_eq!(t, t2);
        for x in -4..=4i64 {
            assert_eq!(sp_config_get(s, &x, 1), sp_config_get(s2, &x, 1));
        }
        sp_config_free(s2);
        assert_eq!(sp_config_total(s), 5);
        for x in -3..=3i64 {
            assert!(sp_config_get(s, &x, 1) < 2);
        }
        let mut out = ptr::null_mut();
        assert_eq!(sp_config_to_string(s, &mut out), SpStatus::Ok);
        assert!(CStr::from_ptr(out).to_str().unwrap().starts_with("sandpile-config v1 d=1"));
        sp_string_free(out);

        let mut answer = false;
        for (x, want) in [(1i64, true), (2, false)] {
            assert_eq!(sp_predict(m, c, &x, ptr::null(), &mut answer), SpStatus::Ok);
            assert_eq!(answer, want);
        }
        // a grain at -1 on 1 1 1 runs right until it leaves cell 2 untouched
        let mut stable = ptr::null_mut();
        let text = cs("sandpile-config v1 d=1\n-1 1\n0 1\n1 1\n");
        assert_eq!(sp_config_parse(text.as_ptr(), &mut stable), SpStatus::Ok);
        for (x, want) in [(0i64, true), (1, true), (2, false)] {
            assert_eq!(sp_predict_first_col_1d(m, stable, x, true, &mut answer), SpStatus::Ok);
            assert_eq!(answer, want);
            assert_eq!(sp_predict_first_col_1d(m, stable, x, false, &mut answer), SpStatus::Ok);
            assert_eq!(answer, want);
        }
        assert_eq!(sp_predict_first_col_1d(m, c, 0, true, &mut answer), SpStatus::InvalidInstance);
        sp_config_free(stable);

        sp_config_free(s);
        sp_config_free(c);
        sp_model_free(m);
    }
}

#[test]
fn build_by_hand_and_add_grain() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(sp_model_builtin(cs("von-neumann").as_ptr(), 2, 1, &mut m), SpStatus::Ok);
        let c = sp_config_new(2);
        assert_eq!(sp_config_set(c, [0i64, 0].as_ptr(), 2, 3), SpStatus::Ok);
        assert_eq!(sp_config_get(c, [0i64, 0].as_ptr(), 2), 3);
        let mut answer = true;
        let (x, y) = ([1i64, 0], [0i64, 0]);
        assert_eq!(sp_predict(m, c, x.as_ptr(), y.as_ptr(), &mut answer), SpStatus::Ok);
        assert!(!answer);
        assert_eq!(sp_config_set(c, [0i64, 0].as_ptr(), 3, 1), SpStatus::DimensionMismatch);
        sp_config_free(c);
        sp_model_free(m);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut m = ptr::null_mut();
        let bad = cs("sandpile-model v1 d=2\n1 0 0\n");
        let st = sp_model_parse(bad.as_ptr(), &mut m);
        assert_ne!(st, SpStatus::Ok);
        assert!(m.is_null());
        assert!(!last().is_empty());

        let mut c = ptr::null_mut();
        assert_eq!(sp_config_parse(cs("nonsense").as_ptr(), &mut c), SpStatus::Parse);
        assert!(!last().is_empty());

        assert_eq!(sp_config_parse(ptr::null(), &mut c), SpStatus::NullPointer);
        assert_eq!(sp_stabilize(ptr::null(), ptr::null(), SpPolicy::Parallel, 0, &mut c, ptr::null_mut()), SpStatus::NullPointer);

        let mut m = ptr::null_mut();
        assert_eq!(sp_model_builtin(cs("no-such").as_ptr(), 2, 1, &mut m), SpStatus::InvalidModel);
        assert!(last().contains("no-such"));
        sp_model_free(ptr::null_mut());
        sp_config_free(ptr::null_mut());
        sp_circuit_free(ptr::null_mut());
        sp_string_free(ptr::null_mut());
    }
}

#[test]
fn circuit_compiles_and_runs() {
    let text = "circuit v1\n\
        a const1 0 0\nb const0 0 1\nc const1 0 2\n\
        ab and 1 0 a b\ncw wire 1 1 c\n\
        out or 2 0 ab cw\n\
        output out\n";
    unsafe {
        let mut ci = ptr::null_mut();
        assert_eq!(sp_circuit_parse(cs(text).as_ptr(), &mut ci), SpStatus::Ok);
        let mut direct = false;
        assert_eq!(sp_circuit_eval(ci, &mut direct), SpStatus::Ok);
        assert!(direct);
        let mut m = ptr::null_mut();
        assert_eq!(sp_model_builtin(cs("von-neumann").as_ptr(), 3, 1, &mut m), SpStatus::Ok);
        let mut ran = false;
        let mut conf = ptr::null_mut();
        assert_eq!(sp_circuit_run(ci, m, &mut ran, &mut conf), SpStatus::Ok);
        assert_eq!(ran, direct);
        assert!(sp_config_total(conf) > 0);
        sp_config_free(conf);

        let mut flat = ptr::null_mut();
        assert_eq!(sp_model_builtin(cs("von-neumann").as_ptr(), 2, 1, &mut flat), SpStatus::Ok);
        assert_ne!(sp_circuit_run(ci, flat, &mut ran, ptr::null_mut()), SpStatus::Ok);
        sp_model_free(flat);
        sp_model_free(m);
        sp_circuit_free(ci);
    }
}

#[test]
fn header_is_current() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/sandpile.h")).unwrap();
    for f in ["sp_stabilize", "sp_predict", "sp_circuit_run", "sp_last_error", "SP_STATUS_WATCHDOG"] {
        assert!(h.contains(f), "{f} missing from header");
    }
}
