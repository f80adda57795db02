use std::ffi::CString;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use valley_codes_ffi::*;

const FIXTURE: &str = r#"{
  "k": 2,
  "n": 4,
  "channel": {"kind": "bdc", "param": 0.1},
  "codewords": ["0000", "1111", "0011", "1100"],
  "delta_measured": null
}"#;

fn fixture(dir: &Path) -> CString {
    let path = dir.join("code.json");
    std::fs::write(&path, FIXTURE).unwrap();
    CString::new(path.to_str().unwrap()).unwrap()
}

fn load(path: &CString) -> *mut VcCode {
    let mut code = ptr::null_mut();
    assert_eq!(unsafe { vc_code_load(path.as_ptr(), &mut code) }, VcStatus::Ok);
    assert!(!code.is_null());
    code
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { vc_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn encode_transmit_decode() {
    let dir = tempfile::tempdir().unwrap();
    let code = load(&fixture(dir.path()));
    unsafe {
        assert_eq!(vc_code_message_len(code), 2);
        assert_eq!(vc_code_block_len(code), 4);
        for m in [[0u8, 0], [1, 0], [0, 1], [1, 1]] {
            let mut word = [9u8; 4];
            let mut len = 0;
            assert_eq!(vc_code_encode(code, m.as_ptr(), 2, word.as_mut_ptr(), 4, &mut len), VcStatus::Ok);
            assert_eq!(len, 4);
            let ch = VcChannel { kind: VcChannelKind::Bdc, param: 1e-12 };
            let mut y = [9u8; 4];
            assert_eq!(vc_transmit(ch, 1, 0, word.as_ptr(), 4, y.as_mut_ptr(), 4, &mut len), VcStatus::Ok);
            let mut back = [9u8; 2];
            assert_eq!(vc_code_decode(code, y.as_ptr(), len, back.as_mut_ptr(), 2, &mut len), VcStatus::Ok);
            assert_eq!(back, m);
        }
        vc_code_free(code);
    }
}

#[test]
fn error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture(dir.path());
    let code = load(&path);
    unsafe {
        let mut len = 0;
        let mut out = [0u8; 8];
        let bad = [0u8, 3];
        assert_eq!(vc_code_encode(code, bad.as_ptr(), 2, out.as_mut_ptr(), 8, &mut len), VcStatus::InvalidArgument);
        assert!(last_error().contains("not a bit"));
        let short = [0u8];
        assert_eq!(vc_code_encode(code, short.as_ptr(), 1, out.as_mut_ptr(), 8, &mut len), VcStatus::InvalidArgument);
        let m = [1u8, 1];
        assert_eq!(vc_code_encode(code, m.as_ptr(), 2, out.as_mut_ptr(), 2, &mut len), VcStatus::BufferTooSmall);
        assert_eq!(len, 4);
        assert_eq!(vc_code_encode(ptr::null(), m.as_ptr(), 2, out.as_mut_ptr(), 8, &mut len), VcStatus::NullPointer);
        let long = [0u8; 5];
        assert_eq!(vc_code_decode(code, long.as_ptr(), 5, out.as_mut_ptr(), 8, &mut len), VcStatus::DecodeFailure);
        assert_eq!(vc_code_message_len(ptr::null()), 0);

        let ch = VcChannel { kind: VcChannelKind::Prc, param: 99.0 };
        assert_eq!(vc_transmit(ch, 0, 0, m.as_ptr(), 2, out.as_mut_ptr(), 8, &mut len), VcStatus::InvalidArgument);

        let missing = CString::new(dir.path().join("missing.json").to_str().unwrap()).unwrap();
        let mut other = ptr::null_mut();
        assert_eq!(vc_code_load(missing.as_ptr(), &mut other), VcStatus::Io);
        assert!(other.is_null());
        vc_code_free(code);
        vc_code_free(ptr::null_mut());
    }
}

#[test]
fn transmit_reports_needed_capacity_deterministically() {
    let x = [1u8; 50];
    let ch = VcChannel { kind: VcChannelKind::Prc, param: 3.0 };
    let mut len = 0;
    unsafe {
        assert_eq!(vc_transmit(ch, 5, 2, x.as_ptr(), 50, ptr::null_mut(), 0, &mut len), VcStatus::BufferTooSmall);
        let mut out = vec![0u8; len];
        let mut len2 = 0;
        assert_eq!(vc_transmit(ch, 5, 2, x.as_ptr(), 50, out.as_mut_ptr(), len, &mut len2), VcStatus::Ok);
        assert_eq!(len, len2);
        assert!(out.iter().all(|&b| b == 1));
    }
}

#[test]
fn dfp_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let code = load(&fixture(dir.path()));
    let mut est = VcDfpEstimate::default();
    let ch = VcChannel { kind: VcChannelKind::Bdc, param: 0.1 };
    unsafe {
        assert_eq!(vc_code_dfp(code, ch, 2000, 3, &mut est), VcStatus::Ok);
        assert!(est.lower <= est.estimate && est.estimate <= est.upper);
        assert!(est.trials > 0 && est.failures <= est.trials);
        assert_eq!(vc_code_dfp(code, ch, 0, 3, &mut est), VcStatus::InvalidArgument);
        vc_code_free(code);
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libvalley_codes_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let path = dir.path().join("code.json");
    std::fs::write(&path, FIXTURE).unwrap();
    let out = Command::new(&exe).arg(&path).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
