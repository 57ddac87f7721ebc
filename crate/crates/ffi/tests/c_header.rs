//! Builds and runs a C program against the generated header and static library.

use std::path::{Path, PathBuf};
use std::process::Command;

/// `cargo test` only builds the rlib, so the static library is built here in
/// its own target directory (the outer build directory is locked).
fn static_lib(manifest: &Path) -> PathBuf {
    let target = manifest.join("../../target/c-abi-test");
    let status = Command::new(env!("CARGO"))
        .args(["build", "--offline", "--lib", "-p", "shubin-ffi", "--target-dir"])
        .arg(&target)
        .current_dir(manifest)
        .status()
        .expect("run cargo");
    assert!(status.success(), "building the static library failed");
    target.join("debug/libshubin_ffi.a")
}

#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = static_lib(&manifest);
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "invalid_argument ok");
}
