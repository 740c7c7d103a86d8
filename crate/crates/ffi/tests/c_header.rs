//! Compiles a small C program against the generated header and static library.

use std::path::{Path, PathBuf};
use std::process::Command;

fn profile_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_lists_entry_points() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pnlink.h")).unwrap();
    for name in [
        "pnl_psd_new",
        "pnl_psd_free",
        "pnl_psd_eval",
        "pnl_psd_scale_to_carrier",
        "pnl_psd_apply_multiplier",
        "pnl_psd_integrate_variance",
        "pnl_analytic_variance",
        "pnl_variance_reduction_gamma",
        "pnl_plan_variance",
        "pnl_sweep_if",
        "pnl_synthesize",
        "pnl_results_run_toml",
        "pnl_results_metric",
        "pnl_results_free",
        "pnl_last_error_message",
        "typedef struct PnlPsd PnlPsd",
        "PNL_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib_dir = profile_dir();
    assert!(lib_dir.join("libpnlink_ffi.a").exists(), "static library not built in {}", lib_dir.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(lib_dir.join("libpnlink_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
