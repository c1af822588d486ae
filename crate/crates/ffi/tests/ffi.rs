use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use deepseq::models::{Checkpoint, Model, ModelKind, ModelSpec, SequenceBatch};
use deepseq_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ds_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn c_path(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(ds_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn synth_write_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = c_path(&dir.path().join("panel.csv"));
    let mut panel = ptr::null_mut();
    let mut ceiling = f64::NAN;
    unsafe {
        assert_eq!(
            ds_synth_generate(50, 120, 0.3, -0.1, 0.05, 1, &mut panel, &mut ceiling),
            DsStatus::Ok
        );
        assert_eq!(ds_panel_rows(panel), 6000);
        assert!(ceiling > 0.0 && ceiling < 1.0);
        assert_eq!(ds_panel_write(panel, path.as_ptr()), DsStatus::Ok);
        ds_panel_free(panel);

        let mut loaded = ptr::null_mut();
        assert_eq!(ds_panel_load(path.as_ptr(), &mut loaded), DsStatus::Ok);
        assert_eq!(ds_panel_rows(loaded), 6000);
        assert_eq!(ds_panel_assets(loaded), 50);
        ds_panel_free(loaded);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut panel = ptr::null_mut();
    unsafe {
        assert_eq!(
            ds_synth_generate(10, 13, 0.3, -0.1, 0.05, 1, &mut panel, ptr::null_mut()),
            DsStatus::Config
        );
        assert!(last_error().contains("13"), "{}", last_error());
        let missing = CString::new("/nonexistent/x.csv").unwrap();
        assert_eq!(ds_panel_load(missing.as_ptr(), &mut panel), DsStatus::Data);
        assert!(panel.is_null());
        assert_eq!(
            ds_panel_load(ptr::null(), &mut panel),
            DsStatus::InvalidArgument
        );
        assert_eq!(ds_panel_rows(ptr::null()), 0);
        ds_panel_free(ptr::null_mut());
        ds_model_free(ptr::null_mut());
    }
}

#[test]
fn model_predictions_match_the_library() {
    let mut spec = ModelSpec::new(ModelKind::Gru);
    spec.input_dim = 3;
    spec.seq_len = 4;
    spec.hidden_dim = 5;
    let model = Model::new(spec.clone()).unwrap();
    let params = model.init_params(11);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gru.json");
    Checkpoint::new(spec, "test", &params).save(&path).unwrap();

    let inputs: Vec<f64> = (0..2 * 4 * 3).map(|i| (i as f64 * 0.37).sin()).collect();
    let batch = SequenceBatch::new(2, 4, 3, inputs.clone(), vec![0.0; 2]).unwrap();
    let want = model.predict(&params, &batch).unwrap();

    let mut handle = ptr::null_mut();
    let (mut t, mut f) = (0, 0);
    let mut got = [0.0; 2];
    unsafe {
        assert_eq!(
            ds_model_load(c_path(&path).as_ptr(), &mut handle),
            DsStatus::Ok
        );
        assert_eq!(ds_model_shape(handle, &mut t, &mut f), DsStatus::Ok);
        assert_eq!((t, f), (4, 3));
        assert_eq!(
            ds_model_predict(handle, inputs.as_ptr(), 2, got.as_mut_ptr()),
            DsStatus::Ok
        );
        assert_eq!(
            ds_model_predict(handle, ptr::null(), 2, got.as_mut_ptr()),
            DsStatus::InvalidArgument
        );
        ds_model_free(handle);
    }
    assert_eq!(got.to_vec(), want);
}

#[test]
fn metrics_and_perf_stats() {
    let r = [0.01, -0.02, 0.03];
    let zero = [0.0; 3];
    let (mut r2, mut mse) = (f64::NAN, f64::NAN);
    unsafe {
        assert_eq!(
            ds_metrics_r2_oos(r.as_ptr(), zero.as_ptr(), 3, &mut r2),
            DsStatus::Ok
        );
        assert_eq!(
            ds_metrics_mse(r.as_ptr(), zero.as_ptr(), 3, &mut mse),
            DsStatus::Ok
        );
    }
    assert_eq!(r2, 0.0);
    assert!((mse - (1e-4 + 4e-4 + 9e-4) / 3.0).abs() < 1e-18);

    let alternating: Vec<f64> = (0..12)
        .map(|i| if i % 2 == 0 { 0.01 } else { -0.01 })
        .collect();
    let turnover = [0.5, 0.3];
    let mut out = DsPerfStats {
        annualized_return: 0.0,
        annualized_std: 0.0,
        sharpe: 0.0,
        skewness: 0.0,
        kurtosis: 0.0,
        avg_turnover: 0.0,
        max_drawdown: 0.0,
    };
    unsafe {
        assert_eq!(
            ds_perf_stats(alternating.as_ptr(), 12, turnover.as_ptr(), 2, &mut out),
            DsStatus::Ok
        );
    }
    assert!(out.annualized_return.abs() < 1e-12);
    assert!((out.kurtosis - 1.0).abs() < 1e-12);
    assert!((out.avg_turnover - 40.0).abs() < 1e-12);
    unsafe {
        assert_eq!(
            ds_perf_stats(r.as_ptr(), 1, ptr::null(), 0, &mut out),
            DsStatus::Config
        );
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/deepseq.h")).unwrap();
    let src = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    assert!(header.contains("DS_STATUS_NUMERICAL = 3"));
}

/// Builds and runs a C program against the static library when a C
/// compiler and the archive are present.
#[test]
fn c_program_links_and_runs() {
    let Ok(exe) = std::env::current_exe() else {
        return;
    };
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let archive = profile_dir.join("libdeepseq_ffi.a");
    if !archive.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or {}", archive.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
