//! The binary end to end: headers, metadata and error reporting.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cra-photon"))
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn sweep_and_three_body_headers_are_exact() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["sweep-bound-rt", "--threads", "2", "--config"])
        .arg(configs().join("sweep_lower.toml"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        first_line(&out.path().join("bound_rt_sweep.csv")),
        "eps0,refl_prob,trans_prob,total_prob"
    );

    let status = bin()
        .args(["three-body", "--config"])
        .arg(configs().join("three_body.toml"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        first_line(&out.path().join("three_body.csv")),
        "s,beta,B,residual"
    );
    assert_eq!(
        first_line(&out.path().join("eta_e_sq_s1.csv")),
        "x,eta_e_sq"
    );

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("metadata.json")).unwrap())
            .unwrap();
    let hash = meta["config_sha256"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    for o in meta["outputs"].as_array().unwrap() {
        assert_eq!(o["config_sha256"].as_str().unwrap(), hash);
    }
}

#[test]
fn correlation_header_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "omega0 = 4.0\nhopping = 1.0\ncoupling = 1.0\nomega_tls = 4.0\neps1 = 3.0\neps2 = 5.0\ngrid_n = 16\nx_min = -5.0\nx_max = 5.0\n",
    )
    .unwrap();
    let status = bin()
        .arg("two-photon-corr")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        first_line(&dir.path().join("two_photon_corr.csv")),
        "x1,x2,re_g,im_g,G"
    );
}

#[test]
fn invalid_config_reports_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "omega0 = 4.0\nhopping = 1.0\ncoupling = 1.0\nomega_tls = 4.0\ngrid_n = 8\neps0 = 4.5\n",
    )
    .unwrap();
    let out = bin()
        .arg("breakup-map")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("grid_n"), "{err}");
}

#[test]
fn missing_output_dir_is_an_error() {
    let out = bin()
        .arg("bound-states")
        .arg("--config")
        .arg(configs().join("bound_states.toml"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("output_dir"));
}
