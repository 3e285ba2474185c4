use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn simulate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

/// Runs a config into `out` and returns (exit code, run directory).
fn run(config: &Path, out: &Path, extra: &[&str]) -> (i32, PathBuf) {
    let mut args = vec!["run", config.to_str().unwrap(), "-o", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = simulate(&args);
    let code = o.status.code().unwrap();
    let root = PathBuf::from(String::from_utf8(o.stdout).unwrap().trim());
    (code, root)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn presets_lists_reference_values() {
    let o = simulate(&["presets", "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["paper-2016"].as_array().unwrap();
    let value = |name: &str| rows.iter().find(|r| r["name"] == name).unwrap()["value"].as_f64().unwrap();
    assert_eq!(value("n_spins"), 3.6e13);
    assert_eq!(value("gamma_hz"), 18e3);
    assert_eq!(value("kappa_hz (kappa_int + kappa_ext)"), 60e3);
    assert!(rows.iter().all(|r| !r["provenance"].as_str().unwrap().is_empty()));

    let table = simulate(&["presets"]);
    assert!(table.status.success());
    assert!(String::from_utf8(table.stdout).unwrap().contains("3.6"));
}

#[test]
fn config_errors_exit_with_two_and_line_context() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_config(tmp.path(), "bad.toml", "kind = \"fid\"\n[params]\npreset = \"paper-2016\"\n[experiment\n");
    for cmd in ["validate", "run"] {
        let o = simulate(&[cmd, bad.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert!(err.contains("line 4"), "{err}");
    }
    let unknown = write_config(
        tmp.path(),
        "unknown.toml",
        "kind = \"fid\"\n[params]\npreset = \"paper-2016\"\n[experiment]\ntheta_deg = 90\npulse_ns = 3\n",
    );
    let o = simulate(&["validate", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("pulse_ns"));
    assert_eq!(simulate(&["validate", "/nonexistent/config.toml"]).status.code(), Some(2));
}

#[test]
fn zero_drive_fid_is_degenerate_but_successful() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "zero.toml",
        "kind = \"fid\"\n[params]\npreset = \"paper-2016\"\n[experiment]\ndrive_amplitude_hz = 0\nt_total_s = 5e-6\n",
    );
    let (code, root) = run(&cfg, tmp.path(), &[]);
    assert_eq!(code, 0);
    let summary = json(&root.join("summary.json"));
    assert_eq!(summary["degenerate"], true);
    let csv = fs::read_to_string(root.join("0.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("t_s,"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1001);
    // field and coherence vanish; s_z stays at the ground value -N/2
    for row in rows {
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[1..7].iter().all(|&x| x == 0.0), "{row}");
        assert_eq!(v[7], -1.8e13);
    }
}

#[test]
fn run_layout_manifest_and_latest_pointer() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "fid.toml",
        "kind = \"fid\"\noutput_dir = \"out\"\n[params]\npreset = \"paper-2016\"\n[experiment]\ntheta_deg = 90\n",
    );
    let o = simulate(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let kind_dir = tmp.path().join("out/fid");
    let latest = fs::read_to_string(kind_dir.join("latest")).unwrap();
    let root = kind_dir.join(latest.trim());
    let manifest = json(&root.join("manifest.json"));
    assert_eq!(manifest["kind"], "fid");
    assert!(manifest["failures"].as_array().unwrap().is_empty());
    let names: Vec<&str> = manifest["artifacts"].as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["0.csv", "0.json", "0.fft.csv", "0.fft.json", "summary.json"]);
    for a in manifest["artifacts"].as_array().unwrap() {
        let bytes = fs::read(root.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(a["bytes"].as_u64().unwrap() as usize, bytes.len());
        assert_eq!(a["content_hash"], pseudospin::io::content_hash(&bytes));
    }
    let summary = json(&root.join("summary.json"));
    assert!((summary["tip_angle_deg"].as_f64().unwrap() - 90.0).abs() < 0.05);
    assert!(summary["splitting_hz"].as_f64().unwrap() > 0.0);
}

#[test]
fn payloads_do_not_depend_on_parallelism() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sweep.toml",
        "kind = \"power_sweep\"\n[params]\npreset = \"paper-2016\"\n[experiment]\ntheta_deg = [60, 120, 175]\nt_total_s = 10e-6\n",
    );
    let (c1, a) = run(&cfg, &tmp.path().join("a"), &["-j", "1"]);
    let (c2, b) = run(&cfg, &tmp.path().join("b"), &["-j", "4"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(fs::read(a.join("manifest.json")).unwrap(), fs::read(b.join("manifest.json")).unwrap());
    assert_eq!(fs::read(a.join("2.csv")).unwrap(), fs::read(b.join("2.csv")).unwrap());
}

#[test]
fn power_sweep_reports_phase_flip_across_inversion() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "flip.toml",
        "kind = \"power_sweep\"\n[params]\npreset = \"paper-2016\"\n[experiment]\ntheta_start_deg = 170\ntheta_stop_deg = 190\ntheta_points = 21\ntheta_tol_deg = 0.001\n",
    );
    let (code, root) = run(&cfg, tmp.path(), &[]);
    assert_eq!(code, 0);
    let summary = json(&root.join("summary.json"));
    let jump = &summary["phase_discontinuity"];
    assert_eq!(jump["below_deg"], 179.0);
    assert_eq!(jump["above_deg"], 181.0);
    assert!((jump["phase_difference_rad"].as_f64().unwrap() - PI).abs() < 0.1);
    assert_eq!(summary["points"].as_array().unwrap().len(), 21);
}

#[test]
fn per_run_failures_are_recorded_and_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    // a 2-photon cutoff cannot hold a coherent field with 16 photons
    let cfg = write_config(
        tmp.path(),
        "oracle.toml",
        "kind = \"oracle_compare\"\n[params]\npreset = \"paper-2016\"\nn_spins = 2\ncoupling_hz = 0.159\n[experiment]\nalpha_re = 4\nn_max = 2\nt_total_s = 1\noutput_dt_s = 0.01\ndissipative = false\n",
    );
    let (code, root) = run(&cfg, tmp.path(), &[]);
    assert_eq!(code, 1);
    let manifest = json(&root.join("manifest.json"));
    let failures = manifest["failures"].as_array().unwrap();
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0]["stage"], "oracle");
}

#[test]
fn oracle_compare_matches_mean_field_exchange_time() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "oracle.toml",
        "kind = \"oracle_compare\"\n[params]\npreset = \"paper-2016\"\nn_spins = 8\ncoupling_hz = 0.15915494309189535\nkappa_int_hz = 0\nkappa_ext_hz = 0\ngamma_hz = 0\n[experiment]\ntheta_deg = 0\nalpha_re = 4\nt_total_s = 1\noutput_dt_s = 1e-3\ndissipative = false\n",
    );
    let (code, root) = run(&cfg, tmp.path(), &[]);
    assert_eq!(code, 0);
    let s = json(&root.join("summary.json"));
    let t = &s["first_photon_minimum_s"];
    let (q, m) = (t["oracle"].as_f64().unwrap(), t["semiclassical"].as_f64().unwrap());
    assert!((q / m - 1.0).abs() < 0.1, "{q} vs {m}");
    let header = fs::read_to_string(root.join("1.csv")).unwrap();
    assert!(header.starts_with("t_s,re_a,im_a,n,"));
}

#[test]
fn s11_map_and_delay_fit_produce_headlines() {
    let tmp = tempfile::tempdir().unwrap();
    let map = write_config(
        tmp.path(),
        "map.toml",
        "kind = \"s11_map\"\n[params]\npreset = \"paper-2016\"\n[experiment]\ndetuning_start_hz = -1e6\ndetuning_stop_hz = 1e6\ndetuning_points = 5\nprobe_points = 1001\nprobe_half_span_hz = 1e6\n",
    );
    let (code, root) = run(&map, tmp.path(), &[]);
    assert_eq!(code, 0);
    let s = json(&root.join("summary.json"));
    let sep = s["dip_separation_hz"].as_f64().unwrap();
    let eig = s["polariton_splitting_hz"].as_f64().unwrap();
    assert!((sep - eig).abs() <= 2e3, "{sep} vs {eig}");
    assert_eq!(fs::read_to_string(root.join("0.csv")).unwrap().lines().count(), 5);

    let delay = write_config(
        tmp.path(),
        "delay.toml",
        "kind = \"delay_fit\"\n[params]\npreset = \"paper-2016\"\n[experiment]\ntheta_deg = [150, 160, 170, 175, 177]\ntheta_tol_deg = 0.001\n",
    );
    let (code, root) = run(&delay, tmp.path(), &[]);
    assert_eq!(code, 0);
    let s = json(&root.join("summary.json"));
    assert!(s["fit"]["r_squared"].as_f64().unwrap() > 0.99);
    assert_eq!(s["points"].as_array().unwrap().len(), 5);
}

#[test]
fn n_sweep_fits_resolved_points_and_flags_the_rest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "n.toml",
        "kind = \"n_sweep\"\n[params]\npreset = \"paper-2016\"\n[experiment]\nn_start = 3.6e11\nn_stop = 3.6e13\nn_points = 6\nt_total_s = 20e-6\n",
    );
    let (code, root) = run(&cfg, tmp.path(), &[]);
    let s = json(&root.join("summary.json"));
    let manifest = json(&root.join("manifest.json"));
    let failures = manifest["failures"].as_array().unwrap();
    assert_eq!(code == 0, failures.is_empty());
    let points = s["points"].as_array().unwrap();
    let resolved = points.iter().filter(|p| p["splitting_hz"].is_number()).count();
    assert_eq!(resolved + failures.len(), points.len());
    assert_eq!(s["fit"]["points_used"].as_u64().unwrap() as usize, resolved);
    let exponent = s["fit"]["exponent"].as_f64().unwrap();
    assert!(exponent > 0.3 && exponent < 0.8, "{exponent}");
}

#[test]
fn threads_env_var_must_be_a_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "map.toml",
        "kind = \"s11_map\"\n[params]\npreset = \"paper-2016\"\n[experiment]\ndetuning_start_hz = 0\ndetuning_stop_hz = 0\ndetuning_points = 1\n",
    );
    let o = Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(["run", cfg.to_str().unwrap(), "-o", tmp.path().to_str().unwrap()])
        .env("SIMULATE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("SIMULATE_THREADS"));
}
