use std::path::Path;
use std::process::{Command, Output};

use mazer_core::table::{from_csv, from_json, Table};

fn mazer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mazer"))
        .args(args)
        .output()
        .expect("spawn mazer")
}

fn ok_csv(args: &[&str]) -> Table {
    let out = mazer(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    from_csv(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

#[test]
fn trivial_emission_sweep_at_zero_length() {
    let t = ok_csv(&["emission", "--kappa-l", "0", "--from", "0", "--to", "1e-300", "--steps", "2"]);
    assert_eq!(t.rows.len(), 2);
    for col in ["p_one", "p_two", "jc_p_one", "jc_p_two"] {
        assert!(t.column(col).unwrap().iter().all(|&x| x < 1e-28), "{col}");
    }
}

#[test]
fn jc_point_matches_quantized_for_fast_atoms() {
    let t = ok_csv(&["jc", "--k-ratio", "100", "--kappa-l", "300"]);
    let row = &t.rows[0];
    assert_eq!(row[0], 1.5);
    assert!((row[1] - row[3]).abs() < 2e-2 && (row[2] - row[4]).abs() < 2e-2, "{row:?}");
}

#[test]
fn units_for_rubidium() {
    let t = ok_csv(&["units"]);
    let l = t.column("cavity_length_m").unwrap()[0];
    let temp = t.column("temperature_k").unwrap()[0];
    assert!((l / 155e-6 - 1.0).abs() < 0.03);
    assert!((1e-8..1e-7).contains(&temp));
    let t = ok_csv(&["units", "--k-ratio", "0"]);
    assert_eq!(t.column("temperature_k").unwrap()[0], 0.0);
}

#[test]
fn steady_json_carries_moments_and_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let out = mazer(&[
        "steady",
        "--g-ratio",
        "1",
        "--grid",
        "64x64",
        "--method",
        "direct",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["mean1", "mean2", "var1_norm", "var2_norm"] {
        assert!(t.summary.contains_key(key), "{key}");
    }
    let c = t.convergence.unwrap();
    assert!(c.accepted);
    assert_eq!(t.config["grid"], "64x64");
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["emission", "--k-ratio", "1.1", "--from", "0", "--to", "50", "--steps", "101"];
    assert_eq!(mazer(&args).stdout, mazer(&args).stdout);
    let args = ["steady", "--grid", "32x32", "--r-over-c", "5", "--method", "rk4", "--format", "json"];
    let a = mazer(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, mazer(&args).stdout);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# small grid\nk-ratio = 100\nkappa-l = 1\nsteps = 3\n").unwrap();
    let c = cfg.to_str().unwrap();
    let t = ok_csv(&["--config", c, "emission", "--from", "0", "--to", "10"]);
    assert_eq!(t.config["k_ratio"], "100.0");
    assert_eq!(t.rows.len(), 3);
    let t = ok_csv(&["--config", c, "emission", "--from", "0", "--to", "10", "--k-ratio", "2"]);
    assert_eq!(t.config["k_ratio"], "2.0");
}

#[test]
fn truncated_grid_is_rejected_with_nonzero_exit() {
    let out = mazer(&["steady", "--grid", "16x16", "--method", "direct"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid"));
}

#[test]
fn non_convergence_exits_nonzero() {
    let out = mazer(&["steady", "--grid", "64x64", "--t-max", "0.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("converge"));
}

#[test]
fn bad_input_exits_nonzero() {
    for args in [
        &["emission", "--from", "5", "--to", "1"][..],
        &["steady", "--grid", "1x100"],
        &["jc", "--k-ratio", "-1"],
        &["preset", "fig9"],
        &["--config", "/nonexistent/mazer.conf", "units"],
    ] {
        assert!(!mazer(args).status.success(), "{args:?}");
    }
}

#[test]
fn twolevel_oracle_agrees() {
    for nb in ["0", "1"] {
        let out = mazer(&["oracle-twolevel", "--grid", "64x64", "--nb", nb, "--method", "direct"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn emission_preset_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3a.csv");
    let out = mazer(&["preset", "fig3a", "--steps", "11", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = from_csv(&std::fs::read_to_string(Path::new(&path)).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 11);
    assert!(t.columns.iter().any(|c| c == "p_one_twolevel"));
}
