use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tls_fewcycle::analytic::f_analytic;
use tls_fewcycle::numeric::{integrate_final, IntegratorConfig};
use tls_fewcycle::{PulseSpec, TlsParams};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tls-fewcycle")).args(args).output().expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_schema_and_initial_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let o = bin(&[
        "simulate",
        "--shape",
        "square",
        "--detuning",
        "0.3",
        "--field",
        "0.05",
        "--cep",
        "0",
        "--cycles",
        "2",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header.join(","), "t,re_c,im_c,re_d,im_d,abs_c_sq,w,norm");
    assert_eq!(rows[0][col(&header, "w")], -1.0);
    assert_eq!(rows[0][col(&header, "norm")], 1.0);
    assert_eq!(rows.len(), 4001);

    let side: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sim.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(side["command"], "simulate");
    assert_eq!(side["params"]["detuning"], 0.3);
    assert_eq!(side["params"]["integrator"]["steps_per_cycle"], 2000);
    assert!(side["wall_clock_s"].is_number());
    assert_eq!(side["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn simulate_zero_field_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z.csv");
    assert_eq!(bin(&["simulate", "--field", "0", "--out", path_str(&out)]).status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    let i = col(&header, "abs_c_sq");
    assert!(rows.iter().all(|r| r[i] == 0.0));
}

#[test]
fn simulate_final_row_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cep_case.csv");
    let o = bin(&["simulate", "--detuning", "0.366", "--field", "0.181", "--cep", "0.25pi", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    let w = rows.last().unwrap()[col(&header, "w")];
    let p = PulseSpec::square(0.181, std::f64::consts::FRAC_PI_4, 2.0).unwrap();
    let tls = TlsParams::from_detuning(1.0, 0.366).unwrap();
    let fs = integrate_final(&p, &tls, &IntegratorConfig::default()).unwrap();
    assert!((w - fs.inversion).abs() < 1e-12);
}

#[test]
fn analytic_observables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wf.csv");
    let o = bin(&["analytic", "--observable", "wf", "--cep", "1.5707963", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    assert_eq!(header.join(","), "cep,w_f,delta_w,q,theta_f_sq,w_f_linear,w_f_exact");
    assert!((rows[0][1] + 1.0).abs() < 1e-12);

    let out = dir.path().join("q.csv");
    let o = bin(&["analytic", "--observable", "q", "--detuning", "0.3333333", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    assert_eq!(header.join(","), "detuning_ratio,field_ratio,cycles,q");
    assert!(rows[0][3].abs() < 1e-9);

    let out = dir.path().join("wf_grid.csv");
    assert_eq!(
        bin(&["analytic", "--observable", "wf", "--phi-range", "0:pi:5", "--out", path_str(&out)]).status.code(),
        Some(0)
    );
    let (_, rows) = read_csv(&out);
    assert_eq!(rows.len(), 5);
    assert!((rows[0][1] - rows[4][1]).abs() < 1e-14);

    let out = dir.path().join("theta.csv");
    assert_eq!(bin(&["analytic", "--observable", "theta", "--out", path_str(&out)]).status.code(), Some(0));
    assert_eq!(read_csv(&out).0.join(","), "t,re_theta,im_theta,abs_theta");
}

#[test]
fn analytic_f_trace_is_exact_pass_through() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let o = bin(&[
        "analytic",
        "--observable",
        "f_trace",
        "--detuning",
        "0.6",
        "--field",
        "0.1",
        "--steps-per-cycle",
        "200",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    assert_eq!(header.join(","), "t,re_f,im_f,abs_f");
    assert_eq!(rows.len(), 401);
    let p = PulseSpec::square(0.1, 0.0, 2.0).unwrap();
    let tls = TlsParams::from_detuning(1.0, 0.6).unwrap();
    for r in &rows {
        let f = f_analytic(r[0], &p, &tls).unwrap().value;
        assert!((f.re - r[1]).abs() <= 1e-15 && (f.im - r[2]).abs() <= 1e-15);
    }
}

#[test]
fn analytic_refuses_other_shapes() {
    let o = bin(&["analytic", "--shape", "tophat", "--observable", "wf"]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "shape_mismatch");
    assert!(err["message"].as_str().unwrap().contains("closed form derived for square pulse only"));
}

#[test]
fn usage_errors_are_json_with_exit_two() {
    for args in [
        &["simulate", "--cycles"][..],
        &["simulate", "--shape", "triangle"],
        &["simulate", "--cep", "halfpi"],
        &["frobnicate"],
        &["scan", "--x-range", "0:1"],
    ] {
        let o = bin(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(&o.stderr).unwrap();
        assert!(err["error"].is_string(), "{args:?}");
    }
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
}

#[test]
fn integration_failure_exits_three() {
    let o = bin(&["simulate", "--field", "40", "--steps-per-cycle", "100"]);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "norm_drift");
}

#[test]
fn map_zero_field_column_and_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map.csv");
    let o = bin(&["scan", "--x-range", "0:0.05:2", "--y-range", "0.3:0.6:2", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    assert_eq!(header[0], "detuning_ratio\\field_ratio");
    assert_eq!(header.len(), 3);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[1] == 0.0));
    assert!(rows.iter().all(|r| r[2] > 0.0 && r[2] < 1e-2));
}

#[test]
fn default_map_grid_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map.csv");
    let o = bin(&["scan", "--steps-per-cycle", "200", "--parallel", "4", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    assert_eq!(header.len(), 41);
    assert_eq!(rows.len(), 40);
}

#[test]
fn detuning_scan_weak_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("detuning.csv");
    let o = bin(&["scan", "--kind", "detuning", "--field", "0.05", "--cep", "0", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    assert_eq!(header.join(","), "detuning_ratio,analytic_abs_c_sq,numeric_abs_c_sq,difference");
    assert_eq!(rows.len(), 41);
    assert!(rows.iter().all(|r| r[3] < 1e-2));
}

#[test]
fn partial_failures_marked_nan_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad.csv");
    let o = bin(&["scan", "--x-range", "0.05:0.05:1", "--y-range", "0.5:1.5:3", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(4));
    let (_, rows) = read_csv(&out);
    assert!(rows[0][1].is_finite());
    assert!(rows[1][1].is_nan() && rows[2][1].is_nan());
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["failed"], 2);
}

#[test]
fn sweeps_schema_and_notes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cep.csv");
    let o = bin(&["cep-sweep", "--phi-range", "0:pi:3", "--steps-per-cycle", "200", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    assert_eq!(header.join(","), "cep,analytic_delta_w,numeric_delta_w,difference");
    assert_eq!(rows.len(), 3);
    assert!(rows[1][1] < rows[0][1]);

    let out = dir.path().join("gauss.json");
    let o = bin(&[
        "field-sweep",
        "--shape",
        "gaussian",
        "--cycles",
        "1.5",
        "--x-range",
        "0.1:0.5:3",
        "--format",
        "json",
        "--steps-per-cycle",
        "200",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["columns"], serde_json::json!(["cep", "field_ratio", "analytic_w_f", "numeric_w_f", "difference"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0][2].is_null() && rows[0][3].is_number());
    let notes = v["manifest"]["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("gaussian detuning")));
    assert!(v["manifest"].get("wall_clock_s").is_none());
}

#[test]
fn config_file_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"shape": "tophat", "detuning": 0.5, "field": 0.2, "cep": "0.5pi", "steps_per_cycle": 300}"#)
        .unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(bin(&["simulate", "--config", path_str(&cfg), "--out", path_str(&a)]).status.code(), Some(0));

    // rebuild a config from the resolved manifest and run again
    let side: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    let p = &side["params"];
    let again = serde_json::json!({
        "shape": p["shape"], "detuning": p["detuning"], "field": p["field"], "cep": p["cep"],
        "cycles": p["cycles"], "steps_per_cycle": p["integrator"]["steps_per_cycle"],
    });
    let cfg2 = dir.path().join("again.json");
    fs::write(&cfg2, again.to_string()).unwrap();
    assert_eq!(bin(&["simulate", "--config", path_str(&cfg2), "--out", path_str(&b)]).status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    // flags override the file
    let c = dir.path().join("c.csv");
    assert_eq!(
        bin(&["simulate", "--config", path_str(&cfg), "--field", "0", "--out", path_str(&c)]).status.code(),
        Some(0)
    );
    let (header, rows) = read_csv(&c);
    assert!(rows.iter().all(|r| r[col(&header, "abs_c_sq")] == 0.0));
}

#[test]
fn stdout_output_without_sidecar() {
    let o = bin(&["analytic", "--observable", "q"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("detuning_ratio,field_ratio,cycles,q\n"));
}
