use std::path::PathBuf;
use std::process::{Command, Output};

fn orbitset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitset")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("orbitset-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Rows of an orbit CSV as `(j, [re1, im1, re2, im2], bdist)`.
fn orbit_rows(csv: &str) -> Vec<(i64, [f64; 4], f64)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("j,re1,im1,re2,im2,bdist"));
    lines
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            assert_eq!(v.len(), 6, "{l}");
            let f = |k: usize| v[k].parse::<f64>().unwrap();
            (v[0].parse().unwrap(), [f(1), f(2), f(3), f(4)], f(5))
        })
        .collect()
}

fn dist(p: [f64; 4], q: [f64; 4]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

fn json(s: &str) -> serde_json::Value {
    serde_json::from_str(s.trim()).unwrap()
}

#[test]
fn hyperbolic_orbit_reaches_minus_one() {
    let o = orbitset(&["orbit", "--scenario", "ex11", "--from", "0,0", "--j", "0:40"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = orbit_rows(&stdout(&o));
    assert_eq!(rows.len(), 41);
    let (j, p, bdist) = *rows.last().unwrap();
    assert_eq!(j, 40);
    assert!(bdist < 1e-2);
    assert!(dist(p, [-1.0, 0.0, 0.0, 0.0]) < 1e-3);
    assert!(stderr(&o).starts_with("forward limit"));
}

#[test]
fn identity_orbit_is_constant() {
    let o = orbitset(&["orbit", "--map", "identity", "--from", "0.1,0", "--j", "0:5"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = orbit_rows(&stdout(&o));
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.1 == [0.1, 0.0, 0.0, 0.0] && r.2 == rows[0].2));
    let strict = orbitset(&["orbit", "--map", "identity", "--from", "0.1,0", "--j", "0:5", "--expect-limit"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn parabolic_orbit_both_tails() {
    let o = orbitset(&["orbit", "--scenario", "ex12", "--from", "0,0", "--j", "-1000:1000"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = orbit_rows(&stdout(&o));
    assert_eq!(rows.len(), 2001);
    for r in [rows[0], rows[2000]] {
        assert!(dist(r.1, [-1.0, 0.0, 0.0, 0.0]) < 1e-2, "{r:?}");
    }
    let err = stderr(&o);
    assert!(err.contains("forward limit") && err.contains("backward limit"));
}

#[test]
fn convergence_flag_sets_exit_code() {
    let loose = ["orbit", "--scenario", "ex11", "--from", "0,0", "--j", "-60:60", "--tol", "1e-3", "--expect-limit"];
    assert_eq!(orbitset(&loose).status.code(), Some(0));
    let tight = ["orbit", "--scenario", "ex11", "--from", "0,0", "--j", "0:20", "--expect-limit"];
    assert_eq!(orbitset(&tight).status.code(), Some(1));
}

#[test]
fn orbit_json_carries_entries_and_limits() {
    let o = orbitset(&["orbit", "--scenario", "ex11", "--from", "0,0", "--j", "-60:60", "--tol", "1e-3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&stdout(&o));
    assert_eq!(v["entries"].as_array().unwrap().len(), 121);
    assert_eq!(v["converged"], true);
    assert!(v["limit"].is_object() && v["backward_limit"].is_object());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["orbit", "--scenario", "ex13", "--from", "0,0"],
        vec!["orbit", "--scenario", "ex11"],
        vec!["orbit", "--from", "0,0"],
        vec!["orbit", "--scenario", "ex11", "--from", "2,0"],
        vec!["orbit", "--scenario", "ex11", "--from", "0,0", "--j", "5:1"],
        vec!["orbit", "--scenario", "ex11", "--from", "0,0,0"],
        vec!["saccum", "--scenario", "ex11", "--scales", "0.5"],
        vec!["saccum", "--scenario", "ex11", "--threshold", "-1"],
        vec!["dimension"],
        vec!["dimension", "--input", "/nonexistent/cloud.csv"],
        vec!["levi", "--domain", "torus"],
        vec!["levi", "--from", "0.5,0"],
        vec!["cayley", "--from", "-1,0"],
        vec!["frobnicate"],
    ] {
        let o = orbitset(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn saccum_cluster_counts() {
    for (scenario, want) in [("ex11", 2), ("ex12", 1)] {
        let o = orbitset(&["saccum", "--scenario", scenario]);
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("cluster,re1,im1,re2,im2,count,radius"));
        let rows: Vec<&str> = lines.by_ref().take_while(|l| !l.is_empty()).collect();
        assert_eq!(rows.len(), want, "{scenario}");
        let dim = json(lines.next().unwrap());
        assert!(dim["slope"].is_number());
    }
}

#[test]
fn saccum_ex23_dimension() {
    let o = orbitset(&["saccum", "--scenario", "ex23", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&stdout(&o));
    let slope = v["dimension"]["slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() <= 0.3, "{slope}");
    assert_eq!(v["scenario"], "ex23");
}

#[test]
fn empty_accumulation_exits_one() {
    let o = orbitset(&["saccum", "--scenario", "ex11", "--threshold", "1e-12"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no accumulation"));
}

#[test]
fn runs_are_byte_identical() {
    let cloud_a = tmp("a.csv");
    let cloud_b = tmp("b.csv");
    let run = |path: &PathBuf| {
        orbitset(&["saccum", "--scenario", "ex24", "--samples", "20000", "--seed", "7", "--out", path.to_str().unwrap()])
    };
    let (a, b) = (run(&cloud_a), run(&cloud_b));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(std::fs::read(&cloud_a).unwrap(), std::fs::read(&cloud_b).unwrap());
    let other = orbitset(&["saccum", "--scenario", "ex24", "--samples", "20000", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
    let levi = || orbitset(&["levi", "--domain", "ex11", "--samples", "3", "--seed", "2"]).stdout;
    assert_eq!(levi(), levi());
}

#[test]
fn dimension_reads_both_cloud_formats() {
    let csv = tmp("cloud.csv");
    let js = tmp("cloud.json");
    for (path, format) in [(&csv, "csv"), (&js, "json")] {
        let o = orbitset(&["saccum", "--scenario", "ex21", "--format", format, "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = orbitset(&["dimension", "--input", csv.to_str().unwrap(), "--scales", "3:7"]);
    let b = orbitset(&["dimension", "--input", js.to_str().unwrap(), "--scales", "3:7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&stdout(&a));
    assert_eq!(v["scales"].as_array().unwrap().len(), 5);
    assert_eq!(v["slope"].as_f64(), Some(0.0));
}

#[test]
fn levi_prints_one_json_line_per_point() {
    let o = orbitset(&["levi", "--samples", "4", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(json).collect();
    assert_eq!(lines.len(), 4);
    for v in &lines {
        assert_eq!(v["class"], "strongly_pseudoconvex");
        assert!((v["levi_value"].as_f64().unwrap() - 1.0).abs() < 1e-4);
        assert_eq!(v["point"].as_array().unwrap().len(), 4);
    }
    let o = orbitset(&["levi", "--domain", "bidisc", "--from", "1,0,0,0"]);
    assert_eq!(json(&stdout(&o))["class"], "levi_degenerate");
    let o = orbitset(&["levi", "--domain", "bidisc", "--from", "1,0,1,0"]);
    let v = json(&stdout(&o));
    assert_eq!(v["class"], "non_smooth");
    assert!(v["levi_value"].is_null());
}

#[test]
fn cayley_round_trip() {
    let fwd = json(&stdout(&orbitset(&["cayley", "--from", "0.3,0.1,-0.2,0.4"])));
    assert_eq!(fwd["in_domain"], true);
    let w: Vec<String> = ["w1", "w2"]
        .iter()
        .flat_map(|k| fwd[*k].as_array().unwrap().iter().map(|x| x.to_string()).collect::<Vec<_>>())
        .collect();
    let back = json(&stdout(&orbitset(&["cayley", "--inverse", "--from", &w.join(",")])));
    let z: Vec<f64> = ["z1", "z2"].iter().flat_map(|k| back[*k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap())).collect();
    assert!(dist([z[0], z[1], z[2], z[3]], [0.3, 0.1, -0.2, 0.4]) < 1e-12);
}

#[test]
fn verify_paper_passes_and_reports_tampering() {
    let o = orbitset(&["verify-paper"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let table = stdout(&o);
    assert!(table.trim_end().ends_with("overall: pass"));

    let j = orbitset(&["verify-paper", "--json"]);
    let v = json(&stdout(&j));
    assert_eq!(v["overall"], true);
    let checks = v["checks"].as_array().unwrap();
    // one table row per JSON check, same names and verdicts
    let rows: Vec<&str> = table.lines().skip(1).filter(|l| !l.starts_with("overall")).collect();
    assert_eq!(rows.len(), checks.len());
    for (row, check) in rows.iter().zip(checks) {
        let mut cols = row.split_whitespace();
        assert_eq!(cols.next(), check["name"].as_str());
        assert_eq!(cols.next() == Some("ok"), check["pass"].as_bool().unwrap());
    }

    let bad = orbitset(&["verify-paper", "--expect-ex11-clusters", "3"]);
    assert_eq!(bad.status.code(), Some(1));
    let out = stdout(&bad);
    let failing: Vec<&str> = out.lines().filter(|l| !l.starts_with("overall") && l.split_whitespace().nth(1) == Some("FAIL")).collect();
    assert_eq!(failing.len(), 1, "{out}");
    assert!(failing[0].starts_with("ex11_cluster_count"));
    assert!(out.trim_end().ends_with("overall: FAIL"));
}
