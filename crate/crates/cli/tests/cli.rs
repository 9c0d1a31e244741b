use std::path::Path;
use std::process::{Command, Output};

fn hyperlune(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperlune"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Rows of a versioned CSV table, after checking its comment line.
fn table(text: &str, schema: &str) -> Vec<csv::StringRecord> {
    let (first, rest) = text.split_once('\n').unwrap();
    assert_eq!(first, format!("# hyperlune {schema} v1"));
    csv::Reader::from_reader(rest.as_bytes())
        .records()
        .map(|r| r.unwrap())
        .collect()
}

fn column(text: &str, schema: &str, name: &str) -> Vec<String> {
    let (_, rest) = text.split_once('\n').unwrap();
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    table(text, schema).iter().map(|row| row[idx].to_string()).collect()
}

fn json_file(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bound_examples() {
    let o = hyperlune(&["bound", "--lambda", "1", "--k", "1", "--L", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let b: f64 = column(&stdout(&o), "bound-table", "bound")[0].parse().unwrap();
    assert!((b - (4.0 - std::f64::consts::PI)).abs() < 1e-12);

    let o = hyperlune(&["bound", "--lambda", "1.4142135", "--k", "1", "--L", "6.2831853"]);
    let b: f64 = column(&stdout(&o), "bound-table", "bound")[0].parse().unwrap();
    assert!((b - 2.60258).abs() < 1e-5);

    let o = hyperlune(&["bound", "--L", "0"]);
    assert_eq!(column(&stdout(&o), "bound-table", "bound"), ["0.0"]);

    let o = hyperlune(&["bound", "--lambda", "0.5", "--L-min", "1", "--L-max", "3", "--L-steps", "5"]);
    let rows = table(&stdout(&o), "bound-table");
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| &r[3] == "subcritical" && r[5].is_empty()));
}

#[test]
fn domain_and_usage_errors_exit_with_two() {
    let o = hyperlune(&["bound", "--lambda", "2", "--L", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("admissible: [0, "), "{err}");

    assert_eq!(hyperlune(&["bound", "--lambda", "-1", "--L", "1"]).status.code(), Some(2));
    assert_eq!(hyperlune(&["bound", "--L-min", "3", "--L-max", "1"]).status.code(), Some(2));
    assert_eq!(hyperlune(&["bound", "--bogus"]).status.code(), Some(2));
    assert_eq!(hyperlune(&["pmp", "--shape", "circle", "--lambda", "0.5"]).status.code(), Some(2));
}

#[test]
fn sharpness_default_grid_passes_and_perturbation_fails() {
    let o = hyperlune(&["sharpness"]);
    assert_eq!(o.status.code(), Some(0));
    let status = column(&stdout(&o), "sharpness", "status");
    assert_eq!(status.len(), 30);
    assert!(status.iter().all(|s| s == "pass"));

    let o = hyperlune(&["sharpness", "--lambda", "1.4142135623730951", "--L", "6.28318530717958"]);
    assert_eq!(o.status.code(), Some(0));

    let o = hyperlune(&["sharpness", "--lambda", "1", "--L", "2", "--perturb", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(column(&stdout(&o), "sharpness", "status"), ["fail"]);

    // construction errors are reported per cell
    let o = hyperlune(&["sharpness", "--lambda", "2", "--L", "1,100"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(column(&stdout(&o), "sharpness", "status"), ["pass", "error"]);
}

#[test]
fn dominance_is_deterministic_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = hyperlune(&[
        "dominance", "--count", "120", "--seed", "7", "--out", out.to_str().unwrap(),
        "--format", "csv,json,svg",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv_text = std::fs::read_to_string(out.join("dominance.csv")).unwrap();
    let rows = table(&csv_text, "dominance");
    assert_eq!(rows.len(), 120);
    for r in &rows {
        let d: f64 = r[6].parse().unwrap();
        assert!(d >= -1e-9);
        if &r[2] == "2" {
            assert!(d.abs() < 1e-6);
        }
    }
    let hist = std::fs::read_to_string(out.join("dominance_histogram.csv")).unwrap();
    let counts: usize = column(&hist, "dominance-histogram", "count").iter().map(|c| c.parse::<usize>().unwrap()).sum();
    assert_eq!(counts, 120);
    let js = json_file(&out.join("dominance.json"));
    assert_eq!(js["summary"]["violations"], 0);
    let svg = std::fs::read_to_string(out.join("dominance.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<circle") && svg.matches("<path").count() == 4);

    let again = hyperlune(&["dominance", "--count", "120", "--seed", "7"]);
    assert_eq!(stdout(&again), csv_text);
    let other = hyperlune(&["dominance", "--count", "120", "--seed", "8"]);
    assert_ne!(stdout(&other), csv_text);
}

#[test]
fn pmp_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lune");
    let o = hyperlune(&["pmp", "--lambda", "1.4142135623730951", "--L", "3", "--out", out.to_str().unwrap(), "--format", "json,csv,svg"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let js = json_file(&out.join("pmp.json"));
    assert_eq!(js["report"]["status"], "certified");
    assert_eq!(js["report"]["switch_angles"].as_array().unwrap().len(), 4);
    assert!(js["report"]["pieces"].as_array().unwrap().iter().all(|p| p["consistent"] == true));
    let traj = std::fs::read_to_string(out.join("pmp.csv")).unwrap();
    let h1 = column(&traj, "control-trajectory", "H1");
    assert_eq!(h1.len(), 2049);
    assert!(std::fs::read_to_string(out.join("pmp.svg")).unwrap().contains("<path"));

    // the exported profile certifies again on import
    let profile = out.join("pmp_profile.csv");
    let o = hyperlune(&["pmp", "--lambda", "1.4142135623730951", "--profile", profile.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let js: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(js["report"]["status"], "certified");

    let o = hyperlune(&["pmp", "--shape", "circle", "--lambda", "1.5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let js: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(js["report"]["status"], "certified");
    assert!(js["report"]["switch_angles"].as_array().unwrap().is_empty());

    let o = hyperlune(&["pmp", "--shape", "polygon", "--arcs", "3", "--seed", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let js: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_ne!(js["report"]["status"], "certified");
}

#[test]
fn limits_examples() {
    let o = hyperlune(&["limits", "--k", "1", "--L", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows = table(&text, "limits");
    let fine = rows.iter().find(|r| &r[0] == "cross-regime" && &r[4] == "0.00001").unwrap();
    let dev: f64 = fine[5].parse::<f64>().unwrap().max(fine[6].parse().unwrap());
    assert!(dev < 1e-4);

    let o = hyperlune(&["limits", "--k", "0.01,0.001", "--lambda", "1", "--L", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let euc: Vec<f64> = table(&text, "limits")
        .iter()
        .filter(|r| &r[0] == "euclidean")
        .map(|r| r[7].parse().unwrap())
        .collect();
    assert!(euc[1] < 1e-5);
    let ratio = euc[0] / euc[1];
    assert!((50.0..200.0).contains(&ratio), "{ratio}");
}
