use std::path::Path;
use std::process::{Command, Output};

fn lightesd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lightesd"))
        .args(args)
        .env_remove("LIGHTESD_SEED")
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_csv(path: &Path, rows: usize, bad_line: Option<usize>) {
    let mut s = String::from("timestamp,value\n");
    for t in 0..rows {
        // line 1 is the header
        if bad_line == Some(t + 2) {
            s.push_str(&format!("{t},abc\n"));
        } else {
            s.push_str(&format!("{t},{}\n", ((t as f64) * 0.7).sin() + if t == 40 { 25.0 } else { 0.0 }));
        }
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn detect_writes_a_versioned_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("series.csv");
    write_csv(&csv, 120, None);
    let out = dir.path().join("report.json");
    let o = lightesd(&["detect", "--input", csv.to_str().unwrap(), "--alpha", "0.001", "--seed", "42", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out);
    assert_eq!(r["schema"], 1);
    for key in ["anomaly_indices", "scores", "periods", "n", "alpha", "max_anomaly_frac", "seed", "latency_seconds", "version"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["n"], 120);
    assert_eq!(r["seed"], 42);
    assert!(r["anomaly_indices"].as_array().unwrap().contains(&serde_json::json!(40)));
}

#[test]
fn detect_prints_to_stdout_and_emits_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("series.csv");
    write_csv(&csv, 80, None);
    let plot = dir.path().join("plot.csv");
    let o = lightesd(&["detect", "--input", csv.to_str().unwrap(), "--emit-plot-data", plot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["n"], 80);
    let mut rdr = csv::Reader::from_path(&plot).unwrap();
    assert_eq!(rdr.headers().unwrap().len(), 6);
    assert_eq!(rdr.records().count(), 80);
}

#[test]
fn unparsable_value_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    write_csv(&csv, 40, Some(17));
    let o = lightesd(&["detect", "--input", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 17"));
}

#[test]
fn missing_input_is_a_parse_error() {
    let o = lightesd(&["detect", "--input", "/nonexistent/x.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_configuration_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("series.csv");
    write_csv(&csv, 60, None);
    let o = lightesd(&["detect", "--input", csv.to_str().unwrap(), "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
    // too short to validate
    write_csv(&csv, 10, None);
    let o = lightesd(&["detect", "--input", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let o = lightesd(&["detect", "--bogus-flag"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn value_column_override_reads_benchmark_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("nab.csv");
    let mut s = String::from("timestamp,value,is_anomaly\n");
    for t in 0..60 {
        s.push_str(&format!("2024-01-01 00:{:02}:00,{},0\n", t, (t as f64 * 0.5).cos()));
    }
    std::fs::write(&csv, s).unwrap();
    let o = lightesd(&["detect", "--input", csv.to_str().unwrap(), "--value-column", "value"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gen_is_reproducible_and_labels_match_the_presets() {
    let dir = tempfile::tempdir().unwrap();
    for (preset, groups, spikes, dips, collective) in [("std", 7, 3, 2, 2), ("rw", 9, 4, 4, 1)] {
        let a = dir.path().join(format!("{preset}_a.csv"));
        let b = dir.path().join(format!("{preset}_b.csv"));
        for p in [&a, &b] {
            let o = lightesd(&["gen", "--preset", preset, "--n", "5000", "--seed", "1", "--out", p.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0));
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let ta = dir.path().join(format!("{preset}_a.truth.json"));
        let tb = dir.path().join(format!("{preset}_b.truth.json"));
        assert_eq!(std::fs::read(&ta).unwrap(), std::fs::read(&tb).unwrap());

        let mut rdr = csv::Reader::from_path(&a).unwrap();
        assert_eq!(rdr.headers().unwrap(), vec!["timestamp", "value"]);
        assert_eq!(rdr.records().count(), 5000);

        let t = json(&ta);
        let gs = t["groups"].as_array().unwrap();
        assert_eq!(gs.len(), groups);
        let count = |k: &str| gs.iter().filter(|g| g["kind"] == k).count();
        assert_eq!((count("spike"), count("dip"), count("collective")), (spikes, dips, collective));
        let members: u64 = gs.iter().map(|g| g["length"].as_u64().unwrap()).sum();
        assert_eq!(t["truth_indices"].as_array().unwrap().len() as u64, members);
    }
}

#[test]
fn gen_seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let o = lightesd(&["gen", "--preset", "rw", "--n", "100", "--seed", "9", "--out", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_lightesd"))
        .args(["gen", "--preset", "rw", "--n", "100", "--out", b.to_str().unwrap()])
        .env("LIGHTESD_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn gen_rejects_an_invalid_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = lightesd(&["gen", "--preset", "std", "--n", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let o = lightesd(&["gen", "--preset", "std", "--mag-low", "7", "--mag-high", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bench_rejects_zero_seeds() {
    let o = lightesd(&["bench", "--seeds", "0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bench_reports_every_run_and_the_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let k = 2;
    let o = lightesd(&["bench", "--seeds", &k.to_string(), "--n", "600", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not measured"));
    let r = json(&out);
    assert_eq!(r["schema"], 1);
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2 * 2 * k);
    assert_eq!(r["aggregates"].as_array().unwrap().len(), 4);
    assert_eq!(r["models"].as_array().unwrap().len(), 2);
    // fixed (dataset, alpha, seed) ordering
    let keys: Vec<(String, f64, u64)> = rows
        .iter()
        .map(|x| (x["dataset"].as_str().unwrap().to_string(), x["alpha"].as_f64().unwrap(), x["seed"].as_u64().unwrap()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);

    let csv_out = dir.path().join("bench.csv");
    let o = lightesd(&["bench", "--seeds", "1", "--n", "600", "--format", "csv", "--cpu-frac", "0.05", "--ram-frac", "0.03", "--power-frac", "0.1", "--out", csv_out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!String::from_utf8_lossy(&o.stderr).contains("not measured"));
    let mut rdr = csv::Reader::from_path(&csv_out).unwrap();
    assert!(rdr.records().count() >= 4);
}
