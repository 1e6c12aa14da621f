use std::path::PathBuf;
use std::process::{Command, Output};

use fourier_pricing::models::ModelFile;
use fourier_pricing::presets;

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fourier-pricing"))
        .args(args)
        .env_remove("FP_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn model_files_match_presets() {
    let files = [
        ("bsm", presets::bsm()),
        ("bates", presets::bates()),
        ("avg_test1", presets::avg_test1()),
        ("avg_table3", presets::avg_table3()),
        ("avg_test3", presets::avg_test3()),
    ];
    for (name, s) in files {
        let file = ModelFile::load(model(name)).unwrap();
        assert_eq!(file.model, s.model, "{}", s.name);
        assert_eq!(file.market, s.market, "{}", s.name);
    }
}

#[test]
fn price_cos_bsm() {
    let bsm = model("bsm");
    let o = run(&[
        "price", "--model", bsm.to_str().unwrap(), "--method", "cos", "--strikes", "30,50,70",
        "--tenors", "0.1,1", "--L", "13", "--n", "64",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "method,kind,t,k,value,interpolated");
    assert_eq!(lines.len(), 7);
    let row = lines
        .iter()
        .find(|l| l.starts_with("cos-opt,call,1.0,50.0,"))
        .expect("row for K=50 T=1");
    let value: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!((value - 6.1679994652).abs() < 1e-9, "{value}");
}

#[test]
fn price_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prices.csv");
    let bates = model("bates");
    let o = run(&[
        "price", "--model", bates.to_str().unwrap(), "--method", "at-opt,cos",
        "--tenors", "1", "--out", path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    // default strikes 60, 100, 140 for each engine
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let v: f64 = row[4].parse().unwrap();
        assert!(v > 0.0 && v < 100.0);
    }
    for (a, c) in rows[..3].iter().zip(&rows[3..]) {
        assert_eq!(a[3], c[3]);
        let (x, y): (f64, f64) = (a[4].parse().unwrap(), c[4].parse().unwrap());
        assert!((x - y).abs() < 1e-6, "{x} {y}");
    }
}

#[test]
fn infeasible_alpha_exits_2() {
    let avg = model("avg_test3");
    let o = run(&[
        "price", "--model", avg.to_str().unwrap(), "--method", "cm-opt", "--alpha", "1.75",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha_max=1.0"), "{}", stderr(&o));
}

#[test]
fn bad_input_exits_2() {
    let bsm = model("bsm");
    let bsm = bsm.to_str().unwrap();
    assert_eq!(run(&["price", "--model", bsm, "--bogus"]).status.code(), Some(2));
    let o = run(&["price", "--model", bsm, "--method", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope"));
    let o = run(&["price", "--model", "/nonexistent/model.json"]);
    assert_ne!(o.status.code(), Some(0));
    let o = run(&["converge", "--model", bsm, "--dmin", "9", "--dmax", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn diagnose_flags_bad_measure() {
    let avg = model("avg_table3");
    let o = run(&["diagnose", "--model", avg.to_str().unwrap(), "--n", "4096", "--domain", "500"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("measure_ok=false"));
    assert!(out.contains("blow-up matrix"));
    assert!(out.contains("alpha sweep skipped"));
}

#[test]
fn converge_fills_reference_cache() {
    let dir = tempfile::tempdir().unwrap();
    let bates = model("bates");
    let args = [
        "converge", "--model", bates.to_str().unwrap(), "--method", "cos", "--strikes", "100",
        "--tenors", "1", "--dmin", "4", "--dmax", "9", "--tol", "1e-6",
    ];
    let o = Command::new(env!("CARGO_BIN_EXE_fourier-pricing"))
        .args(args)
        .env("FP_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("method=cos-opt"));
    let cached: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert!(!cached.is_empty());

    // the second run reads the cache and reports the same thing
    let again = Command::new(env!("CARGO_BIN_EXE_fourier-pricing"))
        .args(args)
        .env("FP_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(stdout(&o), stdout(&again));
}

#[test]
fn converge_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let bsm = model("bsm");
    let mut outputs = Vec::new();
    for i in 0..2 {
        let curves = dir.path().join(format!("curves{i}.csv"));
        let plot = dir.path().join(format!("plot{i}.csv"));
        let o = run(&[
            "converge", "--model", bsm.to_str().unwrap(), "--method", "cos,at-opt,fft",
            "--dmin", "4", "--dmax", "8", "--tol", "1e-6", "--min-n",
            "--out", curves.to_str().unwrap(), "--plot", plot.to_str().unwrap(),
        ]);
        assert!(o.status.success() || o.status.code() == Some(3), "{}", stderr(&o));
        outputs.push((
            stdout(&o),
            std::fs::read(&curves).unwrap(),
            std::fs::read(&plot).unwrap(),
        ));
    }
    assert!(!outputs[0].1.is_empty());
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn bench_selects_the_same_grids_twice() {
    let dir = tempfile::tempdir().unwrap();
    let bsm = model("bsm");
    let mut tables = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("timing{i}.csv"));
        let o = run(&[
            "bench", "--model", bsm.to_str().unwrap(), "--method", "cos,fft,cm-opt",
            "--tenors", "1", "--sizes", "1,10", "--runs", "2", "--warmup", "0",
            "--out", path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        // everything except the timing columns is deterministic
        let keep: Vec<usize> = header
            .iter()
            .enumerate()
            .filter(|(_, h)| !h.contains("ms") && !h.contains("time"))
            .map(|(i, _)| i)
            .collect();
        let rows: Vec<Vec<String>> = lines
            .map(|l| {
                let cells: Vec<&str> = l.split(',').collect();
                keep.iter().map(|&i| cells[i].to_owned()).collect()
            })
            .collect();
        assert_eq!(rows.len(), 6);
        tables.push(rows);
    }
    assert_eq!(tables[0], tables[1]);
}
