use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn ucasimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ucasimir"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_scenario(file: &Path, out: &Path, extra: &[&str]) -> (Output, Vec<u8>) {
    let mut args = vec!["scenario", "run", file.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = ucasimir(&args);
    // files are named after the scenario, not the file
    let csv = std::fs::read_dir(out)
        .into_iter()
        .flatten()
        .flatten()
        .map(|e| e.path())
        .find(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| std::fs::read(p).unwrap())
        .unwrap_or_default();
    (o, csv)
}

fn column(csv: &str, header: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == header)
        .unwrap_or_else(|| panic!("no column {header}"));
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn actin_bundle_universal_energy() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = run_scenario(&repo("scenarios/actin-bundle.toml"), dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = String::from_utf8(csv).unwrap();
    let gaps = column(&csv, "gap [m]");
    let universal = column(&csv, "universal [kBT]");
    assert_eq!(gaps.len(), 30);
    let i = gaps.iter().position(|g| (g / 6e-9 - 1.0).abs() < 1e-9).unwrap();
    assert!((2.5..=10.0).contains(&universal[i].abs()), "{}", universal[i]);
    let meta = std::fs::read_to_string(dir.path().join("actin-bundle.meta.toml")).unwrap();
    assert!(meta.contains("approximate"), "{meta}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let file = repo("scenarios/slabs-tetradecane-6nm.toml");
    let (a, first) = run_scenario(&file, &dir.path().join("a"), &["--threads", "1"]);
    let (b, second) = run_scenario(&file, &dir.path().join("b"), &[]);
    assert!(a.status.success() && b.status.success());
    assert!(!first.is_empty());
    assert_eq!(first, second);
    let csv = String::from_utf8(first).unwrap();
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn degenerate_sweep_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(repo("scenarios/slabs-tetradecane-6nm.toml"))
        .unwrap()
        .replace("max = \"100 nm\"", "max = \"5 nm\"")
        .replace("../materials", repo("materials").to_str().unwrap());
    let file = dir.path().join("degenerate.toml");
    std::fs::write(&file, text).unwrap();
    let (o, _) = run_scenario(&file, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sweep"), "{}", stderr(&o));
}

#[test]
fn matsubara_budget_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(repo("scenarios/slabs-tetradecane-6nm.toml"))
        .unwrap()
        .replace("../materials", repo("materials").to_str().unwrap())
        + "\n[truncation]\nmatsubara_max_terms = 16\n";
    let file = dir.path().join("short.toml");
    std::fs::write(&file, text).unwrap();
    let (o, csv) = run_scenario(&file, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(String::from_utf8(csv).unwrap().contains("budget"));
}

#[test]
fn missing_file_exits_4() {
    let o = ucasimir(&["scenario", "run", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn materials_validate() {
    let o = ucasimir(&["materials", "validate", repo("materials").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    for name in ["water", "tetradecane", "silica"] {
        assert!(out.contains(name), "{out}");
    }

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.json"), r#"{"name": "x", "epsilon_infinity": -2}"#).unwrap();
    let o = ucasimir(&["materials", "validate", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn geometry_commands() {
    let o = ucasimir(&["cylinders", "--r1", "3 nm", "--r2", "3 nm", "--gap", "6 nm", "--length", "15 um"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let kbt: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("energy = "))
        .and_then(|l| l.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((kbt + 5.121).abs() < 1e-3, "{out}");

    let o = ucasimir(&["spheres", "--r1", "1 um", "--r2", "1 um", "--gap", "1 um"]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = ucasimir(&["planar", "--gap", "-1 nm"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ucasimir(&["planar", "--gap", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ucasimir(&["planar", "--gap", "5 nm", "--tol", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}
