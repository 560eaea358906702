use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_causelike"))
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_value(csv: &str, order: &str, quantity: &str, label: &str, path: &str) -> f64 {
    csv.lines()
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|c| c[1] == order && c[2] == quantity && c[3] == label && c[5] == path)
        .unwrap_or_else(|| panic!("no row {order} {quantity} {label} {path}"))[4]
        .parse()
        .unwrap()
}

#[test]
fn hardy_csv_has_expected_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let file = scenarios_dir().join("hardy_symmetric.toml");
    let o = run(&["run", file.to_str().unwrap(), "--csv", csv.to_str().unwrap(), "--quiet"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("scenario,order,quantity,label,value,path\n"));
    assert!(!text.contains('\r'));
    let rf = csv_value(&text, "r-first", "counterfactual", "R1-|R2+", "analytic");
    let lf = csv_value(&text, "l-first", "counterfactual", "R1-|R2+", "analytic");
    let gap = csv_value(&text, "both", "gap", "R1-|R2+", "closed-form");
    assert!((rf - 5.0 / 6.0).abs() < 1e-9);
    assert!((lf - 1.0).abs() < 1e-9);
    assert!((gap - 1.0 / 6.0).abs() < 1e-9);
}

#[test]
fn csv_is_bit_stable() {
    let dir = tempfile::tempdir().unwrap();
    let file = scenarios_dir().join("explicit_conditional.toml");
    let mut outputs = Vec::new();
    for k in 0..2 {
        let csv = dir.path().join(format!("{k}.csv"));
        let o = run(&[
            "run",
            file.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
            "--quiet",
            "--runs",
            "20000",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(std::fs::read(&csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn seed_override_changes_counts() {
    let dir = tempfile::tempdir().unwrap();
    let file = scenarios_dir().join("explicit_conditional.toml");
    let mut outputs = Vec::new();
    for seed in ["1", "2"] {
        let csv = dir.path().join(format!("{seed}.csv"));
        let o = run(&[
            "run",
            file.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
            "--quiet",
            "--runs",
            "5000",
            "--seed",
            seed,
        ]);
        assert!(o.status.success());
        outputs.push(std::fs::read_to_string(&csv).unwrap());
    }
    assert_ne!(outputs[0], outputs[1]);
}

#[test]
fn wrong_amplitude_count_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bad.toml",
        "schema_version = 1\nanalyses = [\"joint\"]\n\n[state]\nd_l = 2\nd_r = 2\namplitudes = [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]\n\n[bases]\nl = { angle = 0.0, labels = [\"a\", \"b\"] }\nr = { angle = 0.0, labels = [\"c\", \"d\"] }\n",
    );
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("bad.toml:7:"), "{e}");
    assert!(e.contains("expected 4 amplitudes"), "{e}");
}

#[test]
fn unnormalized_amplitudes_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "norm.toml",
        "schema_version = 1\nanalyses = [\"joint\"]\n[state]\nd_l = 2\nd_r = 2\namplitudes = [[1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]\n[bases]\nl = { angle = 0.0, labels = [\"a\", \"b\"] }\nr = { angle = 0.0, labels = [\"c\", \"d\"] }\n",
    );
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("squared norm"));
}

#[test]
fn unknown_fields_and_values_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("field.toml", "schema_version = 1\nanalyses = [\"joint\"]\ncolour = 3\n[state]\npreset = \"singlet\"\n"),
        ("order.toml", "schema_version = 1\norder = \"sideways\"\nanalyses = [\"joint\"]\n[state]\npreset = \"singlet\"\n"),
        ("version.toml", "schema_version = 9\nanalyses = [\"joint\"]\n[state]\npreset = \"singlet\"\n"),
        ("hardy.toml", "schema_version = 1\nanalyses = [\"gap\"]\n[state]\npreset = \"hardy\"\nalpha = 0.0\nbeta = 0.5\n"),
        ("label.toml", "schema_version = 1\nanalyses = [\"conditional\"]\n[state]\npreset = \"hardy\"\nalpha = 0.5\nbeta = 0.5\n[outcomes]\nr = \"R9\"\n"),
    ] {
        let p = write(dir.path(), name, body);
        let o = run(&["run", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
        assert!(stderr(&o).contains(name), "{name}: {}", stderr(&o));
    }
}

#[test]
fn impossible_condition_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "imp.toml",
        "schema_version = 1\nanalyses = [\"conditional\"]\n[state]\npreset = \"product\"\n[bases]\nl = { angle = 0.0, labels = [\"a\", \"b\"] }\nr = { angle = 0.0, labels = [\"c\", \"d\"] }\n[outcomes]\nr = \"d\"\n",
    );
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("\"d\""));
}

#[test]
fn bad_sweep_exits_2_and_good_sweep_expands_grid() {
    let file = scenarios_dir().join("hardy_symmetric.toml");
    let o = run(&["run", file.to_str().unwrap(), "--sweep", "alpha=0:1:3", "--quiet"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("grid.csv");
    let o = run(&[
        "run",
        file.to_str().unwrap(),
        "--sweep",
        "alpha=0.2:1.2:3",
        "--sweep",
        "beta=0.3:0.9:2",
        "--runs",
        "100",
        "--quiet",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut names: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .filter(|n| n.contains('['))
        .collect();
    names.dedup();
    assert_eq!(names.len(), 6);
    for line in text
        .lines()
        .filter(|l| l.contains(",l-first,counterfactual,") && l.ends_with(",analytic"))
    {
        let v: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }
}

#[test]
fn order_override_restricts_rows() {
    let file = scenarios_dir().join("singlet_reciprocity.toml");
    let o = run(&["run", file.to_str().unwrap(), "--order", "l-first"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("l-first"));
    assert!(!out.contains("r-first"));
    let o = run(&["run", file.to_str().unwrap(), "--order", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spacetime_caption_is_printed() {
    let file = scenarios_dir().join("hardy_symmetric.toml");
    let o = run(&["run", file.to_str().unwrap(), "--runs", "10"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("reversing_boost"));
    assert!(out.contains("assumption"));
}

#[test]
fn missing_file_exits_2() {
    let o = run(&["run", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(2));
}
