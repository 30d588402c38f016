use std::path::Path;
use std::process::{Command, Output};

use spincluster::{AxiomReport, CouplingFamily, MomentReport};
use spincluster_cli::commands::{QSpectrumReport, SpectrumReport};

fn spincluster(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spincluster")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = spincluster(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn v8_ground_moments() {
    let report: MomentReport = serde_json::from_str(&stdout(&["moments", "--preset", "v8-ground"])).unwrap();
    assert_eq!(report.moments.len(), 4);
    for (got, want) in report.moments.iter().zip([0.9, 0.1, 0.1, 0.9]) {
        assert!((got - want).abs() < 1e-12, "{:?}", report.moments);
    }
    assert_eq!((report.spin, report.m), (1.0, -1.0));
}

#[test]
fn commutant_of_four_sites_is_three_dimensional() {
    let text = stdout(&["commutant", "--sites", "4"]);
    assert!(text.contains("\"dimension\": 3"));
    let family: CouplingFamily = serde_json::from_str(&text).unwrap();
    let member = spincluster::symmetry::constrained_couplings_parallelogram(1.0, 1.0, -3.0).unwrap();
    assert!(family.distance(&member) < 1e-9);
}

#[test]
fn simulate_default_profile() {
    let text = stdout(&["simulate"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,B,M_norm,rho00,n"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(cols.len(), 5);
        assert!(cols[2].abs() <= 1.0);
        rows += 1;
    }
    assert_eq!(rows, 100_001);
}

#[test]
fn simulate_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "gentle.json",
        r#"{"field": {"kind": "sinusoid", "amplitude": 1, "angular_rate": 1, "t_start": 0, "t_end": 1}, "steps": 50}"#,
    );
    let derived = stdout(&["simulate", &cfg, "--steps", "20"]);
    assert_eq!(derived.lines().count(), 22);
    let verbatim = stdout(&["simulate", "--config", &cfg, "--mode", "paper_verbatim", "--steps", "20"]);
    assert_ne!(derived, verbatim);
}

#[test]
fn unstable_integration_exits_3() {
    assert_eq!(spincluster(&["simulate", "--steps", "20"]).status.code(), Some(3));
}

#[test]
fn malformed_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("junk.json", "{ not json"),
        ("unknown.json", r#"{"sites": 4, "colour": "red"}"#),
        ("nested.json", r#"{"rates": {"A": 1, "temperature": 3}}"#),
        ("negative.json", r#"{"rates": {"A": -1}}"#),
        ("weights.json", r#"{"sites": 3, "weights": [0.1, 0.2]}"#),
        ("sites.json", r#"{"sites": 0}"#),
        ("grid.json", r#"{"phase_map": {"n_grid": 1}}"#),
        ("state.json", r#"{"moments": {"state": "psi9"}}"#),
        ("window.json", r#"{"field": {"t_start": 1, "t_end": 0}}"#),
    ];
    let subcommands =
        ["q-spectrum", "check-yangian", "commutant", "spectrum", "phase-map", "moments", "levels-report", "simulate"];
    for (name, text) in cases {
        let path = write(dir.path(), name, text);
        let code = |sub: &str| spincluster(&[sub, &path]).status.code();
        match name {
            "junk.json" | "unknown.json" | "nested.json" => {
                for sub in subcommands {
                    assert_eq!(code(sub), Some(2), "{sub} {name}");
                }
            }
            "negative.json" | "window.json" => assert_eq!(code("simulate"), Some(2), "{name}"),
            "weights.json" => {
                for sub in ["q-spectrum", "check-yangian", "commutant"] {
                    assert_eq!(code(sub), Some(2), "{sub} {name}");
                }
            }
            "sites.json" => assert_eq!(code("commutant"), Some(2)),
            "grid.json" => assert_eq!(code("phase-map"), Some(2)),
            _ => assert_eq!(code("moments"), Some(2)),
        }
    }
    assert_eq!(spincluster(&["simulate", "/nonexistent/cfg.json"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(spincluster(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(spincluster(&[]).status.code(), Some(2));
    assert_eq!(spincluster(&["moments", "--preset", "v9"]).status.code(), Some(2));
    assert_eq!(spincluster(&["simulate", "--mode", "guess"]).status.code(), Some(2));
    assert_eq!(spincluster(&["--help"]).status.code(), Some(0));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["q-spectrum", "--sites", "4"],
        vec!["commutant", "--sites", "3"],
        vec!["phase-map"],
        vec!["levels-report"],
        vec!["simulate", "--preset", "fig5-lzs"],
    ] {
        let a = dir.path().join("a.out");
        let b = dir.path().join("b.out");
        for path in [&a, &b] {
            let mut full = args.clone();
            full.extend(["--out", path.to_str().unwrap()]);
            assert_eq!(spincluster(&full).status.code(), Some(0), "{args:?}");
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{args:?}");
    }
}

#[test]
fn json_reports_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "w.json", r#"{"sites": 3, "weights": [0.3, 0.5, 0.2]}"#);

    let text = stdout(&["q-spectrum", &cfg]);
    let q: QSpectrumReport = serde_json::from_str(&text).unwrap();
    assert_eq!(q.multiplets.iter().map(|m| m.multiplicity).sum::<usize>(), 8);
    assert_eq!(serde_json::to_string_pretty(&q).unwrap() + "\n", text);

    let text = stdout(&["check-yangian", &cfg]);
    let axioms: AxiomReport = serde_json::from_str(&text).unwrap();
    assert!(axioms.level_zero_residual < 1e-12);
    assert_eq!(serde_json::to_string_pretty(&axioms).unwrap() + "\n", text);

    let text = stdout(&["commutant", &cfg]);
    let family: CouplingFamily = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&family).unwrap() + "\n", text);

    let text = stdout(&["spectrum", "--preset", "v8-ground"]);
    let spectrum: SpectrumReport = serde_json::from_str(&text).unwrap();
    assert_eq!(spectrum.ground_labels, vec!["E1^3".to_string()]);
    assert_eq!(serde_json::to_string_pretty(&spectrum).unwrap() + "\n", text);
}

#[test]
fn v6_triangle_spectrum() {
    let report: SpectrumReport = serde_json::from_str(&stdout(&["spectrum", "--preset", "v6-triangle"])).unwrap();
    let energies: Vec<f64> = report.levels.levels.iter().map(|l| l.energy).collect();
    assert_eq!(energies, vec![-63.25, -5.25, 34.25]);
    assert_eq!(report.ground_labels, vec!["alpha".to_string()]);
}

#[test]
fn phase_map_region() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "pm.json",
        r#"{"phase_map": {"a12_range": [0.1, 2], "a13_range": [-5, -0.1], "n_grid": 20}}"#,
    );
    let text = stdout(&["phase-map", &cfg]);
    let mut checked = 0;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let (a12, a13): (f64, f64) = (cols[0].parse().unwrap(), cols[1].parse().unwrap());
        if a13 < -2.0 * a12 {
            assert_eq!((cols[2], cols[3]), ("E1^3", "1"), "{line}");
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn levels_report_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("levels.csv");
    let code = spincluster(&["levels-report", "--out", out.to_str().unwrap()]).status.code();
    assert_eq!(code, Some(0));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("B,label,printed_verbatim,printed_corrected,discrepancy_verbatim,discrepancy_corrected"));
    assert_eq!(text.lines().count(), 1 + 50 * 9);
    for line in text.lines().skip(1) {
        let (b, rest) = line.split_once(",\"").unwrap();
        let (label, values) = rest.split_once("\",").unwrap();
        b.parse::<f64>().unwrap();
        assert!(label.starts_with('E'));
        assert_eq!(values.split(',').count(), 4, "{line}");
    }
}
