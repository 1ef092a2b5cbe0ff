use std::process::Command;

use nhse::cli::{parse_csv, validate_output, CommandKind, EXIT_USAGE};

fn nhse(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nhse")).args(args).output().unwrap()
}

fn run_to_file(args: &[&str]) -> String {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), args)
}

fn run_in(dir: &std::path::Path, args: &[&str]) -> String {
    let path = dir.join("out");
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_owned();
    full.extend(["--out", &p]);
    let out = nhse(&full);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn every_subcommand_round_trips() {
    let cases: &[(&[&str], CommandKind)] = &[
        (&["fractal", "--sites", "3", "--psi0", "0.5:1:0.25", "--omega", "0:3"], CommandKind::Fractal),
        (&["solve", "--psi0", "1", "--N", "2", "--omega", "0:3"], CommandKind::Solve),
        (&["band", "--psi0", "0.8"], CommandKind::Band),
        (&["band", "--gamma", "0.1", "--psin", "0.97"], CommandKind::Band),
        (&["gap", "--gamma", "0.8", "--omega", "0.4:1:0.005"], CommandKind::Gap),
        (&["residual", "--model", "al", "--N", "20", "--omega", "0.5"], CommandKind::Residual),
        (&["residual", "--N", "4", "--omega", "0:1:0.25"], CommandKind::Residual),
        (&["exceptional", "--model", "al", "--N", "5", "--omega=-1:1"], CommandKind::Exceptional),
        (&["stability", "--psi0", "1", "--digits", "40"], CommandKind::Stability),
        (&["count", "--sites", "3"], CommandKind::Count),
        (&["dispersion", "--model", "al", "--gamma", "0.3"], CommandKind::Dispersion),
    ];
    for (args, kind) in cases {
        let dir = tempfile::tempdir().unwrap();
        let text = run_in(dir.path(), args);
        let cfg = validate_output(&text).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert_eq!(cfg.command, *kind);
        // byte-identical on rerun
        assert_eq!(text, run_in(dir.path(), args), "{args:?}");
    }
}

#[test]
fn csv_layout() {
    let text = run_to_file(&["solve", "--psi0", "1", "--N", "2", "--omega", "0:3", "--format", "csv"]);
    assert!(text.starts_with("# nhse "));
    let parsed = parse_csv(&text).unwrap();
    assert_eq!(parsed.header, CommandKind::Solve.columns());
    let omegas: Vec<f64> = parsed.column("omega_re").unwrap().iter().map(|s| s.parse().unwrap()).collect();
    let s5 = 5f64.sqrt();
    for want in [(3.0 - s5) / 2.0, 1.0, (3.0 + s5) / 2.0] {
        assert!(omegas.iter().any(|w| (w - want).abs() < 1e-15), "{want} missing from {omegas:?}");
    }
}

#[test]
fn json_output_on_stdout() {
    let out = nhse(&["count", "--sites", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["total"], 3);
    assert_eq!(v["config"]["command"], "count");
}

#[test]
fn exit_codes() {
    assert_eq!(nhse(&["residual", "--N", "3"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(nhse(&["count", "--sites", "7"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(nhse(&["band", "--gamma", "2"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(nhse(&["band", "--digits", "10"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(nhse(&["bogus"]).status.code(), Some(2));
    assert_eq!(nhse(&[]).status.code(), Some(EXIT_USAGE));
    // the AL chain has no continuum gap scan
    assert_eq!(nhse(&["gap", "--model", "al"]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn seed_check_passes() {
    let out = nhse(&["--seed-check"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5, "{text}");
}
