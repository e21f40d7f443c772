//! End-to-end tests of the `bfp` binary: exit-code contract, trace export,
//! solution files, structured output round-trips, golden regeneration.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bfp_core::corpus;
use bfp_core::io::{CoeffFile, MapFile, SpaceFile};

fn bfp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bfp"))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) {
    std::fs::write(path, serde_json::to_string_pretty(value).unwrap()).unwrap();
}

struct Fixtures {
    space: PathBuf,
    map: PathBuf,
    coeffs: PathBuf,
}

/// The five-point example instance as input files.
fn example_fixtures(dir: &Path) -> Fixtures {
    let case = corpus::example_pc_table();
    let space = dir.join("space.json");
    let map = dir.join("map.json");
    let coeffs = dir.join("coeffs.json");
    write_json(&space, &SpaceFile::from_space(&case.space));
    write_json(&map, &MapFile::from_mapping(&case.space, &case.map));
    write_json(&coeffs, &CoeffFile::from_parts(&case.coeffs, &case.spec));
    Fixtures { space, map, coeffs }
}

/// A constant-map instance whose certificate holds.
fn contractive_fixtures(dir: &Path) -> Fixtures {
    let space = corpus::example31_space();
    let map = bfp_core::contraction::MappingSpec::new(
        bfp_core::contraction::Variance::Covariant,
        vec![0; 5],
        vec![0; 5],
    );
    let coeffs = bfp_core::contraction::CoefficientFamily::constants(&[0.0, 1.0]).unwrap();
    let spec = bfp_core::contraction::ContractionSpec::new(1, 0.5, 1, 1.0, None, None).unwrap();
    let space_path = dir.join("c_space.json");
    let map_path = dir.join("c_map.json");
    let coeffs_path = dir.join("c_coeffs.json");
    write_json(&space_path, &SpaceFile::from_space(&space));
    write_json(&map_path, &MapFile::from_mapping(&space, &map));
    write_json(&coeffs_path, &CoeffFile::from_parts(&coeffs, &spec));
    Fixtures {
        space: space_path,
        map: map_path,
        coeffs: coeffs_path,
    }
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("process exited with a code")
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let fx = example_fixtures(dir.path());

    let out = bfp()
        .args(["verify", "--space"])
        .arg(&fx.space)
        .arg("--map")
        .arg(&fx.map)
        .arg("--coeffs")
        .arg(&fx.coeffs)
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("VIOLATED"));
    assert!(stdout.contains("holds: false"));

    let fx = contractive_fixtures(dir.path());
    let out = bfp()
        .args(["verify", "--space"])
        .arg(&fx.space)
        .arg("--map")
        .arg(&fx.map)
        .arg("--coeffs")
        .arg(&fx.coeffs)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("holds: true"));

    let out = bfp()
        .args(["verify", "--space"])
        .arg(&fx.space)
        .arg("--map")
        .arg(&fx.map)
        .args(["--coeffs", "/nonexistent/coeffs.json"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn iterate_exit_codes_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let fx = example_fixtures(dir.path());

    let out = bfp()
        .args(["iterate", "--space"])
        .arg(&fx.space)
        .arg("--map")
        .arg(&fx.map)
        .args(["--start-left", "e1", "--start-right", "f1"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let trace_lines: Vec<&str> = stdout
        .lines()
        .filter(|l| l.starts_with(char::is_numeric))
        .collect();
    assert_eq!(trace_lines.len(), 1);
    assert!(trace_lines[0].starts_with("0 e1 f1"));
    assert!(trace_lines[0].ends_with('-'));

    let out = bfp()
        .args(["iterate", "--space"])
        .arg(&fx.space)
        .arg("--map")
        .arg(&fx.map)
        .args(["--start-left", "e2", "--start-right", "f2"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("cycle detected: (e2, e3, e4)"));

    // bound column appears when a coefficient file is supplied
    let out = bfp()
        .args(["iterate", "--space"])
        .arg(&fx.space)
        .arg("--map")
        .arg(&fx.map)
        .args(["--start-left", "e1", "--start-right", "f1", "--coeffs"])
        .arg(&fx.coeffs)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(!stdout.lines().next().unwrap().ends_with('-'));

    let out = bfp()
        .args(["iterate", "--space"])
        .arg(&fx.space)
        .arg("--map")
        .arg(&fx.map)
        .args(["--start-left", "nope", "--start-right", "f1"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    let out = bfp()
        .args(["iterate", "--space"])
        .arg(&fx.space)
        .arg("--map")
        .arg(&fx.map)
        .args(["--start-left", "e1", "--start-right", "f1", "--max-iter", "0"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn solve_frac_closed_form_and_solution_file() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("solution.txt");
    let out = bfp()
        .args([
            "solve-frac",
            "--order",
            "2",
            "--omega",
            "1",
            "--sigma",
            "0.5",
            "--grid-n",
            "201",
            "--out",
        ])
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&sol).unwrap();
    let mut max_err = 0.0f64;
    let mut lines = 0;
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        let rho: f64 = parts.next().unwrap().parse().unwrap();
        let value: f64 = parts.next().unwrap().parse().unwrap();
        max_err = max_err.max((value - rho * (1.0 - rho) / 2.0).abs());
        lines += 1;
    }
    assert_eq!(lines, 201);
    assert!(max_err <= 1e-8, "max error {max_err}");
}

#[test]
fn solve_frac_audit_override_and_errors() {
    // failing lipschitz audit blocks without --force
    let base = [
        "solve-frac",
        "--order",
        "2",
        "--omega",
        "g*g",
        "--sigma",
        "0.9",
        "--grid-n",
        "51",
    ];
    let out = bfp().args(base).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("lipschitz audit failed"));

    // with --force the run proceeds (and converges: omega(., 0) = 0)
    let out = bfp().args(base).arg("--force").output().unwrap();
    assert_eq!(code(&out), 0);

    // parse errors carry the byte offset
    let out = bfp()
        .args([
            "solve-frac",
            "--order",
            "2",
            "--omega",
            "rho*(",
            "--sigma",
            "0.5",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte 5"));

    // genuine divergence exits 5
    let out = bfp()
        .args([
            "solve-frac",
            "--order",
            "2",
            "--omega",
            "20*g + 1",
            "--sigma",
            "0.9",
            "--grid-n",
            "51",
            "--force",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&out), 5);
}

#[test]
fn structured_output_roundtrips_through_input_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let fx = example_fixtures(dir.path());
    let out = bfp()
        .args(["verify", "--space"])
        .arg(&fx.space)
        .arg("--map")
        .arg(&fx.map)
        .arg("--coeffs")
        .arg(&fx.coeffs)
        .args(["--format", "structured"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["certificate"]["holds"], serde_json::json!(false));

    // the echoed inputs parse through the same schemas and reproduce the run
    let space_file: SpaceFile = serde_json::from_value(value["space"].clone()).unwrap();
    let map_file: MapFile = serde_json::from_value(value["map"].clone()).unwrap();
    let coeff_file: CoeffFile = serde_json::from_value(value["coeffs"].clone()).unwrap();
    let space2 = dir.path().join("space2.json");
    let map2 = dir.path().join("map2.json");
    let coeffs2 = dir.path().join("coeffs2.json");
    write_json(&space2, &space_file);
    write_json(&map2, &map_file);
    write_json(&coeffs2, &coeff_file);
    let rerun = bfp()
        .args(["verify", "--space"])
        .arg(&space2)
        .arg("--map")
        .arg(&map2)
        .arg("--coeffs")
        .arg(&coeffs2)
        .args(["--format", "structured"])
        .output()
        .unwrap();
    assert_eq!(code(&rerun), 1);
    let rerun_value: serde_json::Value = serde_json::from_slice(&rerun.stdout).unwrap();
    assert_eq!(value["certificate"], rerun_value["certificate"]);
}

#[test]
fn corpus_regen_is_stable_and_matches_committed_goldens() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        let out = bfp()
            .args(["corpus", "regen", "--dir"])
            .arg(dir)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
    }
    let committed = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus");
    for case in corpus::cases() {
        let name = format!("{}.golden.txt", case.name);
        let a = std::fs::read(dir_a.path().join(&name)).unwrap();
        let b = std::fs::read(dir_b.path().join(&name)).unwrap();
        let c = std::fs::read(committed.join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between consecutive runs");
        assert_eq!(a, c, "{name} differs from the committed fixture");
    }
}

#[test]
fn verify_almost_variant_and_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let case = corpus::example_nonexpansive();
    let space = dir.path().join("a_space.json");
    let map = dir.path().join("a_map.json");
    let coeffs = dir.path().join("a_coeffs.json");
    write_json(&space, &SpaceFile::from_space(&case.almost_space));
    write_json(
        &map,
        &MapFile::from_mapping(&case.almost_space, &case.almost_map),
    );
    write_json(
        &coeffs,
        &CoeffFile::from_parts(&case.almost_coeffs, &case.almost_spec),
    );
    let out = bfp()
        .env("BFP_THREADS", "1")
        .args(["verify", "--almost", "--space"])
        .arg(&space)
        .arg("--map")
        .arg(&map)
        .arg("--coeffs")
        .arg(&coeffs)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("holds: true"));
}

#[test]
fn report_combines_the_analyses() {
    let dir = tempfile::tempdir().unwrap();
    let fx = example_fixtures(dir.path());
    let out = bfp()
        .args(["report", "--space"])
        .arg(&fx.space)
        .arg("--map")
        .arg(&fx.map)
        .arg("--coeffs")
        .arg(&fx.coeffs)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("axioms: separation true"));
    assert!(stdout.contains("fixed points: left [e1], right [f1]"));
    assert!(stdout.contains("weakly picard: false"));
    assert!(stdout.contains("no uniqueness claim"));
}
