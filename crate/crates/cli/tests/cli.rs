use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use quaddel::instance::fixtures::*;
use quaddel::routes::{validate_plan, RoutePlan};
use quaddel::vision::{self, GrayImage};
use quaddel::PdpInstance;
use tempfile::TempDir;

fn quaddel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quaddel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn plan_worked_example() {
    let dir = TempDir::new().unwrap();
    let inst = worked_example();
    let input = write(&dir, "inst.json", &inst.to_json());
    let output = dir.path().join("plan.json");
    let out = quaddel(&["plan", s(&input), "-o", s(&output)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let plan = RoutePlan::from_json(&fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(plan.routes.len(), 1);
    assert_eq!(plan.routes[0].legs.len(), 1);
    assert!((plan.makespan - 5.0).abs() < 1e-9);
    assert!(validate_plan(&inst, &plan).is_ok());
    assert!(stderr(&out).contains("makespan 5.000000"));
}

#[test]
fn plan_without_cuts_matches() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "inst.json", &worked_example().to_json());
    let out = quaddel(&["plan", s(&input), "--no-cuts"]);
    assert_eq!(code(&out), 0);
    let plan = RoutePlan::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!((plan.makespan - 5.0).abs() < 1e-9);
}

#[test]
fn malformed_json_names_location() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.json", "{\"items\": [\n  {\"id\": }\n]}");
    let out = quaddel(&["plan", s(&input)]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("parsing instance") && err.contains("line 2"), "{err}");
}

#[test]
fn missing_file_is_input_error() {
    let out = quaddel(&["plan", "/nonexistent/instance.json"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("reading"));
}

fn far_request() -> PdpInstance {
    PdpInstance::new(
        vec![item("s1", 1.0)],
        vec![request("r1", [500.0, 0.0], &[("s1", 1)])],
        vec![quad("h1", [0.0, 0.0], &[("s1", 1)])],
        vec![],
    )
    .validate()
    .unwrap()
}

#[test]
fn unreachable_request_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "far.json", &far_request().to_json());
    assert_eq!(code(&quaddel(&["plan", s(&input)])), 2);
    assert_eq!(code(&quaddel(&["oracle", s(&input)])), 2);
}

#[test]
fn oracle_matches_plan_and_enforces_limits() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "inst.json", &worked_example().to_json());
    let out = quaddel(&["oracle", s(&input)]);
    assert_eq!(code(&out), 0);
    let plan = RoutePlan::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!((plan.makespan - 5.0).abs() < 1e-6);

    let reqs = (0..5).map(|k| request(&format!("r{k}"), [k as f64, 1.0], &[("s1", -1)])).collect();
    let big = PdpInstance::new(vec![item("s1", 1.0)], reqs, vec![quad("h1", [0.0, 0.0], &[])], vec![]);
    let input = write(&dir, "big.json", &big.to_json());
    assert_eq!(code(&quaddel(&["oracle", s(&input)])), 4);
    let input = write(&dir, "ex.json", &worked_example().to_json());
    assert_eq!(code(&quaddel(&["oracle", s(&input), "--max-legs", "9"])), 4);
}

#[test]
fn fly_single_leg_and_empty_plans() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "inst.json", &worked_example().to_json());
    let plan_path = dir.path().join("plan.json");
    assert_eq!(code(&quaddel(&["plan", s(&input), "-o", s(&plan_path)])), 0);
    let csv = dir.path().join("traj.csv");
    let out = quaddel(&["fly", s(&plan_path), "-o", s(&csv)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), quaddel::flight::CSV_HEADER);
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last.len(), 17);
    let miss = ((last[1] - 3.0).powi(2) + (last[2] - 4.0).powi(2) + (last[3] - 1.5).powi(2)).sqrt();
    assert!(miss < 0.2, "final miss {miss}");

    let empty = write(&dir, "empty.json", &RoutePlan::default().to_json());
    let csv = dir.path().join("empty.csv");
    assert_eq!(code(&quaddel(&["fly", s(&empty), "-o", s(&csv)])), 0);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 1);
}

#[test]
fn absurd_gains_diverge() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "inst.json", &worked_example().to_json());
    let plan_path = dir.path().join("plan.json");
    assert_eq!(code(&quaddel(&["plan", s(&input), "-o", s(&plan_path)])), 0);
    let cfg = write(
        &dir,
        "wild.conf",
        "position.xy.kp = 1e6\nposition.z.kp = 1e6\nattitude.roll.kp = 1e6\nattitude.pitch.kp = 1e6\nattitude.yaw.kp = 1e6\n",
    );
    let out = quaddel(&["fly", s(&plan_path), "-c", s(&cfg), "-o", s(&dir.path().join("t.csv"))]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("diverged"));
}

#[test]
fn edges_square_and_formats() {
    let dir = TempDir::new().unwrap();
    let square = dir.path().join("square.pgm");
    fs::write(&square, vision::fixtures::square(64, 20).to_pgm()).unwrap();
    let out_path = dir.path().join("edges.pgm");
    let stages = dir.path().join("stages");
    let out = quaddel(&["edges", s(&square), "-o", s(&out_path), "--dump-stages", s(&stages)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let edges = GrayImage::from_pgm(&fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(vision::component_count(&edges), 1);
    assert!(!vision::has_thick_block(&edges));
    for name in ["smoothed", "magnitude", "direction", "thinned", "edges"] {
        assert!(stages.join(format!("{name}.pgm")).exists());
    }

    let ascii = write(&dir, "flat.pgm", "P2\n# flat\n4 4\n255\n9 9 9 9\n9 9 9 9\n9 9 9 9\n9 9 9 9\n");
    let out_path = dir.path().join("flat_edges.pgm");
    assert_eq!(code(&quaddel(&["edges", s(&ascii), "-o", s(&out_path)])), 0);
    let bytes = fs::read(&out_path).unwrap();
    assert!(bytes.starts_with(b"P5"));
    assert!(GrayImage::from_pgm(&bytes).unwrap().grid().data.iter().all(|&p| p == 0.0));

    let bad = write(&dir, "bad.pgm", "P7 nonsense");
    assert_eq!(code(&quaddel(&["edges", s(&bad), "-o", s(&out_path)])), 1);
}

#[test]
fn check_defaults_and_failures() {
    let out = quaddel(&["check"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report = String::from_utf8(out.stdout).unwrap();
    assert_eq!(report.lines().filter(|l| l.contains("PASS") || l.contains("FAIL")).count(), 10);

    let dir = TempDir::new().unwrap();
    let heavy = quaddel::config::DEFAULT_QUAD_CONFIG.replace("mass = 1.2", "mass = 2.0");
    let cfg = write(&dir, "heavy.conf", &heavy);
    assert_ne!(code(&quaddel(&["check", "-c", s(&cfg)])), 0);

    let no_mass = quaddel::config::DEFAULT_QUAD_CONFIG.replace("mass = 1.2", "");
    let cfg = write(&dir, "nomass.conf", &no_mass);
    let out = quaddel(&["check", "-c", s(&cfg)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("`mass`"));
}

#[test]
fn fixtures_are_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        assert_eq!(code(&quaddel(&["gen-fixtures", "-o", s(d.path()), "--seed", "5", "--count", "4"])), 0);
    }
    for name in ["instance_000.json", "instance_003.json", "manifest.json", "images/square.pgm"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 5);
    PdpInstance::from_json(&fs::read_to_string(a.path().join("instance_002.json")).unwrap()).unwrap();
}

#[test]
fn dump_model_outputs() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "inst.json", &worked_example().to_json());
    let out = quaddel(&["dump-model", s(&input), "--layout"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.split_whitespace().count(), 37);
    assert_eq!(text.split_whitespace().last(), Some("T"));
    let a = quaddel(&["dump-model", s(&input)]);
    let b = quaddel(&["dump-model", s(&input)]);
    assert_eq!(a.stdout, b.stdout);
    let lp = String::from_utf8(a.stdout).unwrap();
    assert!(lp.starts_with("# columns 37 rows"));
    assert!(lp.contains("col 36 T C 0 inf 1"));
}
