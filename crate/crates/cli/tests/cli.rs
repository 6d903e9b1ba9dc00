use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn w1plus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_w1plus")).args(args).output().unwrap()
}

fn scenario(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn entropy_on_a_chain() {
    let dir = TempDir::new().unwrap();
    let s = scenario(
        dir.path(),
        "s.json",
        r#"{"mode": "entropy", "graph": {"path": 4}, "f0": [[0, 1.0]], "f1": [[3, 1.0]],
            "grid": 101, "renyi": [0.5], "potential": {"v": [0, 1, 4, 9], "k": 2}, "out": "h.csv"}"#,
    );
    let o = w1plus(&["run", &s]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("h.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,H,Hpp_analytic,Hpp_fd,lower_bound_general,w_squared,renyi_0.5"));
    assert_eq!(lines.count(), 101);
    for row in csv.lines().skip(1) {
        let hpp = row.split(',').nth(2).unwrap();
        if !hpp.is_empty() {
            assert!(hpp.parse::<f64>().unwrap() >= 0.0);
        }
    }
    assert!(stdout(&o).contains("PASS relative entropy bound"));
}

#[test]
fn tensor_on_a_grid() {
    let dir = TempDir::new().unwrap();
    let s = scenario(
        dir.path(),
        "s.json",
        r#"{"mode": "tensor", "graph": {"product": [{"path": 3}, {"path": 2}]},
            "f0": [[[0, 0], 1.0]], "f1": [[[2, 1], 1.0]], "grid": 21}"#,
    );
    let o = w1plus(&["run", &s]);
    assert_eq!(code(&o), 0);
    let csv = stdout(&o);
    assert!(csv.starts_with("t,Hpp,slice_sum_axis1,slice_sum_axis2,involutive_edge_bound,satisfied\n"));
    assert_eq!(csv.lines().count(), 20);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn tensor_needs_a_product() {
    let dir = TempDir::new().unwrap();
    let s =
        scenario(dir.path(), "s.json", r#"{"mode": "tensor", "graph": {"path": 3}, "f0": [[0, 1]], "f1": [[2, 1]]}"#);
    assert_eq!(code(&w1plus(&["run", &s])), 2);
}

#[test]
fn binomial_reports() {
    let dir = TempDir::new().unwrap();
    let translation = scenario(
        dir.path(),
        "a.json",
        r#"{"mode": "binomial-w2", "graph": {"path": 4}, "f0": [[0, 0.5], [1, 0.5]], "f1": [[2, 0.5], [3, 0.5]]}"#,
    );
    let o = w1plus(&["run", &translation, "--grid", "51"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",true,true,true,true")));

    let mixture = scenario(
        dir.path(),
        "b.json",
        r#"{"mode": "binomial-w2", "graph": {"path": 3}, "f0": [[0, 1]], "f1": [[0, 0.5], [2, 0.5]]}"#,
    );
    let o = w1plus(&["run", &mixture]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stderr).unwrap().contains("theorem does not apply"));

    let reversed = scenario(
        dir.path(),
        "c.json",
        r#"{"mode": "binomial-w2", "graph": {"path": 4}, "f0": [[3, 1]], "f1": [[0, 1]]}"#,
    );
    assert_eq!(code(&w1plus(&["run", &reversed])), 1);
}

#[test]
fn orient_geodesic_and_bbtest() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("edges.txt"), "# square\n10 20\n20 30\n30 40\n40 10\n").unwrap();
    fs::write(dir.path().join("f0.txt"), "10 1\n").unwrap();
    let orient = scenario(
        dir.path(),
        "o.json",
        r#"{"mode": "orient", "graph": {"edge_list": "edges.txt"}, "f0": {"file": "f0.txt"}, "f1": [[30, 1]]}"#,
    );
    let o = w1plus(&["run", &orient]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().filter(|l| l.contains("->")).count(), 4);
    assert!(stdout(&o).contains("EG 2"));

    let geo = scenario(
        dir.path(),
        "g.json",
        r#"{"mode": "geodesic", "graph": {"hypercube": 2}, "f0": [[0, 0.5], [1, 0.5]], "f1": [[3, 1]], "grid": [0, 0.5, 1]}"#,
    );
    let o = w1plus(&["run", &geo]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("t,vertex,f_t\n"));

    let bb = scenario(
        dir.path(),
        "b.json",
        r#"{"mode": "bbtest", "graph": {"cycle": 6}, "f0": [[0, 1]], "f1": [[3, 1]], "samples": 50, "seed": 3}"#,
    );
    let (a, b) = (w1plus(&["run", &bb]), w1plus(&["run", &bb]));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 51);
}

#[test]
fn malformed_inputs() {
    let dir = TempDir::new().unwrap();
    let cases = [
        "not json",
        r#"{"mode": "entropy", "graph": {"path": 3}, "f0": [[0, 1]], "f1": [[7, 1]]}"#,
        r#"{"mode": "entropy", "graph": {"cycle": 2}, "f0": [[0, 1]], "f1": [[1, 1]]}"#,
        r#"{"mode": "entropy", "graph": {"path": 3}, "f0": [[0, 0.5]], "f1": [[1, 1]]}"#,
        r#"{"mode": "spin", "graph": {"path": 3}, "f0": [[0, 1]], "f1": [[1, 1]]}"#,
    ];
    for (k, json) in cases.iter().enumerate() {
        let s = scenario(dir.path(), &format!("{k}.json"), json);
        assert_eq!(code(&w1plus(&["run", &s])), 2, "case {k}");
    }
    assert_eq!(code(&w1plus(&["run", "/nonexistent/scenario.json"])), 2);
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let s = scenario(
        dir.path(),
        "s.json",
        r#"{"mode": "entropy", "graph": {"hypercube": 3}, "f0": [[0, 0.3], [5, 0.7]], "f1": [[7, 0.6], [2, 0.4]], "grid": 21}"#,
    );
    let (a, b) = (w1plus(&["run", &s]), w1plus(&["run", &s]));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn selftest_and_fault_injection() {
    let o = w1plus(&["selftest", "--seed", "5"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("psi grid"));
    let o = w1plus(&["selftest", "--inject-fault"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("BB equation violated"));
}

#[test]
fn solver_failure_has_its_own_status() {
    let dir = TempDir::new().unwrap();
    let s = scenario(
        dir.path(),
        "s.json",
        r#"{"mode": "geodesic", "graph": {"hypercube": 2}, "f0": [[0, 0.3], [1, 0.7]], "f1": [[3, 0.6], [2, 0.4]],
            "tolerances": {"solver": 1e-300}}"#,
    );
    let o = w1plus(&["run", &s]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8(o.stderr).unwrap().contains("did not converge"));
}

#[test]
fn bundled_scenarios_pass() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let o = w1plus(&["run", path.to_str().unwrap(), "--grid", "21"]);
            assert_eq!(code(&o), 0, "{}", path.display());
            count += 1;
        }
    }
    assert!(count >= 5);
}
