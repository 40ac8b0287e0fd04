use std::process::{Command, Output};

const RUNNING: &str = "x1*x2, x1*x3, x1*x5, x2*x3, x2*x5, x3*x5, x4*x5";
const EXAMPLE_ONE: &str = "x1*x3*x4, x1*x3*x5, x1*x2*x4, x1*x4*x5, x2*x3*x4, x2*x3*x5";

fn conecell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conecell")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_verdicts() {
    let o = conecell(&["check", EXAMPLE_ONE]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "linear quotients: yes; regular: yes; cointerval: no");

    let o = conecell(&["check", RUNNING]);
    assert_eq!(stdout(&o).trim(), "linear quotients: yes; regular: yes; cointerval: yes");

    let o = conecell(&["check", "x1*x2, x3*x4"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "linear quotients: no (witness j=2)");

    let o = conecell(&["check", "--require-cointerval", EXAMPLE_ONE]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(conecell(&["check", "x1*x2, x1"]).status.code(), Some(2));
    assert_eq!(conecell(&["check", "x1*y2"]).status.code(), Some(2));
    assert_eq!(conecell(&["resolve", RUNNING, "--method", "nope"]).status.code(), Some(2));
    assert_eq!(conecell(&["--prime", "4", "betti", RUNNING]).status.code(), Some(2));
}

#[test]
fn resolve_reports_betti_totals() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("res.json");
    let csv = dir.path().join("betti.csv");
    let o = conecell(&["resolve", RUNNING, "-o", json.to_str().unwrap(), "--betti", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("betti totals: 7,11,6,1"));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(doc["ranks"], serde_json::json!([1, 7, 11, 6, 1]));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("i,x1,x2,x3,x4,x5,value"));

    let o = conecell(&["resolve", RUNNING, "--method", "taylor"]);
    assert!(stderr(&o).contains("betti totals: 7,21,35,35,21,7,1"));

    let o = conecell(&["resolve", RUNNING, "--method", "hom"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("betti totals: 7,11,6,1"));

    let o = conecell(&["resolve", EXAMPLE_ONE, "--method", "hom"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cointerval"));
}

#[test]
fn complexes_and_exports() {
    for method in ["ek", "hom"] {
        let o = conecell(&["complex", RUNNING, "--method", method]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stderr(&o).contains("f-vector: 7,11,6,1"));
        let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(doc.is_object());
    }
    let o = conecell(&["complex", "x1, x2, x3", "--format", "off"]);
    let text = stdout(&o);
    assert!(text.starts_with("OFF\n"));
    assert!(text.lines().any(|l| l.trim() == "3 0 1 2"));
    assert_eq!(conecell(&["complex", EXAMPLE_ONE, "--method", "hom"]).status.code(), Some(1));
}

#[test]
fn enumerate_rules_counts_types() {
    let doc = |input: &str| -> serde_json::Value { serde_json::from_str(&stdout(&conecell(&["enumerate-rules", input]))).unwrap() };
    assert!(doc(RUNNING)["types"].as_u64().unwrap() >= 2);
    assert_eq!(doc("x1, x2, x3, x4")["rules"].as_array().unwrap().len(), 1);
    assert_eq!(doc("x1*x2^2*x3")["rules"].as_array().unwrap().len(), 1);
    assert_eq!(conecell(&["enumerate-rules", RUNNING, "--bound", "2"]).status.code(), Some(2));
}

#[test]
fn graph_and_json_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("k35.txt");
    let edges: Vec<String> = (1..=5)
        .flat_map(|a| (a + 1..=5).flat_map(move |b| (b + 1..=5).map(move |c| format!("{a} {b} {c}"))))
        .collect();
    std::fs::write(&g, format!("# complete 3-graph\n3 5\n{}\n", edges.join("\n"))).unwrap();
    let o = conecell(&["check", g.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "linear quotients: yes; regular: yes; cointerval: yes");

    let j = dir.path().join("ideal.json");
    std::fs::write(&j, r#"{"n": 3, "gens": [[1,0,0],[0,1,0]]}"#).unwrap();
    assert_eq!(conecell(&["check", j.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn verify_and_betti() {
    let o = conecell(&["verify", RUNNING]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAILED"));

    let o = conecell(&["--no-prefilter", "betti", RUNNING, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let with_env = Command::new(env!("CARGO_BIN_EXE_conecell"))
        .env("RESOLVE_PRIME", "1048583")
        .args(["betti", RUNNING, "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(stdout(&o), stdout(&with_env));
}

#[test]
fn outputs_are_deterministic() {
    let a = conecell(&["gen-corpus", "--random", "5"]);
    let b = conecell(&["gen-corpus", "--random", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.lines().any(|l| l.contains("running-example")));
    assert!(text.lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
    assert_eq!(conecell(&["complex", RUNNING]).stdout, conecell(&["complex", RUNNING]).stdout);
}
