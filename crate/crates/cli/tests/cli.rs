use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use predictability::machine::MooreMachine;
use predictability::BitSeq;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_predictability"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// The numeric value of `key` in a report printed as text.
fn quantity(report: &str, key: &str) -> f64 {
    let prefix = format!("quantity {key} = ");
    let line = report.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("no {key} in\n{report}"));
    match line.split_once(" (") {
        Some((_, f)) => f.trim_end_matches(')').parse().unwrap(),
        None => line.parse().unwrap(),
    }
}

fn assert_single_line_diagnostic(o: &Output, tag: &str) {
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("error[{tag}]: ")), "{err}");
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn estimate_on_zeros_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("zeros.bits"), BitSeq::zeros(2000).to_file_string()).unwrap();
    let o = run(dir.path(), &["estimate", "--input", "zeros.bits", "--class", "fsm:2", "--n", "1024"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# predictability "));
    assert!(out.lines().nth(1).unwrap() == "level,n,value_num,value_den,best_machine_id");
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][..4], ["1", "1024", "0", "1"]);
}

#[test]
fn estimate_on_bernoulli_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let g = run(dir.path(), &["bernoulli-gen", "--p", "0.3", "--n", "50000", "--seed", "11", "--output", "b.bits"]);
    assert!(g.status.success());
    let bits = fs::read_to_string(dir.path().join("b.bits")).unwrap();
    assert!(!bits.starts_with('#'), "bit files carry no header");
    let o = run(dir.path(), &["estimate", "--input", "b.bits", "--hierarchy", "fsm:2", "--checkpoints", "10000,50000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let v = r[2].parse::<f64>().unwrap() / r[3].parse::<f64>().unwrap();
        assert!((v - 0.3).abs() < 0.02, "{r:?}");
    }
}

#[test]
fn oversized_class_is_a_capacity_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.bits"), "0101\n").unwrap();
    let o = run(dir.path(), &["estimate", "--input", "a.bits", "--class", "fsm:9"]);
    assert_eq!(o.status.code(), Some(3));
    assert_single_line_diagnostic(&o, "capacity");
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.bits"), "01x1\n").unwrap();
    let o = run(dir.path(), &["estimate", "--input", "bad.bits", "--class", "fsm:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_single_line_diagnostic(&o, "parse");
    assert!(stderr(&o).contains("byte 2"));

    let o = run(dir.path(), &["estimate", "--input", "missing.bits", "--class", "fsm:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_single_line_diagnostic(&o, "io");

    let o = run(dir.path(), &["estimate", "--input", "bad.bits", "--class", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(dir.path(), &["synthesize", "--target", "3/4", "--len", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert_single_line_diagnostic(&o, "input");

    let o = run(dir.path(), &["synthesize", "--target", "one quarter", "--len", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert_single_line_diagnostic(&o, "usage");
}

#[test]
fn transform_examples() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.bits"), "011010\n").unwrap();
    for (op, want) in [("p0", "00\n"), ("p1", "10\n"), ("p2", "11\n"), ("s1", "10\n"), ("s2", "01\n")] {
        let o = run(dir.path(), &["transform", "--input", "a.bits", "--op", op]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(stdout(&o), want, "{op}");
    }
    let o = run(dir.path(), &["transform", "--input", "a.bits", "--op", "select"]);
    assert_eq!(o.status.code(), Some(2));
    assert_single_line_diagnostic(&o, "usage");
}

#[test]
fn select_with_periodic_machine() {
    let dir = tempfile::tempdir().unwrap();
    let periodic = predictability::combinators::make_periodic(&"0011".parse().unwrap()).unwrap();
    fs::write(dir.path().join("p.machine"), periodic.to_text()).unwrap();
    let a: BitSeq = "110100111010".parse().unwrap();
    fs::write(dir.path().join("a.bits"), a.to_file_string()).unwrap();
    let o = run(dir.path(), &["transform", "--input", "a.bits", "--op", "select", "--machine", "p.machine", "--output", "s.bits"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got = fs::read_to_string(dir.path().join("s.bits")).unwrap();
    let want: String = [2, 3, 6, 7, 10, 11].iter().map(|&i| if a.get(i) { '1' } else { '0' }).collect();
    assert_eq!(got.trim(), want);
    // The machine file round-trips through the parser.
    let text = fs::read_to_string(dir.path().join("p.machine")).unwrap();
    assert_eq!(MooreMachine::parse_text(&text).unwrap(), periodic);
}

#[test]
fn synthesize_zero_target_gives_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["synth", "--target", "0", "--len", "1000", "--output", "z.bits", "--plan", "z.plan"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bits = BitSeq::parse_bytes(&fs::read(dir.path().join("z.bits")).unwrap()).unwrap();
    assert_eq!(bits, BitSeq::zeros(1000));
    let plan = fs::read_to_string(dir.path().join("z.plan")).unwrap();
    assert!(plan.starts_with("# predictability "));
    let parsed = predictability::synthesis::SynthesisPlan::parse_text(&plan).unwrap();
    assert_eq!(parsed.total_len(), 1000);
}

#[test]
fn short_synthesis_reports_the_needed_length() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["synthesize", "--target", "0.25", "--len", "100", "--output", "x.bits"]);
    assert_eq!(o.status.code(), Some(3));
    assert_single_line_diagnostic(&o, "capacity");
    assert!(stderr(&o).contains("minimum feasible"));
    assert!(!dir.path().join("x.bits").exists());
}

#[test]
fn small_axiom_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify-axioms", "--states", "2", "--len", "8", "--trials", "5", "--seed", "7", "--csv", "r.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# predictability 0.1.0 verify-axioms states=2 len=8 trials=5 seed=7\n"));
    assert!(text.trim_end().ends_with("overall = true"));
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("section,key,value,holds,margin,uses,note"));
}

#[test]
fn bernoulli_verdict_and_margin() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify-bernoulli", "--p", "0.3", "--n", "200000", "--seed", "7", "--report", "r.txt"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("r.txt")).unwrap();
    assert!(text.contains("margin="));
    assert!((quantity(&text, "I_class") - 0.3).abs() <= 0.01);
}

#[test]
fn false_verdict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // Sampling noise at this length dwarfs the tolerance.
    let o = run(dir.path(), &["verify-bernoulli", "--p", "0.3", "--n", "200", "--seed", "1", "--tol", "0.000001"]);
    assert_eq!(o.status.code(), Some(1));
    assert_single_line_diagnostic(&o, "verdict");
    assert!(stdout(&o).contains("overall = false"));
}

#[test]
fn hierarchy_check_with_different_tops_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.bits"), "0110101101\n").unwrap();
    let o = run(dir.path(), &["hierarchy-check", "--input", "a.bits", "--h1", "fsm:1", "--h2", "fsm:2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["hierarchy-check", "--input", "a.bits", "--h1", "fsm:2", "--h2", "curated-F1+fsm:1,fsm:2"]);
    assert_eq!(o.status.code(), Some(2), "curated-F1 is not inside fsm:2");
    let o = run(dir.path(), &["hierarchy-check", "--input", "a.bits", "--h1", "fsm:1,fsm:2", "--h2", "fsm:2"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["--help"]).status.success());
    let v = run(dir.path(), &["--version"]);
    assert!(v.status.success());
    assert!(stdout(&v).contains("0.1.0"));
    let o = run(dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
}
