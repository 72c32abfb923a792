use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const TAU: &str = "species phi boson pair 1\n\
                   species psi fermion pair 1\n\
                   term 1 0 : : phi@0 phi*@0\n\
                   term 1 0 : psi@0 psi*@0 :\n";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supernorm")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn setup(files: &[(&str, &str)]) -> TempDir {
    let dir = TempDir::new().unwrap();
    for (name, text) in files {
        std::fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn printed_value(o: &Output) -> f64 {
    let out = stdout(o);
    let line = out.lines().find_map(|l| l.strip_prefix("value ")).expect("value line");
    line.parse().unwrap()
}

#[test]
fn exact_suites_pass() {
    let dir = setup(&[]);
    let o = run(dir.path(), &["verify", "--suite", "exact", "--trials", "4", "--out", "reports"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let jsonl = std::fs::read_to_string(dir.path().join("reports/reports.jsonl")).unwrap();
    assert!(jsonl.lines().count() > 10);
    assert!(dir.path().join("reports/summary.csv").exists());
    assert!(stdout(&o).contains("wick-heat"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let dir = setup(&[]);
    let o = run(dir.path(), &["verify", "--suite", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no-such-suite"));
}

#[test]
fn wrapping_neighbourhood_names_the_guard() {
    let dir = setup(&[("run.toml", "[torus]\nd = 1\nr = 2\nm = 2\n\n[regulator]\nlarge_field = true\n")]);
    let o = run(dir.path(), &["--config", "run.toml", "verify", "--suite", "gram"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("regulator.large_field") && err.contains("diameter guard"), "{err}");
}

#[test]
fn config_errors_name_the_field() {
    let dir = setup(&[("typo.toml", "[norm]\nhh = 1.0\n"), ("neg.toml", "[norm]\nh = -2.0\n")]);
    let o = run(dir.path(), &["--config", "typo.toml", "verify"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("hh"), "{}", stderr(&o));
    let o = run(dir.path(), &["--config", "neg.toml", "verify"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("norm.h"));
}

#[test]
fn tau_norm_fixtures() {
    let dir = setup(&[("tau.el", TAU), ("zero.f", ""), ("one.f", "value phi@0 1 0\n"), ("run.toml", "[norm]\nh = 1.0\n")]);
    let o = run(dir.path(), &["--config", "run.toml", "norm", "tau.el", "zero.f"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!((printed_value(&o) - 2.0).abs() <= 1e-12 * 2.0);
    assert!(dir.path().join("certificate.json").exists());
    for mode in ["exact", "lp"] {
        let o = run(dir.path(), &["--config", "run.toml", "--mode", mode, "norm", "tau.el", "one.f", "--certificate", "c.json"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!((printed_value(&o) - 5.0).abs() <= 1e-12 * 5.0);
    }
}

#[test]
fn zero_element_has_zero_norm() {
    let dir = setup(&[("z.el", "species phi boson pair 1\n"), ("zero.f", "")]);
    let o = run(dir.path(), &["norm", "z.el", "zero.f"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(printed_value(&o), 0.0);
}

#[test]
fn certificate_reverifies_from_the_file() {
    let dir = setup(&[("tau.el", TAU), ("one.f", "value phi@0 1 0\n")]);
    let o = run(dir.path(), &["--out", "out", "norm", "tau.el", "one.f"]);
    assert_eq!(o.status.code(), Some(0));
    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["value"].as_f64(), Some(printed_value(&o)));
    assert!(stdout(&o).contains("recheck relative_error 0e0"));
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = setup(&[("bad.el", "species phi boson pair 1\nterm 1 0 : : phi@7\n"), ("zero.f", "")]);
    let o = run(dir.path(), &["norm", "bad.el", "zero.f"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

fn expect(dir: &TempDir, args: &[&str]) -> String {
    let o = run(dir.path(), args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    stdout(&o)
}

const TWO_SITES: &str = "species phi boson pair 2\nspecies psi fermion pair 2\n";

#[test]
fn expectation_fixtures() {
    let dir = setup(&[
        ("one.el", &format!("{TWO_SITES}term 1 0 : :\n")),
        ("pp.el", &format!("{TWO_SITES}term 1 0 : : phi*@0 phi@1\n")),
        ("ff.el", &format!("{TWO_SITES}term 1 0 : psi*@0 psi@0 psi*@1 psi@1 :\n")),
        ("dec.toml", "[covariance]\nkind = \"decaying\"\nkappa = \"1/3\"\n"),
        ("inline.toml", "[covariance]\nkind = \"inline\"\nboson = [[2, \"1/5\"], [\"1/5\", 1]]\nfermion = [[1, 0], [0, 1]]\n"),
    ]);
    assert_eq!(expect(&dir, &["expect", "one.el"]), format!("{TWO_SITES}term 1 0 :  : \n"));
    assert_eq!(expect(&dir, &["--config", "dec.toml", "expect", "pp.el"]), format!("{TWO_SITES}term 1/3 0 :  : \n"));
    assert_eq!(expect(&dir, &["--config", "inline.toml", "expect", "pp.el"]), format!("{TWO_SITES}term 1/5 0 :  : \n"));
    assert_eq!(expect(&dir, &["expect", "ff.el"]), format!("{TWO_SITES}term 1 0 :  : \n"));
}

#[test]
fn expectation_output_round_trips() {
    let dir = setup(&[("pp.el", &format!("{TWO_SITES}term 3/2 1 : psi*@1 : phi*@0 phi@1 phi@0\nterm 1 0 : : phi*@1 phi@1\n"))]);
    let o = run(dir.path(), &["expect", "--theta", "pp.el", "-o", "e.el"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // a second pass reads the written file back
    let o = run(dir.path(), &["expect", "e.el", "-o", "e2.el"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(std::fs::read_to_string(dir.path().join("e2.el")).unwrap().starts_with(TWO_SITES));
}

#[test]
fn truncated_series_are_rejected() {
    let dir = setup(&[("s.el", "species phi boson pair 1\ntrunc 4\nterm 1 0 : : phi@0\n")]);
    let o = run(dir.path(), &["expect", "s.el"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not a polynomial"));
}

#[test]
fn reports_are_deterministic() {
    let dir = setup(&[("run.toml", "seed = 11\nsuites = [\"convolution\", \"tau-norm\"]\ntrials = 5\n")]);
    let strip = |o: &Output| -> Vec<serde_json::Value> {
        stdout(o)
            .lines()
            .map(|l| {
                let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
                v.as_object_mut().unwrap().remove("runtime_ms");
                v
            })
            .collect()
    };
    let a = run(dir.path(), &["--config", "run.toml", "verify"]);
    let b = run(dir.path(), &["--config", "run.toml", "--workers", "2", "verify"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(strip(&a).len(), 2);
}

#[test]
fn sample_writes_csv() {
    let dir = setup(&[(
        "mc.toml",
        "seed = 3\n[torus]\nd = 1\nr = 2\nm = 3\n[covariance]\nkind = \"decaying\"\nkappa = 0.5\n\
         [regulator]\nt = [0.5, 1.0]\nsamples = 500\nblocks = [[0], [0, 1]]\nlarge_field = true\n",
    )]);
    let o = run(dir.path(), &["--config", "mc.toml", "--out", "o", "sample"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mc = std::fs::read_to_string(dir.path().join("o/mc.csv")).unwrap();
    assert_eq!(mc.lines().next(), Some("X,t,estimate,bound"));
    assert_eq!(mc.lines().count(), 5);
    let probes = std::fs::read_to_string(dir.path().join("o/probes.csv")).unwrap();
    assert!(probes.starts_with("X,probe,log_g,log_gtilde"));
}
