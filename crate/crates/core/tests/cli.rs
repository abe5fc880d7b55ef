//! The binary end to end: exit codes, byte-identical reruns, and printed
//! numbers re-checked after parsing the CSV back.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use beliefspace::catalog;
use beliefspace::cli::{load_model, Model};
use beliefspace::dp::{limit_value_lp, value_theta_mdp};
use beliefspace::metric::dstar_distance;
use beliefspace::Evaluation;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beliefspace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn model(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("models")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn col(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name}"))
    }

    fn num(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.col(name)].parse().unwrap()
    }

    fn lookup(&self, key: &str) -> f64 {
        let row = self.rows.iter().position(|r| r[0] == key).unwrap();
        self.rows[row][1].parse().unwrap()
    }
}

fn parse(out: &Output) -> Csv {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(!text.contains('\r'));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    Csv { header, rows }
}

fn ok(args: &[&str]) -> Csv {
    let out = bin(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    parse(&out)
}

fn code(args: &[&str]) -> (i32, String) {
    let out = bin(args);
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn tmp(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn dstar_on_the_signal_example() {
    let t = ok(&["dstar", &model("psi_pair.json"), "--certificates", "50", "--seed", "1"]);
    assert_eq!(t.header, ["quantity", "value"]);
    let (d, kr, cert, pair) = (
        t.lookup("dstar"),
        t.lookup("kr"),
        t.lookup("certificate"),
        t.lookup("pair_distance"),
    );
    assert!(d <= 0.5 + 1e-8);
    assert!(kr >= 11.0 / 12.0 - 1e-8);
    assert!(cert <= d + 1e-8 && (pair - d).abs() <= 1e-8);

    let Model::BeliefDistPair { u, v, .. } = load_model(Path::new(&model("psi_pair.json"))).unwrap() else {
        panic!()
    };
    assert!((dstar_distance(&u, &v).unwrap().0 - d).abs() < 1e-11);
}

#[test]
fn dstar_trivial_pairs() {
    let t = ok(&["dstar", &model("dirac_pair.json")]);
    for q in ["dstar", "kr", "pair_distance"] {
        assert!((t.lookup(q) - 0.8).abs() < 1e-10, "{q}");
    }
    let dir = tempfile::tempdir().unwrap();
    let same = tmp(
        &dir,
        "same.json",
        r#"{"version":"v1","kind":"belief_dist_pair","states":["a","b"],
            "u":[{"point":[0.3,0.7],"weight":0.4},{"point":[1,0],"weight":0.6}],
            "v":[{"point":[1,0],"weight":0.6},{"point":[0.3,0.7],"weight":0.4}]}"#,
    );
    let t = ok(&["dstar", same.to_str().unwrap()]);
    for q in ["dstar", "kr", "certificate", "pair_distance"] {
        assert!(t.lookup(q).abs() < 1e-10, "{q}");
    }
}

#[test]
fn dstar_witness_and_families() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.csv");
    ok(&["dstar", &model("psi_pair.json"), "--witness", w.to_str().unwrap()]);
    let text = std::fs::read_to_string(&w).unwrap();
    assert!(text.starts_with("x,y,alpha,beta\n"));
    assert_eq!(text.lines().count(), 5);

    let (c, err) = code(&[
        "dstar",
        &model("psi_pair.json"),
        "--family",
        &model("aumann_maschler_family.json"),
    ]);
    assert_eq!(c, 2);
    assert!(err.contains("matrices"), "{err}");
}

#[test]
fn deterministic_output() {
    let args = ["dstar", &model("psi_pair.json"), "--certificates", "30", "--seed", "9"];
    assert_eq!(bin(&args).stdout, bin(&args).stdout);
    let other = bin(&["dstar", &model("psi_pair.json"), "--certificates", "30", "--seed", "10"]);
    assert!(other.status.success());
}

#[test]
fn value_alternating_cesaro() {
    let t = ok(&[
        "value",
        &model("alternating_house.json"),
        "--theta",
        "cesaro:1000",
        "--start",
        "0",
    ]);
    assert_eq!(t.header, ["start", "theta", "impatience", "value"]);
    assert_eq!(t.rows.len(), 1);
    assert!((t.num(0, "value") - 0.5).abs() <= 5e-4);
    assert!((t.num(0, "impatience") - 1e-3).abs() < 1e-15);
}

#[test]
fn value_even_stage_custom_theta() {
    let dir = tempfile::tempdir().unwrap();
    let weights: Vec<String> = catalog::even_stage_evaluation(3)
        .unwrap()
        .weights()
        .iter()
        .map(|w| format!("{w:.17}"))
        .collect();
    let path = tmp(&dir, "theta.txt", &weights.join("\n"));
    let spec = format!("custom:{}", path.display());
    let t = ok(&["value", &model("alternating_house.json"), "--theta", &spec]);
    assert_eq!(t.num(0, "value"), 0.0);
    assert_eq!(t.num(1, "value"), 1.0);
}

#[test]
fn value_constant_mdp() {
    for theta in ["cesaro:7", "discounted:0.1"] {
        let t = ok(&["value", &model("constant_mdp.json"), "--theta", theta]);
        for r in 0..2 {
            assert!((t.num(r, "value") - 0.3).abs() < 1e-9);
        }
    }
}

#[test]
fn value_matches_library() {
    let Model::FiniteMdp { mdp, .. } = load_model(Path::new(&model("choice_mdp.json"))).unwrap() else {
        panic!()
    };
    let direct = value_theta_mdp(&mdp, &Evaluation::discounted(0.02, 1e-10).unwrap());
    let t = ok(&["value", &model("choice_mdp.json"), "--theta", "discounted:0.02"]);
    for (r, v) in direct.iter().enumerate() {
        assert!((t.num(r, "value") - v).abs() < 1e-11);
    }
}

#[test]
fn value_on_belief_grids() {
    let t = ok(&[
        "value",
        &model("dark_pomdp.json"),
        "--theta",
        "discounted:0.01",
        "--grid",
        "2001",
    ]);
    assert!(t.num(0, "value") >= catalog::dark_oracle(0.01, 200) - 1e-3);
    assert!(t.num(0, "error_bound") > 0.0);
    let t = ok(&[
        "value",
        &model("horner_game.json"),
        "--theta",
        "cesaro:300",
        "--grid",
        "51",
        "--actiongrid",
        "11",
    ]);
    assert!((t.num(0, "value") - 3.0 / 7.0).abs() < 0.05);
}

#[test]
fn limit_value_alternating() {
    let t = ok(&["limit-value", &model("alternating_mdp.json"), "--audit"]);
    assert_eq!(t.rows.len(), 4);
    for r in 0..4 {
        assert!((t.num(r, "v_star") - 0.5).abs() <= 1e-9);
        assert!(t.num(r, "separation") <= 1e-8);
        assert_eq!(t.rows[r][t.col("superharmonic")], "1");
    }
}

#[test]
fn limit_value_matches_long_cesaro() {
    let t = ok(&["limit-value", &model("choice_mdp.json"), "--start", "left"]);
    let v_star = t.num(0, "v_star");
    let c = ok(&[
        "value",
        &model("choice_mdp.json"),
        "--theta",
        "cesaro:2000",
        "--start",
        "left",
    ]);
    assert!((v_star - c.num(0, "value")).abs() <= 0.02);
    let Model::FiniteMdp { mdp, .. } = load_model(Path::new(&model("choice_mdp.json"))).unwrap() else {
        panic!()
    };
    assert!((limit_value_lp(&mdp, 0).unwrap().0 - v_star).abs() < 1e-11);
    // The printed certificate satisfies the superharmonic inequalities.
    let w: Vec<f64> = (0..3).map(|r| t.num(r, "w")).collect();
    let h: Vec<f64> = (0..3).map(|r| t.num(r, "h")).collect();
    for k in 0..3 {
        for a in 0..2 {
            let ew: f64 = mdp.q(k, a).iter().zip(&w).map(|(q, x)| q * x).sum();
            let eh: f64 = mdp.q(k, a).iter().zip(&h).map(|(q, x)| q * x).sum();
            assert!(ew <= w[k] + 1e-9);
            assert!(mdp.g(k, a) + eh <= w[k] + h[k] + 1e-9);
        }
    }
}

#[test]
fn limit_value_constant() {
    let t = ok(&["limit-value", &model("constant_mdp.json")]);
    for r in 0..t.rows.len() {
        assert!((t.num(r, "v_star") - 0.3).abs() < 1e-9);
    }
}

#[test]
fn examples_ex39_and_infini() {
    let t = ok(&["examples", "ex39", "--n", "50"]);
    assert_eq!(t.header, ["n", "v_n_0", "v_n_1", "reference"]);
    assert_eq!(t.rows.len(), 50);
    let t = ok(&["examples", "infini", "--lambda", "0.01", "--l", "2"]);
    assert_eq!(t.header, ["lambda", "value", "closed_form", "abs_err"]);
    assert!(t.num(0, "abs_err") <= 2e-3);
}

#[test]
fn examples_write_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let res = bin(&["examples", "ex39", "--n", "4", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    assert!(res.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(
        text,
        "n,v_n_0,v_n_1,reference\n1,1,0,0.5\n2,0.5,0.5,0.5\n3,0.666666666667,0.333333333333,0.5\n4,0.5,0.5,0.5\n"
    );
}

#[test]
fn examples_report_tolerance_failures() {
    // A 5-point grid is far too coarse for the dark example's asymptotics.
    let (c, err) = code(&["examples", "dark", "--lambda", "0.0001", "--grid", "5"]);
    assert_eq!(c, 1, "{err}");
}

#[test]
fn examples_horner_small() {
    let t = ok(&[
        "examples",
        "horner",
        "--p",
        "0.6",
        "--grid",
        "51",
        "--actiongrid",
        "11",
        "--n",
        "300",
    ]);
    let last = t.rows.len() - 1;
    assert_eq!(t.num(last, "n"), 300.0);
    assert!((t.num(last, "value") - 3.0 / 7.0).abs() < 0.02);
}

#[test]
fn cav_of_the_fixed_state_game() {
    let t = ok(&["cav", &model("aumann_maschler_family.json"), "--grid", "11"]);
    assert_eq!(t.header, ["p_s1", "p_s2", "u", "cav_u"]);
    for r in 0..t.rows.len() {
        let p = t.num(r, "p_s1");
        assert!((t.num(r, "cav_u") - p * (1.0 - p)).abs() < 1e-9);
    }
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&["dstar", missing.to_str().unwrap()]).0, 2);
    assert_eq!(code(&["examples", "unknown"]).0, 2);
    assert_eq!(
        code(&[
            "value",
            &model("alternating_house.json"),
            "--theta",
            "cesaro:10",
            "--start",
            "9"
        ])
        .0,
        2
    );
    assert_eq!(
        code(&["value", &model("alternating_house.json"), "--theta", "geometric:3"]).0,
        2
    );
    assert_eq!(code(&["dstar", &model("alternating_mdp.json")]).0, 2);

    let bad_field = tmp(
        &dir,
        "bad.json",
        r#"{"version":"v1","kind":"belief_dist_pair","states":["a","b"],
            "u":[{"point":[0.3,0.7],"weight":1}],"v":[{"point":[1,0],"wieght":1}]}"#,
    );
    let (c, err) = code(&["dstar", bad_field.to_str().unwrap()]);
    assert_eq!(c, 2);
    assert!(err.contains("wieght"), "{err}");

    let bad_point = tmp(
        &dir,
        "point.json",
        r#"{"version":"v1","kind":"belief_dist_pair","states":["a","b"],
            "u":[{"point":[0.3,0.6],"weight":1}],"v":[{"point":[1,0],"weight":1}]}"#,
    );
    let (c, err) = code(&["dstar", bad_point.to_str().unwrap()]);
    assert_eq!(c, 2);
    assert!(err.contains("u[0].point"), "{err}");

    let no_version = tmp(
        &dir,
        "nov.json",
        r#"{"kind":"matrix_family","states":["a"],"matrices":[[[1]]]}"#,
    );
    let (c, err) = code(&["cav", no_version.to_str().unwrap()]);
    assert_eq!(c, 2);
    assert!(err.contains("version"), "{err}");
}

#[test]
fn sample_models_all_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("models");
    let mut kinds = std::collections::BTreeSet::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let m = load_model(&entry.unwrap().path()).unwrap();
        kinds.insert(m.kind().name());
    }
    assert_eq!(kinds.len(), 6);
}
