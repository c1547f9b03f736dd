use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mnls_cli::config::{ModelSelection, RunConfig, Tolerances};
use mnls_core::geometry::ConvexDomain;
use mnls_core::model::ExprModelSpec;
use proptest::prelude::*;

fn mnls(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mnls"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn models_lists_the_registry() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mnls(&["models"], tmp.path());
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for key in ["torsion", "mnls-power", "heisenberg", "relativistic", "counterexample"] {
        assert!(text.contains(key), "{key} missing");
    }
    let out = mnls(&["models", "--json"], tmp.path());
    let list: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(list.as_array().unwrap().len() >= 9);
}

#[test]
fn check_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&mnls(&["check", "--model", "torsion"], tmp.path())), 0);
    assert_eq!(code(&mnls(&["check", "--model", "power:p=2"], tmp.path())), 1);
    let out = mnls(&["check", "--model", "counterexample:mu=0.3", "--out", "cex"], tmp.path());
    assert_eq!(code(&out), 1);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("cex/check.json")).unwrap()).unwrap();
    assert_eq!(report["verdict_i"]["verdict"], "fail");
    assert_eq!(report["verdict_ii"]["verdict"], "fail");
    assert!(tmp.path().join("cex/config.snapshot").exists());
}

#[test]
fn configuration_errors_exit_64() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&mnls(&["check", "--model", "no-such-model"], tmp.path())), 64);
    assert_eq!(code(&mnls(&["solve", "--h", "0"], tmp.path())), 64);
    assert_eq!(code(&mnls(&["solve", "--domain", "triangle"], tmp.path())), 64);
    assert_eq!(code(&mnls(&["frobnicate"], tmp.path())), 64);
    fs::write(tmp.path().join("bad.toml"), "bogus = 1\n").unwrap();
    let out = mnls(&["check", "--config", "bad.toml"], tmp.path());
    assert_eq!(code(&out), 64);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    assert_eq!(code(&mnls(&["check", "--config", "missing.toml"], tmp.path())), 64);
}

#[test]
fn help_documents_exit_codes_and_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mnls(&["--help"], tmp.path());
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("64 configuration error"));
    assert!(text.contains("eta,chain_holds"));
}

#[test]
fn config_file_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.toml"), "model = \"power:p=2\"\n").unwrap();
    let out = mnls(&["check", "--model", "torsion", "--config", "run.toml", "--out", "o"], tmp.path());
    assert_eq!(code(&out), 1);
    let snap = fs::read_to_string(tmp.path().join("o/config.snapshot")).unwrap();
    assert!(snap.contains("power:p=2"));
}

#[test]
fn transform_identities() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mnls(&["transform", "--model", "mnls-power:q=0.5", "--out", "t"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(tmp.path().join("t/g.csv").exists());
    let out = mnls(&["transform", "--model", "heisenberg", "--out", "t2"], tmp.path());
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("saturation"));
}

#[test]
fn solver_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("short.toml"), "[tolerances]\nmax_iter = 1\n").unwrap();
    let out = mnls(
        &["solve", "--model", "shifted-power:p=0.5", "--h", "1/8", "--config", "short.toml"],
        tmp.path(),
    );
    assert_eq!(code(&out), 3, "{}", stdout(&out));
}

#[test]
fn verify_examples_pass() {
    let tmp = tempfile::tempdir().unwrap();
    // a ≡ 1, f ≡ 1 on the disk: φ(u) = 2(√u − 1)
    let out = mnls(&["verify", "--h", "1/16", "--out", "disk"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("disk/concavity.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["pairs_checked"], 100_000);

    let out = mnls(
        &["verify", "--domain", "stadium:alpha=12", "--h", "1/16", "--pairs", "20000", "--out", "st"],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let out = mnls(
        &["verify", "--model", "mnls-power:q=0.5", "--h", "1/32", "--pairs", "20000", "--out", "q"],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(tmp.path().join("q/intermediate.csv").exists());
}

#[test]
fn outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    for dir in ["a", "b"] {
        let out = mnls(
            &["verify", "--model", "mnls-power:q=0.5", "--h", "1/16", "--pairs", "5000", "--out", dir],
            tmp.path(),
        );
        assert_eq!(code(&out), 0);
    }
    let mut compared = 0;
    for entry in fs::read_dir(tmp.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "config.snapshot" {
            continue;
        }
        let a = fs::read(tmp.path().join("a").join(&name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs");
        compared += 1;
    }
    assert!(compared >= 4);
}

#[test]
fn snapshot_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mnls(&["check", "--model", "shifted-power:p=0.5", "--out", "first"], tmp.path());
    let first = fs::read(tmp.path().join("first/check.json")).unwrap();
    let snap = fs::read_to_string(tmp.path().join("first/config.snapshot")).unwrap();
    // rerun from the snapshot into a fresh directory
    let moved = snap.replace("output = \"first\"", "output = \"second\"");
    fs::write(tmp.path().join("again.toml"), moved).unwrap();
    let again = mnls(&["check", "--config", "again.toml"], tmp.path());
    assert_eq!(code(&out), code(&again));
    assert_eq!(first, fs::read(tmp.path().join("second/check.json")).unwrap());
}

#[test]
fn counterexample_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mnls(&["counterexample", "--alpha", "3"], tmp.path());
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha = 3"));

    let out = mnls(
        &["counterexample", "--alpha", "12", "--h", "1/16", "--eta-points", "9", "--out", "cx"],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let dir = tmp.path().join("cx");
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["reproduced"], true);
    assert!(summary["multiplier"].as_f64().unwrap() > 0.25);
    assert_eq!(summary["u_not_quasiconcave"], true);
    assert_eq!(summary["v_quasiconcave"], true);
    assert_eq!(summary["induced_source_fails_i"], true);
    assert_eq!(summary["induced_source_fails_ii"], true);

    let scan = fs::read_to_string(dir.join("eta_scan.csv")).unwrap();
    assert_eq!(scan.lines().count(), 10);
    let witness = fs::read_to_string(dir.join("witness.csv")).unwrap();
    assert_eq!(witness.lines().count(), 4);

    // every SVG is self-contained and has its sidecar
    let svg = fs::read_to_string(dir.join("overlay.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("href"));
    let sidecar = fs::read_to_string(dir.join("overlay.csv")).unwrap();
    let triple_rows = sidecar.lines().filter(|l| l.starts_with("triple,")).count();
    assert_eq!(triple_rows, 3);
    assert_eq!(
        svg.matches("<circle").count(),
        sidecar.lines().filter(|l| !l.starts_with("boundary") && !l.starts_with("layer")).count()
    );
}

#[test]
fn phi_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mnls(&["plot", "--out", "p"], tmp.path());
    assert_eq!(code(&out), 0);
    let dir = tmp.path().join("p");
    for stem in ["phi", "phi_origin"] {
        assert!(dir.join(format!("{stem}.svg")).exists());
        assert!(dir.join(format!("{stem}.csv")).exists());
    }
    let csv = fs::read_to_string(dir.join("phi.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let (q, t, plain, weighted) = (cols[0], cols[1], cols[2], cols[3]);
        if q == 0.0 {
            assert!((plain - 2.0 * (t.sqrt() - 1.0)).abs() < 1e-8, "t={t}");
        }
        if t == 3.0 {
            assert!(weighted > plain, "q={q}");
        }
    }
    assert_eq!(csv.lines().count(), 1 + 4 * 300);
}

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    (
        (1u32..200).prop_map(|k| 1.0 / k as f64),
        any::<u64>(),
        1usize..1_000_000,
        0i64..5,
        (0.01f64..1.0, 1.0f64..50.0),
        prop::bool::ANY,
        prop::collection::vec(0.0f64..0.99, 0..6),
        prop_oneof![
            Just(ConvexDomain::unit_disk()),
            (0.0f64..20.0).prop_map(ConvexDomain::stadium),
            (0.1f64..5.0, 0.1f64..5.0).prop_map(|(a, b)| ConvexDomain::Ellipse { semi_x: a, semi_y: b }),
        ],
        prop_oneof![
            Just(ModelSelection::Registry("mnls-power:q=0.5".into())),
            Just(ModelSelection::Inline(ExprModelSpec {
                name: "x".into(),
                f: "t^0.5".into(),
                a: "1 + t^2".into(),
                df: None,
                da: Some("2*t".into()),
                antiderivative: None,
                nu: Some(1.0),
                beta: None,
                t_cap: Some(100.0),
            })),
        ],
        prop::option::of(1e-8f64..1e-2),
    )
        .prop_map(|(h, seed, pairs, band, (lo, hi), scan, q_list, domain, model, conc)| RunConfig {
            h,
            seed,
            pairs,
            band,
            mu_bracket: [lo, hi],
            eta_scan: scan,
            q_list,
            domain,
            model,
            tolerances: Tolerances {
                concavity: conc,
                ..Tolerances::default()
            },
            ..RunConfig::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn config_round_trip_is_lossless(cfg in config_strategy()) {
        let text = cfg.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml(), text);
    }
}
