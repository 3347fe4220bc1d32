use std::path::{Path, PathBuf};
use std::process::Command;

use flycheck::{generate_herman, generate_philosophers, run, EngineKind, Outcome, PropertySource, RunConfig};
use flycheck_core::Verdict;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn flycheck(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_flycheck"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn corpus_models_match_generators() {
    for n in [3, 5, 7, 9] {
        let file = std::fs::read_to_string(corpus(&format!("herman{n}.pm"))).unwrap();
        assert_eq!(file, generate_herman(n).unwrap(), "herman{n}.pm is stale");
    }
    for n in [3, 4, 5] {
        let file = std::fs::read_to_string(corpus(&format!("phil{n}.pm"))).unwrap();
        assert_eq!(file, generate_philosophers(n).unwrap(), "phil{n}.pm is stale");
    }
}

#[test]
fn herman3_stabilises() {
    let model = corpus("herman3.pm");
    let (code, stdout, _) = flycheck(&["check", model.to_str().unwrap(), "--prop", "P>=1 [F \"stable\"]"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("P>=1 [F \"stable\"]: true"), "{stdout}");
}

#[test]
fn false_property_exits_one_unless_allowed() {
    let model = corpus("herman3.pm");
    let m = model.to_str().unwrap();
    let (code, stdout, _) = flycheck(&["check", m, "--prop", "P<0.5 [F \"stable\"]"]);
    assert_eq!(code, 1);
    assert!(stdout.contains(": false"));
    let (code, _, _) = flycheck(&["check", m, "--prop", "P<0.5 [F \"stable\"]", "--allow-false"]);
    assert_eq!(code, 0);
}

#[test]
fn malformed_model_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.pm");
    std::fs::write(&path, "dtmc\nmodule m\n  x : [0..1] init 0\nendmodule\n").unwrap();
    let (code, _, stderr) = flycheck(&["check", path.to_str().unwrap(), "--prop", "P=? [F true]"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("bad.pm:4:1: syntax error"), "{stderr}");
}

#[test]
fn documented_error_models_exit_two() {
    for (file, needle) in [
        ("bad_probability_sum.pm", "sum to 0.9"),
        ("unsupported_header.pm", "unsupported construct"),
        ("init_out_of_bounds.pm", "outside [0..3]"),
    ] {
        let path = corpus("errors").join(file);
        let (code, _, stderr) = flycheck(&["check", path.to_str().unwrap(), "--prop", "P=? [F true]"]);
        assert_eq!(code, 2, "{file}");
        assert!(stderr.contains(needle), "{file}: {stderr}");
    }
}

#[test]
fn constants_are_overridden_with_single_dash_option() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("walk.pm");
    std::fs::write(
        &path,
        "dtmc\nconst int K;\nconst double p = 0.5;\nmodule w\n  x : [0..10] init 0;\n  \
         [] x<K -> p : (x'=x+1) + (1-p) : (x'=0);\n  [] x>=K -> (x'=x);\nendmodule\nlabel \"top\" = x=K;\n",
    )
    .unwrap();
    let m = path.to_str().unwrap();
    let (code, stdout, _) = flycheck(&["check", m, "-const", "K=2,p=0.75", "--prop", "P=? [F<=2 \"top\"]"]);
    assert_eq!(code, 0);
    assert!(stdout.contains(": 0.562500000"), "{stdout}");
    let (code, _, stderr) = flycheck(&["check", m, "--prop", "P=? [F \"top\"]"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("`K` has no value"), "{stderr}");
}

#[test]
fn jsonl_has_fixed_keys() {
    let model = corpus("herman5.pm");
    let props = corpus("herman.props");
    let (code, stdout, _) = flycheck(&[
        "check",
        model.to_str().unwrap(),
        "--props",
        props.to_str().unwrap(),
        "--format",
        "jsonl",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 5);
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let obj = v.as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["iterations", "ms", "probability", "property", "states", "verdict"]);
        assert!(obj["verdict"].is_boolean() != obj["probability"].is_number());
    }
}

#[test]
fn generator_rejects_even_ring() {
    let (code, stdout, stderr) = flycheck(&["gen-herman", "4"]);
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
    assert!(stderr.contains("odd"));
    let (code, stdout, _) = flycheck(&["gen-herman", "3"]);
    assert_eq!(code, 0);
    assert_eq!(stdout, generate_herman(3).unwrap());
}

fn run_corpus(model: &str, props: &str, engine: EngineKind, jobs: usize) -> Vec<Outcome> {
    let mut config = RunConfig::new(corpus(model), PropertySource::File(corpus(props)));
    config.engine = engine;
    config.jobs = jobs;
    run(&config).unwrap().properties.into_iter().map(|r| r.outcome).collect()
}

#[test]
fn engines_agree_on_corpus() {
    let pairs = [
        ("herman3.pm", "herman.props"),
        ("herman5.pm", "herman.props"),
        ("herman7.pm", "herman.props"),
        ("phil3.pm", "phil.props"),
        ("phil4.pm", "phil.props"),
    ];
    for (model, props) in pairs {
        let local = run_corpus(model, props, EngineKind::OnTheFly, 1);
        let global = run_corpus(model, props, EngineKind::Global, 1);
        assert_eq!(local.len(), global.len());
        for (a, b) in local.iter().zip(&global) {
            match (a, b) {
                (Outcome::Verdict(Verdict::Bool(x)), Outcome::Verdict(Verdict::Bool(y))) => {
                    assert_eq!(x, y, "{model}")
                }
                (Outcome::Verdict(Verdict::Probability(x)), Outcome::Verdict(Verdict::Probability(y))) => {
                    assert!((x - y).abs() <= 1e-6 + 1e-9, "{model}: {x} vs {y}");
                    assert!((0.0..=1.0).contains(x));
                }
                _ => panic!("{model}: {a:?} vs {b:?}"),
            }
        }
    }
}

#[test]
fn parallel_run_keeps_input_order() {
    let serial = run_corpus("phil4.pm", "phil.props", EngineKind::OnTheFly, 1);
    let parallel = run_corpus("phil4.pm", "phil.props", EngineKind::OnTheFly, 3);
    assert_eq!(serial, parallel);
}
