use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    format!("{}/data/fixtures/{name}.bg", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str], cache: Option<&PathBuf>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bichrome"));
    cmd.args(args).env_remove("BICHROME_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("BICHROME_CACHE_DIR", dir);
    }
    cmd.output().unwrap()
}

/// Text output without the timing line.
fn comparable(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout)
        .lines()
        .filter(|l| !l.starts_with("# elapsed"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn json_report(o: &Output) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    v["report"].clone()
}

fn scratch_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("bichrome-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["validate", "uqsl2"], None).status.code(), Some(0));
    assert_eq!(run(&["validate", "z2_transparent"], None).status.code(), Some(3));
    assert_eq!(run(&["no-such-command"], None).status.code(), Some(1));
    assert_eq!(run(&["eval", "uqsl2", "/nonexistent.bg"], None).status.code(), Some(1));
    assert_eq!(run(&["invariant", "uqsl2", &fixture("unknot0_red")], None).status.code(), Some(2));
    assert_eq!(run(&["invariant", "uqsl2", &fixture("L_3_1")], None).status.code(), Some(0));
}

#[test]
fn invariant_reports_values() {
    let o = run(&["invariant", "uqsl2", &fixture("L_3_1")], None);
    let text = comparable(&o);
    assert!(text.contains("red components = 1"), "{text}");
    assert!(text.contains("L' = "), "{text}");
    let neg = run(&["invariant", "uqsl2", &fixture("L_3_1"), "--defect", "-1"], None);
    assert_eq!(neg.status.code(), Some(0));
    assert!(comparable(&neg).contains("defect = -1"));
}

#[test]
fn worker_count_does_not_change_results() {
    let args = ["statespace", "uqsl2", "+P1,+V2,-P2", "--dump"];
    let one = run(&[&args[..], &["--jobs", "1"]].concat(), None);
    let two = run(&[&args[..], &["--jobs", "2"]].concat(), None);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(comparable(&one), comparable(&two));
    let j1 = run(&[&["--json"][..], &args[..], &["--jobs", "1"]].concat(), None);
    let j2 = run(&[&["--json"][..], &args[..], &["--jobs", "2"]].concat(), None);
    assert_eq!(json_report(&j1), json_report(&j2));
}

#[test]
fn cache_is_transparent() {
    let dir = scratch_dir("cache");
    let file = fixture("blue_hopf_P1_P2");
    let plain = run(&["eval", "uqsl2", &file], None);
    let first = run(&["eval", "uqsl2", &file], Some(&dir));
    let second = run(&["eval", "uqsl2", &file], Some(&dir));
    assert_eq!(plain.status.code(), Some(0));
    assert_eq!(comparable(&plain), comparable(&first));
    assert_eq!(comparable(&plain), comparable(&second));
    assert!(std::fs::read_dir(&dir).unwrap().count() > 0);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn completion_check_on_projectives() {
    let yes = run(&["completion-check", "--backend", "uqsl2", "--dominating", "G"], None);
    assert_eq!(yes.status.code(), Some(0), "{}", comparable(&yes));
    assert!(comparable(&yes).contains("dominates({G}) = true"));
    assert!(comparable(&yes).contains("is a c-equivalence = true"));
    // a negative answer is a result, not a failure
    let no = run(&["completion-check", "--backend", "uqsl2", "--dominating", "1"], None);
    assert_eq!(no.status.code(), Some(0));
    assert!(comparable(&no).contains("dominates({1}) = false"));
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"], None);
    assert_eq!(o.status.code(), Some(0), "{}", comparable(&o));
}
