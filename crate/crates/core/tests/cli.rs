use std::process::{Command, Output};

fn yfr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yfr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn levels_counts() {
    assert_eq!(stdout(&yfr(&["levels", "--r", "1", "--n", "3"])).lines().count(), 3);
    assert_eq!(stdout(&yfr(&["levels", "--r", "2", "--n", "4"])).lines().count(), 29);
    let csv = stdout(&yfr(&["--format", "csv", "levels", "--r", "2", "--n", "2"]));
    assert_eq!(csv.lines().next(), Some("word,weight,length,units,twos"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn count_methods_agree() {
    let o = yfr(&["count", "--r", "1", "--from", "", "--to", "2,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3\n");
    let json = stdout(&yfr(&["--format", "json", "count", "--r", "3", "--from", "1_2", "--to", "2,1_3,1_2"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["agree"], true);
    assert_eq!(v["counts"]["dp"], v["counts"]["closed"]);
}

#[test]
fn exit_codes() {
    assert_eq!(yfr(&["count", "--r", "2", "--to", "1_3"]).status.code(), Some(2));
    assert_eq!(yfr(&["levels"]).status.code(), Some(2));
    assert_eq!(
        yfr(&["measure", "boundary", "--r", "1", "--w", "1", "--v", "tail=constant(2)"]).status.code(),
        Some(2)
    );
    let o = yfr(&["verify", "--suite", "dr-closed", "--r", "2", "--max-weight", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn output_is_stable_across_thread_counts() {
    let run = |threads: &str| {
        stdout(&yfr(&[
            "--threads", threads, "--format", "json", "experiment", "tails-r", "--r", "2",
            "--eps", "0.3", "--m-max", "4",
        ]))
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("3"));
    let verify = |threads: &str| {
        stdout(&yfr(&[
            "--threads", threads, "--format", "json", "verify", "--suite", "suffix-class", "--r", "2",
            "--max-weight", "5",
        ]))
    };
    assert_eq!(verify("1"), verify("4"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join("yfr-config.toml");
    std::fs::write(&path, "r = 2\nformat = \"json\"\n").unwrap();
    let o = yfr(&["--config", path.to_str().unwrap(), "measure", "plancherel", "--w", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], "1/2");
    assert_eq!(v["r"], 2);
    std::fs::write(&path, "bogus = 1\n").unwrap();
    let o = yfr(&["--config", path.to_str().unwrap(), "levels", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiments_echo_parameters() {
    for kind in ["kernel-trace", "gk-ratio"] {
        let o = yfr(&["--format", "json", "experiment", kind, "--r", "2", "--beta", "0.7", "--points", "6", "--w", "2"]);
        assert_eq!(o.status.code(), Some(0), "{kind}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["manifest"]["beta"], 0.7);
        assert_eq!(v["points"].as_array().unwrap().len(), 6);
    }
}
