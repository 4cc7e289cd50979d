mod common;

use std::process::Output;

use common::bin;

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["run", "--workers", "many"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--out", dir.path().to_str().unwrap(), "run"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("corpus.path: required"), "{}", stderr(&o));

    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[corpus]\npath = \"p.jsonl\"\n[cluster]\nmin_samples = 0\n[reduce]\nn_neighbors = 1\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "config", "--validate"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("cluster.min_samples") && e.contains("reduce.n_neighbors"), "{e}");

    let o = run(&["--config", dir.path().join("absent.toml").to_str().unwrap(), "run"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn print_defaults() {
    let o = run(&["config", "--print-defaults"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(topicflow::PipelineConfig::from_toml(&text).unwrap(), topicflow::PipelineConfig::default());
}

#[test]
fn stage_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, _) = common::synthetic_setup(dir.path(), 2);
    let o = run(&["--config", cfg.to_str().unwrap(), "label"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("run `topicflow preprocess` first"));

    std::fs::write(dir.path().join("posts.jsonl"), "garbage\n{}\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "ingest"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lines 1, 2"), "{}", stderr(&o));
}

#[test]
fn subcommands_then_json_logs() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, _) = common::synthetic_setup(dir.path(), 3);
    let c = cfg.to_str().unwrap();
    let out = dir.path().join("elsewhere");
    let o_arg = out.to_str().unwrap();
    for stage in ["ingest", "preprocess", "embed", "fit", "represent", "label", "themes", "report"] {
        let o = run(&["--config", c, "--out", o_arg, "--seed", "5", stage]);
        assert_eq!(o.status.code(), Some(0), "{stage}: {}", stderr(&o));
    }
    assert!(out.join("labels.csv").exists());
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seeds"]["run"], 5);
    assert_eq!(m["providers"]["labeler"], "stub");

    let o = run(&["--config", c, "--out", o_arg, "--seed", "5", "--log-json", "run"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> =
        stderr(&o).lines().map(|l| serde_json::from_str(l).expect("json log line")).collect();
    assert!(lines.iter().any(|l| l["msg"].as_str().unwrap().contains("reusing cache")));
    assert!(lines.iter().all(|l| l["level"].is_string()));
}

#[test]
fn rate_two_sheets() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("alice.csv");
    let b = dir.path().join("bob.csv");
    std::fs::write(&a, "topic_id,label,verdict\n0,x,accept\n1,y,accept\n2,z,reject\n3,w,accept\n").unwrap();
    std::fs::write(&b, "topic_id,verdict\n3,agree\n2,disagree\n1,disagree\n0,yes\n").unwrap();
    let o = run(&["rate", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("4 topics, 3 matching verdicts (75.0% agreement), 2 accepted by both"), "{s}");
    std::fs::write(&b, "topic_id,verdict\n0,maybe\n").unwrap();
    assert_eq!(run(&["rate", a.to_str().unwrap(), b.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn saturate_auto() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, _) = common::synthetic_setup(dir.path(), 4);
    let seeds = dir.path().join("seeds.txt");
    std::fs::write(&seeds, "medal\n").unwrap();
    let dest = dir.path().join("final.txt");
    let o = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "saturate",
        "--keywords",
        seeds.to_str().unwrap(),
        "--output",
        dest.to_str().unwrap(),
        "--auto",
        "--min-share",
        "0.3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("saturated"), "{stdout}");
    let words = std::fs::read_to_string(&dest).unwrap();
    assert!(words.lines().any(|l| l == "medal"));
    assert!(!words.lines().any(|l| l == "stadium"), "{words}");
}

#[test]
fn saturate_interactive() {
    use std::io::Write;
    use std::process::Stdio;
    let dir = tempfile::tempdir().unwrap();
    let (cfg, _) = common::synthetic_setup(dir.path(), 4);
    let seeds = dir.path().join("seeds.txt");
    std::fs::write(&seeds, "stadium\n").unwrap();
    let mut child = bin()
        .args(["--config", cfg.to_str().unwrap(), "saturate", "--keywords", seeds.to_str().unwrap(), "--output"])
        .arg(dir.path().join("k.txt"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"1, Venue Hall\n\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("round 1 candidates:") && stdout.contains("after 2 rounds (saturated)"), "{stdout}");
    let words = std::fs::read_to_string(dir.path().join("k.txt")).unwrap();
    assert!(words.lines().any(|l| l == "venue hall"), "{words}");
    assert_eq!(words.lines().count(), 3, "{words}");
}
