use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn digitc<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_digitc"))
        .current_dir(root())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn machine(args: &[&str]) -> Vec<Value> {
    let mut full = vec!["--deterministic", "--format", "machine"];
    full.extend_from_slice(args);
    let out = digitc(&full);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn golden_commands() -> Vec<(String, Vec<String>)> {
    let text = fs::read_to_string(root().join("corpus/golden/commands.txt")).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (name, args) = l.split_once('\t').unwrap();
            (name.to_string(), args.split_whitespace().map(String::from).collect())
        })
        .collect()
}

#[test]
fn golden_corpus_is_reproduced_byte_for_byte() {
    for (name, args) in golden_commands() {
        let out = digitc(&args);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let expected = fs::read_to_string(root().join(format!("corpus/golden/{name}.jsonl"))).unwrap();
        assert_eq!(stdout(&out), expected, "golden report {name} changed");
    }
}

#[test]
fn golden_values() {
    let value = |name: &str| -> Value {
        let text = fs::read_to_string(root().join(format!("corpus/golden/{name}.jsonl"))).unwrap();
        let rep: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(rep["schema"], "digitc.report/1");
        assert_eq!(rep["exhausted"], true, "{name}");
        assert_eq!(rep["stabilized"], true, "{name}");
        rep.get("value").cloned().unwrap_or_else(|| rep["verdict"].clone())
    };
    assert_eq!(value("tc-c8-c1"), 2);
    assert_eq!(value("tc-c8-c2"), 1);
    assert_eq!(value("tc-h6"), 2);
    assert_eq!(value("cat-c8-c1"), 2);
    assert_eq!(value("cat-h6"), 2);
    assert_eq!(value("tc-map-constant"), 1);
    assert_eq!(value("tc-map-antipodal"), 2);
    assert_eq!(value("bundle-step"), true);
    assert_eq!(value("fhe-step"), true);
}

#[test]
fn every_golden_report_replays() {
    for (name, _) in golden_commands() {
        let reports = machine(&["replay-witness", "--report", &format!("corpus/golden/{name}.jsonl")]);
        assert_eq!(reports[0]["verdict"], true, "{name}: {:?}", reports[0]["notes"]);
    }
}

fn tampered(name: &str, edit: impl FnOnce(&mut Value)) -> Value {
    let text = fs::read_to_string(root().join(format!("corpus/golden/{name}.jsonl"))).unwrap();
    let mut rep: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    edit(&mut rep["witness"]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    fs::write(&path, format!("{rep}\n")).unwrap();
    let out = digitc(["--format", "machine", "replay-witness", "--report"].map(String::from).into_iter().chain([path.display().to_string()]));
    assert_eq!(out.status.code(), Some(0));
    serde_json::from_str(stdout(&out).trim()).unwrap()
}

#[test]
fn replay_catches_a_corrupted_path() {
    let r = tampered("tc-c8-c1", |w| {
        let path = &mut w["paths"][0][0];
        let last = path.as_array().unwrap().len() - 1;
        path[last / 2] = Value::from(7);
        path[last / 2 + 1] = Value::from(0);
    });
    assert_eq!(r["verdict"], false);
}

#[test]
fn replay_catches_a_missing_base_point() {
    let r = tampered("tc-c8-c2", |w| {
        w["blocks"][0].as_array_mut().unwrap().pop();
        w["paths"][0].as_array_mut().unwrap().pop();
    });
    assert_eq!(r["verdict"], false);
}

#[test]
fn replay_rejects_a_report_without_witness() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    let rep = machine(&["tc", "--image", "corpus/c8-c2.json"]);
    fs::write(&path, format!("{}\n", rep[0])).unwrap();
    let out = digitc(["replay-witness".to_string(), "--report".into(), path.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(&path, "{\"schema\":\"other/9\"}\n").unwrap();
    let out = digitc(["replay-witness".to_string(), "--report".into(), path.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(digitc(["tc", "--image", "corpus/missing.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"dim\":1,\"points\":[[0]]}").unwrap();
    let out = digitc(["check-image".to_string(), "--image".into(), bad.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    let partial = dir.path().join("partial.json");
    fs::write(
        &partial,
        r#"{"domain":{"dim":1,"points":[[0],[1]],"adjacency":"c1"},"codomain":{"dim":1,"points":[[0]],"adjacency":"c1"},"pairs":[[0,0]]}"#,
    )
    .unwrap();
    let out = digitc(["check-map".to_string(), "--map".into(), partial.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(digitc(["search-counterexamples", "--family", "trees", "--relation", "tc-le-min-tc"]).status.code(), Some(2));
}

#[test]
fn budget_exhaustion_exits_3() {
    let out = digitc(["--format", "machine", "--max-steps", "1", "cat", "--image", "corpus/c8-c1.json"]);
    assert_eq!(out.status.code(), Some(3));
    let rep: Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(rep["exhausted"], false);
    assert_eq!(rep["budgets"]["max_steps"], 1);

    let out = digitc(["--format", "machine", "--max-m", "3", "tc", "--image", "corpus/c8-c2.json"]);
    assert_eq!(out.status.code(), Some(3));
    let rep: Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(rep["stabilized"], false);
}

#[test]
fn default_budgets_are_echoed() {
    let rep = &machine(&["tc", "--image", "corpus/h6.json"])[0];
    assert_eq!(rep["budgets"]["max_m"], 5);
    assert_eq!(rep["budgets"]["max_l"], 4);
    let rep = &machine(&["cat", "--image", "corpus/c8-c1.json"])[0];
    assert_eq!(rep["budgets"]["max_steps"], 64);
}

#[test]
fn adjacency_override() {
    let rep = &machine(&["--adjacency", "c2", "tc", "--image", "corpus/c8-c1.json"])[0];
    assert_eq!(rep["value"], 1);
}

#[test]
fn window_relation_is_recorded() {
    let rep = &machine(&["--path-adjacency", "window", "--witness", "tc", "--image", "corpus/c8-c1.json"])[0];
    assert_eq!(rep["path_adjacency"], "window");
    assert_eq!(rep["witness"]["relation"], "window");
}

#[test]
fn non_bundle_is_rejected() {
    let rep = &machine(&["bundle", "--map", "corpus/retraction.json"])[0];
    assert_eq!(rep["verdict"], false);
    assert!(rep.get("witness").is_none());
}

#[test]
fn step_map_fails_homotopy_lifting() {
    let reports = machine(&["hlp-spot-check", "--map", "corpus/step.json"]);
    let refuted: Vec<_> = reports.iter().filter(|r| r["verdict"] == false).collect();
    assert!(!refuted.is_empty());
    assert!(refuted.iter().all(|r| r["witness"]["kind"] == "hlp-refutation"));
}

#[test]
fn certified_constant_substitute() {
    let rep = &machine(&[
        "substitute",
        "--map",
        "corpus/constant.json",
        "--ghat",
        "corpus/constant.json",
        "--k",
        "corpus/identity-0-3.json",
        "--ghat-kind",
        "constant",
    ])[0];
    assert_eq!(rep["verdict"], true);
}

#[test]
fn identity_law_search_finds_nothing() {
    let rep = &machine(&["search-counterexamples", "--family", "intervals-to-intervals", "--relation", "tc-iso-eq-tc"])[0];
    assert_eq!(rep["verdict"], false);
    assert_eq!(rep["details"]["violations"].as_array().unwrap().len(), 0);
    assert_eq!(rep["exhausted"], true);
}

#[test]
fn exported_documents_are_canonical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["c8-c2", "h6", "projection-c8", "step"] {
        let out = digitc(["export", name]);
        assert!(out.status.success());
        let text = stdout(&out);
        let path = dir.path().join(format!("{name}.json"));
        fs::write(&path, &text).unwrap();
        let cmd = if text.contains("\"pairs\"") { "check-map" } else { "check-image" };
        let flag = if cmd == "check-map" { "--map" } else { "--image" };
        let out = digitc([cmd.to_string(), flag.into(), path.display().to_string()]);
        assert!(out.status.success(), "{name}");
    }
    let on_disk = fs::read_to_string(root().join("corpus/projection-c8.json")).unwrap();
    assert_eq!(stdout(&digitc(["export", "projection-c8"])), on_disk);
}
