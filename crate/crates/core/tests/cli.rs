//! Behavior of the installed binary: exit codes, stage orchestration,
//! adapter round trip, and simulator snapshot reuse. Commands run from the
//! repository root so the default data paths resolve.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn ripscan(args: &[&str], sets: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ripscan"));
    cmd.current_dir(repo_root());
    for (k, v) in sets {
        cmd.arg("--set").arg(format!("{k}={v}"));
    }
    cmd.args(args);
    cmd.output().expect("spawn ripscan")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// `run <id>` header printed by every stage command.
fn printed_run_id(out: &Output) -> String {
    stdout(out)
        .lines()
        .find_map(|l| l.strip_prefix("run ").map(str::to_string))
        .expect("run id line")
}

/// Body of a run artifact with the header line dropped.
fn artifact_body(run_dir: &Path, name: &str) -> Vec<String> {
    fs::read_to_string(run_dir.join(name))
        .unwrap_or_else(|e| panic!("read {name}: {e}"))
        .lines()
        .skip(1)
        .map(str::to_string)
        .collect()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&ripscan(&["--help"], &[])), 0);
    assert_eq!(code(&ripscan(&["--version"], &[])), 0);
    let help = ripscan(&["--help"], &[]);
    assert!(stdout(&help).contains("Usage"), "help text goes to stdout");
}

#[test]
fn usage_and_config_errors_exit_one() {
    let unknown = ripscan(&["warp"], &[]);
    assert_eq!(code(&unknown), 1);
    assert!(!stderr(&unknown).is_empty());

    // --set without '=' and unknown keys are configuration errors.
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let malformed = ripscan(&["synth", "--set", "nonsense"], &[("out_dir", out)]);
    assert_eq!(code(&malformed), 1, "stderr: {}", stderr(&malformed));

    let bogus = ripscan(&["synth"], &[("out_dir", out), ("no_such_key", "1")]);
    assert_eq!(code(&bogus), 1);
    assert!(stderr(&bogus).contains("no_such_key"));

    let missing_file = ripscan(&["synth"], &[("out_dir", out), ("lexicon", "does/not/exist.txt")]);
    assert_eq!(code(&missing_file), 1);
}

#[test]
fn stage_without_inputs_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ripscan(&["graph"], &[("out_dir", tmp.path().to_str().unwrap())]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("missing input"), "stderr: {}", stderr(&out));
}

#[test]
fn full_run_completes_and_rerun_skips() {
    let tmp = tempfile::tempdir().unwrap();
    let sets = [("out_dir", tmp.path().to_str().unwrap())];

    let first = ripscan(&["run"], &sets);
    assert_eq!(code(&first), 0, "stderr: {}", stderr(&first));
    let run_id = printed_run_id(&first);
    let run_dir = tmp.path().join(&run_id);
    for artifact in ["candidates.jsonl", "discovery.jsonl", "reports.jsonl", "outcome.jsonl"] {
        assert!(run_dir.join(artifact).exists(), "missing {artifact}");
    }
    assert!(run_dir.join("outbox/platform").exists());

    let again = ripscan(&["run"], &sets);
    assert_eq!(code(&again), 0);
    assert_eq!(printed_run_id(&again), run_id);
    assert!(stdout(&again).contains("skipped"), "stdout: {}", stdout(&again));
    assert!(!stdout(&first).contains("skipped"));
}

#[test]
fn stage_commands_chain_into_a_full_run() {
    let tmp = tempfile::tempdir().unwrap();
    let sets = [("out_dir", tmp.path().to_str().unwrap())];

    let mut run_id = None;
    for cmd in ["synth", "discover", "classify", "match", "graph", "estimate", "report", "track"] {
        let out = ripscan(&[cmd], &sets);
        assert_eq!(code(&out), 0, "{cmd} failed: {}", stderr(&out));
        let id = printed_run_id(&out);
        assert_eq!(*run_id.get_or_insert_with(|| id.clone()), id, "{cmd} switched runs");
    }
    let run_dir = tmp.path().join(run_id.unwrap());
    assert!(run_dir.join("outcome.jsonl").exists());
}

#[test]
fn external_adapter_matches_builtin_verdicts() {
    let adapter = format!("adapter:{} adapter-stdio", env!("CARGO_BIN_EXE_ripscan"));
    let tmp_rules = tempfile::tempdir().unwrap();
    let tmp_adapter = tempfile::tempdir().unwrap();

    let rules = ripscan(&["run"], &[("out_dir", tmp_rules.path().to_str().unwrap())]);
    assert_eq!(code(&rules), 0, "stderr: {}", stderr(&rules));
    let adapted = ripscan(
        &["run"],
        &[("out_dir", tmp_adapter.path().to_str().unwrap()), ("classifier", &adapter)],
    );
    assert_eq!(code(&adapted), 0, "stderr: {}", stderr(&adapted));

    // The adapter serves the same rule engine, so verdict bodies agree even
    // though the two runs carry different config hashes in their headers.
    let body_rules =
        artifact_body(&tmp_rules.path().join(printed_run_id(&rules)), "verdicts.jsonl");
    let body_adapted =
        artifact_body(&tmp_adapter.path().join(printed_run_id(&adapted)), "verdicts.jsonl");
    assert!(!body_rules.is_empty());
    assert_eq!(body_rules, body_adapted);
}

#[test]
fn saved_simulation_reproduces_generated_discovery() {
    let tmp = tempfile::tempdir().unwrap();
    let sim_dir = tmp.path().join("snapshot");
    let saved = ripscan(&["simulate", "--out", sim_dir.to_str().unwrap()], &[]);
    assert_eq!(code(&saved), 0, "stderr: {}", stderr(&saved));
    for f in ["channels.jsonl", "posts.jsonl", "truth.jsonl"] {
        assert!(sim_dir.join(f).exists(), "snapshot missing {f}");
    }

    let out_gen = tmp.path().join("gen");
    let out_dir = tmp.path().join("dir");
    let generated = ripscan(&["run"], &[("out_dir", out_gen.to_str().unwrap())]);
    assert_eq!(code(&generated), 0);
    let sim_set = format!("dir:{}", sim_dir.display());
    let reloaded = ripscan(
        &["run"],
        &[("out_dir", out_dir.to_str().unwrap()), ("sim", &sim_set)],
    );
    assert_eq!(code(&reloaded), 0, "stderr: {}", stderr(&reloaded));

    let body_gen = artifact_body(&out_gen.join(printed_run_id(&generated)), "discovery.jsonl");
    let body_dir = artifact_body(&out_dir.join(printed_run_id(&reloaded)), "discovery.jsonl");
    assert_eq!(body_gen, body_dir, "snapshot reuse must not change discovery");
}
