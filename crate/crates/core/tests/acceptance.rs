//! The ten acceptance criteria, one pass/fail line each.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use vkramer::acceptance::{self, CriterionResult};

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// `vkramer all` on the bundled scenarios, twice with a fixed seed.
fn criterion_10() -> CriterionResult {
    let start = Instant::now();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut codes = Vec::new();
    let mut slowest = Duration::ZERO;
    for d in &dirs {
        let t = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_vkramer"))
            .args(["all", "--scenario"])
            .arg(scenarios_dir())
            .arg("--out")
            .arg(d.path())
            .args(["--seed", "42"])
            .env_remove("VKRAMER_OUT")
            .status()
            .expect("run vkramer");
        slowest = slowest.max(t.elapsed());
        codes.push(status.code());
    }
    let a = read_tree(dirs[0].path());
    let b = read_tree(dirs[1].path());
    let identical = a == b;
    let passed = codes.iter().all(|&c| c == Some(0)) && identical && !a.is_empty() && slowest < Duration::from_secs(60);
    CriterionResult {
        id: 10,
        name: "determinism and runtime",
        passed,
        detail: format!(
            "exit codes {codes:?}, {} files, identical={identical}, slowest run {:.2} s (limit 60 s)",
            a.len(),
            slowest.as_secs_f64()
        ),
        elapsed: start.elapsed(),
    }
}

#[test]
fn acceptance_criteria() {
    let mut results = acceptance::run_library_criteria();
    results.push(criterion_10());
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn criterion_1_runtime_budget() {
    let r = acceptance::criterion_1();
    println!("{r} in {:?}", r.elapsed);
    assert!(r.passed);
    assert!(r.elapsed < Duration::from_secs(5));
}
