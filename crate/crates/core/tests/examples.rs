use std::path::{Path, PathBuf};
use std::process::Command;

fn examples_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().join("examples")
}

/// The plain binary, or a hash-suffixed one as left by `cargo test`.
fn find_example(dir: &Path, name: &str) -> Option<PathBuf> {
    let plain = dir.join(name);
    if plain.is_file() {
        return Some(plain);
    }
    let prefix = format!("{name}-");
    std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let file = p.file_name().and_then(|f| f.to_str()).unwrap_or("");
            file.starts_with(&prefix) && p.extension().is_none() && p.is_file()
        })
        .max_by_key(|p| p.metadata().and_then(|m| m.modified()).ok())
}

#[test]
fn examples_run_to_completion() {
    let dir = examples_dir();
    let tmp = tempfile::tempdir().unwrap();
    let names = [
        "stack_distance",
        "mutation_matrix",
        "feature_dataset",
        "correlation",
        "random_forest",
        "smote_oversampling",
        "corpus_pipeline",
    ];
    for name in names {
        let Some(exe) = find_example(&dir, name) else {
            eprintln!("skipping {name}: not built");
            continue;
        };
        let out = Command::new(&exe).arg(tmp.path().join("pipeline")).output().unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty(), "{name}");
    }
    if find_example(&dir, "corpus_pipeline").is_some() {
        assert!(tmp.path().join("pipeline/eval_report.json").exists());
    }
}
