#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

pub const PINNED: &str = "2026-10-18T00:00:00Z";
pub const IOT_PROFILE: &str = "storageaccount_integrity_uploadFromMaliciousIoTDevice";

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/cloudara")
}

/// A scratch copy of the fixture bundle: `template.json`, `levels.json`,
/// `profiles/` and an empty `out/`.
pub struct Workspace {
    pub dir: TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let src = fixtures();
        fs::create_dir(dir.path().join("profiles")).unwrap();
        for entry in fs::read_dir(src.join("profiles")).unwrap() {
            let entry = entry.unwrap();
            fs::copy(entry.path(), dir.path().join("profiles").join(entry.file_name())).unwrap();
        }
        fs::copy(src.join("template.json"), dir.path().join("template.json")).unwrap();
        fs::copy(src.join("levels.json"), dir.path().join("levels.json")).unwrap();
        Self { dir }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn use_template(&self, fixture: &str) {
        fs::copy(fixtures().join(fixture), self.path("template.json")).unwrap();
    }

    pub fn write_levels(&self, levels: &Value) {
        fs::write(self.path("levels.json"), levels.to_string()).unwrap();
    }

    pub fn assess_args(&self, out: &str) -> Vec<String> {
        [
            "assess",
            "--template",
            self.path("template.json").to_str().unwrap(),
            "--profiles",
            self.path("profiles").to_str().unwrap(),
            "--levels",
            self.path("levels.json").to_str().unwrap(),
            "--out",
            self.path(out).to_str().unwrap(),
            "--resource-group",
            "cloudara-data",
            "--now",
            PINNED,
        ]
        .map(String::from)
        .to_vec()
    }

    pub fn assess(&self, out: &str) -> (i32, Option<Value>) {
        let output = cloudrisk(&self.assess_args(out));
        (output.status.code().unwrap(), only_report(&self.path(out)))
    }
}

pub fn cloudrisk<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cloudrisk"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

pub fn report_files(dir: &Path) -> Vec<PathBuf> {
    let Ok(entries) = fs::read_dir(dir) else {
        return Vec::new();
    };
    let mut files: Vec<_> = entries
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    files
}

/// The single JSON report in `dir`, if there is exactly one.
pub fn only_report(dir: &Path) -> Option<Value> {
    match report_files(dir).as_slice() {
        [one] => Some(serde_json::from_slice(&fs::read(one).unwrap()).unwrap()),
        _ => None,
    }
}

pub fn affected(report: &Value, profile: &str) -> Vec<String> {
    report["threats"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|t| t["profile_name"] == profile)
        .flat_map(|t| t["affected_assets"].as_array().unwrap().clone())
        .map(|v| v.as_str().unwrap().to_string())
        .collect()
}

pub fn score<'a>(report: &'a Value, asset: &str, goal: &str) -> Option<&'a Value> {
    report["scores"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["asset"] == asset && s["protection_goal"] == goal)
}
