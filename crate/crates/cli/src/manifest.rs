//! Run manifests: a JSON record written next to every produced file so a
//! run can be audited and replayed. Re-running the recorded command with the
//! recorded seed reproduces every output bit-identically (the manifest
//! itself carries wall-clock timestamps and therefore differs).

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use weavesim_core::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub seed: u64,
    /// SHA-256 of the primary input config, when the command takes one.
    pub config_sha256: Option<String>,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
}

/// What a command wants recorded; the frontend turns it into a manifest.
#[derive(Debug, Default)]
pub struct ManifestPlan {
    pub manifest_path: PathBuf,
    pub config_sha256: Option<String>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source: e,
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = f.read(&mut buf).map_err(|e| io_err(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    Ok(out)
}

/// Runs `write` against a temporary sibling path, then renames it over
/// `path`, so readers never observe a half-written file. Parent directories
/// are created as needed.
pub fn write_atomic(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
    }
    let mut tmp_name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "out".into());
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    match write(&tmp).and_then(|()| fs::rename(&tmp, path).map_err(|e| io_err(path, e))) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

/// Hashes the plan's files and writes the manifest named by the plan.
/// Output paths are recorded relative to the manifest's directory when
/// possible, so a bundle stays self-describing after being moved.
pub fn write_manifest(
    plan: &ManifestPlan,
    command: Vec<String>,
    seed: u64,
    started_unix_s: u64,
) -> Result<()> {
    let base = plan.manifest_path.parent().map(Path::to_path_buf);
    let rel = |p: &Path| -> String {
        match &base {
            Some(b) => p.strip_prefix(b).unwrap_or(p).display().to_string(),
            None => p.display().to_string(),
        }
    };
    let mut inputs = Vec::with_capacity(plan.inputs.len());
    for p in &plan.inputs {
        inputs.push(FileEntry {
            path: p.display().to_string(),
            sha256: sha256_file(p)?,
        });
    }
    let mut outputs = Vec::with_capacity(plan.outputs.len());
    for p in &plan.outputs {
        outputs.push(FileEntry {
            path: rel(p),
            sha256: sha256_file(p)?,
        });
    }
    let manifest = RunManifest {
        tool: "weavesim",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed,
        config_sha256: plan.config_sha256.clone(),
        inputs,
        outputs,
        started_unix_s,
        finished_unix_s: unix_now(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&plan.manifest_path, |tmp| {
        fs::write(tmp, &text).map_err(|e| io_err(tmp, e))
    })
}
