//! Output directory bookkeeping: config-hash stamping, the deterministic
//! `manifest.json` and the `run.meta.json` timing sidecar.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::failure::{CmdResult, StageExt};
use crate::settings::{hex, Settings};

pub const MANIFEST: &str = "manifest.json";
pub const SIDECAR: &str = "run.meta.json";

/// Inputs larger than this are recorded by size only.
const HASH_LIMIT: u64 = 256 << 20;

pub struct Outputs {
    dir: PathBuf,
    hash: String,
    files: BTreeMap<String, String>,
}

impl Outputs {
    pub fn create(dir: &Path, hash: &str) -> CmdResult<Self> {
        fs::create_dir_all(dir)
            .stage(&format!("creating output directory {}", dir.display()))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            hash: hash.to_string(),
            files: BTreeMap::new(),
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes bytes verbatim; use for formats that cannot carry a comment.
    pub fn raw(&mut self, name: &str, bytes: &[u8]) -> CmdResult<()> {
        let path = self.path(name);
        fs::write(&path, bytes).stage(&format!("writing {}", path.display()))?;
        self.files.insert(name.to_string(), hex(&Sha256::digest(bytes)));
        log::info!("wrote {}", path.display());
        Ok(())
    }

    /// CSV or text with a leading `# config-hash:` comment line.
    pub fn stamped(&mut self, name: &str, body: &str) -> CmdResult<()> {
        let text = format!("# config-hash: {}\n{body}", self.hash);
        self.raw(name, text.as_bytes())
    }

    /// Pretty JSON with a `config_hash` member added to the top-level object.
    pub fn json(&mut self, name: &str, value: Value) -> CmdResult<()> {
        let value = match value {
            Value::Object(map) => {
                let mut out = Map::new();
                out.insert("config_hash".into(), Value::String(self.hash.clone()));
                out.extend(map);
                Value::Object(out)
            }
            other => json!({ "config_hash": self.hash, "data": other }),
        };
        let mut text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
        text.push('\n');
        self.raw(name, text.as_bytes())
    }

    pub fn finish(mut self, settings: &Settings, started: SystemTime) -> CmdResult<()> {
        let mut inputs = Map::new();
        for (key, path) in settings.inputs() {
            inputs.insert(key.clone(), describe_input(path).stage(&format!("hashing {}", path.display()))?);
        }
        let manifest = json!({
            "command": settings.command(),
            "config_hash": self.hash,
            "settings": settings.resolved(),
            "inputs": inputs,
            "outputs": self.files,
            "version": env!("CARGO_PKG_VERSION"),
        });
        let mut text = serde_json::to_string_pretty(&manifest).expect("JSON values serialize");
        text.push('\n');
        let path = self.path(MANIFEST);
        fs::write(&path, text).stage(&format!("writing {}", path.display()))?;

        let finished = SystemTime::now();
        let secs = |t: SystemTime| t.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
        let meta = json!({
            "config_hash": self.hash,
            "started_unix": secs(started),
            "finished_unix": secs(finished),
            "elapsed_seconds": finished.duration_since(started).map_or(0.0, |d| d.as_secs_f64()),
            "argv": std::env::args().collect::<Vec<_>>(),
        });
        let path = self.path(SIDECAR);
        let text = serde_json::to_string_pretty(&meta).expect("JSON values serialize") + "\n";
        fs::write(&path, text).stage(&format!("writing {}", path.display()))?;
        self.files.clear();
        Ok(())
    }
}

fn describe_input(path: &Path) -> std::io::Result<Value> {
    let size = fs::metadata(path)?.len();
    if size > HASH_LIMIT {
        return Ok(json!({ "path": path.display().to_string(), "bytes": size }));
    }
    let mut hasher = Sha256::new();
    let mut file = fs::File::open(path)?;
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(json!({
        "path": path.display().to_string(),
        "bytes": size,
        "sha256": hex(&hasher.finalize()),
    }))
}
