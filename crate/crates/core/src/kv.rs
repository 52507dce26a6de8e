//! Minimal `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are trimmed and
//! must be unique; values are trimmed and may contain `=`.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum KvError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
}

pub type KvMap = BTreeMap<String, String>;

pub fn parse_kv(text: &str) -> Result<KvMap, KvError> {
    let mut map = KvMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(KvError::Syntax { line: i + 1 })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(KvError::Syntax { line: i + 1 });
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(KvError::Duplicate {
                line: i + 1,
                key: key.to_string(),
            });
        }
    }
    Ok(map)
}

pub fn read_kv(path: &Path) -> Result<KvMap, KvError> {
    let text = std::fs::read_to_string(path).map_err(|source| KvError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_kv(&text)
}

/// Renders a map in the same syntax, keys sorted.
pub fn render_kv(map: &KvMap) -> String {
    map.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
