//! Effective run configuration: a key-value config file overlaid by flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sense_core::kv::{render_kv, KvMap};
use sha2::{Digest, Sha256};

use crate::failure::{invalid, CmdResult};

/// Keys that locate the run rather than configure it; excluded from the hash.
const UNHASHED: [&str; 1] = ["out"];

#[derive(Debug, Clone)]
pub struct Settings {
    command: String,
    explicit: KvMap,
    resolved: KvMap,
    inputs: BTreeMap<String, PathBuf>,
}

impl Settings {
    /// `flags` win over `file`.
    pub fn new(command: &str, file: KvMap, flags: KvMap) -> Self {
        let mut explicit = file;
        explicit.extend(flags);
        Settings {
            command: command.to_string(),
            explicit,
            resolved: KvMap::new(),
            inputs: BTreeMap::new(),
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn take(&mut self, key: &str) -> Option<String> {
        let v = self.explicit.get(key).cloned()?;
        self.resolved.insert(key.to_string(), v.clone());
        Some(v)
    }

    pub fn text(&mut self, key: &str, default: &str) -> String {
        self.take(key).unwrap_or_else(|| {
            self.resolved.insert(key.to_string(), default.to_string());
            default.to_string()
        })
    }

    pub fn opt_text(&mut self, key: &str) -> Option<String> {
        self.take(key).filter(|v| !v.is_empty())
    }

    pub fn parse<T>(&mut self, key: &str, default: &str) -> CmdResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = self.text(key, default);
        raw.parse().map_err(|e| invalid(format!("`{key}` = `{raw}`: {e}")))
    }

    pub fn opt_parse<T>(&mut self, key: &str) -> CmdResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.opt_text(key)
            .map(|raw| raw.parse().map_err(|e| invalid(format!("`{key}` = `{raw}`: {e}"))))
            .transpose()
    }

    /// Comma-separated list; an empty value is an empty list.
    pub fn list<T>(&mut self, key: &str, default: &str) -> CmdResult<Vec<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = self.text(key, default);
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| invalid(format!("`{key}` item `{s}`: {e}"))))
            .collect()
    }

    pub fn flag(&mut self, key: &str) -> CmdResult<bool> {
        match self.text(key, "false").as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(invalid(format!("`{key}` must be true or false, got `{other}`"))),
        }
    }

    /// A required input file that must already exist.
    pub fn input(&mut self, key: &str) -> CmdResult<PathBuf> {
        self.opt_input(key)?
            .ok_or_else(|| invalid(format!("missing required input `{key}` (flag --{key} or config key)")))
    }

    pub fn opt_input(&mut self, key: &str) -> CmdResult<Option<PathBuf>> {
        let Some(raw) = self.opt_text(key) else {
            return Ok(None);
        };
        let path = PathBuf::from(&raw);
        check_exists(key, &path)?;
        self.inputs.insert(key.to_string(), path.clone());
        Ok(Some(path))
    }

    /// Registers an input path discovered indirectly (for the manifest).
    pub fn record_input(&mut self, key: &str, path: &Path) -> CmdResult<()> {
        check_exists(key, path)?;
        self.inputs.insert(key.to_string(), path.to_path_buf());
        Ok(())
    }

    pub fn out_dir(&mut self) -> CmdResult<PathBuf> {
        self.opt_text("out")
            .map(PathBuf::from)
            .ok_or_else(|| invalid("missing required setting `out` (flag --out or config key)"))
    }

    pub fn resolved(&self) -> &KvMap {
        &self.resolved
    }

    pub fn inputs(&self) -> &BTreeMap<String, PathBuf> {
        &self.inputs
    }

    /// Canonical text the config hash is computed over: the command name and
    /// every setting the command read, defaults included, sorted by key.
    pub fn canonical(&self) -> String {
        let mut map = self.resolved.clone();
        for k in UNHASHED {
            map.remove(k);
        }
        format!("command = {}\n{}", self.command, render_kv(&map))
    }

    pub fn config_hash(&self) -> String {
        hex(&Sha256::digest(self.canonical().as_bytes()))
    }
}

fn check_exists(key: &str, path: &Path) -> CmdResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(invalid(format!("input `{key}` not found: expected file {}", path.display())))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
