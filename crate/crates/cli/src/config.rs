//! Config files, flag overrides and the run record written next to outputs.
//!
//! A config file is TOML with up to four sections: `[train]` (training
//! configuration fields), `[synthetic]` (synthetic dataset spec plus
//! `seed`), `[recognizer]` and `[import]`. A `run.toml` written by an earlier
//! command is itself a valid config file: its `command`, `config_hash` and
//! `[run]` entries are ignored on load.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use reactmotion::train::config_hash;
use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

const SECTIONS: [&str; 4] = ["train", "synthetic", "recognizer", "import"];
const IGNORED: [&str; 3] = ["command", "config_hash", "run"];

/// Bad invocation: unknown flag, unreadable input, malformed config.
/// Reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Fails with a usage error unless `path` exists.
pub fn existing(path: &Path, what: &str) -> Result<PathBuf> {
    if path.exists() {
        Ok(path.to_path_buf())
    } else {
        Err(usage(format!("{what} `{}` does not exist", path.display())))
    }
}

#[derive(Debug, Default)]
pub struct FileConfig {
    table: Table,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config `{}`: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| usage(format!("config `{}`: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| e.message().to_string())?;
        for (key, value) in &table {
            if IGNORED.contains(&key.as_str()) {
                continue;
            }
            if !SECTIONS.contains(&key.as_str()) {
                return Err(format!("unknown section `{key}`"));
            }
            if !value.is_table() {
                return Err(format!("`{key}` must be a table"));
            }
        }
        Ok(FileConfig { table })
    }

    pub fn section(&self, name: &str) -> Option<&Table> {
        self.table.get(name).and_then(Value::as_table)
    }

    /// Overlays section `name` onto `base`. Keys that `base` does not
    /// serialize are rejected unless listed in `optional`.
    pub fn resolve<T: Serialize + DeserializeOwned>(
        &self,
        name: &str,
        base: &T,
        optional: &[&str],
    ) -> Result<T> {
        let mut table = Table::try_from(base).context("serializing defaults")?;
        if let Some(over) = self.section(name) {
            merge(&mut table, over, name, optional).map_err(usage)?;
        }
        table
            .try_into()
            .map_err(|e: toml::de::Error| usage(format!("section [{name}]: {}", e.message())))
    }
}

fn merge(base: &mut Table, over: &Table, path: &str, optional: &[&str]) -> Result<(), String> {
    for (key, value) in over {
        match (base.get_mut(key), value) {
            (Some(Value::Table(inner)), Value::Table(o)) => {
                merge(inner, o, &format!("{path}.{key}"), &[])?
            }
            (Some(slot), _) => *slot = value.clone(),
            (None, _) if optional.contains(&key.as_str()) => {
                base.insert(key.clone(), value.clone());
            }
            (None, _) => return Err(format!("unknown key `{key}` in [{path}]")),
        }
    }
    Ok(())
}

/// The resolved configuration of one command invocation. Written as TOML
/// with a SHA-256 digest of its canonical JSON form. Output locations are
/// left out so that reruns into another directory hash the same.
#[derive(Debug, Clone)]
pub struct RunRecord {
    table: Table,
}

impl RunRecord {
    pub fn new(command: &str) -> Self {
        let mut table = Table::new();
        table.insert("command".into(), Value::String(command.into()));
        table.insert("run".into(), Value::Table(Table::new()));
        RunRecord { table }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        if let Some(Value::Table(run)) = self.table.get_mut("run") {
            run.insert(key.into(), value.into());
        }
        self
    }

    pub fn path(self, key: &str, path: &Path) -> Self {
        self.param(key, path.display().to_string())
    }

    pub fn section<T: Serialize>(mut self, name: &str, value: &T) -> Result<Self> {
        let t = Table::try_from(value).with_context(|| format!("serializing [{name}]"))?;
        self.table.insert(name.into(), Value::Table(t));
        Ok(self)
    }

    pub fn hash(&self) -> String {
        config_hash(&self.table)
    }

    pub fn to_toml(&self) -> Result<String> {
        let mut t = self.table.clone();
        if t.get("run")
            .and_then(Value::as_table)
            .is_some_and(Table::is_empty)
        {
            t.remove("run");
        }
        t.insert("config_hash".into(), Value::String(self.hash()));
        Ok(toml::to_string(&t)?)
    }

    /// Writes the record and returns its hash.
    pub fn write(&self, path: &Path) -> Result<String> {
        std::fs::write(path, self.to_toml()?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(self.hash())
    }
}

/// `run.toml` inside an output directory.
pub fn record_in(dir: &Path) -> PathBuf {
    dir.join("run.toml")
}

/// `<file>.run.toml` beside an output file.
pub fn record_beside(file: &Path) -> PathBuf {
    let mut name = file.file_name().unwrap_or_default().to_os_string();
    name.push(".run.toml");
    file.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use reactmotion::TrainConfig;

    #[test]
    fn overlay_and_unknown_keys() {
        let f = FileConfig::parse("[train]\nepochs = 3\n[train.weights]\nalpha = 0.5\n").unwrap();
        let c = f
            .resolve("train", &TrainConfig::sbu(), &["skl_ref"])
            .unwrap();
        assert_eq!(c.epochs, 3);
        assert_eq!(c.weights.alpha, 0.5);
        assert_eq!(c.weights.beta, TrainConfig::sbu().weights.beta);

        let f = FileConfig::parse("[train]\nepoch = 3\n").unwrap();
        let err = f.resolve("train", &TrainConfig::sbu(), &[]).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
        assert!(FileConfig::parse("[trian]\n").is_err());
        assert!(FileConfig::parse("train = 1\n").is_err());
        assert!(FileConfig::parse("[train\n").is_err());
    }

    #[test]
    fn record_round_trips_as_config() {
        let cfg = TrainConfig {
            epochs: 7,
            ..TrainConfig::sbu()
        };
        let rec = RunRecord::new("train")
            .param("holdout", 2)
            .section("train", &cfg)
            .unwrap();
        let text = rec.to_toml().unwrap();
        let back = FileConfig::parse(&text)
            .unwrap()
            .resolve("train", &TrainConfig::sbu(), &["skl_ref"])
            .unwrap();
        assert_eq!(back, cfg);
        assert_eq!(rec.hash(), rec.clone().hash());
        assert_ne!(
            rec.hash(),
            RunRecord::new("train")
                .section("train", &TrainConfig::sbu())
                .unwrap()
                .hash()
        );
    }

    #[test]
    fn record_paths() {
        assert_eq!(
            record_beside(Path::new("out/a.tsv")),
            Path::new("out/a.tsv.run.toml")
        );
        assert_eq!(record_in(Path::new("out")), Path::new("out/run.toml"));
    }
}
