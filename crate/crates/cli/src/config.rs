use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;

/// An error in how the program was invoked. Maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub type Result<T> = anyhow::Result<T>;

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Values from a flat `key = value` config file. Keys are long flag names;
/// `-` and `_` are interchangeable. Flags take precedence.
#[derive(Debug, Default)]
pub struct Settings {
    values: HashMap<String, String>,
    source: Option<PathBuf>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut values = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(usage(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    idx + 1
                )));
            };
            values.insert(normalize(key), value.trim().to_owned());
        }
        Ok(Settings {
            values,
            source: Some(path.to_owned()),
        })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize(key)).map(String::as_str)
    }

    fn bad(&self, key: &str, value: &str, why: impl fmt::Display) -> anyhow::Error {
        let source = self
            .source
            .as_deref()
            .map_or_else(String::new, |p| p.display().to_string());
        usage(format!(
            "{source}: invalid value `{value}` for `{key}`: {why}"
        ))
    }

    pub fn opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| self.bad(key, v, e)),
        }
    }

    pub fn get<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    pub fn choice<T: ValueEnum>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        if let Some(f) = flag {
            return Ok(f);
        }
        match self.raw(key) {
            None => Ok(default),
            Some(v) => T::from_str(v, true).map_err(|e| self.bad(key, v, e)),
        }
    }

    pub fn list<T: FromStr>(&self, flag: Option<Vec<T>>, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|item| item.trim().parse().map_err(|e| self.bad(key, v, e)))
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    pub fn path(&self, flag: Option<PathBuf>, key: &str) -> Result<Option<PathBuf>> {
        Ok(flag.or_else(|| self.raw(key).map(PathBuf::from)))
    }

    pub fn required_path(&self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
        self.path(flag, key)?
            .ok_or_else(|| usage(format!("missing required `--{key}`")))
    }
}
