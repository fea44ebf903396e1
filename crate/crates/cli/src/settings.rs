//! Option resolution: command-line flag, then config file, then default.
//!
//! The config file uses the same sectioned `key=value` format as rule files,
//! with one section per subcommand and keys named like the long flags
//! (`[evaluate]` / `learner=gbt`). Every key in the running subcommand's
//! section must be understood, and sections must name a subcommand.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use finsent::kvconfig::{self, Entry};
use finsent::{Error, Result};
use serde::Serialize;
use serde_json::{Map, Value};

pub const COMMANDS: [&str; 7] = [
    "features",
    "flags",
    "train",
    "predict",
    "evaluate",
    "aggregate",
    "linkage",
];

pub struct Settings {
    origin: String,
    file: BTreeMap<String, Entry>,
    effective: Map<String, Value>,
}

impl Settings {
    pub fn load(path: Option<&Path>, command: &str) -> Result<Self> {
        let mut settings = Settings {
            origin: String::new(),
            file: BTreeMap::new(),
            effective: Map::new(),
        };
        let Some(path) = path else {
            return Ok(settings);
        };
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        settings.origin = path.display().to_string();
        for section in kvconfig::parse(&src, &settings.origin)? {
            if !COMMANDS.contains(&section.name.as_str()) {
                return Err(Error::Config {
                    location: format!("{}:{}", settings.origin, section.line),
                    message: format!("unknown section [{}]; sections name subcommands", section.name),
                });
            }
            if section.name == command {
                for e in section.entries {
                    settings.file.insert(e.key.clone(), e);
                }
            }
        }
        Ok(settings)
    }

    fn file_value<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.file.remove(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|err| Error::Config {
                location: format!("{}:{}", self.origin, e.line),
                message: format!("{key}: {err}"),
            }),
        }
    }

    fn record<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).expect("plain config values serialize");
        self.effective.insert(key.to_string(), v);
    }

    pub fn optional<T>(&mut self, key: &str, cli: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let file = self.file_value(key)?;
        let v = cli.or(file);
        self.record(key, &v);
        Ok(v)
    }

    pub fn value<T>(&mut self, key: &str, cli: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let v = self.optional(key, cli)?.unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    pub fn required<T>(&mut self, key: &str, cli: Option<T>) -> Result<T>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        self.optional(key, cli)?
            .ok_or_else(|| Error::Input(format!("missing --{key} (or {key}= in the config file)")))
    }

    /// Like [`Settings::value`], but for a flag that can only switch on.
    pub fn switch(&mut self, key: &str, cli: bool) -> Result<bool> {
        self.value(key, cli.then_some(true), false)
    }

    /// Resolve but do not echo (output locations).
    pub fn hidden<T>(&mut self, key: &str, cli: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let file = self.file_value(key)?;
        Ok(cli.or(file))
    }

    /// Reject a key that does not apply in this configuration.
    pub fn forbid<T>(&mut self, key: &str, cli: &Option<T>, why: &str) -> Result<()> {
        if cli.is_some() {
            return Err(Error::Input(format!("--{key} {why}")));
        }
        if let Some(e) = self.file.remove(key) {
            return Err(Error::Config {
                location: format!("{}:{}", self.origin, e.line),
                message: format!("{key} {why}"),
            });
        }
        Ok(())
    }

    /// The effective configuration. Fails on config-file keys nobody asked for.
    pub fn finish(self) -> Result<Value> {
        if let Some(e) = self.file.values().min_by_key(|e| e.line) {
            return Err(Error::Config {
                location: format!("{}:{}", self.origin, e.line),
                message: format!("unknown key '{}'", e.key),
            });
        }
        Ok(Value::Object(self.effective))
    }
}

/// Comma-separated list value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct List(pub Vec<String>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let items: Vec<String> = s
            .split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(String::from)
            .collect();
        Ok(List(items))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_file(src: &str, command: &str) -> Result<Settings> {
        let dir = std::env::temp_dir().join(format!("finsent-settings-{}-{command}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("run.cfg");
        std::fs::write(&p, src).unwrap();
        Settings::load(Some(&p), command)
    }

    #[test]
    fn precedence_is_flag_then_file_then_default() {
        let mut s = with_file("[evaluate]\nseed=7\nfolds=3\n", "evaluate").unwrap();
        assert_eq!(s.value("seed", Some(9u64), 42).unwrap(), 9);
        assert_eq!(s.value("folds", None, 5usize).unwrap(), 3);
        assert_eq!(s.value("rounds", None, 200usize).unwrap(), 200);
        let v = s.finish().unwrap();
        assert_eq!(v["seed"], 9);
        assert_eq!(v["folds"], 3);
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        let s = with_file("[evaluate]\nsede=7\n", "evaluate").unwrap();
        let err = s.finish().unwrap_err().to_string();
        assert!(err.contains(":2") && err.contains("sede"), "{err}");
        assert!(with_file("[evaluation]\nseed=7\n", "evaluate").is_err());
    }

    #[test]
    fn bad_values_name_their_line() {
        let mut s = with_file("[train]\n\nseed=abc\n", "train").unwrap();
        let err = s.value("seed", None, 1u64).unwrap_err().to_string();
        assert!(err.contains(":3") && err.contains("seed"), "{err}");
    }

    #[test]
    fn lists_split_on_commas() {
        assert_eq!("adf, dcc,".parse::<List>().unwrap().0, vec!["adf", "dcc"]);
    }
}
