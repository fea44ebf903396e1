//! Run directories: `config.json`, result files and `log.txt`.
//!
//! Nothing time- or host-dependent is written, so identical inputs give
//! byte-identical directories.

use std::path::{Path, PathBuf};

use finsent::{Error, Result};
use serde::Serialize;

pub struct RunDir {
    dir: PathBuf,
    log: Vec<String>,
}

impl RunDir {
    pub fn create(dir: &Path, config: &serde_json::Value) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let run = RunDir {
            dir: dir.to_path_buf(),
            log: Vec::new(),
        };
        run.write_json("config.json", config)?;
        Ok(run)
    }

    pub fn log(&mut self, line: impl Into<String>) {
        let line = line.into();
        eprintln!("{line}");
        self.log.push(line);
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn finish(self) -> Result<()> {
        let mut text = self.log.join("\n");
        text.push('\n');
        self.write("log.txt", text.as_bytes())
    }
}
