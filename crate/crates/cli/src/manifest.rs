use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::Command;
use crate::error::{CliError, CliResult};

/// Record of one invocation: enough to re-run it and check the outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub argv: Vec<String>,
    /// Every flag after defaults were applied.
    pub flags: serde_json::Value,
    pub seed: Option<u64>,
    /// sha256 of every file read, keyed by path as given.
    pub inputs: BTreeMap<String, String>,
    /// sha256 of every file written.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// File access for one run; remembers what was read and written.
#[derive(Debug, Default)]
pub struct Files {
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl Files {
    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.inputs.insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    pub fn write(&mut self, path: &Path, contents: &[u8]) -> CliResult<()> {
        std::fs::write(path, contents).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.outputs.insert(path.display().to_string(), sha256_hex(contents));
        Ok(())
    }

    /// Writes the manifest to `explicit`, or next to `primary_output` when
    /// there is one. Runs with neither write nothing.
    pub fn finish(
        self,
        command: &Command,
        argv: &[String],
        explicit: Option<&Path>,
        primary_output: Option<&Path>,
    ) -> CliResult<()> {
        let path: PathBuf = match (explicit, primary_output) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(out)) => {
                let mut name = out.as_os_str().to_owned();
                name.push(".manifest.json");
                name.into()
            }
            (None, None) => return Ok(()),
        };
        let manifest = RunManifest {
            tool: "ed-align",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: command.name(),
            argv: argv.to_vec(),
            flags: serde_json::to_value(command)?,
            seed: seed_of(command),
            inputs: self.inputs,
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })
    }
}

fn seed_of(command: &Command) -> Option<u64> {
    match command {
        Command::Coarsen(a) => Some(a.seed),
        Command::Bind(a) => Some(a.seed),
        Command::Deform(a) => Some(a.rig.seed),
        Command::Register(a) => Some(a.seed),
        Command::EiaeDemo(a) => Some(a.seed),
        Command::Simplify(_) | Command::Mmd(_) => None,
    }
}
