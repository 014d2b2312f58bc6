use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Subcommands and the keys each accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Dj,
    GroundState,
    Curve,
    Evolve,
    MultiSoliton,
    Verify,
}

const COMMON: &[&str] = &["out_dir", "p", "points", "box", "nonlocal", "tol", "seed", "dj"];

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dj => "dj",
            Command::GroundState => "groundstate",
            Command::Curve => "curve",
            Command::Evolve => "evolve",
            Command::MultiSoliton => "multisoliton",
            Command::Verify => "verify",
        }
    }

    pub fn keys(&self) -> &'static [&'static str] {
        match self {
            Command::Dj | Command::Verify => &[],
            Command::GroundState => &["omega", "mass"],
            Command::Curve => &["omega_min", "omega_max", "steps", "eigs", "coercivity_samples"],
            Command::Evolve => &[
                "omega", "t", "dt", "monitor_every", "snapshot_every", "perturbation", "vx", "vy", "init", "bump_mass",
            ],
            Command::MultiSoliton => &[
                "solitons", "tn", "dt", "l_cutoff", "nx", "ny", "lx", "ly", "monitor_every", "alpha1",
            ],
        }
    }

    pub fn accepts(&self, key: &str) -> bool {
        COMMON.contains(&key) || self.keys().contains(&key)
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dj" => Command::Dj,
            "groundstate" => Command::GroundState,
            "curve" => Command::Curve,
            "evolve" => Command::Evolve,
            "multisoliton" => Command::MultiSoliton,
            "verify" => Command::Verify,
            _ => return Err(Error::Config(format!("unknown command {s:?}"))),
        })
    }
}

/// `key = value` settings for one command; `#` starts a comment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub command: Command,
    values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self { command, values: BTreeMap::new() }
    }

    pub fn parse(command: Command, text: &str) -> Result<Self> {
        let mut cfg = Self::new(command);
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(command: Command, path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(command, &std::fs::read_to_string(path)?)
    }

    /// Set or override a key; dashes are read as underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        if !self.command.accepts(&key) {
            return Err(Error::Config(format!("unknown key {key:?} for {}", self.command.name())));
        }
        if value.is_empty() {
            return Err(Error::Config(format!("empty value for {key:?}")));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| Error::Config(format!("bad value {v:?} for {key:?}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Fill `key` with `value` unless already set, so the resolved config
    /// records every parameter used.
    pub fn resolve<T: fmt::Display>(&mut self, key: &str, value: T) -> Result<()> {
        if !self.values.contains_key(key) {
            self.set(key, &value.to_string())?;
        }
        Ok(())
    }

    /// `out_dir`, else `$DS2D_OUTDIR`, else `./ds2d-out`, with the command name appended.
    pub fn out_dir(&self) -> PathBuf {
        let root = self
            .raw("out_dir")
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("DS2D_OUTDIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("ds2d-out"));
        root.join(self.command.name())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &String)> {
        self.values.iter()
    }
}

impl fmt::Display for ExperimentConfig {
    /// Single line `command key=value ...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.command.name())?;
        for (k, v) in &self.values {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}
