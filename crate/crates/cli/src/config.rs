//! Experiment configs: a line-oriented `key = value` format.
//!
//! Blank lines and lines starting with `#` are skipped. Every other line is
//! one key. [`ExperimentConfig::to_canonical`] writes keys in a fixed order
//! with sets normalized, so a canonical file parses and re-serializes to the
//! same bytes, and the config hash is taken over that text.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use splinter_core::caratheodory::MeasureBasis;
use splinter_core::{IntervalSet, IrrationalTag, Scalar, SplinterStatus, StallWindow, SystemDescriptor, TowerSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Splinter,
    Verify,
    Density,
    Gap,
    Mixing,
    Reduction,
    Demo,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Splinter,
        Command::Verify,
        Command::Density,
        Command::Gap,
        Command::Mixing,
        Command::Reduction,
        Command::Demo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Splinter => "splinter",
            Command::Verify => "verify",
            Command::Density => "density",
            Command::Gap => "gap",
            Command::Mixing => "mixing",
            Command::Reduction => "reduction",
            Command::Demo => "demo",
        }
    }

    /// Set names the command reads.
    pub fn required_sets(self) -> &'static [&'static str] {
        match self {
            Command::Splinter => &["J1", "J2"],
            Command::Density => &["A1", "A2"],
            Command::Gap | Command::Reduction => &["B"],
            Command::Mixing => &["C", "D"],
            Command::Verify | Command::Demo => &[],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Format {
    #[default]
    Structured,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Structured => "jsonl",
            Format::Csv => "csv",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Structured => "structured",
            Format::Csv => "csv",
        })
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "structured" => Ok(Format::Structured),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format `{s}` (csv or structured)")),
        }
    }
}

/// A named set, on the interval or on the tower depending on the system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NamedSet {
    Interval(IntervalSet),
    Tower(TowerSet),
}

impl NamedSet {
    pub fn as_interval(&self) -> Option<&IntervalSet> {
        match self {
            NamedSet::Interval(s) => Some(s),
            NamedSet::Tower(_) => None,
        }
    }

    pub fn as_tower(&self) -> Option<&TowerSet> {
        match self {
            NamedSet::Tower(s) => Some(s),
            NamedSet::Interval(_) => None,
        }
    }
}

impl fmt::Display for NamedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedSet::Interval(s) => s.fmt(f),
            NamedSet::Tower(s) => s.fmt(f),
        }
    }
}

/// Where a config went wrong. `line` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, key: &str, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), key: Some(key.to_string()), message: message.into() }
    }

    fn missing(key: &str, message: impl Into<String>) -> Self {
        ConfigError { line: None, key: Some(key.to_string()), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l} ({k}): {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "{k}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub command: Command,
    pub system: SystemDescriptor,
    pub sets: BTreeMap<String, NamedSet>,
    pub epsilon: Option<Scalar>,
    pub n_max: Option<usize>,
    pub depth: Option<u32>,
    pub m: Option<usize>,
    pub basis: Option<MeasureBasis>,
    pub sample: Option<usize>,
    pub tolerance: Option<Scalar>,
    pub stall_window: Option<StallWindow>,
    pub component_budget: Option<usize>,
    pub seed: Option<u64>,
    pub expect: Option<SplinterStatus>,
    pub format: Option<Format>,
    pub stem: Option<String>,
}

/// Keys besides `command`, `system` and `set.*`.
const PARAMETER_KEYS: [&str; 14] = [
    "epsilon",
    "n_max",
    "depth",
    "m",
    "basis",
    "sample",
    "tolerance",
    "stall_window",
    "component_budget",
    "seed",
    "expect",
    "output.format",
    "output.stem",
    "name",
];

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl ExperimentConfig {
    /// Bare config for `command` on `system`, with no sets or parameters.
    pub fn new(command: Command, system: SystemDescriptor) -> Self {
        ExperimentConfig {
            name: None,
            command,
            system,
            sets: BTreeMap::new(),
            epsilon: None,
            n_max: None,
            depth: None,
            m: None,
            basis: None,
            sample: None,
            tolerance: None,
            stall_window: None,
            component_budget: None,
            seed: None,
            expect: None,
            format: None,
            stem: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError { line: Some(line), key: None, message: "expected `key = value`".into() });
            };
            let (key, value) = (key.trim(), value.trim());
            let known = ["command", "system"].contains(&key)
                || PARAMETER_KEYS.contains(&key)
                || key.strip_prefix("set.").is_some_and(valid_name);
            if !known {
                return Err(ConfigError::at(line, key, "unknown key"));
            }
            if value.is_empty() {
                return Err(ConfigError::at(line, key, "empty value"));
            }
            if let Some((first, _)) = entries.get(key) {
                return Err(ConfigError::at(line, key, format!("duplicate key, first set on line {first}")));
            }
            entries.insert(key.to_string(), (line, value.to_string()));
        }

        let take = |key: &str| entries.get(key).map(|(l, v)| (*l, v.as_str()));
        fn field<T, E: fmt::Display>(
            entry: Option<(usize, &str)>,
            key: &str,
            parse: impl FnOnce(&str) -> Result<T, E>,
        ) -> Result<Option<T>, ConfigError> {
            entry
                .map(|(line, v)| parse(v).map_err(|e| ConfigError::at(line, key, e.to_string())))
                .transpose()
        }

        let command = field(take("command"), "command", Command::from_str)?
            .ok_or_else(|| ConfigError::missing("command", "required"))?;
        let system = match field(take("system"), "system", SystemDescriptor::from_str)? {
            Some(s) => s,
            None if command == Command::Demo => SystemDescriptor::Kakutani,
            None => return Err(ConfigError::missing("system", "required")),
        };
        let tag: Option<IrrationalTag> = system.tag();
        let tower = system == SystemDescriptor::Kakutani;

        let mut sets = BTreeMap::new();
        for (key, (line, value)) in entries.range("set.".to_string().."set/".to_string()) {
            let name = &key["set.".len()..];
            let parsed = if tower {
                TowerSet::parse(value, tag).map(NamedSet::Tower)
            } else {
                IntervalSet::parse(value, tag).map(NamedSet::Interval)
            };
            sets.insert(name.to_string(), parsed.map_err(|e| ConfigError::at(*line, key, e.to_string()))?);
        }

        let scalar = |s: &str| Scalar::parse(s, tag);
        let positive_scalar = |key: &str| -> Result<Option<Scalar>, ConfigError> {
            let v = field(take(key), key, scalar)?;
            if let Some(x) = &v {
                let line = take(key).map(|(l, _)| l).unwrap_or_default();
                if !x.is_positive().unwrap_or(false) {
                    return Err(ConfigError::at(line, key, format!("{x} is not positive")));
                }
            }
            Ok(v)
        };
        let count = |key: &str| -> Result<Option<usize>, ConfigError> {
            field(take(key), key, |s| match s.parse::<usize>() {
                Ok(0) => Err("must be positive".to_string()),
                Ok(n) => Ok(n),
                Err(e) => Err(e.to_string()),
            })
        };

        let config = ExperimentConfig {
            name: field(take("name"), "name", |s| {
                if valid_name(s) {
                    Ok(s.to_string())
                } else {
                    Err("names use letters, digits, `_` and `-`")
                }
            })?,
            command,
            system,
            sets,
            epsilon: positive_scalar("epsilon")?,
            n_max: count("n_max")?,
            depth: field(take("depth"), "depth", u32::from_str)?,
            m: count("m")?,
            basis: field(take("basis"), "basis", MeasureBasis::from_str)?,
            sample: count("sample")?,
            tolerance: positive_scalar("tolerance")?,
            stall_window: field(take("stall_window"), "stall_window", StallWindow::from_str)?,
            component_budget: count("component_budget")?,
            seed: field(take("seed"), "seed", u64::from_str)?,
            expect: field(take("expect"), "expect", SplinterStatus::from_str)?,
            format: field(take("output.format"), "output.format", Format::from_str)?,
            stem: field(take("output.stem"), "output.stem", |s| {
                if valid_name(s) {
                    Ok(s.to_string())
                } else {
                    Err("stems use letters, digits, `_` and `-`")
                }
            })?,
        };
        config.validate().map_err(|mut e| {
            if let Some(k) = &e.key {
                e.line = e.line.or_else(|| take(k).map(|(l, _)| l));
            }
            e
        })?;
        Ok(config)
    }

    /// Checks that the command has what it needs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for name in self.command.required_sets() {
            if !self.sets.contains_key(*name) {
                return Err(ConfigError::missing(&format!("set.{name}"), format!("required by {}", self.command)));
            }
        }
        let need = |present: bool, key: &str| {
            if present {
                Ok(())
            } else {
                Err(ConfigError::missing(key, format!("required by {}", self.command)))
            }
        };
        let tower = self.system == SystemDescriptor::Kakutani;
        let interval_only = |what: &str| {
            if tower {
                Err(ConfigError::missing("system", format!("{what} runs on interval systems only")))
            } else {
                Ok(())
            }
        };
        match self.command {
            Command::Splinter => {
                need(self.epsilon.is_some(), "epsilon")?;
                need(self.n_max.is_some(), "n_max")?;
            }
            Command::Verify => need(!self.sets.is_empty() || self.sample.is_some(), "sample")?,
            Command::Density => {
                interval_only("density")?;
                need(self.epsilon.is_some(), "epsilon")?;
                need(self.basis.is_some(), "basis")?;
            }
            Command::Gap => {
                interval_only("gap")?;
                need(self.basis.is_some(), "basis")?;
            }
            Command::Mixing => need(self.m.is_some(), "m")?,
            Command::Reduction => {
                interval_only("reduction")?;
                for key in ["epsilon", "n_max", "basis", "sample"] {
                    let present = match key {
                        "epsilon" => self.epsilon.is_some(),
                        "n_max" => self.n_max.is_some(),
                        "basis" => self.basis.is_some(),
                        _ => self.sample.is_some(),
                    };
                    need(present, key)?;
                }
            }
            Command::Demo => {
                if !tower {
                    return Err(ConfigError::missing("system", "demo runs on the kakutani tower"));
                }
            }
        }
        if let Some(e) = &self.epsilon {
            if self.command != Command::Splinter && !e.lt(&Scalar::one()).unwrap_or(false) {
                return Err(ConfigError::missing("epsilon", "must be below 1"));
            }
        }
        Ok(())
    }

    /// Canonical text: fixed key order, one `key = value` per line.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &dyn fmt::Display| out.push_str(&format!("{k} = {v}\n"));
        if let Some(n) = &self.name {
            line("name", n);
        }
        line("command", &self.command);
        line("system", &self.system);
        for (name, set) in &self.sets {
            line(&format!("set.{name}"), set);
        }
        macro_rules! opt {
            ($key:expr, $field:expr) => {
                if let Some(v) = &$field {
                    line($key, v);
                }
            };
        }
        opt!("epsilon", self.epsilon);
        opt!("n_max", self.n_max);
        opt!("depth", self.depth);
        opt!("m", self.m);
        opt!("basis", self.basis);
        opt!("sample", self.sample);
        opt!("tolerance", self.tolerance);
        opt!("stall_window", self.stall_window);
        opt!("component_budget", self.component_budget);
        opt!("seed", self.seed);
        opt!("expect", self.expect);
        opt!("output.format", self.format);
        opt!("output.stem", self.stem);
        out
    }

    /// SHA-256 of the canonical text, in hex.
    pub fn hash(&self) -> String {
        hash_text(&self.to_canonical())
    }

    /// Label for output files: stem, then name, then the command.
    pub fn label(&self) -> String {
        self.stem.clone().or_else(|| self.name.clone()).unwrap_or_else(|| self.command.to_string())
    }

    pub fn set(&self, name: &str) -> Option<&NamedSet> {
        self.sets.get(name)
    }
}

impl FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        ExperimentConfig::parse(s)
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}

pub fn hash_text(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
