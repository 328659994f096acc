// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ingest::{CleaningConfig, MissingUserPolicy};
use crate::metrics::{ClosenessMode, CommunityParams};
use crate::netbuild::{Direction, LabelAxis};
use crate::rulemine::{MiningError, MiningParams};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {message}")]
    Value { key: String, value: String, message: String },
    #[error(transparent)]
    Mining(#[from] MiningError),
    #[error("{0}")]
    Range(String),
}

/// What itemset counts are divided by.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DenominatorChoice {
    #[default]
    Transactions,
    /// Every cleaned issue, including ones without forwards.
    Issues,
}

impl FromStr for DenominatorChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "transactions" => Ok(Self::Transactions),
            "issues" => Ok(Self::Issues),
            other => Err(format!("expected issues or transactions, got `{other}`")),
        }
    }
}

impl std::fmt::Display for DenominatorChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Transactions => "transactions",
            Self::Issues => "issues",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Gml,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "gml" => Ok(Self::Gml),
            other => Err(format!("expected csv, json or gml, got `{other}`")),
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
            Self::Gml => "gml",
        })
    }
}

/// Everything a pipeline run needs. Paths are inputs; the rest are
/// analysis parameters and feed the config digest.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub issues: Option<PathBuf>,
    pub forwards: Option<PathBuf>,
    pub users: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// A previously exported multigraph, used instead of the raw logs.
    pub graph: Option<PathBuf>,
    pub out: PathBuf,
    pub cleaning: CleaningConfig,
    pub missing_users: MissingUserPolicy,
    pub closeness_mode: ClosenessMode,
    pub community: CommunityParams,
    pub min_isf: u64,
    pub min_lisf: u64,
    pub label_axis: LabelAxis,
    pub fcu_direction: Direction,
    pub min_support: f64,
    pub labeled_min_support: f64,
    pub min_confidence: f64,
    pub min_lift: f64,
    pub labeled: bool,
    pub denominator: DenominatorChoice,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            issues: None,
            forwards: None,
            users: None,
            labels: None,
            graph: None,
            out: PathBuf::from("out"),
            cleaning: CleaningConfig::default(),
            missing_users: MissingUserPolicy::default(),
            closeness_mode: ClosenessMode::default(),
            community: CommunityParams::default(),
            min_isf: 100,
            min_lisf: 60,
            label_axis: LabelAxis::Level,
            fcu_direction: Direction::Undirected,
            min_support: 0.014,
            labeled_min_support: 0.008,
            min_confidence: 0.75,
            min_lift: 3.0,
            labeled: false,
            denominator: DenominatorChoice::Transactions,
            format: OutputFormat::Csv,
            seed: 0,
        }
    }
}

const PATH_KEYS: &[&str] = &["issues", "forwards", "users", "labels", "graph", "out"];

const KEYS: &[&str] = &[
    "issues",
    "forwards",
    "users",
    "labels",
    "graph",
    "out",
    "min_desc_tokens",
    "drop_self_loops",
    "missing_users",
    "closeness_mode",
    "community_seed",
    "resolution",
    "min_isf",
    "min_lisf",
    "label_axis",
    "fcu_direction",
    "min_support",
    "labeled_min_support",
    "min_confidence",
    "min_lift",
    "labeled",
    "denominator",
    "format",
    "seed",
];

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace(['-', '.', ' '], "_")
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(format!("expected a boolean, got `{other}`")),
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::Value { key: key.into(), value: value.into(), message: e.to_string() })
}

impl PipelineConfig {
    /// Sets one parameter by its key name (as used in config files).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = normalize_key(key);
        let v = value.trim();
        let bad = |message: String| ConfigError::Value { key: key.clone(), value: v.into(), message };
        match key.as_str() {
            "issues" => self.issues = Some(v.into()),
            "forwards" => self.forwards = Some(v.into()),
            "users" => self.users = Some(v.into()),
            "labels" => self.labels = Some(v.into()),
            "graph" => self.graph = Some(v.into()),
            "out" => self.out = v.into(),
            "min_desc_tokens" => self.cleaning.min_description_tokens = parse_value(&key, v)?,
            "drop_self_loops" => self.cleaning.drop_self_loops = parse_bool(v).map_err(bad)?,
            "missing_users" => {
                self.missing_users = match v.to_ascii_lowercase().as_str() {
                    "placeholder" => MissingUserPolicy::Placeholder,
                    "fail" => MissingUserPolicy::Fail,
                    _ => return Err(bad("expected placeholder or fail".into())),
                }
            }
            "closeness_mode" => self.closeness_mode = parse_value(&key, v)?,
            "community_seed" => self.community.seed = parse_value(&key, v)?,
            "resolution" => self.community.resolution = parse_value(&key, v)?,
            "min_isf" => self.min_isf = parse_value(&key, v)?,
            "min_lisf" => self.min_lisf = parse_value(&key, v)?,
            "label_axis" => self.label_axis = parse_value(&key, v)?,
            "fcu_direction" => {
                self.fcu_direction = match v.to_ascii_lowercase().as_str() {
                    "directed" => Direction::Directed,
                    "undirected" => Direction::Undirected,
                    _ => return Err(bad("expected directed or undirected".into())),
                }
            }
            "min_support" => self.min_support = parse_value(&key, v)?,
            "labeled_min_support" => self.labeled_min_support = parse_value(&key, v)?,
            "min_confidence" => self.min_confidence = parse_value(&key, v)?,
            "min_lift" => self.min_lift = parse_value(&key, v)?,
            "labeled" => self.labeled = parse_bool(v).map_err(bad)?,
            "denominator" => self.denominator = parse_value(&key, v)?,
            "format" => self.format = parse_value(&key, v)?,
            "seed" => self.seed = parse_value(&key, v)?,
            _ => return Err(ConfigError::UnknownKey(key)),
        }
        Ok(())
    }

    /// Applies a config file. Lines are `key = value`; `[section]` headers
    /// group keys, and `key` inside `[sec]` means `sec_key` when that is a
    /// known key. `#` and `;` start comment lines. Relative paths are taken
    /// from `base`.
    pub fn apply_file_text(&mut self, text: &str, base: &Path) -> Result<(), ConfigError> {
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Syntax { line: i + 1, message: "unterminated section header".into() })?;
                section = normalize_key(name);
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, message: format!("expected key = value, got `{line}`") })?;
            let k = normalize_key(k);
            let qualified = format!("{section}_{k}");
            let key = if !section.is_empty() && KEYS.contains(&qualified.as_str()) { qualified } else { k };
            let v = v.trim().trim_matches('"');
            if PATH_KEYS.contains(&key.as_str()) && Path::new(v).is_relative() {
                self.set(&key, &base.join(v).to_string_lossy())?;
            } else {
                self.set(&key, v)?;
            }
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Syntax { line: 0, message: format!("{}: {e}", path.display()) })?;
        let mut cfg = PipelineConfig::default();
        cfg.apply_file_text(&text, path.parent().unwrap_or(Path::new(".")))?;
        Ok(cfg)
    }

    pub fn mining_params(&self, labeled: bool) -> MiningParams {
        MiningParams {
            min_support: if labeled { self.labeled_min_support } else { self.min_support },
            min_confidence: self.min_confidence,
            min_lift: self.min_lift,
            labeled,
            label_axis: self.label_axis,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.mining_params(false).validate()?;
        self.mining_params(true).validate()?;
        if self.min_isf == 0 || self.min_lisf == 0 {
            return Err(ConfigError::Range("min_isf and min_lisf must be at least 1".into()));
        }
        if !(self.community.resolution > 0.0 && self.community.resolution.is_finite()) {
            return Err(ConfigError::Range(format!("resolution must be positive, got {}", self.community.resolution)));
        }
        Ok(())
    }

    /// The analysis parameters as `key=value` lines in a fixed order.
    /// Paths and output selection are left out.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let missing = match self.missing_users {
            MissingUserPolicy::Placeholder => "placeholder",
            MissingUserPolicy::Fail => "fail",
        };
        let _ = writeln!(s, "min_desc_tokens={}", self.cleaning.min_description_tokens);
        let _ = writeln!(s, "drop_self_loops={}", self.cleaning.drop_self_loops);
        let _ = writeln!(s, "missing_users={missing}");
        let _ = writeln!(s, "closeness_mode={}", self.closeness_mode);
        let _ = writeln!(s, "community_seed={}", self.community.seed);
        let _ = writeln!(s, "resolution={}", self.community.resolution);
        let _ = writeln!(s, "min_isf={}", self.min_isf);
        let _ = writeln!(s, "min_lisf={}", self.min_lisf);
        let _ = writeln!(s, "label_axis={}", self.label_axis);
        let _ = writeln!(s, "fcu_direction={}", self.fcu_direction);
        let _ = writeln!(s, "min_support={}", self.min_support);
        let _ = writeln!(s, "labeled_min_support={}", self.labeled_min_support);
        let _ = writeln!(s, "min_confidence={}", self.min_confidence);
        let _ = writeln!(s, "min_lift={}", self.min_lift);
        let _ = writeln!(s, "labeled={}", self.labeled);
        let _ = writeln!(s, "denominator={}", self.denominator);
        s
    }

    /// SHA-256 of [`Self::canonical_text`], hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_with_sections() {
        let text = "# comment\n[input]\nissues = data/issues.csv\nforwards=/abs/fw.csv\n\n[community]\nseed = 7\nresolution = 0.5\n[fcu]\ndirection = directed\nmin-isf = 50\n[rules]\nmin_support = 0.01\nlabeled = yes\ndenominator = issues\n";
        let mut cfg = PipelineConfig::default();
        cfg.apply_file_text(text, Path::new("/base")).unwrap();
        assert_eq!(cfg.issues, Some(PathBuf::from("/base/data/issues.csv")));
        assert_eq!(cfg.forwards, Some(PathBuf::from("/abs/fw.csv")));
        assert_eq!(cfg.community, CommunityParams { seed: 7, resolution: 0.5 });
        assert_eq!(cfg.fcu_direction, Direction::Directed);
        assert_eq!(cfg.min_isf, 50);
        assert_eq!(cfg.min_support, 0.01);
        assert!(cfg.labeled);
        assert_eq!(cfg.denominator, DenominatorChoice::Issues);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn errors() {
        let mut cfg = PipelineConfig::default();
        assert_eq!(cfg.set("bogus", "1"), Err(ConfigError::UnknownKey("bogus".into())));
        assert!(matches!(cfg.set("min_isf", "x"), Err(ConfigError::Value { .. })));
        assert!(matches!(cfg.apply_file_text("[oops\n", Path::new(".")), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(cfg.apply_file_text("no equals\n", Path::new(".")), Err(ConfigError::Syntax { .. })));
        cfg.set("min_support", "0").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn digest_ignores_paths() {
        let a = PipelineConfig::default();
        let mut b = a.clone();
        b.out = "elsewhere".into();
        b.issues = Some("x.csv".into());
        assert_eq!(a.digest(), b.digest());
        b.min_lift = 2.0;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
