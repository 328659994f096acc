// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSection {
    Levels,
    Types,
    Roles,
}

impl fmt::Display for LabelSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelSection::Levels => "level",
            LabelSection::Types => "type",
            LabelSection::Roles => "role",
        })
    }
}

/// Numeric id to label text, per section.
///
/// Text form:
///
/// ```text
/// [levels]
/// 1=L
/// 2=M
/// 3=H
/// [types]
/// 1=Safety
/// [roles]
/// 2=Safety Engineer
/// ```
///
/// `#` and `;` start comment lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    pub levels: BTreeMap<u32, String>,
    pub types: BTreeMap<u32, String>,
    pub roles: BTreeMap<u32, String>,
}

impl Default for LabelMap {
    /// Three severity levels, the two issue categories and the five roles
    /// seen in the reference project. The numeric ids are a guess; supply a
    /// label file for real exports.
    fn default() -> Self {
        let map = |pairs: &[(u32, &str)]| pairs.iter().map(|(k, v)| (*k, v.to_string())).collect();
        LabelMap {
            levels: map(&[(1, "L"), (2, "M"), (3, "H")]),
            types: map(&[(1, "Safety"), (2, "Quality")]),
            roles: map(&[
                (1, "Owner"),
                (2, "Safety Engineer"),
                (3, "BIM Coordinator"),
                (4, "Project Manager"),
                (5, "Project Supervisor"),
            ]),
        }
    }
}

impl LabelMap {
    pub fn empty() -> Self {
        LabelMap { levels: BTreeMap::new(), types: BTreeMap::new(), roles: BTreeMap::new() }
    }

    pub fn section(&self, section: LabelSection) -> &BTreeMap<u32, String> {
        match section {
            LabelSection::Levels => &self.levels,
            LabelSection::Types => &self.types,
            LabelSection::Roles => &self.roles,
        }
    }

    fn section_mut(&mut self, section: LabelSection) -> &mut BTreeMap<u32, String> {
        match section {
            LabelSection::Levels => &mut self.levels,
            LabelSection::Types => &mut self.types,
            LabelSection::Roles => &mut self.roles,
        }
    }

    pub fn get(&self, section: LabelSection, id: u32) -> Option<&str> {
        self.section(section).get(&id).map(String::as_str)
    }

    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut map = LabelMap::empty();
        let mut current = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| IngestError::LabelSyntax { line: line_no, message };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = Some(match name.trim().to_ascii_lowercase().as_str() {
                    "levels" => LabelSection::Levels,
                    "types" => LabelSection::Types,
                    "roles" => LabelSection::Roles,
                    other => return Err(err(format!("unknown section [{other}]"))),
                });
                continue;
            }
            let section = current.ok_or_else(|| err("entry outside of a section".into()))?;
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            let id = u32::from_str(key.trim()).map_err(|_| err(format!("invalid id `{}`", key.trim())))?;
            let value = value.trim();
            if value.is_empty() {
                return Err(err(format!("empty label for id {id}")));
            }
            if map.section_mut(section).insert(id, value.to_string()).is_some() {
                return Err(err(format!("duplicate {section} id {id}")));
            }
        }
        Ok(map)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, section) in [("levels", &self.levels), ("types", &self.types), ("roles", &self.roles)] {
            out.push_str(&format!("[{name}]\n"));
            for (k, v) in section {
                out.push_str(&format!("{k}={v}\n"));
            }
        }
        out
    }
}
