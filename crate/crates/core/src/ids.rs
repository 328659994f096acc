// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

/// A registered (or placeholder) user of the capture system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub u64);

/// Identifier of one issue record (a task).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IssueId(pub u64);

/// Identifier of one expanded forward event.
///
/// A raw forward row can name several receivers; each receiver becomes its own
/// event, distinguished by `receiver` (the position in the row's receiver list).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ForwardId {
    pub row: u64,
    pub receiver: u32,
}

impl ForwardId {
    pub fn new(row: u64, receiver: u32) -> Self {
        Self { row, receiver }
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for IssueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ForwardId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.row, self.receiver)
    }
}

impl From<u64> for UserId {
    fn from(v: u64) -> Self {
        UserId(v)
    }
}

impl From<u64> for IssueId {
    fn from(v: u64) -> Self {
        IssueId(v)
    }
}
