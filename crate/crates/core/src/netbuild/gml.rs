// SPDX-License-Identifier: Apache-2.0

//! GML writer and a small reader for round trips.
//!
//! Output is ASCII with LF line endings and two-space indentation. Node ids
//! are the user ids. Attribute names are fixed: `role`, `org` on nodes;
//! `issueid`, `level`, `type`, `ts` on multigraph edges and `value` on
//! collapsed arcs. Quotes, ampersands and non-ASCII characters inside
//! strings are written as `&quot;`, `&amp;` and `&#N;`.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::{self, Write};

use thiserror::Error;

use super::{CollabGraph, Direction, GraphBuilder, NewEdge, Node, SimpleWeightedGraph};
use crate::{ForwardId, IssueId, UserId};

#[derive(Debug, Error, PartialEq)]
pub enum GmlError {
    #[error("gml syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("gml: missing `{0}`")]
    Missing(&'static str),
    #[error("gml: invalid `{key}` value")]
    Invalid { key: &'static str },
}

pub trait GmlExport {
    fn write_gml<W: Write>(&self, sink: W) -> io::Result<()>;

    fn to_gml_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_gml(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("gml output is ASCII")
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("&quot;"),
            '&' => out.push_str("&amp;"),
            ' '..='~' => out.push(c),
            _ => {
                let _ = write!(out, "&#{};", c as u32);
            }
        }
    }
    out
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        let decoded = rest.find(';').and_then(|end| {
            let entity = &rest[1..end];
            let c = match entity {
                "quot" => Some('"'),
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "apos" => Some('\''),
                _ => entity
                    .strip_prefix("#x")
                    .and_then(|h| u32::from_str_radix(h, 16).ok())
                    .or_else(|| entity.strip_prefix('#').and_then(|d| d.parse().ok()))
                    .and_then(char::from_u32),
            };
            c.map(|c| (c, end + 1))
        });
        match decoded {
            Some((c, len)) => {
                out.push(c);
                rest = &rest[len..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn write_node(out: &mut String, n: &Node) {
    let _ = write!(
        out,
        "  node [\n    id {}\n    label \"{}\"\n    role \"{}\"\n    org \"{}\"\n  ]\n",
        n.user,
        n.user,
        escape(&n.role),
        escape(&n.organization)
    );
}

impl GmlExport for CollabGraph {
    fn write_gml<W: Write>(&self, mut sink: W) -> io::Result<()> {
        let mut out = String::from("graph [\n  directed 1\n");
        let mut seen = HashSet::new();
        if self.edges().iter().any(|e| !seen.insert((e.src, e.dst))) {
            out.push_str("  multigraph 1\n");
        }
        for n in self.nodes() {
            write_node(&mut out, n);
        }
        for e in self.edges() {
            let _ = write!(
                out,
                "  edge [\n    source {}\n    target {}\n    issueid {}\n    level \"{}\"\n    type \"{}\"\n    ts {}\n  ]\n",
                e.src,
                e.dst,
                e.issue,
                escape(&e.level),
                escape(&e.kind),
                e.timestamp
            );
        }
        out.push_str("]\n");
        sink.write_all(out.as_bytes())
    }
}

impl GmlExport for SimpleWeightedGraph {
    fn write_gml<W: Write>(&self, mut sink: W) -> io::Result<()> {
        let directed = u8::from(self.direction == Direction::Directed);
        let mut out = format!("graph [\n  directed {directed}\n");
        for n in &self.nodes {
            write_node(&mut out, n);
        }
        for ((s, t), w) in &self.arcs {
            let _ = write!(out, "  edge [\n    source {s}\n    target {t}\n    value {w}\n  ]\n");
        }
        out.push_str("]\n");
        sink.write_all(out.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GmlValue {
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<(String, GmlValue)>),
}

fn find<'a>(list: &'a [(String, GmlValue)], key: &str) -> Option<&'a GmlValue> {
    list.iter().find(|(k, _)| k == key).map(|(_, v)| v)
}

fn get_int(list: &[(String, GmlValue)], key: &'static str) -> Result<Option<i64>, GmlError> {
    match find(list, key) {
        None => Ok(None),
        Some(GmlValue::Int(i)) => Ok(Some(*i)),
        Some(_) => Err(GmlError::Invalid { key }),
    }
}

fn get_str(list: &[(String, GmlValue)], key: &'static str) -> Result<String, GmlError> {
    match find(list, key) {
        None => Ok(String::new()),
        Some(GmlValue::Str(s)) => Ok(s.clone()),
        Some(GmlValue::Int(i)) => Ok(i.to_string()),
        Some(_) => Err(GmlError::Invalid { key }),
    }
}

fn get_id(list: &[(String, GmlValue)], key: &'static str) -> Result<UserId, GmlError> {
    let v = get_int(list, key)?.ok_or(GmlError::Missing(key))?;
    u64::try_from(v).map(UserId).map_err(|_| GmlError::Invalid { key })
}

/// A parsed `graph [...]` block.
#[derive(Debug, Clone, PartialEq)]
pub struct GmlDocument {
    pub directed: bool,
    pub multigraph: bool,
    pub nodes: Vec<Vec<(String, GmlValue)>>,
    pub edges: Vec<Vec<(String, GmlValue)>>,
}

impl GmlDocument {
    fn nodes_into(&self, b: &mut GraphBuilder) -> Result<Vec<Node>, GmlError> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for attrs in &self.nodes {
            let user = get_id(attrs, "id")?;
            let role = get_str(attrs, "role")?;
            let org = get_str(attrs, "org")?;
            b.node(user, &role, &org);
            nodes.push(Node { user, role, organization: org });
        }
        Ok(nodes)
    }

    /// Rebuilds a multigraph. Forward ids are not stored in GML; each edge
    /// gets `ForwardId { row: position, receiver: 0 }`.
    pub fn to_collab_graph(&self) -> Result<CollabGraph, GmlError> {
        let mut b = GraphBuilder::default();
        self.nodes_into(&mut b)?;
        for (i, attrs) in self.edges.iter().enumerate() {
            let issue = get_int(attrs, "issueid")?.unwrap_or(0);
            b.add_edge(NewEdge {
                src: get_id(attrs, "source")?,
                dst: get_id(attrs, "target")?,
                issue: IssueId(u64::try_from(issue).map_err(|_| GmlError::Invalid { key: "issueid" })?),
                forward: ForwardId::new(i as u64, 0),
                level: get_str(attrs, "level")?,
                kind: get_str(attrs, "type")?,
                timestamp: get_int(attrs, "ts")?.unwrap_or(0),
            });
        }
        Ok(b.build())
    }

    pub fn to_weighted(&self) -> Result<SimpleWeightedGraph, GmlError> {
        let mut b = GraphBuilder::default();
        let mut nodes = self.nodes_into(&mut b)?;
        nodes.sort_by_key(|n| n.user);
        let direction = if self.directed { Direction::Directed } else { Direction::Undirected };
        let mut arcs = BTreeMap::new();
        for attrs in &self.edges {
            let (s, t) = (get_id(attrs, "source")?, get_id(attrs, "target")?);
            let w = get_int(attrs, "value")?.unwrap_or(1);
            let w = u64::try_from(w).map_err(|_| GmlError::Invalid { key: "value" })?;
            *arcs.entry(SimpleWeightedGraph::key(direction, s, t)).or_insert(0) += w;
        }
        Ok(SimpleWeightedGraph { nodes, arcs, direction, filter: None })
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Open,
    Close,
    Str(String),
    Bare(String),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, GmlError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'[' => {
                tokens.push((i, Token::Open));
                i += 1;
            }
            b']' => {
                tokens.push((i, Token::Close));
                i += 1;
            }
            b'"' => {
                let end = text[i + 1..].find('"').ok_or(GmlError::Syntax { offset: i, message: "unterminated string".into() })?;
                tokens.push((i, Token::Str(unescape(&text[i + 1..i + 1 + end]))));
                i += end + 2;
            }
            _ => {
                let start = i;
                while i < bytes.len() && !matches!(bytes[i], b' ' | b'\t' | b'\r' | b'\n' | b'[' | b']' | b'"') {
                    i += 1;
                }
                tokens.push((start, Token::Bare(text[start..i].to_string())));
            }
        }
    }
    Ok(tokens)
}

fn parse_list(
    tokens: &mut std::iter::Peekable<std::vec::IntoIter<(usize, Token)>>,
    nested: bool,
) -> Result<Vec<(String, GmlValue)>, GmlError> {
    let mut list = Vec::new();
    loop {
        let (offset, tok) = match tokens.next() {
            None if nested => return Err(GmlError::Syntax { offset: usize::MAX, message: "missing `]`".into() }),
            None => return Ok(list),
            Some(t) => t,
        };
        let key = match tok {
            Token::Close if nested => return Ok(list),
            Token::Bare(k) => k,
            other => return Err(GmlError::Syntax { offset, message: format!("expected key, found {other:?}") }),
        };
        let (offset, tok) = tokens.next().ok_or(GmlError::Syntax { offset, message: format!("missing value for `{key}`") })?;
        let value = match tok {
            Token::Open => GmlValue::List(parse_list(tokens, true)?),
            Token::Str(s) => GmlValue::Str(s),
            Token::Bare(b) => {
                if let Ok(i) = b.parse() {
                    GmlValue::Int(i)
                } else if let Ok(f) = b.parse() {
                    GmlValue::Float(f)
                } else {
                    return Err(GmlError::Syntax { offset, message: format!("invalid value `{b}`") });
                }
            }
            Token::Close => return Err(GmlError::Syntax { offset, message: "unexpected `]`".into() }),
        };
        list.push((key, value));
    }
}

/// Parses the first `graph [...]` block of a GML document.
pub fn parse_gml(text: &str) -> Result<GmlDocument, GmlError> {
    let mut tokens = tokenize(text)?.into_iter().peekable();
    let top = parse_list(&mut tokens, false)?;
    let graph = match find(&top, "graph") {
        Some(GmlValue::List(l)) => l,
        Some(_) => return Err(GmlError::Invalid { key: "graph" }),
        None => return Err(GmlError::Missing("graph")),
    };
    let flag = |key: &'static str| get_int(graph, key).map(|v| v.unwrap_or(0) != 0);
    let mut doc =
        GmlDocument { directed: flag("directed")?, multigraph: flag("multigraph")?, nodes: Vec::new(), edges: Vec::new() };
    for (k, v) in graph {
        match (k.as_str(), v) {
            ("node", GmlValue::List(l)) => doc.nodes.push(l.clone()),
            ("edge", GmlValue::List(l)) => doc.edges.push(l.clone()),
            ("node", _) => return Err(GmlError::Invalid { key: "node" }),
            ("edge", _) => return Err(GmlError::Invalid { key: "edge" }),
            _ => {}
        }
    }
    Ok(doc)
}
