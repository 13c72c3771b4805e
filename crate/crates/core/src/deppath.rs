//! Shortest dependency paths between two nominals and their node encoding.
//!
//! A path is encoded as alternating word, arrow and label nodes, e.g.
//! `singer → nsubj caused ← dobj commotion`. `→` marks a step from a
//! dependent up to its head, `←` a step from a head down to a dependent.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::corpus::{ParsedSentence, Span};
use crate::error::{Error, Result};

/// Step from dependent to head.
pub const UP: &str = "→";
/// Step from head to dependent.
pub const DOWN: &str = "←";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    ToHead,
    ToDependent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub neighbor: usize,
    pub label: String,
    pub orientation: Orientation,
}

/// Undirected view of a dependency tree. The root link is not an edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepGraph {
    adjacency: Vec<Vec<Edge>>,
}

impl DepGraph {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[Edge] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn edge(&self, from: usize, to: usize) -> Option<&Edge> {
        self.adjacency[from].iter().find(|e| e.neighbor == to)
    }
}

pub fn build_graph(parse: &ParsedSentence) -> DepGraph {
    let mut adjacency = vec![Vec::new(); parse.len()];
    for (i, tok) in parse.tokens().iter().enumerate() {
        if let Some(h) = tok.head {
            adjacency[i].push(Edge {
                neighbor: h,
                label: tok.deprel.clone(),
                orientation: Orientation::ToHead,
            });
            adjacency[h].push(Edge {
                neighbor: i,
                label: tok.deprel.clone(),
                orientation: Orientation::ToDependent,
            });
        }
    }
    DepGraph { adjacency }
}

/// The syntactic head of a multi-token span: the single token whose head
/// lies outside the span. Falls back to the rightmost token.
pub fn select_anchor(span: Span, parse: &ParsedSentence) -> usize {
    let mut heads = span
        .indices()
        .filter(|&i| parse.head(i).is_none_or(|h| !span.contains(h)));
    match (heads.next(), heads.next()) {
        (Some(i), None) => i,
        _ => span.end,
    }
}

/// BFS path from `a` to `b`, both endpoints included.
pub fn shortest_path(g: &DepGraph, a: usize, b: usize) -> Result<Vec<usize>> {
    let n = g.len();
    if a >= n || b >= n {
        return Err(Error::Contract(format!("anchor out of range for {n} tokens")));
    }
    if a == b {
        return Err(Error::DegeneratePair(a));
    }
    let mut parent = vec![usize::MAX; n];
    parent[a] = a;
    let mut queue = VecDeque::from([a]);
    while let Some(cur) = queue.pop_front() {
        if cur == b {
            break;
        }
        for e in g.neighbors(cur) {
            if parent[e.neighbor] == usize::MAX {
                parent[e.neighbor] = cur;
                queue.push_back(e.neighbor);
            }
        }
    }
    if parent[b] == usize::MAX {
        return Err(Error::NoPath { from: a, to: b });
    }
    let mut path = vec![b];
    let mut cur = b;
    while cur != a {
        cur = parent[cur];
        path.push(cur);
    }
    path.reverse();
    Ok(path)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Word,
    Arrow,
    Label,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathNode {
    pub kind: NodeKind,
    pub text: String,
}

impl PathNode {
    pub fn word(text: impl Into<String>) -> Self {
        PathNode {
            kind: NodeKind::Word,
            text: text.into(),
        }
    }

    pub fn arrow(orientation: Orientation) -> Self {
        let text = match orientation {
            Orientation::ToHead => UP,
            Orientation::ToDependent => DOWN,
        };
        PathNode {
            kind: NodeKind::Arrow,
            text: text.to_string(),
        }
    }

    pub fn label(text: impl Into<String>) -> Self {
        PathNode {
            kind: NodeKind::Label,
            text: text.into(),
        }
    }

    fn flipped_arrow(&self) -> Self {
        debug_assert_eq!(self.kind, NodeKind::Arrow);
        let orientation = if self.text == UP {
            Orientation::ToDependent
        } else {
            Orientation::ToHead
        };
        PathNode::arrow(orientation)
    }
}

/// Which node kinds a path encoding carries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PathMode {
    /// Words, arrows and dependency labels.
    #[default]
    Lcnn,
    /// Words and arrows only.
    DirOnly,
}

impl PathMode {
    /// Nodes per edge.
    fn stride(self) -> usize {
        match self {
            PathMode::Lcnn => 3,
            PathMode::DirOnly => 2,
        }
    }
}

impl fmt::Display for PathMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathMode::Lcnn => "lcnn",
            PathMode::DirOnly => "cnn",
        })
    }
}

impl FromStr for PathMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lcnn" => Ok(PathMode::Lcnn),
            "cnn" | "dir" | "dir_only" | "cnn_dir_only" => Ok(PathMode::DirOnly),
            _ => Err(Error::Config(format!("unknown path mode {s:?} (expected lcnn or cnn)"))),
        }
    }
}

/// An encoded path: `WORD (ARROW LABEL WORD)*` or `WORD (ARROW WORD)*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NodeSequence {
    nodes: Vec<PathNode>,
    mode: PathMode,
}

impl NodeSequence {
    pub fn new(nodes: Vec<PathNode>, mode: PathMode) -> Result<Self> {
        let stride = mode.stride();
        if nodes.is_empty() || !(nodes.len() - 1).is_multiple_of(stride) {
            return Err(Error::Format(format!("{} nodes do not form a {mode} path", nodes.len())));
        }
        for (i, node) in nodes.iter().enumerate() {
            let expected = match (i % stride, mode) {
                (0, _) => NodeKind::Word,
                (1, _) => NodeKind::Arrow,
                _ => NodeKind::Label,
            };
            if node.kind != expected {
                return Err(Error::Format(format!("node {i} should be {expected:?}, got {:?}", node.kind)));
            }
            if node.kind == NodeKind::Arrow && node.text != UP && node.text != DOWN {
                return Err(Error::Format(format!("bad arrow {:?}", node.text)));
            }
        }
        Ok(NodeSequence { nodes, mode })
    }

    /// Parses the space-separated form written by [`Display`], inferring the
    /// mode from the arrow count.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let arrows = parts.iter().filter(|p| **p == UP || **p == DOWN).count();
        let mode = if parts.len() == 3 * arrows + 1 {
            PathMode::Lcnn
        } else if parts.len() == 2 * arrows + 1 {
            PathMode::DirOnly
        } else {
            return Err(Error::Format(format!("cannot read {text:?} as an encoded path")));
        };
        let stride = mode.stride();
        let nodes = parts
            .iter()
            .enumerate()
            .map(|(i, p)| match i % stride {
                0 => PathNode::word(*p),
                1 => PathNode {
                    kind: NodeKind::Arrow,
                    text: p.to_string(),
                },
                _ => PathNode::label(*p),
            })
            .collect();
        Self::new(nodes, mode)
    }

    pub fn nodes(&self) -> &[PathNode] {
        &self.nodes
    }

    pub fn mode(&self) -> PathMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        (self.nodes.len() - 1) / self.mode.stride()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.text.as_str())
    }
}

impl fmt::Display for NodeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&n.text)?;
        }
        Ok(())
    }
}

pub fn encode_path(path: &[usize], g: &DepGraph, parse: &ParsedSentence, mode: PathMode) -> Result<NodeSequence> {
    let first = *path.first().ok_or_else(|| Error::Contract("empty path".into()))?;
    let word = |i: usize| PathNode::word(parse.tokens()[i].form.to_lowercase());
    let mut nodes = Vec::with_capacity(path.len() * mode.stride());
    nodes.push(word(first));
    for step in path.windows(2) {
        let edge = g
            .edge(step[0], step[1])
            .ok_or_else(|| Error::Contract(format!("tokens {} and {} are not adjacent", step[0], step[1])))?;
        nodes.push(PathNode::arrow(edge.orientation));
        if mode == PathMode::Lcnn {
            nodes.push(PathNode::label(edge.label.clone()));
        }
        nodes.push(word(step[1]));
    }
    Ok(NodeSequence { nodes, mode })
}

/// The encoding of the same path walked from the other end.
pub fn reverse_path(s: &NodeSequence) -> NodeSequence {
    let stride = s.mode.stride();
    let nodes = &s.nodes;
    let edges = s.edge_count();
    let mut out = Vec::with_capacity(nodes.len());
    out.push(nodes[nodes.len() - 1].clone());
    for k in (0..edges).rev() {
        let base = k * stride;
        out.push(nodes[base + 1].flipped_arrow());
        if stride == 3 {
            out.push(nodes[base + 2].clone());
        }
        out.push(nodes[base].clone());
    }
    NodeSequence { nodes: out, mode: s.mode }
}

/// Anchors of both nominals.
pub fn anchors(parse: &ParsedSentence, e1: Span, e2: Span) -> (usize, usize) {
    (select_anchor(e1, parse), select_anchor(e2, parse))
}

/// Encoded shortest path from token `from` to token `to`.
pub fn extract(parse: &ParsedSentence, from: usize, to: usize, mode: PathMode) -> Result<NodeSequence> {
    let g = build_graph(parse);
    let path = shortest_path(&g, from, to)?;
    encode_path(&path, &g, parse, mode)
}

/// `ID<TAB>node1 node2 ...` per line, as written by `extract-paths`.
pub fn format_path_file(paths: &[(u64, NodeSequence)]) -> String {
    paths.iter().map(|(id, s)| format!("{id}\t{s}\n")).collect()
}

pub fn parse_path_file(text: &str) -> Result<Vec<(u64, NodeSequence)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let err = |m: String| Error::Format(format!("path file line {}: {m}", i + 1));
            let (id, nodes) = line.split_once('\t').ok_or_else(|| err("expected `ID<TAB>nodes`".into()))?;
            let id = id.trim().parse().map_err(|_| err(format!("bad id {id:?}")))?;
            let seq = NodeSequence::parse(nodes).map_err(|e| err(e.to_string()))?;
            Ok((id, seq))
        })
        .collect()
}

pub fn read_path_file(path: &std::path::Path) -> Result<Vec<(u64, NodeSequence)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_path_file(&text)
}
