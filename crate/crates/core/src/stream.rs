//! The `AS1` input-stream format.
//!
//! ```text
//! AS1 graph n=3 m=2
//! e 1 2
//! e 2 3
//! ```
//!
//! The first line is the header: an optional `AS1` magic, a kind, then
//! `key=value` parameters (`n` and `m` are always present; `m` counts the
//! token lines that follow). Token lines:
//!
//! | line          | token                                       |
//! |---------------|---------------------------------------------|
//! | `e u v`       | undirected edge                             |
//! | `d u v`       | directed edge                               |
//! | `w u v x`     | weighted edge (direction from header kind)  |
//! | `A i j r`     | constraint-matrix entry (rational `r`)      |
//! | `b i r`       | right-hand-side entry                       |
//! | `c j r`       | objective entry                             |
//! | `M i j x`     | integer matrix entry                        |
//! | `V j x`       | integer vector entry                        |
//!
//! Indices are 1-based. Rationals are written `num/den` or as plain integers.

use num_rational::Rational64;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::BufRead;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("structure: {0}")]
    Structure(String),
    #[error("io: {0}")]
    Io(String),
}

impl ParseError {
    pub(crate) fn at(line: usize, msg: impl Into<String>) -> Self {
        ParseError::Malformed { line, msg: msg.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StreamKind {
    Graph,
    Digraph,
    WGraph,
    WDigraph,
    Lp,
    Matrix,
    /// No input tokens (e.g. a bare memory transcript).
    Empty,
}

impl StreamKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StreamKind::Graph => "graph",
            StreamKind::Digraph => "digraph",
            StreamKind::WGraph => "wgraph",
            StreamKind::WDigraph => "wdigraph",
            StreamKind::Lp => "lp",
            StreamKind::Matrix => "matrix",
            StreamKind::Empty => "empty",
        }
    }

    pub fn is_weighted(&self) -> bool {
        matches!(self, StreamKind::WGraph | StreamKind::WDigraph)
    }

    pub fn is_directed(&self) -> bool {
        matches!(self, StreamKind::Digraph | StreamKind::WDigraph)
    }

    pub fn is_graph(&self) -> bool {
        matches!(self, StreamKind::Graph | StreamKind::Digraph | StreamKind::WGraph | StreamKind::WDigraph)
    }
}

impl FromStr for StreamKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "graph" => StreamKind::Graph,
            "digraph" => StreamKind::Digraph,
            "wgraph" => StreamKind::WGraph,
            "wdigraph" => StreamKind::WDigraph,
            "lp" => StreamKind::Lp,
            "matrix" => StreamKind::Matrix,
            "empty" => StreamKind::Empty,
            other => return Err(format!("unknown stream kind {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamHeader {
    pub kind: StreamKind,
    pub n: u64,
    pub m: u64,
    /// Everything else (`b`, `c`, `wmax`, `s`, `t`, `alpha`, ...), kept as text.
    pub params: BTreeMap<String, String>,
}

impl StreamHeader {
    pub fn new(kind: StreamKind, n: u64, m: u64) -> Self {
        Self { kind, n, m, params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get_u64(&self, key: &str) -> Option<u64> {
        match key {
            "n" => Some(self.n),
            "m" => Some(self.m),
            _ => self.params.get(key)?.parse().ok(),
        }
    }

    pub fn require_u64(&self, key: &str) -> Result<u64, ParseError> {
        self.get_u64(key)
            .ok_or_else(|| ParseError::Structure(format!("header lacks integer parameter {key:?}")))
    }

    pub fn get_ratio(&self, key: &str) -> Option<Rational64> {
        parse_ratio(self.params.get(key)?).ok()
    }

    /// Row/column dimensions for matrix and LP streams.
    pub fn dims(&self) -> Result<(u64, u64), ParseError> {
        Ok((self.require_u64("b")?, self.require_u64("c")?))
    }

    pub fn wmax(&self) -> u64 {
        self.get_u64("wmax").unwrap_or(u32::MAX as u64)
    }
}

impl fmt::Display for StreamHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AS1 {} n={} m={}", self.kind.as_str(), self.n, self.m)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpTarget {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamToken {
    Edge(u64, u64),
    DirectedEdge(u64, u64),
    WeightedEdge(u64, u64, u64),
    LpEntry { target: LpTarget, i: u64, j: u64, value: Rational64 },
    MatEntry(u64, u64, i64),
    VecEntry(u64, i64),
}

impl fmt::Display for StreamToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StreamToken::Edge(u, v) => write!(f, "e {u} {v}"),
            StreamToken::DirectedEdge(u, v) => write!(f, "d {u} {v}"),
            StreamToken::WeightedEdge(u, v, w) => write!(f, "w {u} {v} {w}"),
            StreamToken::LpEntry { target: LpTarget::A, i, j, value } => {
                write!(f, "A {i} {j} {}", fmt_ratio(value))
            }
            StreamToken::LpEntry { target: LpTarget::B, i, value, .. } => write!(f, "b {i} {}", fmt_ratio(value)),
            StreamToken::LpEntry { target: LpTarget::C, j, value, .. } => write!(f, "c {j} {}", fmt_ratio(value)),
            StreamToken::MatEntry(i, j, x) => write!(f, "M {i} {j} {x}"),
            StreamToken::VecEntry(j, x) => write!(f, "V {j} {x}"),
        }
    }
}

pub fn fmt_ratio(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_ratio(s: &str) -> Result<Rational64, String> {
    match s.split_once('/') {
        Some((a, b)) => {
            let num: i64 = a.parse().map_err(|_| format!("bad numerator {a:?}"))?;
            let den: i64 = b.parse().map_err(|_| format!("bad denominator {b:?}"))?;
            if den == 0 {
                return Err("zero denominator".into());
            }
            Ok(Rational64::new(num, den))
        }
        None => s.parse::<i64>().map(Rational64::from_integer).map_err(|_| format!("bad number {s:?}")),
    }
}

/// An in-memory stream: header plus tokens in arrival order.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub header: StreamHeader,
    pub tokens: Vec<StreamToken>,
}

impl Stream {
    pub fn new(mut header: StreamHeader, tokens: Vec<StreamToken>) -> Self {
        header.m = tokens.len() as u64;
        Self { header, tokens }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.header).unwrap();
        for t in &self.tokens {
            writeln!(out, "{t}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let reader = StreamReader::new(text.as_bytes())?;
        let header = reader.header().clone();
        let tokens = reader.collect::<Result<Vec<_>, _>>()?;
        Ok(Self { header, tokens })
    }
}

pub fn parse_header_line(line: &str, lineno: usize) -> Result<StreamHeader, ParseError> {
    let mut words = line.split_whitespace().peekable();
    if words.peek() == Some(&"AS1") {
        words.next();
    }
    let kind: StreamKind = words
        .next()
        .ok_or_else(|| ParseError::at(lineno, "empty header"))?
        .parse()
        .map_err(|e: String| ParseError::at(lineno, e))?;
    let mut params = BTreeMap::new();
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| ParseError::at(lineno, format!("expected key=value, got {w:?}")))?;
        params.insert(k.to_string(), v.to_string());
    }
    let take = |params: &mut BTreeMap<String, String>, key: &str| -> Result<u64, ParseError> {
        params
            .remove(key)
            .ok_or_else(|| ParseError::at(lineno, format!("header lacks {key}")))?
            .parse()
            .map_err(|_| ParseError::at(lineno, format!("header {key} is not an integer")))
    };
    let n = take(&mut params, "n")?;
    let m = take(&mut params, "m")?;
    Ok(StreamHeader { kind, n, m, params })
}

/// One-pass reader over an `AS1` stream. Yields each token exactly once, in
/// file order, and fails if the body length disagrees with `m`.
pub struct StreamReader<R: BufRead> {
    lines: std::io::Lines<R>,
    header: StreamHeader,
    lineno: usize,
    seen: u64,
    done: bool,
}

impl<R: BufRead> StreamReader<R> {
    pub fn new(input: R) -> Result<Self, ParseError> {
        let mut lines = input.lines();
        let mut lineno = 0;
        let header = loop {
            lineno += 1;
            match lines.next() {
                None => return Err(ParseError::at(lineno, "missing header")),
                Some(Err(e)) => return Err(ParseError::Io(e.to_string())),
                Some(Ok(l)) if l.trim().is_empty() || l.starts_with('#') => continue,
                Some(Ok(l)) => break parse_header_line(&l, lineno)?,
            }
        };
        Ok(Self { lines, header, lineno, seen: 0, done: false })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    fn parse_token(&self, line: &str) -> Result<StreamToken, ParseError> {
        let ln = self.lineno;
        let words: Vec<&str> = line.split_whitespace().collect();
        let h = &self.header;
        let int = |s: &str| s.parse::<u64>().map_err(|_| ParseError::at(ln, format!("bad index {s:?}")));
        let signed = |s: &str| s.parse::<i64>().map_err(|_| ParseError::at(ln, format!("bad integer {s:?}")));
        let bounded = |s: &str, bound: u64, what: &str| -> Result<u64, ParseError> {
            let x = int(s)?;
            if x < 1 || x > bound {
                return Err(ParseError::at(ln, format!("{what} {x} outside [1, {bound}]")));
            }
            Ok(x)
        };
        let arity = |k: usize| {
            if words.len() != k + 1 {
                Err(ParseError::at(ln, format!("expected {k} fields after {:?}", words[0])))
            } else {
                Ok(())
            }
        };
        let ratio = |s: &str| parse_ratio(s).map_err(|e| ParseError::at(ln, e));
        let dim = |key: &str| h.get_u64(key).ok_or_else(|| ParseError::at(ln, format!("header lacks {key}")));
        let tok = match words[0] {
            "e" | "d" => {
                arity(2)?;
                let (u, v) = (bounded(words[1], h.n, "node")?, bounded(words[2], h.n, "node")?);
                if words[0] == "e" {
                    StreamToken::Edge(u, v)
                } else {
                    StreamToken::DirectedEdge(u, v)
                }
            }
            "w" => {
                arity(3)?;
                let w = int(words[3])?;
                if w > h.wmax() {
                    return Err(ParseError::at(ln, format!("weight {w} exceeds wmax")));
                }
                StreamToken::WeightedEdge(bounded(words[1], h.n, "node")?, bounded(words[2], h.n, "node")?, w)
            }
            "A" => {
                arity(3)?;
                StreamToken::LpEntry {
                    target: LpTarget::A,
                    i: bounded(words[1], dim("b")?, "row")?,
                    j: bounded(words[2], dim("c")?, "column")?,
                    value: ratio(words[3])?,
                }
            }
            "b" => {
                arity(2)?;
                StreamToken::LpEntry { target: LpTarget::B, i: bounded(words[1], dim("b")?, "row")?, j: 0, value: ratio(words[2])? }
            }
            "c" => {
                arity(2)?;
                StreamToken::LpEntry { target: LpTarget::C, i: 0, j: bounded(words[1], dim("c")?, "column")?, value: ratio(words[2])? }
            }
            "M" => {
                arity(3)?;
                StreamToken::MatEntry(bounded(words[1], dim("b")?, "row")?, bounded(words[2], dim("c")?, "column")?, signed(words[3])?)
            }
            "V" => {
                arity(2)?;
                StreamToken::VecEntry(bounded(words[1], dim("c")?, "index")?, signed(words[2])?)
            }
            other => return Err(ParseError::at(ln, format!("unknown token {other:?}"))),
        };
        Ok(tok)
    }
}

impl<R: BufRead> Iterator for StreamReader<R> {
    type Item = Result<StreamToken, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            self.lineno += 1;
            match self.lines.next() {
                None => {
                    self.done = true;
                    if self.seen != self.header.m {
                        return Some(Err(ParseError::Structure(format!(
                            "header declares m={} but body has {} tokens",
                            self.header.m, self.seen
                        ))));
                    }
                    return None;
                }
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(ParseError::Io(e.to_string())));
                }
                Some(Ok(l)) => {
                    if l.trim().is_empty() || l.starts_with('#') {
                        continue;
                    }
                    self.seen += 1;
                    if self.seen > self.header.m {
                        self.done = true;
                        return Some(Err(ParseError::Structure(format!(
                            "body has more than the declared m={} tokens",
                            self.header.m
                        ))));
                    }
                    let r = self.parse_token(&l);
                    if r.is_err() {
                        self.done = true;
                    }
                    return Some(r);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_small_graph() {
        let s = Stream::parse("graph n=3 m=2\ne 1 2\ne 2 3").unwrap();
        assert_eq!(s.header.n, 3);
        assert_eq!(s.header.m, 2);
        assert_eq!(s.tokens, vec![StreamToken::Edge(1, 2), StreamToken::Edge(2, 3)]);
    }

    #[test]
    fn empty_body() {
        let s = Stream::parse("AS1 graph n=4 m=0\n").unwrap();
        assert!(s.tokens.is_empty());
    }

    #[test]
    fn rejects_zero_index() {
        let err = Stream::parse("graph n=3 m=1\ne 0 2").unwrap_err();
        assert!(matches!(err, ParseError::Malformed { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn count_mismatch_is_structural() {
        assert!(matches!(Stream::parse("graph n=3 m=2\ne 1 2\n"), Err(ParseError::Structure(_))));
        assert!(matches!(Stream::parse("graph n=3 m=0\ne 1 2\n"), Err(ParseError::Structure(_))));
    }

    #[test]
    fn lp_roundtrip_and_duplicates_kept() {
        let text = "AS1 lp n=0 m=4 b=1 c=2\nA 1 1 -1/2\nA 1 1 3\nb 1 -2\nc 2 4/6\n";
        let s = Stream::parse(text).unwrap();
        assert_eq!(s.tokens.len(), 4);
        assert_eq!(
            s.tokens[3],
            StreamToken::LpEntry { target: LpTarget::C, i: 0, j: 2, value: Rational64::new(2, 3) }
        );
        assert_eq!(Stream::parse(&s.to_text()).unwrap(), s);
    }
}
