//! The `AN1` annotation format.
//!
//! ```text
//! AN1 dag
//! DAG-TOPO
//! NODE-ROW 1 1 1
//! ...
//! END 7
//! ```
//!
//! One header line (`AN1 <protocol> key=value...`), one token per line
//! (`TAG arg...`), and a trailer `END <count>` followed by a newline. The
//! trailer makes every truncation detectable.

use crate::protocol::{Reason, Reject};
use crate::stream::{parse_ratio, ParseError};
use num_rational::Rational64;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::BufRead;
use std::str::FromStr;

macro_rules! tags {
    ($($variant:ident => $text:literal,)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Tag { $($variant,)* }

        impl Tag {
            pub const ALL: &'static [Tag] = &[$(Tag::$variant,)*];

            pub fn as_str(&self) -> &'static str {
                match self { $(Tag::$variant => $text,)* }
            }
        }

        impl FromStr for Tag {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok(Tag::$variant),)*
                    other => Err(format!("unknown tag {other:?}")),
                }
            }
        }
    };
}

tags! {
    Claim => "CLAIM",
    NodeRow => "NODE-ROW",
    EdgeRow => "EDGE-ROW",
    DagTopo => "DAG-TOPO",
    DagCycle => "DAG-CYCLE",
    DagRest => "DAG-REST",
    MatchM => "MATCH-M",
    MatchVm => "MATCH-VM",
    MatchRest => "MATCH-REST",
    MatchVs => "MATCH-VS",
    MatchComp => "MATCH-COMP",
    MatchEs => "MATCH-ES",
    LpX => "LP-X",
    LpRow => "LP-ROW",
    LpA => "LP-A",
    LpDualY => "LP-DUAL-Y",
    LpDualRow => "LP-DUAL-ROW",
    LpAt => "LP-AT",
    MvPoly => "MV-POLY",
    MvEval => "MV-EVAL",
    MvX => "MV-X",
    PowLevel => "POW-LEVEL",
    PowEval => "POW-EVAL",
    PowEntry => "POW-ENTRY",
    PowZeroCell => "POW-ZERO-CELL",
    EigX => "EIG-X",
    ResXhat => "RES-XHAT",
    ResD => "RES-D",
    ResR => "RES-R",
    MemRow => "MEM-ROW",
    MemEpilogue => "MEM-EPILOGUE",
    SimLoad => "SIM-LOAD",
    SimGuess => "SIM-GUESS",
    SimHalt => "SIM-HALT",
    BfsLevel => "BFS-LEVEL",
    BfsEdge => "BFS-EDGE",
    OddWalk => "ODD-WALK",
    OddRest => "ODD-REST",
    DfsPrologue => "DFS-PROLOGUE",
    DfsRow => "DFS-ROW",
}

/// An annotation argument: an integer or a rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Num {
    Int(i64),
    Rat(Rational64),
}

impl Num {
    pub fn words(&self) -> u64 {
        match self {
            Num::Int(_) => 1,
            Num::Rat(_) => 2,
        }
    }

    pub fn as_ratio(&self) -> Rational64 {
        match *self {
            Num::Int(x) => Rational64::from_integer(x),
            Num::Rat(r) => r,
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Int(x) => write!(f, "{x}"),
            Num::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl FromStr for Num {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.contains('/') {
            parse_ratio(s).map(Num::Rat)
        } else {
            s.parse::<i64>().map(Num::Int).map_err(|_| format!("bad number {s:?}"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnnToken {
    pub tag: Tag,
    pub args: Vec<Num>,
}

impl AnnToken {
    pub fn new(tag: Tag, args: Vec<Num>) -> Self {
        Self { tag, args }
    }

    pub fn ints(tag: Tag, args: &[i64]) -> Self {
        Self { tag, args: args.iter().map(|&x| Num::Int(x)).collect() }
    }

    pub fn words(&self) -> u64 {
        self.args.iter().map(Num::words).sum()
    }

    fn shape_error(&self, what: &str) -> Reject {
        Reject::new(Reason::Structure, format!("{} token: {what}", self.tag.as_str()))
    }

    /// Checks the argument count.
    pub fn expect_len(&self, k: usize) -> Result<(), Reject> {
        if self.args.len() != k {
            return Err(self.shape_error(&format!("expected {k} arguments, got {}", self.args.len())));
        }
        Ok(())
    }

    pub fn int(&self, k: usize) -> Result<i64, Reject> {
        match self.args.get(k) {
            Some(Num::Int(x)) => Ok(*x),
            Some(Num::Rat(_)) => Err(self.shape_error(&format!("argument {k} must be an integer"))),
            None => Err(self.shape_error(&format!("missing argument {k}"))),
        }
    }

    /// Integer argument constrained to `[lo, hi]`.
    pub fn int_in(&self, k: usize, lo: i64, hi: i64) -> Result<i64, Reject> {
        let x = self.int(k)?;
        if x < lo || x > hi {
            return Err(Reject::new(
                Reason::Domain,
                format!("{} argument {k} = {x} outside [{lo}, {hi}]", self.tag.as_str()),
            ));
        }
        Ok(x)
    }

    /// Node id in `[1, n]`.
    pub fn node(&self, k: usize, n: u64) -> Result<u64, Reject> {
        Ok(self.int_in(k, 1, n as i64)? as u64)
    }

    pub fn ratio(&self, k: usize) -> Result<Rational64, Reject> {
        self.args.get(k).map(Num::as_ratio).ok_or_else(|| self.shape_error(&format!("missing argument {k}")))
    }
}

impl fmt::Display for AnnToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag.as_str())?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnHeader {
    pub protocol: String,
    pub params: BTreeMap<String, i64>,
}

impl AnnHeader {
    pub fn new(protocol: &str) -> Self {
        Self { protocol: protocol.to_string(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: i64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Header parameters count one word each.
    pub fn words(&self) -> u64 {
        self.params.len() as u64
    }

    pub fn get(&self, key: &str) -> Option<i64> {
        self.params.get(key).copied()
    }

    pub fn require(&self, key: &str) -> Result<i64, Reject> {
        self.get(key)
            .ok_or_else(|| Reject::new(Reason::Structure, format!("annotation header lacks {key}")))
    }
}

impl fmt::Display for AnnHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AN1 {}", self.protocol)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub header: AnnHeader,
    pub tokens: Vec<AnnToken>,
}

impl Annotation {
    pub fn new(header: AnnHeader) -> Self {
        Self { header, tokens: Vec::new() }
    }

    pub fn push(&mut self, tok: AnnToken) {
        self.tokens.push(tok);
    }

    pub fn push_ints(&mut self, tag: Tag, args: &[i64]) {
        self.tokens.push(AnnToken::ints(tag, args));
    }

    /// Total annotation length in words.
    pub fn words(&self) -> u64 {
        self.header.words() + self.tokens.iter().map(AnnToken::words).sum::<u64>()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.header).unwrap();
        for t in &self.tokens {
            writeln!(out, "{t}").unwrap();
        }
        writeln!(out, "END {}", self.tokens.len()).unwrap();
        out
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let reader = AnnReader::new(text.as_bytes())?;
        let header = reader.header().clone();
        let tokens = reader.collect::<Result<Vec<_>, _>>()?;
        Ok(Self { header, tokens })
    }
}

pub fn parse_ann_header(line: &str, lineno: usize) -> Result<AnnHeader, ParseError> {
    let mut words = line.split_whitespace();
    if words.next() != Some("AN1") {
        return Err(ParseError::at(lineno, "annotation must start with AN1"));
    }
    let protocol = words.next().ok_or_else(|| ParseError::at(lineno, "missing protocol name"))?;
    let mut header = AnnHeader::new(protocol);
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| ParseError::at(lineno, format!("expected key=value, got {w:?}")))?;
        let v: i64 = v.parse().map_err(|_| ParseError::at(lineno, format!("parameter {k} is not an integer")))?;
        header.params.insert(k.to_string(), v);
    }
    Ok(header)
}

/// One-pass reader over an `AN1` annotation. The final item is an error
/// unless the trailer is present, matches the token count, and ends the input.
pub struct AnnReader<R: BufRead> {
    input: R,
    header: AnnHeader,
    lineno: usize,
    count: u64,
    done: bool,
    buf: String,
}

impl<R: BufRead> AnnReader<R> {
    pub fn new(mut input: R) -> Result<Self, ParseError> {
        let mut buf = String::new();
        let got = input.read_line(&mut buf).map_err(|e| ParseError::Io(e.to_string()))?;
        if got == 0 || !buf.ends_with('\n') {
            return Err(ParseError::Structure("annotation header missing or truncated".into()));
        }
        let header = parse_ann_header(buf.trim_end(), 1)?;
        Ok(Self { input, header, lineno: 1, count: 0, done: false, buf })
    }

    pub fn header(&self) -> &AnnHeader {
        &self.header
    }

    fn fail(&mut self, e: ParseError) -> Option<Result<AnnToken, ParseError>> {
        self.done = true;
        Some(Err(e))
    }
}

impl<R: BufRead> Iterator for AnnReader<R> {
    type Item = Result<AnnToken, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        self.buf.clear();
        self.lineno += 1;
        let ln = self.lineno;
        match self.input.read_line(&mut self.buf) {
            Err(e) => return self.fail(ParseError::Io(e.to_string())),
            Ok(0) => return self.fail(ParseError::Structure("annotation ends without END trailer".into())),
            Ok(_) => {}
        }
        if !self.buf.ends_with('\n') {
            return self.fail(ParseError::Structure(format!("line {ln} is truncated")));
        }
        let line = self.buf.trim_end().to_string();
        let mut words = line.split_whitespace();
        let Some(head) = words.next() else {
            return self.fail(ParseError::at(ln, "empty line"));
        };
        if head == "END" {
            let declared: Option<u64> = words.next().and_then(|w| w.parse().ok());
            if declared != Some(self.count) || words.next().is_some() {
                return self.fail(ParseError::Structure(format!(
                    "END trailer does not match {} tokens read",
                    self.count
                )));
            }
            let mut rest = String::new();
            if self.input.read_line(&mut rest).map(|k| k > 0).unwrap_or(true) {
                return self.fail(ParseError::Structure("data after END trailer".into()));
            }
            self.done = true;
            return None;
        }
        let tag: Tag = match head.parse() {
            Ok(t) => t,
            Err(e) => return self.fail(ParseError::at(ln, e)),
        };
        let mut args = Vec::new();
        for w in words {
            match w.parse::<Num>() {
                Ok(x) => args.push(x),
                Err(e) => return self.fail(ParseError::at(ln, e)),
            }
        }
        self.count += 1;
        Some(Ok(AnnToken { tag, args }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_roundtrip() {
        let a = Annotation::new(AnnHeader::new("labels"));
        let text = a.to_text();
        assert_eq!(text, "AN1 labels\nEND 0\n");
        assert_eq!(Annotation::parse(&text).unwrap(), a);
    }

    #[test]
    fn label_row_roundtrip() {
        let mut a = Annotation::new(AnnHeader::new("labels").with("lmax", 3));
        a.push_ints(Tag::NodeRow, &[1, 0, 2]);
        a.push(AnnToken::new(Tag::LpX, vec![Num::Int(1), Num::Rat(Rational64::new(-3, 4)), Num::Rat(Rational64::from_integer(2))]));
        let text = a.to_text();
        assert!(text.contains("NODE-ROW 1 0 2\n"));
        assert!(text.contains("LP-X 1 -3/4 2/1\n"));
        assert_eq!(Annotation::parse(&text).unwrap(), a);
        assert_eq!(a.words(), 1 + 3 + 5);
    }

    #[test]
    fn unknown_tag_rejected() {
        assert!(Annotation::parse("AN1 x\nBOGUS 1\nEND 1\n").is_err());
    }

    #[test]
    fn every_truncation_fails() {
        let mut a = Annotation::new(AnnHeader::new("dag"));
        a.push_ints(Tag::DagTopo, &[]);
        for v in 1..=12 {
            a.push_ints(Tag::NodeRow, &[v, v, 1]);
        }
        let text = a.to_text();
        for cut in 0..text.len() {
            assert!(Annotation::parse(&text[..cut]).is_err(), "prefix of length {cut} parsed");
        }
        assert!(Annotation::parse(&text).is_ok());
    }
}
