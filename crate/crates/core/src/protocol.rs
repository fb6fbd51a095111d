//! The verifier contract, outcomes, and cost accounting.
//!
//! A verifier sees the input stream and then the annotation, one token at a
//! time through callbacks. It cannot look back: anything it wants to remember
//! must live in its own state, which it reports through [`Verifier::words`].

use crate::annotation::{AnnHeader, AnnToken};
use crate::stream::{ParseError, StreamToken};
use num_rational::Ratio;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reason {
    Parse,
    ProtocolMismatch,
    Structure,
    Domain,
    LabelsInconsistent,
    EdgesMismatch,
    NodesMismatch,
    StreamMismatch,
    LocalCheck,
    ClaimMismatch,
    DualityGap,
    PolyMismatch,
    MemoryInconsistent,
    Transcript,
}

impl Reason {
    pub fn code(&self) -> &'static str {
        match self {
            Reason::Parse => "parse",
            Reason::ProtocolMismatch => "protocol-mismatch",
            Reason::Structure => "structure",
            Reason::Domain => "domain",
            Reason::LabelsInconsistent => "labels-inconsistent",
            Reason::EdgesMismatch => "edges-mismatch",
            Reason::NodesMismatch => "nodes-mismatch",
            Reason::StreamMismatch => "stream-mismatch",
            Reason::LocalCheck => "local-check",
            Reason::ClaimMismatch => "claim-mismatch",
            Reason::DualityGap => "duality-gap",
            Reason::PolyMismatch => "poly-mismatch",
            Reason::MemoryInconsistent => "memory-inconsistent",
            Reason::Transcript => "transcript",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub reason: Reason,
    pub detail: String,
}

impl Reject {
    pub fn new(reason: Reason, detail: impl Into<String>) -> Self {
        Self { reason, detail: detail.into() }
    }
}

impl fmt::Display for Reject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.reason.code(), self.detail)
    }
}

/// Shorthand for building a rejection inside verifier code.
pub fn reject<T>(reason: Reason, detail: impl Into<String>) -> Result<T, Reject> {
    Err(Reject::new(reason, detail))
}

/// Fails with `reason` unless `cond` holds.
pub fn ensure(cond: bool, reason: Reason, detail: impl FnOnce() -> String) -> Result<(), Reject> {
    if cond {
        Ok(())
    } else {
        Err(Reject::new(reason, detail()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    Int(i128),
    Rat(Ratio<i128>),
    Ints(Vec<i128>),
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Int(x) => write!(f, "{x}"),
            Answer::Rat(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Answer::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Answer::Ints(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Value(Answer),
    Accept,
    Bottom(Reject),
}

impl Outcome {
    pub fn is_bottom(&self) -> bool {
        matches!(self, Outcome::Bottom(_))
    }

    pub fn value(&self) -> Option<&Answer> {
        match self {
            Outcome::Value(a) => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CostReport {
    /// Annotation words actually read.
    pub hcost: u64,
    /// Peak verifier working memory, in words.
    pub vcost: u64,
    /// Input stream length.
    pub m: u64,
}

/// Verifier side of a protocol. Randomness is drawn at construction, before
/// any token arrives.
pub trait Verifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject>;

    fn annotation_header(&mut self, _header: &AnnHeader) -> Result<(), Reject> {
        Ok(())
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject>;

    /// Called once after the last annotation token. Returns `Value` or `Accept`.
    fn finish(&mut self) -> Result<Outcome, Reject>;

    /// Live working memory in words. Output already emitted is not counted.
    fn words(&self) -> usize;
}

/// Feeds the stream and then the annotation through `v`, tracking costs.
pub fn run_protocol<S, A>(v: &mut dyn Verifier, stream: S, header: &AnnHeader, annotation: A) -> (Outcome, CostReport)
where
    S: IntoIterator<Item = Result<StreamToken, ParseError>>,
    A: IntoIterator<Item = Result<AnnToken, ParseError>>,
{
    let mut cost = CostReport { vcost: v.words() as u64, ..Default::default() };
    let peak = |v: &dyn Verifier, cost: &mut CostReport| cost.vcost = cost.vcost.max(v.words() as u64);
    let outcome = (|| {
        for tok in stream {
            let tok = tok.map_err(|e| Reject::new(Reason::Parse, format!("stream: {e}")))?;
            cost.m += 1;
            v.stream(&tok)?;
            peak(v, &mut cost);
        }
        cost.hcost += header.words();
        v.annotation_header(header)?;
        peak(v, &mut cost);
        for tok in annotation {
            let tok = tok.map_err(|e| Reject::new(Reason::Parse, format!("annotation: {e}")))?;
            cost.hcost += tok.words();
            v.annotation(&tok)?;
            peak(v, &mut cost);
        }
        let out = v.finish()?;
        peak(v, &mut cost);
        Ok(out)
    })();
    let outcome = outcome.unwrap_or_else(Outcome::Bottom);
    (outcome, cost)
}

/// [`run_protocol`] over in-memory inputs.
pub fn run_in_memory(
    v: &mut dyn Verifier,
    stream: &crate::stream::Stream,
    annotation: &crate::annotation::Annotation,
) -> (Outcome, CostReport) {
    run_protocol(
        v,
        stream.tokens.iter().map(|t| Ok(*t)),
        &annotation.header,
        annotation.tokens.iter().map(|t| Ok(t.clone())),
    )
}

impl From<crate::fingerprint::FingerprintError> for Reject {
    fn from(e: crate::fingerprint::FingerprintError) -> Self {
        Reject::new(Reason::Domain, e.to_string())
    }
}
