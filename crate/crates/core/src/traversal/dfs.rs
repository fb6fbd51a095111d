//! Augmented DFS transcripts.
//!
//! Prologue rows `DFS-PROLOGUE u level ntop tpush tpop occ`, one per node in
//! order, then `m + 2n` event rows at times `t = 1, 2, ...`:
//!
//! * `DFS-ROW 0 u v tpush(u) tpop(u) tpush(v) tpop(v)`: edge, `u` is the top;
//! * `DFS-ROW 1 u tpop(u)`: push of `u` at time `t`;
//! * `DFS-ROW 2 u tpush(u) v tpush(v) tpop(v)`: pop of `u`, `v` the new top
//!   (`v = 0` with zero times when the stack empties).
//!
//! Each node is labelled with its `(tpush, tpop)` pair; `occ` counts how
//! often the node is annotated across all event rows.

use crate::annotation::{AnnHeader, AnnToken, Annotation, Tag};
use crate::field::PrimeField;
use crate::fingerprint::{DomainEncoder, Fingerprint, FINGERPRINT_WORDS};
use crate::graph::Graph;
use crate::labels::LabelChecker;
use crate::protocol::{ensure, reject, Answer, Outcome, Reason, Reject, Verifier};
use crate::stream::{StreamHeader, StreamToken};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfsEvent {
    Edge(u64, u64),
    Push(u64),
    /// Popped node and the new top (0 when the stack empties).
    Pop(u64, u64),
}

/// Events of a DFS from `s` that explores lower-id neighbors first. `None`
/// when some node is unreachable.
pub fn dfs_events(g: &Graph, s: u64) -> Option<Vec<DfsEvent>> {
    let mut adj = g.adjacency();
    for list in adj.iter_mut() {
        list.sort_by_key(|&(v, _, k)| (v, k));
    }
    let mut shown = vec![false; g.m()];
    let mut pushed = vec![false; g.n as usize + 1];
    let mut cursor = vec![0usize; g.n as usize + 1];
    let mut events = vec![DfsEvent::Push(s)];
    pushed[s as usize] = true;
    let mut stack = vec![s];
    while let Some(&u) = stack.last() {
        let list = &adj[u as usize];
        while cursor[u as usize] < list.len() && shown[list[cursor[u as usize]].2] {
            cursor[u as usize] += 1;
        }
        if let Some(&(v, _, k)) = list.get(cursor[u as usize]) {
            shown[k] = true;
            events.push(DfsEvent::Edge(u, v));
            if !pushed[v as usize] {
                pushed[v as usize] = true;
                events.push(DfsEvent::Push(v));
                stack.push(v);
            }
        } else {
            stack.pop();
            events.push(DfsEvent::Pop(u, stack.last().copied().unwrap_or(0)));
        }
    }
    pushed.iter().skip(1).all(|&p| p).then_some(events)
}

pub fn prove_dfs(g: &Graph, s: u64) -> Option<Annotation> {
    let events = dfs_events(g, s)?;
    let n = g.n as usize;
    let (mut tpush, mut tpop) = (vec![0i64; n + 1], vec![0i64; n + 1]);
    let (mut level, mut ntop, mut occ) = (vec![0i64; n + 1], vec![0i64; n + 1], vec![0i64; n + 1]);
    let mut stack: Vec<u64> = Vec::new();
    for (i, ev) in events.iter().enumerate() {
        let t = i as i64 + 1;
        match *ev {
            DfsEvent::Edge(u, v) => {
                occ[u as usize] += 1;
                occ[v as usize] += 1;
            }
            DfsEvent::Push(u) => {
                stack.push(u);
                tpush[u as usize] = t;
                level[u as usize] = stack.len() as i64;
                occ[u as usize] += 1;
            }
            DfsEvent::Pop(u, v) => {
                stack.pop();
                tpop[u as usize] = t;
                occ[u as usize] += 1;
                if v != 0 {
                    occ[v as usize] += 1;
                }
            }
        }
        if let Some(&top) = stack.last() {
            ntop[top as usize] += 1;
        }
    }
    let mut ann = Annotation::new(AnnHeader::new("dfs"));
    for u in 1..=n {
        ann.push_ints(Tag::DfsPrologue, &[u as i64, level[u], ntop[u], tpush[u], tpop[u], occ[u]]);
    }
    for ev in events {
        let row = match ev {
            DfsEvent::Edge(u, v) => {
                let (u, v) = (u as usize, v as usize);
                vec![0, u as i64, v as i64, tpush[u], tpop[u], tpush[v], tpop[v]]
            }
            DfsEvent::Push(u) => vec![1, u as i64, tpop[u as usize]],
            DfsEvent::Pop(u, v) => {
                let (u, v) = (u as usize, v as usize);
                vec![2, u as i64, tpush[u], v as i64, tpush[v], tpop[v]]
            }
        };
        ann.push_ints(Tag::DfsRow, &row);
    }
    Some(ann)
}

/// Outputs the order in which nodes are first reached.
pub struct DfsVerifier {
    labels: LabelChecker,
    pairs: DomainEncoder,
    f1: Fingerprint,
    f2: Fingerprint,
    s: u64,
    m: u64,
    tmax: u64,
    t: u64,
    height: u64,
    top: u64,
    top_push: u64,
    pending: u64,
    pushes: u64,
    pops: u64,
    preorder: Vec<i128>,
}

impl DfsVerifier {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        let n = header.n;
        let s = super::source_of(header);
        ensure((1..=n).contains(&s), Reason::Domain, || format!("source {s} outside the graph"))?;
        let labels = LabelChecker::random(field, rng, n, false)?;
        let pairs = DomainEncoder::IndexedTuple { bounds: vec![n, n + 1] };
        let q = pairs.domain().ok_or_else(|| Reject::new(Reason::Domain, "height domain overflows"))?;
        let f1 = Fingerprint::new(field, field.random_nonzero(rng), q)?;
        Ok(Self {
            labels,
            pairs,
            f1,
            f2: f1,
            s,
            m: 0,
            tmax: 0,
            t: 0,
            height: 0,
            top: 0,
            top_push: 0,
            pending: 0,
            pushes: 0,
            pops: 0,
            preorder: Vec::new(),
        })
    }

    fn label(&self, tpush: u64, tpop: u64) -> Result<u64, Reject> {
        ensure(tpush <= self.tmax && tpop <= self.tmax, Reason::Domain, || "timestamp beyond transcript".into())?;
        Ok(tpush * (self.tmax + 1) + tpop)
    }

    fn time(&self, tok: &AnnToken, k: usize) -> Result<u64, Reject> {
        Ok(tok.int_in(k, 0, self.tmax as i64)? as u64)
    }

    fn event(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        let n = self.labels.n();
        self.t += 1;
        let t = self.t;
        ensure(t <= self.tmax, Reason::Structure, || "transcript longer than m + 2n".into())?;
        ensure(t == 1 || self.height > 0, Reason::Structure, || "event after the stack emptied".into())?;
        let kind = tok.int_in(0, 0, 2)?;
        ensure(self.pending == 0 || kind == 1, Reason::Transcript, || "new node not pushed right away".into())?;
        match kind {
            0 => {
                tok.expect_len(7)?;
                let (u, v) = (tok.node(1, n)?, tok.node(2, n)?);
                let (pu, ou, pv, ov) = (self.time(tok, 3)?, self.time(tok, 4)?, self.time(tok, 5)?, self.time(tok, 6)?);
                ensure(u == self.top && pu == self.top_push, Reason::Transcript, || format!("edge ({u},{v}) not at the top"))?;
                ensure(ou > t && ov > t, Reason::Transcript, || format!("edge ({u},{v}) after a pop"))?;
                ensure(pv <= t + 1, Reason::Transcript, || format!("node {v} pushed late"))?;
                if pv == t + 1 {
                    self.pending = v;
                }
                let (lu, lv) = (self.label(pu, ou)?, self.label(pv, ov)?);
                self.labels.edge(u, v, lu, lv)?;
            }
            1 => {
                tok.expect_len(3)?;
                let u = tok.node(1, n)?;
                let ou = self.time(tok, 2)?;
                let expected = if t == 1 { self.s } else { self.pending };
                ensure(u == expected, Reason::Transcript, || format!("unexpected push of {u}"))?;
                ensure(ou > t, Reason::Transcript, || format!("node {u} popped before its push"))?;
                self.labels.occurrence(u, self.label(t, ou)?)?;
                self.pending = 0;
                self.pushes += 1;
                self.height += 1;
                self.top = u;
                self.top_push = t;
                self.preorder.push(u as i128);
            }
            _ => {
                tok.expect_len(6)?;
                let u = tok.node(1, n)?;
                let pu = self.time(tok, 2)?;
                let v = tok.int_in(3, 0, n as i64)? as u64;
                let (pv, ov) = (self.time(tok, 4)?, self.time(tok, 5)?);
                ensure(u == self.top && pu == self.top_push, Reason::Transcript, || format!("pop of non-top {u}"))?;
                self.labels.occurrence(u, self.label(pu, t)?)?;
                self.pops += 1;
                self.height -= 1;
                if v == 0 {
                    ensure(self.height == 0 && pv == 0 && ov == 0, Reason::Transcript, || "stack is not empty".into())?;
                } else {
                    ensure(self.height > 0, Reason::Transcript, || "new top on an empty stack".into())?;
                    ensure(pv <= t && t < ov, Reason::Transcript, || format!("new top {v} not on the stack"))?;
                    self.labels.occurrence(v, self.label(pv, ov)?)?;
                }
                self.top = v;
                self.top_push = pv;
            }
        }
        if self.height > 0 {
            let item = self.pairs.encode(&[self.top, self.height])?;
            self.f2.update(item, 1)?;
        }
        Ok(())
    }
}

impl Verifier for DfsVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        match *tok {
            StreamToken::Edge(u, v) => {
                self.m += 1;
                self.labels.stream_edge(u, v)
            }
            _ => reject(Reason::Structure, "dfs expects an undirected edge stream"),
        }
    }

    fn annotation_header(&mut self, _header: &AnnHeader) -> Result<(), Reject> {
        self.tmax = self.m + 2 * self.labels.n();
        let side = self.tmax + 1;
        self.labels.set_lmax(side.checked_mul(side).ok_or_else(|| Reject::new(Reason::Domain, "timestamps overflow"))? - 1)
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        let n = self.labels.n();
        match tok.tag {
            Tag::DfsPrologue if self.t == 0 => {
                tok.expect_len(6)?;
                let u = tok.node(0, n)?;
                let level = tok.int_in(1, 1, n as i64)? as u64;
                let ntop = tok.int_in(2, 0, self.tmax as i64)?;
                let label = self.label(self.time(tok, 3)?, self.time(tok, 4)?)?;
                let occ = tok.int_in(5, 0, 2 * self.tmax as i64)? as u64;
                self.labels.node(u, label, occ)?;
                let item = self.pairs.encode(&[u, level])?;
                self.f1.update(item, ntop)?;
                Ok(())
            }
            Tag::DfsRow => self.event(tok),
            other => reject(Reason::Structure, format!("unexpected {} token", other.as_str())),
        }
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        ensure(self.t == self.tmax, Reason::Structure, || format!("{} rows, expected {}", self.t, self.tmax))?;
        ensure(self.height == 0 && self.pending == 0, Reason::Transcript, || "transcript ends mid-search".into())?;
        let n = self.labels.n();
        ensure(self.pushes == n && self.pops == n, Reason::Transcript, || "not every node pushed and popped".into())?;
        ensure(self.f1.acc() == self.f2.acc(), Reason::NodesMismatch, || "stack heights disagree with prologue".into())?;
        self.labels.finish()?;
        Ok(Outcome::Value(Answer::Ints(std::mem::take(&mut self.preorder))))
    }

    fn words(&self) -> usize {
        self.labels.words() + 2 * FINGERPRINT_WORDS + 11
    }
}
