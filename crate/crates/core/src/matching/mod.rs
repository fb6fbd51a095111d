//! Maximum matching in a general graph.
//!
//! The helper claims a size `k`, lists a matching of that size, and then
//! certifies optimality with a set `S` whose removal leaves components that
//! are each shown connected by a BFS transcript. The verifier accepts when
//! `|S| - odd(G - S) + n == 2k`.
//!
//! Layout:
//! `CLAIM k`; `MATCH-M u v` (k rows); `MATCH-VM v` (the 2k matched nodes,
//! increasing); `MATCH-REST u v` (the other edges); `MATCH-VS v` (S,
//! increasing); per component `MATCH-COMP` then a BFS transcript over its
//! nodes and inner edges; finally `MATCH-ES`, a `NODE-ROW v l deg` for every
//! node with `l = 1` iff `v` is in `S`, and `EDGE-ROW u v lu lv` for each edge
//! touching `S`.

pub mod blossom;

use crate::annotation::{AnnHeader, AnnToken, Annotation, Tag};
use crate::field::PrimeField;
use crate::fingerprint::{Fingerprint, FINGERPRINT_WORDS};
use crate::graph::{Graph, UnionFind};
use crate::labels::LabelChecker;
use crate::protocol::{ensure, reject, Answer, Outcome, Reason, Reject, Verifier};
use crate::stream::{StreamHeader, StreamToken};
use crate::traversal::bfs::{feed_transcript_token, levels_from, push_bfs_transcript, BfsChecker};
use rand::Rng;

/// Maximum matching as 1-based pairs `(u, v)` with `u < v`.
pub fn matching_pairs(g: &Graph) -> Vec<(u64, u64)> {
    let adj = zero_based_adjacency(g);
    let mate = blossom::maximum_matching(&adj);
    (0..adj.len()).filter_map(|v| mate[v].filter(|&u| v < u).map(|u| (v as u64 + 1, u as u64 + 1))).collect()
}

fn zero_based_adjacency(g: &Graph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); g.n as usize];
    for &(u, v, _) in &g.edges {
        if u != v {
            adj[u as usize - 1].push(v as usize - 1);
            adj[v as usize - 1].push(u as usize - 1);
        }
    }
    adj
}

/// The barrier `S`: neighbours of the nodes missed by some maximum matching,
/// excluding those nodes themselves. Indexed 1-based.
pub fn barrier(g: &Graph) -> Vec<bool> {
    let adj = zero_based_adjacency(g);
    let mate = blossom::maximum_matching(&adj);
    let d = blossom::deficient_nodes(&adj, &mate);
    let mut s = vec![false; g.n as usize + 1];
    for v in 0..adj.len() {
        if d[v] {
            for &u in &adj[v] {
                if !d[u] {
                    s[u + 1] = true;
                }
            }
        }
    }
    s
}

pub fn prove_matching(g: &Graph) -> Annotation {
    let n = g.n;
    let m = matching_pairs(g);
    let in_s = barrier(g);
    let mut ann = Annotation::new(AnnHeader::new("matching"));
    ann.push_ints(Tag::Claim, &[m.len() as i64]);
    let mut matched = vec![false; n as usize + 1];
    for &(u, v) in &m {
        ann.push_ints(Tag::MatchM, &[u as i64, v as i64]);
        matched[u as usize] = true;
        matched[v as usize] = true;
    }
    for v in (1..=n).filter(|&v| matched[v as usize]) {
        ann.push_ints(Tag::MatchVm, &[v as i64]);
    }
    let mut skip: Vec<(u64, u64)> = m.clone();
    for &(u, v, _) in &g.edges {
        let key = (u.min(v), u.max(v));
        if let Some(i) = skip.iter().position(|&e| e == key) {
            skip.swap_remove(i);
        } else {
            ann.push_ints(Tag::MatchRest, &[u as i64, v as i64]);
        }
    }
    for v in (1..=n).filter(|&v| in_s[v as usize]) {
        ann.push_ints(Tag::MatchVs, &[v as i64]);
    }

    let mut uf = UnionFind::new(n as usize + 1);
    for &(u, v, _) in &g.edges {
        if !in_s[u as usize] && !in_s[v as usize] {
            uf.union(u as usize, v as usize);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<u64>> = Default::default();
    for v in (1..=n).filter(|&v| !in_s[v as usize]) {
        groups.entry(uf.find(v as usize)).or_default().push(v);
    }
    let mut comps: Vec<Vec<u64>> = groups.into_values().collect();
    comps.sort_by_key(|c| c[0]);
    for nodes in comps {
        let root = uf.find(nodes[0] as usize);
        let edges: Vec<(u64, u64)> = g
            .edges
            .iter()
            .filter(|&&(u, v, _)| !in_s[u as usize] && !in_s[v as usize] && uf.find(u as usize) == root)
            .map(|&(u, v, _)| (u, v))
            .collect();
        let dist = levels_from(n, &edges, &[nodes[0]], &nodes).expect("component is connected");
        ann.push_ints(Tag::MatchComp, &[]);
        push_bfs_transcript(&mut ann, &nodes, &edges, &dist);
    }

    ann.push_ints(Tag::MatchEs, &[]);
    let es: Vec<(u64, u64)> =
        g.edges.iter().filter(|&&(u, v, _)| in_s[u as usize] || in_s[v as usize]).map(|&(u, v, _)| (u, v)).collect();
    let mut deg = vec![0i64; n as usize + 1];
    for &(u, v) in &es {
        deg[u as usize] += 1;
        deg[v as usize] += 1;
    }
    let lab = |v: u64| in_s[v as usize] as i64;
    for v in 1..=n {
        ann.push_ints(Tag::NodeRow, &[v as i64, lab(v), deg[v as usize]]);
    }
    for (u, v) in es {
        ann.push_ints(Tag::EdgeRow, &[u as i64, v as i64, lab(u), lab(v)]);
    }
    ann
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Phase {
    Start,
    Claim,
    Matching,
    MatchedNodes,
    Rest,
    Barrier,
    Components,
    BarrierEdges,
}

impl Phase {
    fn next(self) -> Self {
        match self {
            Phase::Start => Phase::Claim,
            Phase::Claim => Phase::Matching,
            Phase::Matching => Phase::MatchedNodes,
            Phase::MatchedNodes => Phase::Rest,
            Phase::Rest => Phase::Barrier,
            Phase::Barrier => Phase::Components,
            Phase::Components | Phase::BarrierEdges => Phase::BarrierEdges,
        }
    }
}

/// Outputs the maximum matching size.
pub struct MatchingVerifier {
    n: u64,
    phase: Phase,
    k: u64,
    /// Stream vs. matching plus rest.
    split: LabelChecker,
    /// Stream vs. component edges plus barrier edges; also runs the
    /// component transcripts and the barrier label rows.
    check: BfsChecker,
    fp_ends: Fingerprint,
    fp_matched: Fingerprint,
    fp_barrier: Fingerprint,
    fp_barrier_rows: Fingerprint,
    fp_partition: Fingerprint,
    m_rows: u64,
    matched_rows: u64,
    last: u64,
    s: u64,
    odd: u64,
    comp_open: bool,
}

impl MatchingVerifier {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        let n = header.n;
        ensure(n >= 1, Reason::Domain, || "matching needs at least one node".into())?;
        let split = LabelChecker::random(field, rng, n, false)?;
        let check = BfsChecker::new(field, rng, n)?.for_subsets();
        let node_fp = |rng: &mut R| Fingerprint::new(field, field.random_nonzero(rng), n);
        let fp_ends = node_fp(rng)?;
        let fp_barrier = node_fp(rng)?;
        let fp_partition = node_fp(rng)?;
        Ok(Self {
            n,
            phase: Phase::Start,
            k: 0,
            split,
            check,
            fp_ends,
            fp_matched: fp_ends,
            fp_barrier,
            fp_barrier_rows: fp_barrier,
            fp_partition,
            m_rows: 0,
            matched_rows: 0,
            last: 0,
            s: 0,
            odd: 0,
            comp_open: false,
        })
    }

    /// Moves forward to `target`, running the closing checks of each phase
    /// left behind.
    fn advance_to(&mut self, target: Phase) -> Result<(), Reject> {
        ensure(self.phase >= Phase::Claim, Reason::Structure, || "missing claim".into())?;
        ensure(self.phase <= target, Reason::Structure, || format!("{target:?} rows after {:?}", self.phase))?;
        while self.phase < target {
            self.close_phase()?;
            self.phase = self.phase.next();
            self.last = 0;
        }
        Ok(())
    }

    fn close_phase(&mut self) -> Result<(), Reject> {
        match self.phase {
            Phase::Matching => {
                ensure(self.m_rows == self.k, Reason::ClaimMismatch, || {
                    format!("{} matching edges for claimed {}", self.m_rows, self.k)
                })
            }
            Phase::MatchedNodes => {
                ensure(self.matched_rows == 2 * self.k, Reason::ClaimMismatch, || {
                    format!("{} matched nodes for {} edges", self.matched_rows, self.k)
                })?;
                ensure(self.fp_ends.acc() == self.fp_matched.acc(), Reason::LocalCheck, || {
                    "matching edges share endpoints".into()
                })
            }
            Phase::Rest => self.split.check_edges(),
            Phase::Components => self.close_component(),
            _ => Ok(()),
        }
    }

    fn close_component(&mut self) -> Result<(), Reject> {
        if !self.comp_open {
            return Ok(());
        }
        self.comp_open = false;
        self.check.finish_transcript()?;
        let size = self.check.labels.node_rows();
        ensure(size > 0, Reason::Structure, || "empty component".into())?;
        ensure(self.check.roots() == 1, Reason::LocalCheck, || format!("component with {} roots", self.check.roots()))?;
        self.odd += size % 2;
        Ok(())
    }

    /// Strictly increasing node list rows.
    fn list_node(&mut self, tok: &AnnToken) -> Result<u64, Reject> {
        tok.expect_len(1)?;
        let v = tok.node(0, self.n)?;
        ensure(v > self.last, Reason::Structure, || format!("node {v} out of order"))?;
        self.last = v;
        Ok(v)
    }

    fn edge_args(&self, tok: &AnnToken) -> Result<(u64, u64), Reject> {
        tok.expect_len(2)?;
        Ok((tok.node(0, self.n)?, tok.node(1, self.n)?))
    }
}

impl Verifier for MatchingVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        match *tok {
            StreamToken::Edge(u, v) => {
                self.split.stream_edge(u, v)?;
                self.check.labels.stream_edge(u, v)
            }
            _ => reject(Reason::Structure, "matching expects an undirected edge stream"),
        }
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        match tok.tag {
            Tag::Claim => {
                ensure(self.phase == Phase::Start, Reason::Structure, || "repeated claim".into())?;
                tok.expect_len(1)?;
                self.k = tok.int_in(0, 0, (self.n / 2) as i64)? as u64;
                self.phase = Phase::Claim;
            }
            Tag::MatchM => {
                self.advance_to(Phase::Matching)?;
                let (u, v) = self.edge_args(tok)?;
                ensure(u != v, Reason::LocalCheck, || format!("loop ({u},{v}) in matching"))?;
                self.split.replay_unlabeled(u, v)?;
                self.fp_ends.update(u, 1)?;
                self.fp_ends.update(v, 1)?;
                self.m_rows += 1;
            }
            Tag::MatchVm => {
                self.advance_to(Phase::MatchedNodes)?;
                let v = self.list_node(tok)?;
                self.fp_matched.update(v, 1)?;
                self.matched_rows += 1;
            }
            Tag::MatchRest => {
                self.advance_to(Phase::Rest)?;
                let (u, v) = self.edge_args(tok)?;
                self.split.replay_unlabeled(u, v)?;
            }
            Tag::MatchVs => {
                self.advance_to(Phase::Barrier)?;
                let v = self.list_node(tok)?;
                self.fp_barrier.update(v, 1)?;
                self.fp_partition.update(v, 1)?;
                self.s += 1;
            }
            Tag::MatchComp => {
                self.advance_to(Phase::Components)?;
                tok.expect_len(0)?;
                self.close_component()?;
                self.check.reset();
                self.comp_open = true;
            }
            Tag::NodeRow | Tag::BfsLevel | Tag::BfsEdge if self.phase == Phase::Components && self.comp_open => {
                feed_transcript_token(&mut self.check, tok)?;
                if tok.tag == Tag::NodeRow {
                    self.fp_partition.update(tok.node(0, self.n)?, 1)?;
                }
            }
            Tag::MatchEs => {
                ensure(self.phase < Phase::BarrierEdges, Reason::Structure, || "repeated MATCH-ES".into())?;
                self.advance_to(Phase::BarrierEdges)?;
                tok.expect_len(0)?;
                self.check.labels.reset_labels();
            }
            Tag::NodeRow if self.phase == Phase::BarrierEdges => {
                tok.expect_len(3)?;
                let v = tok.node(0, self.n)?;
                let l = tok.int_in(1, 0, 1)? as u64;
                self.check.labels.node(v, l, tok.int_in(2, 0, i64::MAX)? as u64)?;
                if l == 1 {
                    self.fp_barrier_rows.update(v, 1)?;
                }
            }
            Tag::EdgeRow if self.phase == Phase::BarrierEdges => {
                tok.expect_len(4)?;
                let (u, v) = (tok.node(0, self.n)?, tok.node(1, self.n)?);
                let (lu, lv) = (tok.int_in(2, 0, 1)? as u64, tok.int_in(3, 0, 1)? as u64);
                ensure(lu == 1 || lv == 1, Reason::LocalCheck, || format!("edge ({u},{v}) misses the barrier"))?;
                self.check.labels.edge(u, v, lu, lv)?;
            }
            _ => return crate::traversal::bfs::unexpected(tok),
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        ensure(self.phase == Phase::BarrierEdges, Reason::Structure, || "missing MATCH-ES section".into())?;
        let labels = &mut self.check.labels;
        ensure(labels.node_rows() == self.n, Reason::Structure, || {
            format!("{} barrier rows for {} nodes", labels.node_rows(), self.n)
        })?;
        labels.check_labels()?;
        labels.check_edges()?;
        ensure(self.fp_barrier_rows.acc() == self.fp_barrier.acc(), Reason::NodesMismatch, || {
            "barrier labels disagree with the barrier list".into()
        })?;
        let all = self.fp_partition.range_set(self.n)?;
        ensure(all.acc() == self.fp_partition.acc(), Reason::NodesMismatch, || {
            "barrier and components do not partition the nodes".into()
        })?;
        ensure(self.s + self.n == 2 * self.k + self.odd, Reason::ClaimMismatch, || {
            format!("bound {} + {} - {} does not equal 2*{}", self.n, self.s, self.odd, self.k)
        })?;
        Ok(Outcome::Value(Answer::Int(self.k as i128)))
    }

    fn words(&self) -> usize {
        self.split.words() + self.check.words() + 5 * FINGERPRINT_WORDS + 10
    }
}
