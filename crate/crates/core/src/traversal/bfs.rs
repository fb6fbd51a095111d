//! Augmented BFS transcripts.
//!
//! Layout: node rows `NODE-ROW v l deg` for the covered nodes (sorted), then
//! one block per level `l = 0, 1, ...`: rows `BFS-LEVEL l+1 v deg_l(v)` for
//! every node at level `l + 1`, followed by the edges whose smaller endpoint
//! label is `l` as `BFS-EDGE u v l(u) l(v)`. Nodes labelled 0 are roots.

use crate::annotation::{Annotation, Tag};
use crate::field::PrimeField;
use crate::fingerprint::{DomainEncoder, Fingerprint, FINGERPRINT_WORDS};
use crate::labels::LabelChecker;
use crate::protocol::{ensure, reject, Reason, Reject};
use rand::Rng;
use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct BfsChecker {
    pub labels: LabelChecker,
    pairs: DomainEncoder,
    levels: Fingerprint,
    fp_deg: Fingerprint,
    fp_cross: Fingerprint,
    block: u64,
    in_edges: bool,
    roots: u64,
    flat_edges: u64,
}

impl BfsChecker {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, n: u64) -> Result<Self, Reject> {
        let labels = LabelChecker::random(field, rng, n, false)?;
        let pairs = DomainEncoder::IndexedTuple { bounds: vec![n, n + 1] };
        let q = pairs.domain().ok_or_else(|| Reject::new(Reason::Domain, "level domain overflows"))?;
        let levels = Fingerprint::new(field, field.random_nonzero(rng), q)?;
        let fp_deg = Fingerprint::new(field, field.random_nonzero(rng), n)?;
        Ok(Self {
            labels,
            pairs,
            levels,
            fp_deg,
            fp_cross: fp_deg,
            block: 0,
            in_edges: false,
            roots: 0,
            flat_edges: 0,
        })
    }

    /// Transcripts over a subset of the nodes (one per component).
    pub fn for_subsets(self) -> Self {
        Self { labels: self.labels.subset_mode(), ..self }
    }

    pub fn roots(&self) -> u64 {
        self.roots
    }

    /// Edges seen so far with equal endpoint labels.
    pub fn flat_edges(&self) -> u64 {
        self.flat_edges
    }

    /// Clears all per-transcript state but keeps the edge fingerprints.
    pub fn reset(&mut self) {
        self.labels.reset_labels();
        self.levels = self.levels.empty_like();
        self.fp_deg = self.fp_deg.empty_like();
        self.fp_cross = self.fp_cross.empty_like();
        self.block = 0;
        self.in_edges = false;
        self.roots = 0;
    }

    fn pair(&self, v: u64, l: u64) -> Result<u64, Reject> {
        Ok(self.pairs.encode(&[v, l + 1])?)
    }

    pub fn node(&mut self, v: u64, l: u64, deg: u64) -> Result<(), Reject> {
        self.labels.node(v, l, deg)?;
        if l == 0 {
            self.roots += 1;
        } else {
            self.levels.update(self.pair(v, l)?, 1)?;
        }
        Ok(())
    }

    fn advance(&mut self, b: u64, edge: bool) -> Result<(), Reject> {
        self.labels.close_nodes()?;
        ensure(b >= self.block, Reason::Structure, || format!("level {b} after level {}", self.block))?;
        if b > self.block {
            self.close_block()?;
            self.block = b;
            self.in_edges = false;
        } else {
            ensure(edge || !self.in_edges, Reason::Structure, || "level row after the block's edges".into())?;
        }
        self.in_edges |= edge;
        Ok(())
    }

    fn close_block(&mut self) -> Result<(), Reject> {
        ensure(self.fp_deg.acc() == self.fp_cross.acc(), Reason::LocalCheck, || {
            format!("level {} degrees disagree with its cross edges", self.block + 1)
        })?;
        self.fp_deg = self.fp_deg.empty_like();
        self.fp_cross = self.fp_cross.empty_like();
        Ok(())
    }

    pub fn level(&mut self, l: u64, v: u64, deg: u64) -> Result<(), Reject> {
        let n = self.labels.n();
        ensure((1..=n).contains(&l), Reason::Domain, || format!("level {l} outside [1, {n}]"))?;
        ensure((1..=n).contains(&v), Reason::Domain, || format!("node {v} outside [1, {n}]"))?;
        ensure(deg >= 1, Reason::LocalCheck, || format!("node {v} at level {l} has no parent"))?;
        self.advance(l - 1, false)?;
        self.levels.update(self.pair(v, l)?, -1)?;
        let field = self.fp_deg.field();
        self.fp_deg.update_fe(v, field.from_u64(deg))?;
        Ok(())
    }

    pub fn edge(&mut self, u: u64, v: u64, lu: u64, lv: u64) -> Result<(), Reject> {
        ensure(lu.abs_diff(lv) <= 1, Reason::LocalCheck, || format!("edge ({u},{v}) spans labels {lu},{lv}"))?;
        self.advance(lu.min(lv), true)?;
        self.labels.edge(u, v, lu, lv)?;
        if lu + 1 == lv {
            self.fp_cross.update(v, 1)?;
        } else if lv + 1 == lu {
            self.fp_cross.update(u, 1)?;
        } else {
            self.flat_edges += 1;
        }
        Ok(())
    }

    /// Ends one transcript: closes the last block and checks level
    /// membership and label consistency. Edge-multiset checks are left to the
    /// caller.
    pub fn finish_transcript(&mut self) -> Result<(), Reject> {
        self.labels.close_nodes()?;
        self.close_block()?;
        ensure(self.levels.acc() == 0, Reason::NodesMismatch, || "level rows disagree with node labels".into())?;
        self.labels.check_labels()
    }

    pub fn words(&self) -> usize {
        self.labels.words() + 3 * FINGERPRINT_WORDS + 5
    }
}

/// Multi-source hop distances over `nodes` (restricted to `edges`), from
/// `roots`. Returns `None` if some node is unreachable.
pub fn levels_from(n: u64, edges: &[(u64, u64)], roots: &[u64], nodes: &[u64]) -> Option<Vec<u64>> {
    let mut adj = vec![Vec::new(); n as usize + 1];
    for &(u, v) in edges {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    let mut dist = vec![u64::MAX; n as usize + 1];
    let mut queue = VecDeque::new();
    for &r in roots {
        dist[r as usize] = 0;
        queue.push_back(r);
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u as usize] {
            if dist[v as usize] == u64::MAX {
                dist[v as usize] = dist[u as usize] + 1;
                queue.push_back(v);
            }
        }
    }
    nodes.iter().all(|&v| dist[v as usize] != u64::MAX).then_some(dist)
}

/// Appends an honest transcript of `(nodes, edges)` with the given labels.
/// `nodes` must be sorted; `edges` keep their order within each block.
pub fn push_bfs_transcript(ann: &mut Annotation, nodes: &[u64], edges: &[(u64, u64)], dist: &[u64]) {
    let mut deg = vec![0u64; dist.len()];
    let mut cross = vec![0u64; dist.len()];
    let mut top = 0;
    for &(u, v) in edges {
        deg[u as usize] += 1;
        deg[v as usize] += 1;
        let (du, dv) = (dist[u as usize], dist[v as usize]);
        if du + 1 == dv {
            cross[v as usize] += 1;
        } else if dv + 1 == du {
            cross[u as usize] += 1;
        }
    }
    for &v in nodes {
        ann.push_ints(Tag::NodeRow, &[v as i64, dist[v as usize] as i64, deg[v as usize] as i64]);
        top = top.max(dist[v as usize]);
    }
    let mut by_level: Vec<Vec<(u64, u64)>> = vec![Vec::new(); top as usize + 1];
    for &(u, v) in edges {
        by_level[dist[u as usize].min(dist[v as usize]) as usize].push((u, v));
    }
    for l in 0..=top {
        for &v in nodes {
            if dist[v as usize] == l + 1 {
                ann.push_ints(Tag::BfsLevel, &[l as i64 + 1, v as i64, cross[v as usize] as i64]);
            }
        }
        for &(u, v) in &by_level[l as usize] {
            let (du, dv) = (dist[u as usize] as i64, dist[v as usize] as i64);
            ann.push_ints(Tag::BfsEdge, &[u as i64, v as i64, du, dv]);
        }
    }
}

/// Reads a transcript token into the checker. Returns `false` for tokens
/// that are not part of a transcript.
pub fn feed_transcript_token(check: &mut BfsChecker, tok: &crate::annotation::AnnToken) -> Result<bool, Reject> {
    let n = check.labels.n();
    let label = |k: usize| -> Result<u64, Reject> { Ok(tok.int_in(k, 0, n as i64)? as u64) };
    match tok.tag {
        Tag::NodeRow => {
            tok.expect_len(3)?;
            check.node(tok.node(0, n)?, label(1)?, tok.int_in(2, 0, i64::MAX)? as u64)?;
        }
        Tag::BfsLevel => {
            tok.expect_len(3)?;
            check.level(label(0)?, tok.node(1, n)?, tok.int_in(2, 0, i64::MAX)? as u64)?;
        }
        Tag::BfsEdge => {
            tok.expect_len(4)?;
            check.edge(tok.node(0, n)?, tok.node(1, n)?, label(2)?, label(3)?)?;
        }
        _ => return Ok(false),
    }
    Ok(true)
}

pub(crate) fn unexpected<T>(tok: &crate::annotation::AnnToken) -> Result<T, Reject> {
    reject(Reason::Structure, format!("unexpected {} token", tok.tag.as_str()))
}
