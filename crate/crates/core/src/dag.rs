//! Acyclicity of a directed edge stream. A DAG is certified by node ranks
//! checked through consistent labels; a cyclic graph by a closed walk plus a
//! replay of the remaining edges.

use crate::annotation::{AnnHeader, AnnToken, Annotation, Tag};
use crate::field::PrimeField;
use crate::fingerprint::{Fingerprint, FINGERPRINT_WORDS};
use crate::graph::Graph;
use crate::labels::{push_label_rows, LabelChecker};
use crate::protocol::{ensure, reject, Answer, Outcome, Reason, Reject, Verifier};
use crate::stream::{StreamHeader, StreamToken};
use rand::Rng;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Topological order with ties broken by smallest node id, or a directed
/// cycle `v1 .. vk` (closed by `vk -> v1`).
pub fn dag_order(g: &Graph) -> Result<Vec<u64>, Vec<u64>> {
    let adj = g.adjacency();
    let mut indeg = vec![0usize; g.n as usize + 1];
    for &(_, v, _) in &g.edges {
        indeg[v as usize] += 1;
    }
    let mut ready: BinaryHeap<Reverse<u64>> = (1..=g.n).filter(|&v| indeg[v as usize] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(g.n as usize);
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        for &(v, _, _) in &adj[u as usize] {
            indeg[v as usize] -= 1;
            if indeg[v as usize] == 0 {
                ready.push(Reverse(v));
            }
        }
    }
    if order.len() == g.n as usize {
        Ok(order)
    } else {
        Err(crate::graph::topo_or_cycle(g).expect_err("Kahn and the cycle finder disagree"))
    }
}

pub fn prove_dag(g: &Graph) -> Annotation {
    let mut ann = Annotation::new(AnnHeader::new("dag"));
    match dag_order(g) {
        Ok(order) => {
            ann.push_ints(Tag::DagTopo, &[]);
            let mut rank = vec![0u64; g.n as usize + 1];
            for (i, &v) in order.iter().enumerate() {
                rank[v as usize] = i as u64 + 1;
            }
            push_label_rows(&mut ann, g, &rank);
        }
        Err(cycle) => {
            ann.push_ints(Tag::DagCycle, &[]);
            let k = cycle.len();
            let mut used = vec![false; g.m()];
            for i in 0..k {
                let (u, v) = (cycle[i], cycle[(i + 1) % k]);
                let e = (0..g.m()).find(|&e| !used[e] && g.edges[e].0 == u && g.edges[e].1 == v).unwrap();
                used[e] = true;
                ann.push_ints(Tag::DagCycle, &[u as i64, v as i64]);
            }
            for (e, &(u, v, _)) in g.edges.iter().enumerate() {
                if !used[e] {
                    ann.push_ints(Tag::DagRest, &[u as i64, v as i64]);
                }
            }
        }
    }
    ann
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Start,
    Topo,
    Cycle { first: u64, cur: u64, len: u64 },
    Rest { closed: bool },
}

pub struct DagVerifier {
    check: LabelChecker,
    ranks: Fingerprint,
    branch: Branch,
}

impl DagVerifier {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        let check = LabelChecker::random(field, rng, header.n, true)?;
        let ranks = Fingerprint::new(field, field.random_nonzero(rng), header.n)?;
        Ok(Self { check, ranks, branch: Branch::Start })
    }
}

impl Verifier for DagVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        match *tok {
            StreamToken::DirectedEdge(u, v) => self.check.stream_edge(u, v),
            _ => reject(Reason::Structure, "dag expects a directed edge stream"),
        }
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        let n = self.check.n();
        match (self.branch, tok.tag) {
            (Branch::Start, Tag::DagTopo) => {
                tok.expect_len(0)?;
                self.branch = Branch::Topo;
            }
            (Branch::Start, Tag::DagCycle) => {
                tok.expect_len(0)?;
                self.branch = Branch::Cycle { first: 0, cur: 0, len: 0 };
            }
            (Branch::Topo, Tag::NodeRow) => {
                tok.expect_len(3)?;
                let rank = tok.int_in(1, 1, n as i64)? as u64;
                self.check.node(tok.node(0, n)?, rank, tok.int_in(2, 0, i64::MAX)? as u64)?;
                self.ranks.update(rank, 1)?;
            }
            (Branch::Topo, Tag::EdgeRow) => {
                tok.expect_len(4)?;
                let (ru, rv) = (tok.int_in(2, 1, n as i64)?, tok.int_in(3, 1, n as i64)?);
                ensure(ru < rv, Reason::LocalCheck, || format!("edge ranks {ru} >= {rv}"))?;
                self.check.edge(tok.node(0, n)?, tok.node(1, n)?, ru as u64, rv as u64)?;
            }
            (Branch::Cycle { first, cur, len }, Tag::DagCycle) => {
                tok.expect_len(2)?;
                let (u, v) = (tok.node(0, n)?, tok.node(1, n)?);
                ensure(len == 0 || u == cur, Reason::Structure, || format!("cycle breaks at {cur} -> {u}"))?;
                self.check.replay_unlabeled(u, v)?;
                let first = if len == 0 { u } else { first };
                self.branch = Branch::Cycle { first, cur: v, len: len + 1 };
            }
            (Branch::Cycle { first, cur, len }, Tag::DagRest) if len > 0 => {
                tok.expect_len(2)?;
                self.check.replay_unlabeled(tok.node(0, n)?, tok.node(1, n)?)?;
                self.branch = Branch::Rest { closed: first == cur };
            }
            (Branch::Rest { .. }, Tag::DagRest) => {
                tok.expect_len(2)?;
                self.check.replay_unlabeled(tok.node(0, n)?, tok.node(1, n)?)?;
            }
            (_, other) => return reject(Reason::Structure, format!("unexpected {} token", other.as_str())),
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        let closed = match self.branch {
            Branch::Start => return reject(Reason::Structure, "empty certificate"),
            Branch::Topo => {
                self.check.finish()?;
                let expect = self.ranks.range_set(self.check.n())?;
                ensure(expect.acc() == self.ranks.acc(), Reason::NodesMismatch, || {
                    "ranks are not a permutation".into()
                })?;
                return Ok(Outcome::Value(Answer::Int(1)));
            }
            Branch::Cycle { len: 0, .. } => return reject(Reason::Structure, "empty cycle"),
            Branch::Cycle { first, cur, .. } => first == cur,
            Branch::Rest { closed } => closed,
        };
        ensure(closed, Reason::Structure, || "cycle is not closed".into())?;
        self.check.check_edges()?;
        Ok(Outcome::Value(Answer::Int(0)))
    }

    fn words(&self) -> usize {
        self.check.words() + FINGERPRINT_WORDS + 3
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::run_in_memory;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn verify(g: &Graph, ann: &Annotation, seed: u64) -> Outcome {
        let s = g.to_stream();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = DagVerifier::new(PrimeField::default(), &mut rng, &s.header).unwrap();
        run_in_memory(&mut v, &s, ann).0
    }

    /// Exhaustive cycle search: a digraph is acyclic iff some permutation
    /// orders every edge forward.
    fn brute_is_dag(g: &Graph) -> bool {
        fn perms(k: usize, cur: &mut Vec<u64>, left: &mut Vec<u64>, f: &mut dyn FnMut(&[u64]) -> bool) -> bool {
            if left.is_empty() {
                return f(cur);
            }
            for i in 0..left.len() {
                let x = left.remove(i);
                cur.push(x);
                let hit = perms(k, cur, left, f);
                cur.pop();
                left.insert(i, x);
                if hit {
                    return true;
                }
            }
            false
        }
        let mut left: Vec<u64> = (1..=g.n).collect();
        perms(g.n as usize, &mut Vec::new(), &mut left, &mut |p| {
            let mut pos = vec![0; g.n as usize + 1];
            for (i, &v) in p.iter().enumerate() {
                pos[v as usize] = i;
            }
            g.edges.iter().all(|&(u, v, _)| pos[u as usize] < pos[v as usize])
        })
    }

    #[test]
    fn small_examples() {
        let path = Graph::from_pairs(3, true, &[(1, 2), (2, 3)]);
        let ann = prove_dag(&path);
        assert_eq!(ann.tokens[1], AnnToken::ints(Tag::NodeRow, &[1, 1, 1]));
        assert_eq!(ann.tokens[3], AnnToken::ints(Tag::NodeRow, &[3, 3, 1]));
        assert_eq!(verify(&path, &ann, 0), Outcome::Value(Answer::Int(1)));

        let tri = Graph::from_pairs(3, true, &[(1, 2), (2, 3), (3, 1)]);
        let ann = prove_dag(&tri);
        assert_eq!(ann.tokens.iter().filter(|t| t.tag == Tag::DagCycle && t.args.len() == 2).count(), 3);
        assert_eq!(verify(&tri, &ann, 0), Outcome::Value(Answer::Int(0)));

        let empty = Graph::new(4, true);
        assert_eq!(verify(&empty, &prove_dag(&empty), 0), Outcome::Value(Answer::Int(1)));

        let looped = Graph::from_pairs(2, true, &[(1, 2), (2, 2)]);
        assert_eq!(verify(&looped, &prove_dag(&looped), 0), Outcome::Value(Answer::Int(0)));
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..400 {
            let n = rng.gen_range(1..=6u64);
            let m = rng.gen_range(0..=8usize);
            let pairs: Vec<(u64, u64)> = (0..m).map(|_| (rng.gen_range(1..=n), rng.gen_range(1..=n))).collect();
            let g = Graph::from_pairs(n, true, &pairs);
            let expect = brute_is_dag(&g) as i128;
            assert_eq!(verify(&g, &prove_dag(&g), trial), Outcome::Value(Answer::Int(expect)), "{pairs:?}");
        }
    }

    #[test]
    fn forged_certificates_rejected() {
        let g = Graph::from_pairs(3, true, &[(1, 2), (2, 3)]);
        // Cycle through a non-stream edge.
        let mut fake = Annotation::new(AnnHeader::new("dag"));
        fake.push_ints(Tag::DagCycle, &[]);
        for (u, v) in [(1, 2), (2, 3), (3, 1)] {
            fake.push_ints(Tag::DagCycle, &[u, v]);
        }
        // Duplicate rank.
        let mut dup = prove_dag(&g);
        dup.tokens[2] = AnnToken::ints(Tag::NodeRow, &[2, 1, 2]);
        for seed in 0..200 {
            assert!(verify(&g, &fake, seed).is_bottom());
            assert!(verify(&g, &dup, seed).is_bottom());
        }
        let empty = Annotation::new(AnnHeader::new("dag"));
        assert!(verify(&g, &empty, 0).is_bottom());
    }
}
