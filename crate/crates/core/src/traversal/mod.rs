//! BFS and DFS transcripts, and bipartiteness on top of BFS.

pub mod bfs;
pub mod dfs;

use crate::annotation::{AnnHeader, AnnToken, Annotation, Tag};
use crate::field::PrimeField;
use crate::graph::{components, Graph};
use crate::protocol::{ensure, reject, Answer, Outcome, Reason, Reject, Verifier};
use crate::stream::{StreamHeader, StreamToken};
use bfs::{feed_transcript_token, levels_from, push_bfs_transcript, unexpected, BfsChecker};
use rand::Rng;

fn pairs(g: &Graph) -> Vec<(u64, u64)> {
    g.edges.iter().map(|e| (e.0, e.1)).collect()
}

/// BFS transcript from the header's `s` (default 1). `None` if some node
/// is unreachable.
pub fn prove_bfs(g: &Graph, s: u64) -> Option<Annotation> {
    let nodes: Vec<u64> = (1..=g.n).collect();
    let edges = pairs(g);
    let dist = levels_from(g.n, &edges, &[s], &nodes)?;
    let mut ann = Annotation::new(AnnHeader::new("bfs"));
    push_bfs_transcript(&mut ann, &nodes, &edges, &dist);
    Some(ann)
}

pub fn source_of(header: &StreamHeader) -> u64 {
    header.get_u64("s").unwrap_or(1)
}

/// Outputs the hop distance of every node from `s`.
pub struct BfsVerifier {
    check: BfsChecker,
    s: u64,
    out: Vec<i128>,
}

impl BfsVerifier {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        let s = source_of(header);
        ensure((1..=header.n).contains(&s), Reason::Domain, || format!("source {s} outside the graph"))?;
        Ok(Self { check: BfsChecker::new(field, rng, header.n)?, s, out: Vec::new() })
    }
}

impl Verifier for BfsVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        match *tok {
            StreamToken::Edge(u, v) => self.check.labels.stream_edge(u, v),
            _ => reject(Reason::Structure, "bfs expects an undirected edge stream"),
        }
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        if tok.tag == Tag::NodeRow && tok.args.len() == 3 {
            let (v, l) = (tok.int(0)?, tok.int(1)?);
            ensure(v as u64 != self.s || l == 0, Reason::LocalCheck, || "source must have level 0".into())?;
            self.out.push(l as i128);
        }
        if !feed_transcript_token(&mut self.check, tok)? {
            return unexpected(tok);
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        self.check.finish_transcript()?;
        self.check.labels.check_edges()?;
        ensure(self.check.roots() == 1, Reason::LocalCheck, || format!("{} roots", self.check.roots()))?;
        Ok(Outcome::Value(Answer::Ints(std::mem::take(&mut self.out))))
    }

    fn words(&self) -> usize {
        self.check.words() + 1
    }
}

/// An odd closed walk as consecutive edges, plus which edge indices it uses.
pub fn odd_closed_walk(g: &Graph) -> Option<(Vec<(u64, u64)>, Vec<bool>)> {
    let n = g.n as usize;
    let adj = g.adjacency();
    let comp = components(g);
    let mut dist = vec![u64::MAX; n + 1];
    let mut parent = vec![(0u64, usize::MAX); n + 1];
    for r in 1..=g.n {
        if comp[r as usize] != r {
            continue;
        }
        dist[r as usize] = 0;
        let mut queue = std::collections::VecDeque::from([r]);
        while let Some(u) = queue.pop_front() {
            for &(v, _, k) in &adj[u as usize] {
                if dist[v as usize] == u64::MAX {
                    dist[v as usize] = dist[u as usize] + 1;
                    parent[v as usize] = (u, k);
                    queue.push_back(v);
                }
            }
        }
    }
    let k = g.edges.iter().position(|&(u, v, _)| dist[u as usize] == dist[v as usize])?;
    let (u, v, _) = g.edges[k];
    let mut used = vec![false; g.m()];
    used[k] = true;
    let (mut up, mut down) = (vec![u], vec![v]);
    let (mut a, mut b) = (u, v);
    while a != b {
        used[parent[a as usize].1] = true;
        used[parent[b as usize].1] = true;
        a = parent[a as usize].0;
        b = parent[b as usize].0;
        up.push(a);
        down.push(b);
    }
    down.pop();
    up.extend(down.into_iter().rev());
    let mut walk: Vec<(u64, u64)> = up.windows(2).map(|w| (w[0], w[1])).collect();
    walk.push((v, u));
    Some((walk, used))
}

pub fn prove_bipartite(g: &Graph) -> Annotation {
    let mut ann = Annotation::new(AnnHeader::new("bipartite"));
    match odd_closed_walk(g) {
        None => {
            ann.push_ints(Tag::Claim, &[1]);
            let comp = components(g);
            let roots: Vec<u64> = (1..=g.n).filter(|&v| comp[v as usize] == v).collect();
            let nodes: Vec<u64> = (1..=g.n).collect();
            let edges = pairs(g);
            let dist = levels_from(g.n, &edges, &roots, &nodes).expect("every node has a root");
            push_bfs_transcript(&mut ann, &nodes, &edges, &dist);
        }
        Some((walk, used)) => {
            ann.push_ints(Tag::Claim, &[0]);
            for (u, v) in walk {
                ann.push_ints(Tag::OddWalk, &[u as i64, v as i64]);
            }
            for (k, &(u, v, _)) in g.edges.iter().enumerate() {
                if !used[k] {
                    ann.push_ints(Tag::OddRest, &[u as i64, v as i64]);
                }
            }
        }
    }
    ann
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Claim {
    Unset,
    Bipartite,
    Odd { first: u64, cur: u64, len: u64, rest: bool },
}

/// Bipartite graphs are shown by a BFS forest with no edge inside a level;
/// the others by an odd closed walk and a replay of the remaining edges.
pub struct BipartiteVerifier {
    check: BfsChecker,
    claim: Claim,
}

impl BipartiteVerifier {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        Ok(Self { check: BfsChecker::new(field, rng, header.n)?, claim: Claim::Unset })
    }
}

impl Verifier for BipartiteVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        match *tok {
            StreamToken::Edge(u, v) => self.check.labels.stream_edge(u, v),
            _ => reject(Reason::Structure, "bipartite expects an undirected edge stream"),
        }
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        let n = self.check.labels.n();
        match (self.claim, tok.tag) {
            (Claim::Unset, Tag::Claim) => {
                tok.expect_len(1)?;
                self.claim = match tok.int_in(0, 0, 1)? {
                    1 => Claim::Bipartite,
                    _ => Claim::Odd { first: 0, cur: 0, len: 0, rest: false },
                };
            }
            (Claim::Bipartite, _) => {
                if !feed_transcript_token(&mut self.check, tok)? {
                    return unexpected(tok);
                }
                ensure(self.check.flat_edges() == 0, Reason::ClaimMismatch, || "edge inside a level".into())?;
            }
            (Claim::Odd { first, cur, len, rest: false }, Tag::OddWalk) => {
                tok.expect_len(2)?;
                let (u, v) = (tok.node(0, n)?, tok.node(1, n)?);
                ensure(len == 0 || u == cur, Reason::Structure, || format!("walk breaks at {cur} -> {u}"))?;
                self.check.labels.replay_unlabeled(u, v)?;
                let first = if len == 0 { u } else { first };
                self.claim = Claim::Odd { first, cur: v, len: len + 1, rest: false };
            }
            (Claim::Odd { first, cur, len, .. }, Tag::OddRest) if len > 0 => {
                tok.expect_len(2)?;
                self.check.labels.replay_unlabeled(tok.node(0, n)?, tok.node(1, n)?)?;
                self.claim = Claim::Odd { first, cur, len, rest: true };
            }
            _ => return unexpected(tok),
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        match self.claim {
            Claim::Unset => reject(Reason::Structure, "missing claim"),
            Claim::Bipartite => {
                self.check.finish_transcript()?;
                self.check.labels.check_edges()?;
                Ok(Outcome::Value(Answer::Int(1)))
            }
            Claim::Odd { first, cur, len, .. } => {
                ensure(len % 2 == 1 && first == cur, Reason::Structure, || "walk is not an odd closed walk".into())?;
                self.check.labels.check_edges()?;
                Ok(Outcome::Value(Answer::Int(0)))
            }
        }
    }

    fn words(&self) -> usize {
        self.check.words() + 4
    }
}

#[cfg(test)]
mod tests;
