//! In-memory graphs, seeded generators, and plain reference algorithms used
//! by provers and as test oracles.

use crate::stream::{Stream, StreamHeader, StreamKind, StreamToken};
use rand::seq::SliceRandom;
use rand::Rng;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub n: u64,
    pub directed: bool,
    pub weighted: bool,
    /// `(u, v, w)`; `w = 1` for unweighted graphs.
    pub edges: Vec<(u64, u64, u64)>,
}

impl Graph {
    pub fn new(n: u64, directed: bool) -> Self {
        Self { n, directed, weighted: false, edges: Vec::new() }
    }

    pub fn from_pairs(n: u64, directed: bool, pairs: &[(u64, u64)]) -> Self {
        Self { n, directed, weighted: false, edges: pairs.iter().map(|&(u, v)| (u, v, 1)).collect() }
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn kind(&self) -> StreamKind {
        match (self.directed, self.weighted) {
            (false, false) => StreamKind::Graph,
            (true, false) => StreamKind::Digraph,
            (false, true) => StreamKind::WGraph,
            (true, true) => StreamKind::WDigraph,
        }
    }

    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.2).max().unwrap_or(0)
    }

    pub fn token(&self, k: usize) -> StreamToken {
        let (u, v, w) = self.edges[k];
        match (self.directed, self.weighted) {
            (_, true) => StreamToken::WeightedEdge(u, v, w),
            (false, false) => StreamToken::Edge(u, v),
            (true, false) => StreamToken::DirectedEdge(u, v),
        }
    }

    pub fn header(&self) -> StreamHeader {
        let mut h = StreamHeader::new(self.kind(), self.n, self.m() as u64);
        if self.weighted {
            h = h.with("wmax", self.max_weight().max(1));
        }
        h
    }

    pub fn to_stream(&self) -> Stream {
        Stream::new(self.header(), (0..self.m()).map(|k| self.token(k)).collect())
    }

    /// Reads a graph stream. Returns `None` for non-graph streams.
    pub fn from_stream(s: &Stream) -> Option<Self> {
        if !s.header.kind.is_graph() {
            return None;
        }
        let mut g = Graph::new(s.header.n, s.header.kind.is_directed());
        g.weighted = s.header.kind.is_weighted();
        for t in &s.tokens {
            g.edges.push(match *t {
                StreamToken::Edge(u, v) | StreamToken::DirectedEdge(u, v) => (u, v, 1),
                StreamToken::WeightedEdge(u, v, w) => (u, v, w),
                _ => return None,
            });
        }
        Some(g)
    }

    /// Outgoing adjacency (both directions for undirected graphs), 1-based
    /// with an unused slot 0. Entries are `(neighbor, weight, edge index)`.
    pub fn adjacency(&self) -> Vec<Vec<(u64, u64, usize)>> {
        let mut adj = vec![Vec::new(); self.n as usize + 1];
        for (k, &(u, v, w)) in self.edges.iter().enumerate() {
            adj[u as usize].push((v, w, k));
            if !self.directed {
                adj[v as usize].push((u, w, k));
            }
        }
        adj
    }

    pub fn degrees(&self) -> Vec<u64> {
        let mut deg = vec![0; self.n as usize + 1];
        for &(u, v, _) in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }
}

/// Uniform simple graph with `m` distinct edges (no loops).
pub fn gnm<R: Rng + ?Sized>(rng: &mut R, n: u64, m: usize, directed: bool) -> Option<Graph> {
    let cap = if directed { n * n.saturating_sub(1) } else { n * n.saturating_sub(1) / 2 };
    if m as u64 > cap {
        return None;
    }
    let mut g = Graph::new(n, directed);
    let mut seen = HashSet::new();
    fill_random(rng, &mut g, &mut seen, m);
    Some(g)
}

fn edge_key(directed: bool, u: u64, v: u64) -> (u64, u64) {
    if directed || u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

fn fill_random<R: Rng + ?Sized>(rng: &mut R, g: &mut Graph, seen: &mut HashSet<(u64, u64)>, m: usize) {
    let n = g.n;
    let cap = if g.directed { n * (n - 1) } else { n * (n - 1) / 2 };
    if (m as u64) * 2 > cap {
        let mut all = Vec::new();
        for u in 1..=n {
            for v in 1..=n {
                if u != v && (g.directed || u < v) && !seen.contains(&(u, v)) {
                    all.push((u, v));
                }
            }
        }
        all.shuffle(rng);
        for (u, v) in all.into_iter().take(m - g.edges.len()) {
            seen.insert((u, v));
            g.edges.push(orient(rng, g.directed, u, v));
        }
    } else {
        while g.edges.len() < m {
            let (u, v) = (rng.gen_range(1..=n), rng.gen_range(1..=n));
            if u != v && seen.insert(edge_key(g.directed, u, v)) {
                g.edges.push(orient(rng, g.directed, u, v));
            }
        }
    }
    g.edges.shuffle(rng);
}

fn orient<R: Rng + ?Sized>(rng: &mut R, directed: bool, u: u64, v: u64) -> (u64, u64, u64) {
    if !directed && rng.gen_bool(0.5) {
        (v, u, 1)
    } else {
        (u, v, 1)
    }
}

/// Connected simple undirected graph: a random spanning tree, then uniform
/// extra edges. Needs `n - 1 <= m <= n(n-1)/2`.
pub fn connected_gnm<R: Rng + ?Sized>(rng: &mut R, n: u64, m: usize) -> Option<Graph> {
    if n == 0 || (m as u64) < n - 1 || m as u64 > n * (n - 1) / 2 {
        return None;
    }
    let mut order: Vec<u64> = (1..=n).collect();
    order.shuffle(rng);
    let mut g = Graph::new(n, false);
    let mut seen = HashSet::new();
    for i in 1..order.len() {
        let (u, v) = (order[rng.gen_range(0..i)], order[i]);
        seen.insert(edge_key(false, u, v));
        g.edges.push(orient(rng, false, u, v));
    }
    fill_random(rng, &mut g, &mut seen, m);
    Some(g)
}

/// Random DAG (edges follow a hidden random order). With `cyclic`, one
/// edge is reversed to close a cycle.
pub fn random_dag<R: Rng + ?Sized>(rng: &mut R, n: u64, m: usize, cyclic: bool) -> Option<Graph> {
    if n < 2 || m as u64 > n * (n - 1) / 2 || (cyclic && m < 2) {
        return None;
    }
    let mut order: Vec<u64> = (1..=n).collect();
    order.shuffle(rng);
    let mut rank = vec![0u64; n as usize + 1];
    for (i, &v) in order.iter().enumerate() {
        rank[v as usize] = i as u64;
    }
    let mut g = gnm(rng, n, m, false)?;
    g.directed = true;
    for e in g.edges.iter_mut() {
        if rank[e.0 as usize] > rank[e.1 as usize] {
            std::mem::swap(&mut e.0, &mut e.1);
        }
    }
    if cyclic {
        // Reverse an edge that lies on a path of length >= 2 so that the
        // result is still simple. Falls back to a two-cycle.
        let adj = g.adjacency();
        let found = g.edges.iter().position(|&(u, v, _)| adj[u as usize].iter().any(|&(x, _, _)| x != v && reaches(&adj, x, v)));
        match found {
            Some(k) => {
                let (u, v, w) = g.edges[k];
                g.edges[k] = (v, u, w);
            }
            None => {
                let (u, v, w) = g.edges[0];
                g.edges[1] = (v, u, w);
            }
        }
    }
    Some(g)
}

fn reaches(adj: &[Vec<(u64, u64, usize)>], from: u64, to: u64) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    while let Some(x) = stack.pop() {
        if x == to {
            return true;
        }
        if !std::mem::replace(&mut seen[x as usize], true) {
            stack.extend(adj[x as usize].iter().map(|e| e.0));
        }
    }
    false
}

/// Assigns uniform weights in `[lo, hi]`.
pub fn with_weights<R: Rng + ?Sized>(rng: &mut R, mut g: Graph, lo: u64, hi: u64) -> Graph {
    g.weighted = true;
    for e in g.edges.iter_mut() {
        e.2 = rng.gen_range(lo..=hi);
    }
    g
}

/// Topological order, or a directed cycle as a closed node sequence
/// `v1 .. vk` (edge `vk -> v1` closes it).
pub fn topo_or_cycle(g: &Graph) -> Result<Vec<u64>, Vec<u64>> {
    let n = g.n as usize;
    let adj = g.adjacency();
    let mut indeg = vec![0usize; n + 1];
    for &(_, v, _) in &g.edges {
        indeg[v as usize] += 1;
    }
    let mut queue: VecDeque<u64> = (1..=g.n).filter(|&v| indeg[v as usize] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &(v, _, _) in &adj[u as usize] {
            indeg[v as usize] -= 1;
            if indeg[v as usize] == 0 {
                queue.push_back(v);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Walk backwards along remaining in-edges until a node repeats.
    let mut pred = vec![0u64; n + 1];
    for &(u, v, _) in &g.edges {
        if indeg[u as usize] > 0 && indeg[v as usize] > 0 {
            pred[v as usize] = u;
        }
    }
    let mut x = (1..=g.n).find(|&v| indeg[v as usize] > 0).unwrap();
    let mut pos = vec![usize::MAX; n + 1];
    let mut walk = Vec::new();
    while pos[x as usize] == usize::MAX {
        pos[x as usize] = walk.len();
        walk.push(x);
        x = pred[x as usize];
    }
    let mut cycle = walk[pos[x as usize]..].to_vec();
    cycle.reverse();
    Err(cycle)
}

/// Hop distances from `s` (`None` when unreachable).
pub fn bfs_dist(g: &Graph, s: u64) -> Vec<Option<u64>> {
    let adj = g.adjacency();
    let mut dist = vec![None; g.n as usize + 1];
    dist[s as usize] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u as usize].unwrap();
        for &(v, _, _) in &adj[u as usize] {
            if dist[v as usize].is_none() {
                dist[v as usize] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Component id per node (the smallest node in its component).
pub fn components(g: &Graph) -> Vec<u64> {
    let mut comp = vec![0u64; g.n as usize + 1];
    let adj = g.adjacency();
    for s in 1..=g.n {
        if comp[s as usize] != 0 {
            continue;
        }
        comp[s as usize] = s;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(v, _, _) in &adj[u as usize] {
                if comp[v as usize] == 0 {
                    comp[v as usize] = s;
                    stack.push(v);
                }
            }
        }
    }
    comp
}

pub fn is_bipartite(g: &Graph) -> bool {
    let adj = g.adjacency();
    let mut side = vec![u8::MAX; g.n as usize + 1];
    for s in 1..=g.n {
        if side[s as usize] != u8::MAX {
            continue;
        }
        side[s as usize] = 0;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(v, _, _) in &adj[u as usize] {
                if side[v as usize] == u8::MAX {
                    side[v as usize] = 1 - side[u as usize];
                    stack.push(v);
                } else if side[v as usize] == side[u as usize] {
                    return false;
                }
            }
        }
    }
    true
}

/// Dijkstra from `s` over nonnegative weights.
pub fn dijkstra(g: &Graph, s: u64) -> Vec<Option<u64>> {
    let adj = g.adjacency();
    let mut dist: Vec<Option<u64>> = vec![None; g.n as usize + 1];
    let mut heap = BinaryHeap::from([Reverse((0u64, s))]);
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u as usize].is_some() {
            continue;
        }
        dist[u as usize] = Some(d);
        for &(v, w, _) in &adj[u as usize] {
            if dist[v as usize].is_none() {
                heap.push(Reverse((d + w, v)));
            }
        }
    }
    dist
}

/// All-pairs distances, row-major `n x n` with 0-based indices.
pub fn floyd_warshall(g: &Graph) -> Vec<Option<u64>> {
    let n = g.n as usize;
    let mut d = vec![None; n * n];
    for i in 0..n {
        d[i * n + i] = Some(0);
    }
    let relax = |d: &mut Vec<Option<u64>>, i: usize, j: usize, w: u64| {
        if d[i * n + j].is_none_or(|x| w < x) {
            d[i * n + j] = Some(w);
        }
    };
    for &(u, v, w) in &g.edges {
        let (u, v) = (u as usize - 1, v as usize - 1);
        relax(&mut d, u, v, w);
        if !g.directed {
            relax(&mut d, v, u, w);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i * n + k] else { continue };
            for j in 0..n {
                if let Some(kj) = d[k * n + j] {
                    relax(&mut d, i, j, ik + kj);
                }
            }
        }
    }
    d
}

/// Total weight of a minimum spanning forest (Kruskal).
pub fn mst_weight(g: &Graph) -> u64 {
    let mut idx: Vec<usize> = (0..g.m()).collect();
    idx.sort_by_key(|&k| g.edges[k].2);
    let mut uf = UnionFind::new(g.n as usize + 1);
    idx.into_iter()
        .filter(|&k| uf.union(g.edges[k].0 as usize, g.edges[k].1 as usize))
        .map(|k| g.edges[k].2)
        .sum()
}

/// Largest finite hop distance, or `None` if some pair is unreachable.
pub fn diameter(g: &Graph) -> Option<u64> {
    let mut best = 0;
    for s in 1..=g.n {
        for d in bfs_dist(g, s).into_iter().skip(1) {
            best = best.max(d?);
        }
    }
    Some(best)
}

pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}
