//! Graph problems with totally unimodular LP formulations. Each stream edge
//! maps to a fixed set of LP entries (one variable per edge), so the LP
//! verifier runs on the reduced stream as it arrives.
//!
//! Formulations over `m` edges with endpoints `s`, `t` (header params,
//! defaults `1` and `n`):
//! - shortest path: flow conservation rows `2n`, `x >= 0` rows `m`.
//! - max flow: capacity rows `m`, `x >= 0` rows `m`, conservation `2n`;
//!   objective is minus the net outflow of `s`.
//! - min cut: `d_e >= p_u - p_v` rows `m`, `d >= 0` rows `m`, one row
//!   `p_t - p_s <= -1`; variables `d` then `p`.
//! - min-weight bipartite perfect matching: degree rows `2n`, `x >= 0` rows
//!   `m`; left side is `1..=left` (header param, default `n / 2`).

use super::{lp_annotation, LpVerifier, SparseLp};
use crate::annotation::{AnnToken, Annotation};
use crate::field::PrimeField;
use crate::graph::Graph;
use crate::protocol::{ensure, reject, Answer, Outcome, Reason, Reject, Verifier};
use crate::stream::{LpTarget, Stream, StreamHeader, StreamToken};
use num_rational::Rational64;
use rand::Rng;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TumProblem {
    ShortestPath,
    MaxFlow,
    MinCut,
    Matching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TumParams {
    pub s: u64,
    pub t: u64,
    pub left: u64,
}

impl TumParams {
    pub fn from_header(h: &StreamHeader) -> Self {
        Self { s: h.get_u64("s").unwrap_or(1), t: h.get_u64("t").unwrap_or(h.n), left: h.get_u64("left").unwrap_or(h.n / 2) }
    }
}

type Entry = (LpTarget, u64, u64, i64);

impl TumProblem {
    pub const ALL: [TumProblem; 4] = [TumProblem::ShortestPath, TumProblem::MaxFlow, TumProblem::MinCut, TumProblem::Matching];

    pub fn name(&self) -> &'static str {
        match self {
            TumProblem::ShortestPath => "shortest-path",
            TumProblem::MaxFlow => "max-flow",
            TumProblem::MinCut => "min-cut",
            TumProblem::Matching => "mwbpm",
        }
    }

    pub fn directed(&self) -> bool {
        !matches!(self, TumProblem::Matching)
    }

    /// LP rows and columns for `n` nodes and `m` edges.
    pub fn dims(&self, n: u64, m: u64) -> (u64, u64) {
        match self {
            TumProblem::ShortestPath | TumProblem::Matching => (2 * n + m, m),
            TumProblem::MaxFlow => (2 * m + 2 * n, m),
            TumProblem::MinCut => (2 * m + 1, m + n),
        }
    }

    /// Entries that depend only on the header.
    fn fixed(&self, n: u64, m: u64, p: TumParams) -> Vec<Entry> {
        use LpTarget::*;
        match self {
            TumProblem::ShortestPath => vec![(B, p.s, 0, 1), (B, n + p.s, 0, -1), (B, p.t, 0, -1), (B, n + p.t, 0, 1)],
            TumProblem::MaxFlow => Vec::new(),
            TumProblem::MinCut => vec![(A, 2 * m + 1, m + p.t, 1), (A, 2 * m + 1, m + p.s, -1), (B, 2 * m + 1, 0, -1)],
            TumProblem::Matching => (1..=n).flat_map(|v| [(B, v, 0, 1), (B, n + v, 0, -1)]).collect(),
        }
    }

    /// Entries contributed by edge number `k` (1-based).
    fn edge(&self, n: u64, m: u64, p: TumParams, k: u64, (u, v, w): (u64, u64, u64)) -> Vec<Entry> {
        use LpTarget::*;
        let w = w as i64;
        match self {
            TumProblem::ShortestPath => vec![
                (C, 0, k, w),
                (A, u, k, 1),
                (A, n + u, k, -1),
                (A, v, k, -1),
                (A, n + v, k, 1),
                (A, 2 * n + k, k, -1),
            ],
            TumProblem::MaxFlow => {
                let mut e = vec![(B, k, 0, w), (A, k, k, 1), (A, m + k, k, -1)];
                if u != p.s && u != p.t {
                    e.extend([(A, 2 * m + u, k, 1), (A, 2 * m + n + u, k, -1)]);
                }
                if v != p.s && v != p.t {
                    e.extend([(A, 2 * m + v, k, -1), (A, 2 * m + n + v, k, 1)]);
                }
                let c = (v == p.s) as i64 - (u == p.s) as i64;
                if c != 0 {
                    e.push((C, 0, k, c));
                }
                e
            }
            TumProblem::MinCut => {
                vec![(C, 0, k, w), (A, k, m + u, 1), (A, k, m + v, -1), (A, k, k, -1), (A, m + k, k, -1)]
            }
            TumProblem::Matching => vec![
                (C, 0, k, w),
                (A, u, k, 1),
                (A, v, k, 1),
                (A, n + u, k, -1),
                (A, n + v, k, -1),
                (A, 2 * n + k, k, -1),
            ],
        }
    }

    fn check_params(&self, n: u64, p: TumParams) -> Result<(), Reject> {
        let node = |x: u64| (1..=n).contains(&x);
        match self {
            TumProblem::Matching => ensure(p.left <= n, Reason::Domain, || format!("left side {} exceeds n", p.left)),
            TumProblem::ShortestPath => {
                ensure(node(p.s) && node(p.t), Reason::Domain, || "endpoints outside the graph".into())
            }
            _ => ensure(node(p.s) && node(p.t) && p.s != p.t, Reason::Domain, || "need distinct endpoints".into()),
        }
    }

    fn check_edge(&self, p: TumParams, (u, v, _): (u64, u64, u64)) -> Result<(), Reject> {
        match self {
            TumProblem::Matching => ensure((u <= p.left) != (v <= p.left), Reason::Domain, || {
                format!("edge ({u},{v}) does not cross the bipartition")
            }),
            _ => Ok(()),
        }
    }

    /// Answer from the LP optimum.
    pub fn extract(&self, opt: Rational64) -> Rational64 {
        match self {
            TumProblem::MaxFlow => -opt,
            _ => opt,
        }
    }
}

fn lp_entry((target, i, j, v): Entry) -> StreamToken {
    StreamToken::LpEntry { target, i, j, value: Rational64::from_integer(v) }
}

/// The LP stream of `problem` on `g`.
pub fn reduce(problem: TumProblem, g: &Graph, p: TumParams) -> Stream {
    let (n, m) = (g.n, g.m() as u64);
    let (rows, cols) = problem.dims(n, m);
    let mut tokens: Vec<StreamToken> = problem.fixed(n, m, p).into_iter().map(lp_entry).collect();
    for (k, &e) in g.edges.iter().enumerate() {
        tokens.extend(problem.edge(n, m, p, k as u64 + 1, e).into_iter().map(lp_entry));
    }
    Stream::new(super::lp_header(rows, cols), tokens)
}

/// Runs the LP verifier on the reduction of a weighted graph stream.
pub struct TumVerifier {
    problem: TumProblem,
    params: TumParams,
    n: u64,
    m: u64,
    seen: u64,
    inner: LpVerifier,
}

impl TumVerifier {
    pub fn new<R: Rng + ?Sized>(problem: TumProblem, field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        ensure(header.kind.is_weighted() && header.kind.is_directed() == problem.directed(), Reason::Structure, || {
            format!("{} needs a {} stream", problem.name(), if problem.directed() { "wdigraph" } else { "wgraph" })
        })?;
        let (n, m) = (header.n, header.m);
        let params = TumParams::from_header(header);
        problem.check_params(n, params)?;
        let (rows, cols) = problem.dims(n, m);
        let mut inner = LpVerifier::with_dims(field, rng, rows, cols)?;
        for (target, i, j, v) in problem.fixed(n, m, params) {
            inner.stream_entry(target, i, j, Rational64::from_integer(v))?;
        }
        Ok(Self { problem, params, n, m, seen: 0, inner })
    }
}

impl Verifier for TumVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        let StreamToken::WeightedEdge(u, v, w) = *tok else {
            return reject(Reason::Structure, "expected a weighted edge");
        };
        self.seen += 1;
        ensure(self.seen <= self.m, Reason::Structure, || format!("more than {} edges", self.m))?;
        self.problem.check_edge(self.params, (u, v, w))?;
        for (target, i, j, x) in self.problem.edge(self.n, self.m, self.params, self.seen, (u, v, w)) {
            self.inner.stream_entry(target, i, j, Rational64::from_integer(x))?;
        }
        Ok(())
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        self.inner.annotation(tok)
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        ensure(self.seen == self.m, Reason::Structure, || format!("{} of {} edges", self.seen, self.m))?;
        match self.inner.finish()? {
            Outcome::Value(Answer::Rat(r)) => {
                let r = Rational64::new(*r.numer() as i64, *r.denom() as i64);
                let out = self.problem.extract(r);
                Ok(Outcome::Value(if out.is_integer() {
                    Answer::Int(*out.numer() as i128)
                } else {
                    Answer::Rat(num_rational::Ratio::new(*out.numer() as i128, *out.denom() as i128))
                }))
            }
            other => Ok(other),
        }
    }

    fn words(&self) -> usize {
        self.inner.words() + 6
    }
}

fn ints(v: &[i64]) -> Vec<Rational64> {
    v.iter().map(|&x| Rational64::from_integer(x)).collect()
}

/// Honest certificate from combinatorial solvers. `None` when the problem
/// has no finite optimum (unreachable target, no perfect matching).
pub fn prove_tum(problem: TumProblem, g: &Graph, p: TumParams) -> Option<Annotation> {
    let (n, m) = (g.n as usize, g.m());
    let lp = SparseLp::from_stream(&reduce(problem, g, p))?;
    let (rows, _) = problem.dims(g.n, m as u64);
    let mut y = vec![0i64; rows as usize];
    let x: Vec<i64> = match problem {
        TumProblem::ShortestPath => {
            let (dist, path) = shortest_path(g, p.s, p.t)?;
            let dt = dist[p.t as usize]?;
            let pi = |v: u64| dist[v as usize].map_or(dt, |d| d.min(dt)) as i64;
            for v in 1..=g.n {
                y[v as usize - 1] = -pi(v);
            }
            for (k, &(u, v, w)) in g.edges.iter().enumerate() {
                y[2 * n + k] = pi(v) - pi(u) - w as i64;
            }
            let mut x = vec![0; m];
            for k in path {
                x[k] = 1;
            }
            x
        }
        TumProblem::MaxFlow | TumProblem::MinCut => {
            let (flow, side) = max_flow(g, p.s, p.t);
            let total: i64 = flow_out(g, &flow, p.s);
            match problem {
                TumProblem::MaxFlow => {
                    for (k, &(u, v, _)) in g.edges.iter().enumerate() {
                        match (side[u as usize], side[v as usize]) {
                            (true, false) => y[k] = -1,
                            (false, true) => y[m + k] = -1,
                            _ => {}
                        }
                    }
                    for v in (1..=g.n).filter(|&v| v != p.s && v != p.t && side[v as usize]) {
                        y[2 * m + n + v as usize - 1] = -1;
                    }
                    flow
                }
                _ => {
                    for (k, &(_, _, w)) in g.edges.iter().enumerate() {
                        y[k] = -flow[k];
                        y[m + k] = flow[k] - w as i64;
                    }
                    y[2 * m] = -total;
                    let mut x = vec![0; m + n];
                    for (k, &(u, v, _)) in g.edges.iter().enumerate() {
                        x[k] = (side[u as usize] && !side[v as usize]) as i64;
                    }
                    for v in 1..=g.n {
                        x[m + v as usize - 1] = side[v as usize] as i64;
                    }
                    x
                }
            }
        }
        TumProblem::Matching => {
            let (chosen, phi) = min_cost_perfect_matching(g, p.left)?;
            for v in 1..=g.n {
                let f = phi[v as usize];
                if f >= 0 {
                    y[n + v as usize - 1] = -f;
                } else {
                    y[v as usize - 1] = f;
                }
            }
            for (k, &(u, v, w)) in g.edges.iter().enumerate() {
                y[2 * n + k] = phi[u as usize] + phi[v as usize] - w as i64;
            }
            let mut x = vec![0; m];
            for k in chosen {
                x[k] = 1;
            }
            x
        }
    };
    lp_annotation(problem.name(), &lp, &ints(&x), &ints(&y))
}

/// Dijkstra with predecessor edges. Returns distances and the edge indices
/// of a shortest `s`-`t` path.
pub fn shortest_path(g: &Graph, s: u64, t: u64) -> Option<(Vec<Option<u64>>, Vec<usize>)> {
    let adj = g.adjacency();
    let mut dist = vec![None; g.n as usize + 1];
    let mut via = vec![usize::MAX; g.n as usize + 1];
    let mut heap = BinaryHeap::from([Reverse((0u64, s))]);
    dist[s as usize] = Some(0);
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u as usize] != Some(d) {
            continue;
        }
        for &(v, w, k) in &adj[u as usize] {
            let nd = d + w;
            if dist[v as usize].is_none_or(|old| nd < old) {
                dist[v as usize] = Some(nd);
                via[v as usize] = k;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist[t as usize]?;
    let mut path = Vec::new();
    let mut v = t;
    while v != s {
        let k = via[v as usize];
        path.push(k);
        v = g.edges[k].0;
    }
    Some((dist, path))
}

/// Edmonds-Karp. Returns per-edge flow and the source side of a minimum cut.
pub fn max_flow(g: &Graph, s: u64, t: u64) -> (Vec<i64>, Vec<bool>) {
    let n = g.n as usize;
    // Residual arcs: 2k forward, 2k+1 backward.
    let mut cap: Vec<i64> = Vec::with_capacity(2 * g.m());
    let mut head = Vec::with_capacity(2 * g.m());
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (k, &(u, v, w)) in g.edges.iter().enumerate() {
        cap.push(if u == v { 0 } else { w as i64 });
        cap.push(0);
        head.push(v);
        head.push(u);
        out[u as usize].push(2 * k);
        out[v as usize].push(2 * k + 1);
    }
    loop {
        let mut prev = vec![usize::MAX; n + 1];
        let mut seen = vec![false; n + 1];
        seen[s as usize] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &out[u as usize] {
                let v = head[a];
                if cap[a] > 0 && !seen[v as usize] {
                    seen[v as usize] = true;
                    prev[v as usize] = a;
                    queue.push_back(v);
                }
            }
        }
        if !seen[t as usize] {
            let flow = (0..g.m()).map(|k| cap[2 * k + 1]).collect();
            return (flow, seen);
        }
        let mut push = i64::MAX;
        let mut v = t;
        while v != s {
            let a = prev[v as usize];
            push = push.min(cap[a]);
            v = head[a ^ 1];
        }
        let mut v = t;
        while v != s {
            let a = prev[v as usize];
            cap[a] -= push;
            cap[a ^ 1] += push;
            v = head[a ^ 1];
        }
    }
}

fn flow_out(g: &Graph, flow: &[i64], s: u64) -> i64 {
    g.edges.iter().zip(flow).map(|(&(u, v, _), &f)| if u == s { f } else if v == s { -f } else { 0 }).sum()
}

/// Hungarian method on the `left x (n - left)` cost matrix. Returns the
/// chosen edge indices and node potentials `phi` (1-based) with
/// `phi_u + phi_v <= w` on every edge and `sum phi` equal to the optimum.
pub fn min_cost_perfect_matching(g: &Graph, left: u64) -> Option<(Vec<usize>, Vec<i64>)> {
    let k = left as usize;
    if g.n != 2 * left {
        return None;
    }
    const MISSING: i64 = i64::MAX / 4;
    let mut cost = vec![vec![(MISSING, usize::MAX); k + 1]; k + 1];
    for (idx, &(u, v, w)) in g.edges.iter().enumerate() {
        let (a, b) = if u <= left { (u, v) } else { (v, u) };
        let (i, j) = (a as usize, (b - left) as usize);
        if (w as i64) < cost[i][j].0 {
            cost[i][j] = (w as i64, idx);
        }
    }
    let big = g.edges.iter().map(|e| e.2 as i64).sum::<i64>() + 1;
    let c = |i: usize, j: usize| if cost[i][j].1 == usize::MAX { big * (k as i64 + 1) } else { cost[i][j].0 };
    let (mut u, mut v) = (vec![0i64; k + 1], vec![0i64; k + 1]);
    let (mut assign, mut way) = (vec![0usize; k + 1], vec![0usize; k + 1]);
    for i in 1..=k {
        assign[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let (i0, mut delta, mut j1) = (assign[j0], i64::MAX, 0);
            for j in 1..=k {
                if !used[j] {
                    let cur = c(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[assign[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if assign[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            assign[j0] = assign[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut chosen = Vec::with_capacity(k);
    for j in 1..=k {
        let idx = cost[assign[j]][j].1;
        if idx == usize::MAX {
            return None;
        }
        chosen.push(idx);
    }
    let mut phi = vec![0i64; g.n as usize + 1];
    phi[1..=k].copy_from_slice(&u[1..=k]);
    phi[k + 1..=2 * k].copy_from_slice(&v[1..=k]);
    Some((chosen, phi))
}
