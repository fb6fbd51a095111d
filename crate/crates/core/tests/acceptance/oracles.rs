//! Protocol outputs against small independent oracles written here.

use crate::common::{fail, rng};
use annostream_core::graph::Graph;
use annostream_core::lp::SparseLp;
use annostream_core::{Answer, GenParams, Outcome, PrimeField, ProtocolKind, Stream};
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use std::collections::VecDeque;

const UNREACHABLE: i128 = 1 << 40;

fn graph(s: &Stream) -> Result<Graph, String> {
    Graph::from_stream(s).ok_or_else(|| "not a graph stream".to_string())
}

fn integer(out: &Outcome) -> Option<i128> {
    match out.value()? {
        Answer::Int(v) => Some(*v),
        Answer::Rat(r) if r.is_integer() => Some(r.to_integer()),
        _ => None,
    }
}

/// Maximum matching size by branching on the lowest free vertex.
fn brute_matching(g: &Graph) -> i128 {
    let n = g.n as usize;
    let mut adj = vec![0u32; n];
    for &(u, v, _) in &g.edges {
        if u != v {
            adj[u as usize - 1] |= 1 << (v - 1);
            adj[v as usize - 1] |= 1 << (u - 1);
        }
    }
    fn best(free: u32, adj: &[u32]) -> i128 {
        if free == 0 {
            return 0;
        }
        let v = free.trailing_zeros() as usize;
        let rest = free & !(1 << v);
        let mut top = best(rest, adj);
        let mut nbrs = adj[v] & rest;
        while nbrs != 0 {
            let u = nbrs.trailing_zeros();
            nbrs &= nbrs - 1;
            top = top.max(1 + best(rest & !(1 << u), adj));
        }
        top
    }
    best(((1u64 << n) - 1) as u32, &adj)
}

/// All-pairs distances, `None` when unreachable. Indices are zero-based.
fn all_pairs(g: &Graph) -> Vec<Vec<Option<u64>>> {
    let n = g.n as usize;
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for &(u, v, w) in &g.edges {
        let (u, v) = (u as usize - 1, v as usize - 1);
        let mut relax = |a: usize, b: usize| {
            if d[a][b].is_none_or(|x| w < x) {
                d[a][b] = Some(w);
            }
        };
        relax(u, v);
        if !g.directed {
            relax(v, u);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|x| a + b < x) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Largest hop distance over all pairs, by BFS from every node.
fn bfs_diameter(g: &Graph) -> Option<i128> {
    let n = g.n as usize;
    let mut adj = vec![Vec::new(); n];
    for &(u, v, _) in &g.edges {
        adj[u as usize - 1].push(v as usize - 1);
        adj[v as usize - 1].push(u as usize - 1);
    }
    let mut worst = 0;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        worst = worst.max(*dist.iter().max()?);
    }
    (worst != usize::MAX).then_some(worst as i128)
}

/// Edmonds-Karp on a capacity matrix with parallel arcs merged.
fn edmonds_karp(g: &Graph, s: usize, t: usize) -> i128 {
    let n = g.n as usize;
    let mut cap = vec![vec![0i128; n]; n];
    for &(u, v, w) in &g.edges {
        cap[u as usize - 1][v as usize - 1] += w as i128;
    }
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return flow;
        }
        let mut push = i128::MAX;
        let mut v = t;
        while v != s {
            push = push.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = t;
        while v != s {
            cap[prev[v]][v] -= push;
            cap[v][prev[v]] += push;
            v = prev[v];
        }
        flow += push;
    }
}

/// Solves `sum_k y_k v_k = c` for independent `v_k`. `None` when the vectors
/// are dependent or `c` is outside their span.
fn solve_span(vectors: &[&Vec<BigRational>], c: &[BigRational]) -> Option<Vec<BigRational>> {
    let k = vectors.len();
    let mut rows: Vec<Vec<BigRational>> =
        (0..c.len()).map(|j| vectors.iter().map(|v| v[j].clone()).chain([c[j].clone()]).collect()).collect();
    let mut pivot_row = 0;
    for col in 0..k {
        let found = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(pivot_row, found);
        let p = rows[pivot_row][col].clone();
        for x in rows[pivot_row].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..rows.len() {
            if r != pivot_row && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for j in 0..=k {
                    let d = &f * &rows[pivot_row][j];
                    rows[r][j] -= d;
                }
            }
        }
        pivot_row += 1;
    }
    if rows[pivot_row..].iter().any(|r| !r[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|i| rows[i][k].clone()).collect())
}

/// Optimum of `min c x, A x <= b` through its dual `max b y, A^T y = c,
/// y <= 0`, by enumerating basic dual solutions.
fn dual_vertex_optimum(lp: &SparseLp) -> Option<BigRational> {
    let (a, b, c) = lp.dense();
    let mut best: Option<BigRational> = None;
    for mask in 0u32..(1 << a.len()) {
        let support: Vec<usize> = (0..a.len()).filter(|i| mask >> i & 1 == 1).collect();
        let vectors: Vec<&Vec<BigRational>> = support.iter().map(|&i| &a[i]).collect();
        let Some(y) = solve_span(&vectors, &c) else { continue };
        if y.iter().any(|v| *v > BigRational::zero()) {
            continue;
        }
        let value = support.iter().zip(&y).fold(BigRational::zero(), |acc, (&i, v)| acc + &b[i] * v);
        if best.as_ref().is_none_or(|x| value > *x) {
            best = Some(value);
        }
    }
    best
}

fn big_to_ratio(r: &BigRational) -> Option<Ratio<i128>> {
    Some(Ratio::new(r.numer().to_i128()?, r.denom().to_i128()?))
}

fn run_honest(kind: ProtocolKind, s: &Stream, seed: u64) -> Result<Outcome, String> {
    let field = PrimeField::default();
    let ann = kind.prove(field, s).ok_or_else(|| format!("{kind} seed {seed}: no certificate"))?;
    Ok(kind.run(field, seed, s, &ann).0)
}

fn generate(kind: ProtocolKind, seed: u64, p: GenParams) -> Result<Stream, String> {
    kind.generate(&mut rng(seed), &p).map_err(|e| format!("{kind} seed {seed}: {}", e.0))
}

fn graph_params(seed: u64, lo: u64, hi: u64) -> GenParams {
    let mut r = rng(seed ^ 0x0bad);
    let n = r.gen_range(lo..=hi);
    let max = n * (n - 1) / 2;
    GenParams { n, m: Some(r.gen_range(n - 1..=max.max(n - 1))), ..GenParams::default() }
}

fn matching(instances: u64) -> Result<(), String> {
    let kind = ProtocolKind::Matching;
    for seed in 0..instances {
        let s = generate(kind, seed, graph_params(seed, 2, 8))?;
        let want = brute_matching(&graph(&s)?);
        let got = run_honest(kind, &s, seed)?;
        if integer(&got) != Some(want) {
            return fail(format!("matching seed {seed}: {got:?}, exhaustive search {want}"));
        }
    }
    Ok(())
}

fn linear_programs(instances: u64) -> Result<(), String> {
    let kind = ProtocolKind::Lp;
    for seed in 0..instances {
        let mut r = rng(seed ^ 0x1b);
        let p = GenParams { b: r.gen_range(1..=5), c: r.gen_range(1..=5), ..GenParams::default() };
        let s = generate(kind, seed, p)?;
        let lp = SparseLp::from_stream(&s).ok_or("not an LP stream")?;
        let want = dual_vertex_optimum(&lp).and_then(|v| big_to_ratio(&v)).ok_or("dual enumeration found no vertex")?;
        let got = run_honest(kind, &s, seed)?;
        let simplex = kind.oracle(&s);
        if got != Outcome::Value(Answer::Rat(want)) || simplex.as_ref() != Some(&got) {
            return fail(format!("lp seed {seed}: protocol {got:?}, simplex {simplex:?}, dual vertices {want}"));
        }
    }
    Ok(())
}

fn flow_and_cut(pairs: u64) -> Result<(), String> {
    let flow: ProtocolKind = "max-flow".parse().map_err(|_| "no max-flow")?;
    let cut: ProtocolKind = "min-cut".parse().map_err(|_| "no min-cut")?;
    for seed in 0..pairs {
        let n = rng(seed ^ 0xf1).gen_range(3..=8);
        let s = generate(flow, seed, GenParams { n, ..GenParams::default() })?;
        let want = edmonds_karp(&graph(&s)?, 0, n as usize - 1);
        let (f, c) = (run_honest(flow, &s, seed)?, run_honest(cut, &s, seed)?);
        if integer(&f) != Some(want) || integer(&c) != Some(want) {
            return fail(format!("seed {seed}: max-flow {f:?}, min-cut {c:?}, augmenting paths {want}"));
        }
    }
    Ok(())
}

fn distances(instances: u64) -> Result<(), String> {
    let encode = |d: Option<u64>| d.map_or(UNREACHABLE, |x| x as i128);
    for seed in 0..instances {
        let n = rng(seed ^ 0xd1).gen_range(2..=16);
        let p = GenParams { n, m: Some((2 * n).min(n * (n - 1))), ..GenParams::default() };
        for name in ["sssp", "apsp"] {
            let kind: ProtocolKind = name.parse().map_err(|_| "unknown protocol")?;
            let s = generate(kind, seed, p.clone())?;
            let d = all_pairs(&graph(&s)?);
            let want: Vec<i128> = match name {
                "sssp" => d[0].iter().map(|&x| encode(x)).collect(),
                _ => d.iter().flatten().map(|&x| encode(x)).collect(),
            };
            let got = run_honest(kind, &s, seed)?;
            if got != Outcome::Value(Answer::Ints(want)) {
                return fail(format!("{name} seed {seed}: {got:?} disagrees with Floyd-Warshall"));
            }
        }
        let kind: ProtocolKind = "shortest-path".parse().map_err(|_| "unknown protocol")?;
        let n = n.min(8).max(3);
        let s = generate(kind, seed, GenParams { n, ..GenParams::default() })?;
        let want = all_pairs(&graph(&s)?)[0][n as usize - 1].map(|x| x as i128);
        let got = run_honest(kind, &s, seed)?;
        if want.is_none() || integer(&got) != want {
            return fail(format!("shortest-path seed {seed}: {got:?}, Floyd-Warshall {want:?}"));
        }
    }
    Ok(())
}

fn diameters(instances: u64) -> Result<(), String> {
    let kind = ProtocolKind::Diameter;
    for seed in 0..instances {
        let s = generate(kind, seed, graph_params(seed, 2, 16))?;
        let want = bfs_diameter(&graph(&s)?).ok_or("disconnected instance")?;
        let got = run_honest(kind, &s, seed)?;
        if integer(&got) != Some(want) {
            return fail(format!("diameter seed {seed}: {got:?}, BFS {want}"));
        }
    }
    Ok(())
}

pub fn run() -> Result<String, String> {
    matching(300)?;
    linear_programs(300)?;
    flow_and_cut(200)?;
    distances(200)?;
    diameters(200)?;
    Ok("matching (300, n<=8), lp (300), max-flow = min-cut (200 pairs), distances (200), diameter (200)".into())
}
