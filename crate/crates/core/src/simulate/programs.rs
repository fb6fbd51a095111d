//! Programs run under checked memory. Each keeps O(1) locals and touches the
//! loaded graph only through [`Ram`].

use super::{Abort, Layout, Listing, Ram, Run, INF};
use crate::memcheck::VALUE_MAX;
use crate::stream::StreamKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Program {
    /// Outputs the number of stream edges.
    Count,
    /// Minimum spanning tree weight by Kruskal over a weight-sorted listing.
    Mst,
    /// Single-source distances by Dijkstra with a binary heap.
    Sssp,
    /// All-pairs distances by Floyd-Warshall.
    Apsp,
}

impl Program {
    pub const ALL: [Program; 4] = [Program::Count, Program::Mst, Program::Sssp, Program::Apsp];

    pub fn name(&self) -> &'static str {
        match self {
            Program::Count => "count",
            Program::Mst => "mst",
            Program::Sssp => "sssp",
            Program::Apsp => "apsp",
        }
    }

    pub fn listing(&self) -> Listing {
        match self {
            Program::Count => Listing::None,
            Program::Mst => Listing::ByWeight,
            Program::Sssp | Program::Apsp => Listing::Adjacency,
        }
    }

    pub fn accepts(&self, kind: StreamKind) -> bool {
        match self {
            Program::Mst => matches!(kind, StreamKind::Graph | StreamKind::WGraph),
            _ => kind.is_graph(),
        }
    }

    /// Cells used past `layout.work`.
    pub fn work_cells(&self, l: &Layout) -> u64 {
        match self {
            Program::Count => 0,
            Program::Mst => 2 * l.n,
            Program::Sssp => 4 * l.n,
            Program::Apsp => l.n * l.n,
        }
    }

    pub fn addr_max(&self, l: &Layout) -> u64 {
        l.work + self.work_cells(l)
    }

    /// Upper bound on memory operations; exceeding it is a runaway.
    pub fn step_bound(&self, l: &Layout) -> u64 {
        let (n, e) = (l.n + 1, l.entries + 1);
        let log = 64 - n.leading_zeros() as u64;
        match self {
            Program::Count => 1,
            Program::Mst => 8 * e * (log + 4),
            Program::Sssp => 16 * (e + n) * (log + 2),
            Program::Apsp => 4 * n * n * n + 8 * e + 4 * n * n,
        }
    }

    pub fn run(&self, ram: &mut dyn Ram, l: &Layout) -> Run {
        match self {
            Program::Count => {
                let m = ram.read(2)?;
                ram.output(m)
            }
            Program::Mst => mst(ram, l),
            Program::Sssp => sssp(ram, l),
            Program::Apsp => apsp(ram, l),
        }
    }
}

fn fail<T>(why: &str) -> Result<T, Abort> {
    Err(Abort::Fail(why.to_string()))
}

fn mst(ram: &mut dyn Ram, l: &Layout) -> Run {
    let n = ram.read(1)?;
    let entries = ram.read(3)?;
    let parent = |u: u64| l.work + u;
    let rank = |u: u64| l.work + l.n + u;
    // A zero parent marks a root.
    let find = |ram: &mut dyn Ram, mut u: u64| -> Result<u64, Abort> {
        loop {
            let p = ram.read(parent(u))?;
            if p == 0 {
                return Ok(u);
            }
            let gp = ram.read(parent(p))?;
            if gp == 0 {
                return Ok(p);
            }
            ram.write(parent(u), gp)?;
            u = gp;
        }
    };
    let (mut total, mut joined) = (0u64, 0u64);
    for k in 1..=entries {
        let base = l.entry(k);
        let u = ram.read(base)?;
        let v = ram.read(base + 1)?;
        let w = ram.read(base + 2)?;
        let (ru, rv) = (find(ram, u)?, find(ram, v)?);
        if ru == rv {
            continue;
        }
        let (a, b) = (ram.read(rank(ru))?, ram.read(rank(rv))?);
        let (child, root) = if a < b { (ru, rv) } else { (rv, ru) };
        ram.write(parent(child), root)?;
        if a == b {
            ram.write(rank(root), a + 1)?;
        }
        total += w;
        joined += 1;
    }
    if joined + 1 != n.max(1) {
        return fail("graph is not connected");
    }
    if total > VALUE_MAX {
        return fail("weight overflow");
    }
    ram.output(total)
}

fn sssp(ram: &mut dyn Ram, l: &Layout) -> Run {
    let n = ram.read(1)?;
    let s = ram.read(4)?;
    if !(1..=n).contains(&s) {
        return fail("source out of range");
    }
    let dist = |u: u64| l.work + u;
    let heap = |i: u64| l.work + l.n + i;
    let pos = |u: u64| l.work + 2 * l.n + u;
    let done = |u: u64| l.work + 3 * l.n + u;
    let less = |ram: &mut dyn Ram, a: u64, b: u64| -> Result<bool, Abort> {
        let (x, y) = (ram.read(heap(a))?, ram.read(heap(b))?);
        Ok(ram.read(dist(x))? < ram.read(dist(y))?)
    };
    let swap = |ram: &mut dyn Ram, a: u64, b: u64| -> Run {
        let (x, y) = (ram.read(heap(a))?, ram.read(heap(b))?);
        ram.write(heap(a), y)?;
        ram.write(heap(b), x)?;
        ram.write(pos(y), a)?;
        ram.write(pos(x), b)
    };

    for u in 1..=n {
        ram.write(dist(u), if u == s { 0 } else { INF })?;
    }
    ram.write(heap(1), s)?;
    ram.write(pos(s), 1)?;
    let mut size = 1u64;
    while size > 0 {
        let u = ram.read(heap(1))?;
        let du = ram.read(dist(u))?;
        let last = ram.read(heap(size))?;
        size -= 1;
        ram.write(done(u), 1)?;
        if size > 0 {
            ram.write(heap(1), last)?;
            ram.write(pos(last), 1)?;
            let mut i = 1;
            loop {
                let mut best = i;
                for c in [2 * i, 2 * i + 1] {
                    if c <= size && less(ram, c, best)? {
                        best = c;
                    }
                }
                if best == i {
                    break;
                }
                swap(ram, i, best)?;
                i = best;
            }
        }
        let (lo, hi) = (ram.read(l.off(u))?, ram.read(l.off(u + 1))?);
        for k in lo..hi {
            let v = ram.read(l.entry(k))?;
            if ram.read(done(v))? == 1 {
                continue;
            }
            let nd = (du + ram.read(l.entry(k) + 1)?).min(INF);
            if nd >= ram.read(dist(v))? {
                continue;
            }
            ram.write(dist(v), nd)?;
            let mut i = ram.read(pos(v))?;
            if i == 0 {
                size += 1;
                i = size;
                ram.write(heap(i), v)?;
                ram.write(pos(v), i)?;
            }
            while i > 1 && less(ram, i, i / 2)? {
                swap(ram, i, i / 2)?;
                i /= 2;
            }
        }
    }
    for u in 1..=n {
        let d = ram.read(dist(u))?;
        ram.output(d)?;
    }
    Ok(())
}

fn apsp(ram: &mut dyn Ram, l: &Layout) -> Run {
    let n = ram.read(1)?;
    let d = |i: u64, j: u64| l.work + (i - 1) * l.n + j;
    for i in 1..=n {
        for j in 1..=n {
            ram.write(d(i, j), if i == j { 0 } else { INF })?;
        }
    }
    for u in 1..=n {
        let (lo, hi) = (ram.read(l.off(u))?, ram.read(l.off(u + 1))?);
        for k in lo..hi {
            let v = ram.read(l.entry(k))?;
            let w = ram.read(l.entry(k) + 1)?.min(INF);
            if w < ram.read(d(u, v))? {
                ram.write(d(u, v), w)?;
            }
        }
    }
    for k in 1..=n {
        for i in 1..=n {
            let ik = ram.read(d(i, k))?;
            if ik == INF {
                continue;
            }
            for j in 1..=n {
                let kj = ram.read(d(k, j))?;
                if kj == INF {
                    continue;
                }
                if ik + kj < ram.read(d(i, j))? {
                    ram.write(d(i, j), ik + kj)?;
                }
            }
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            let x = ram.read(d(i, j))?;
            ram.output(x)?;
        }
    }
    Ok(())
}
