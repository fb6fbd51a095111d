//! Edmonds' blossom algorithm and the Gallai-Edmonds decomposition.

use std::collections::VecDeque;

const NONE: usize = usize::MAX;

struct Search<'a> {
    adj: &'a [Vec<usize>],
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    even: Vec<bool>,
    root: Vec<bool>,
    in_blossom: Vec<bool>,
}

impl<'a> Search<'a> {
    fn new(adj: &'a [Vec<usize>], mate: Vec<usize>) -> Self {
        let n = adj.len();
        Self {
            adj,
            mate,
            parent: vec![NONE; n],
            base: (0..n).collect(),
            even: vec![false; n],
            root: vec![false; n],
            in_blossom: vec![false; n],
        }
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.adj.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    /// Grows alternating trees from `roots`. Returns an exposed vertex
    /// reached by an augmenting path, if any.
    fn grow(&mut self, roots: &[usize]) -> Option<usize> {
        let n = self.adj.len();
        self.parent.fill(NONE);
        self.even.fill(false);
        self.root.fill(false);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        let mut queue = VecDeque::new();
        for &r in roots {
            self.even[r] = true;
            self.root[r] = true;
            queue.push_back(r);
        }
        while let Some(v) = queue.pop_front() {
            for &to in &self.adj[v] {
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                let to_even = self.root[to] || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE);
                if to_even {
                    let b = self.lca(v, to);
                    self.in_blossom.fill(false);
                    self.mark_path(v, b, to);
                    self.mark_path(to, b, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = b;
                            if !self.even[i] {
                                self.even[i] = true;
                                queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return Some(to);
                    }
                    let next = self.mate[to];
                    self.even[next] = true;
                    queue.push_back(next);
                }
            }
        }
        None
    }

    fn augment(&mut self, mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let ppv = self.mate[pv];
            self.mate[v] = pv;
            self.mate[pv] = v;
            v = ppv;
        }
    }
}

/// Maximum matching on nodes `0..adj.len()`; `mate[v]` is `None` for
/// exposed nodes.
pub fn maximum_matching(adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n = adj.len();
    let mut mate = vec![NONE; n];
    // Greedy start.
    for v in 0..n {
        if mate[v] == NONE {
            if let Some(&u) = adj[v].iter().find(|&&u| u != v && mate[u] == NONE) {
                mate[u] = v;
                mate[v] = u;
            }
        }
    }
    let mut search = Search::new(adj, mate);
    for v in 0..n {
        if search.mate[v] == NONE {
            if let Some(end) = search.grow(&[v]) {
                search.augment(end);
            }
        }
    }
    search.mate.into_iter().map(|m| (m != NONE).then_some(m)).collect()
}

/// Nodes missed by some maximum matching (the set `D` of the Gallai-Edmonds
/// decomposition), given a maximum matching.
pub fn deficient_nodes(adj: &[Vec<usize>], mate: &[Option<usize>]) -> Vec<bool> {
    let raw: Vec<usize> = mate.iter().map(|m| m.unwrap_or(NONE)).collect();
    let roots: Vec<usize> = (0..adj.len()).filter(|&v| raw[v] == NONE).collect();
    let mut search = Search::new(adj, raw);
    let found = search.grow(&roots);
    assert!(found.is_none(), "matching is not maximum");
    search.even
}
