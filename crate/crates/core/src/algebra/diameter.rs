//! Diameter of a connected undirected graph through powers of `B = I + A`.
//!
//! `(B^e)_ik` is nonzero exactly when `dist(i, k) <= e`, so the diameter is
//! the least `l` with `B^l` all nonzero. Starting from `B^0 = I`, the helper
//! proves a chain of products `C = X Y` where `X` is the current power and
//! `Y` is either `X` (squaring) or `B`, reaching `B^(l-1)` and then `B^l`.
//!
//! A product is checked like a matrix-vector product with every column of
//! `Y` at once. The inner index lives on an `h x v` grid. For each cell
//! `(i, k)`, in row-major order, the helper sends
//! `s_ik(z) = sum_y f_{X_i}(z, y) f_{Y_k}(z, y)` at `z = 1..=2h-1`, and
//! `C_ik = s_ik(1) + ... + s_ik(h)`. The verifier keeps two banks of `v`
//! slots, `sum_i a^i f_{X_i}(r, y)` and `sum_k b^k f_{Y_k}(r, y)`, and
//! accepts the level when `sum_y X_y Y_y = sum_ik a^i b^k s_ik(r)`. The
//! derived entries of `C` fill the banks for the next level, so no matrix is
//! replayed.
//!
//! Layout: `CLAIM l`, then per level `POW-LEVEL kind` (0 squares, 1
//! multiplies by `B`), an optional `POW-ZERO-CELL i k` on the level that
//! produces `B^(l-1)`, and `n^2 (2h - 1)` tokens `POW-EVAL`. Entries are
//! walk counts modulo `p`.

use super::lde::{Grid, StreamingInterp};
use super::matvec::MatvecProver;
use crate::annotation::{AnnHeader, AnnToken, Annotation, Tag};
use crate::field::{Fe, PrimeField};
use crate::graph::Graph;
use crate::protocol::{ensure, reject, Answer, Outcome, Reason, Reject, Verifier};
use crate::stream::{Stream, StreamHeader, StreamKind, StreamToken};
use rand::Rng;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Claim,
    Level,
    Cells,
}

#[derive(Debug, Clone, Copy)]
enum Bank {
    Base,
    Left,
    Right,
    NextLeft,
    NextRight,
}

/// Inner-index split from the header. Defaults to `0`: one evaluation per
/// cell and `n` slots per bank.
pub fn power_split(header: &StreamHeader) -> f64 {
    header.get_ratio("alpha").map_or(0.0, |r| *r.numer() as f64 / *r.denom() as f64)
}

pub struct DiameterVerifier {
    field: PrimeField,
    n: u64,
    grid: Grid,
    r: Fe,
    a: Fe,
    b: Fe,
    /// `B` as a right factor.
    base: Vec<Fe>,
    /// Current power as a left factor and as a right factor.
    left: Vec<Fe>,
    right: Vec<Fe>,
    /// The power being derived, in both roles.
    next_left: Vec<Fe>,
    next_right: Vec<Fe>,
    claim: u64,
    exponent: u64,
    phase: Phase,
    multiply: bool,
    cell: u64,
    interp: StreamingInterp,
    head: Fe,
    fp_out: Fe,
    zero_cell: Option<u64>,
    all_nonzero: bool,
    zero_witnessed: bool,
    last_all_nonzero: bool,
}

impl DiameterVerifier {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        ensure(header.kind == StreamKind::Graph, Reason::Structure, || "diameter expects an undirected graph stream".into())?;
        let n = header.n;
        ensure(n >= 1, Reason::Domain, || "empty graph".into())?;
        let grid = Grid::new(n, power_split(header));
        ensure(2 * grid.h + 1 < field.modulus(), Reason::Domain, || "grid too large for the field".into())?;
        let r = field.random_at_least(rng, 2 * grid.h + 1);
        let (a, b) = (field.random_nonzero(rng), field.random_nonzero(rng));
        let slots = vec![0; grid.v as usize];
        let mut v = Self {
            field,
            n,
            grid,
            r,
            a,
            b,
            base: slots.clone(),
            left: slots.clone(),
            right: slots.clone(),
            next_left: slots.clone(),
            next_right: slots,
            claim: 0,
            exponent: 0,
            phase: Phase::Claim,
            multiply: false,
            cell: 0,
            interp: StreamingInterp::new(field, r, grid.points()),
            head: 0,
            fp_out: 0,
            zero_cell: None,
            all_nonzero: false,
            zero_witnessed: false,
            last_all_nonzero: n == 1,
        };
        for j in 1..=n {
            v.add_left(Bank::Left, j, j, 1);
            v.add_right(Bank::Right, j, j, 1);
            v.add_right(Bank::Base, j, j, 1);
        }
        Ok(v)
    }

    /// Slot and increment for entry `value` at inner index `j` and outer
    /// index `outer`, weighted by `base^outer`.
    fn term(&self, base: Fe, outer: u64, j: u64, value: Fe) -> (usize, Fe) {
        let f = &self.field;
        let (x, y) = self.grid.cell(j);
        let w = super::lde::chi(f, self.grid.h, x, self.r);
        (y as usize - 1, f.mul(value, f.mul(w, f.pow(base, outer))))
    }

    fn add_left(&mut self, which: Bank, i: u64, j: u64, value: Fe) {
        let (slot, t) = self.term(self.a, i, j, value);
        let f = self.field;
        let bank = self.bank(which);
        bank[slot] = f.add(bank[slot], t);
    }

    fn add_right(&mut self, which: Bank, j: u64, k: u64, value: Fe) {
        let (slot, t) = self.term(self.b, k, j, value);
        let f = self.field;
        let bank = self.bank(which);
        bank[slot] = f.add(bank[slot], t);
    }

    fn bank(&mut self, which: Bank) -> &mut Vec<Fe> {
        match which {
            Bank::Base => &mut self.base,
            Bank::Left => &mut self.left,
            Bank::Right => &mut self.right,
            Bank::NextLeft => &mut self.next_left,
            Bank::NextRight => &mut self.next_right,
        }
    }

    fn target(&self) -> u64 {
        if self.multiply {
            self.exponent + 1
        } else {
            2 * self.exponent
        }
    }

    fn finish_cell(&mut self) -> Result<(), Reject> {
        let f = self.field;
        let n = self.n;
        let (i, k) = ((self.cell - 1) / n + 1, (self.cell - 1) % n + 1);
        let c = self.head;
        let w = f.mul(f.pow(self.a, i), f.pow(self.b, k));
        self.fp_out = f.add(self.fp_out, f.mul(w, self.interp.value()));
        self.add_left(Bank::NextLeft, i, k, c);
        self.add_right(Bank::NextRight, i, k, c);
        self.all_nonzero &= c != 0;
        if self.zero_cell == Some(self.cell) {
            ensure(c == 0, Reason::LocalCheck, || format!("cell ({i},{k}) of the claimed power is nonzero"))?;
            self.zero_witnessed = true;
        }
        self.interp.reset();
        self.head = 0;
        if self.cell == n * n {
            self.close_level()?;
        }
        Ok(())
    }

    fn close_level(&mut self) -> Result<(), Reject> {
        let f = &self.field;
        let y = if self.multiply { &self.base } else { &self.right };
        let lhs = self.left.iter().zip(y).fold(0, |acc, (&p, &q)| f.mul_add(p, q, acc));
        ensure(lhs == self.fp_out, Reason::PolyMismatch, || format!("product for power {} fails", self.target()))?;
        self.exponent = self.target();
        self.left = std::mem::replace(&mut self.next_left, vec![0; self.grid.v as usize]);
        self.right = std::mem::replace(&mut self.next_right, vec![0; self.grid.v as usize]);
        self.last_all_nonzero = self.all_nonzero;
        self.phase = Phase::Level;
        Ok(())
    }

    pub fn bank_words(&self) -> usize {
        5 * self.grid.v as usize
    }
}

impl Verifier for DiameterVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        let StreamToken::Edge(u, v) = *tok else {
            return reject(Reason::Structure, "diameter expects undirected edges");
        };
        let n = self.n;
        ensure((1..=n).contains(&u) && (1..=n).contains(&v), Reason::Domain, || format!("edge ({u},{v}) outside [1, {n}]"))?;
        self.add_right(Bank::Base, u, v, 1);
        self.add_right(Bank::Base, v, u, 1);
        Ok(())
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        let f = self.field;
        let n = self.n;
        match (self.phase, tok.tag) {
            (Phase::Claim, Tag::Claim) => {
                tok.expect_len(1)?;
                self.claim = tok.int_in(0, 0, n as i64)? as u64;
                self.phase = Phase::Level;
            }
            (Phase::Level, Tag::PowLevel) => {
                tok.expect_len(1)?;
                self.multiply = tok.int_in(0, 0, 1)? == 1;
                let e = self.target();
                ensure(e > self.exponent && e <= self.claim, Reason::Structure, || format!("power {e} does not lead to {}", self.claim))?;
                self.cell = 0;
                self.fp_out = 0;
                self.zero_cell = None;
                self.all_nonzero = true;
                self.interp.reset();
                self.head = 0;
                self.phase = Phase::Cells;
            }
            (Phase::Cells, Tag::PowZeroCell) if self.cell == 0 && self.interp.count() == 0 && self.zero_cell.is_none() => {
                tok.expect_len(2)?;
                ensure(self.target() + 1 == self.claim, Reason::Structure, || "zero cell on the wrong power".into())?;
                let (i, k) = (tok.node(0, n)?, tok.node(1, n)?);
                self.zero_cell = Some((i - 1) * n + k);
            }
            (Phase::Cells, Tag::PowEval) => {
                tok.expect_len(1)?;
                let v = tok.int_in(0, 0, f.modulus() as i64 - 1)? as Fe;
                if self.interp.count() == 0 {
                    self.cell += 1;
                }
                if self.interp.count() < self.grid.h {
                    self.head = f.add(self.head, v);
                }
                self.interp.push(v);
                if self.interp.count() == self.grid.points() {
                    self.finish_cell()?;
                }
            }
            _ => return reject(Reason::Structure, format!("unexpected {} token", tok.tag.as_str())),
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        ensure(self.phase == Phase::Level, Reason::Structure, || "certificate incomplete".into())?;
        let l = self.claim;
        ensure(self.exponent == l, Reason::Structure, || format!("reached power {} of {l}", self.exponent))?;
        ensure(self.last_all_nonzero, Reason::ClaimMismatch, || format!("some pair is farther apart than {l}"))?;
        // B^0 = I has a zero cell exactly when n >= 2.
        let witnessed = match l {
            0 => true,
            1 => self.n >= 2,
            _ => self.zero_witnessed,
        };
        ensure(witnessed, Reason::ClaimMismatch, || format!("no pair at distance {l}"))?;
        Ok(Outcome::Value(Answer::Int(l as i128)))
    }

    fn words(&self) -> usize {
        self.bank_words() + StreamingInterp::WORDS + 16
    }
}

/// Eccentricity maximum by BFS, or `None` if disconnected.
pub fn bfs_diameter(g: &Graph) -> Option<u64> {
    let n = g.n as usize;
    let adj = g.adjacency();
    let mut best = 0;
    for s in 1..=n {
        let mut dist = vec![u64::MAX; n + 1];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &(v, _, _) in &adj[u] {
                if dist[v as usize] == u64::MAX {
                    dist[v as usize] = dist[u] + 1;
                    queue.push_back(v as usize);
                }
            }
        }
        best = best.max(*dist[1..].iter().max()?);
        if best == u64::MAX {
            return None;
        }
    }
    Some(best)
}

/// Steps from `B^0` to `B^(l-1)` and then `B^l`: `true` multiplies by `B`.
pub fn power_chain(l: u64) -> Vec<bool> {
    let mut steps = Vec::new();
    if l >= 2 {
        let e = l - 1;
        let bits = 64 - e.leading_zeros();
        steps.push(true);
        for k in (0..bits - 1).rev() {
            steps.push(false);
            if e >> k & 1 == 1 {
                steps.push(true);
            }
        }
    }
    if l >= 1 {
        steps.push(true);
    }
    steps
}

type Dense = Vec<Vec<Fe>>;

fn product(f: &PrimeField, x: &Dense, y: &Dense) -> Dense {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).map(|k| (0..n).fold(0, |acc, j| f.mul_add(x[i][j], y[j][k], acc))).collect())
        .collect()
}

/// Honest annotation for a connected graph; `None` when disconnected.
pub fn prove_diameter(field: PrimeField, s: &Stream) -> Result<Option<Annotation>, Reject> {
    ensure(s.header.kind == StreamKind::Graph, Reason::Structure, || "diameter expects an undirected graph stream".into())?;
    let g = Graph::from_stream(s).ok_or_else(|| Reject::new(Reason::Structure, "not a graph stream"))?;
    let Some(l) = bfs_diameter(&g) else { return Ok(None) };
    let (ann, pattern_ok) = power_annotation(field, &g, power_split(&s.header), l);
    Ok(pattern_ok.then_some(ann))
}

/// Product chain claiming diameter `l`, with correct products. The flag is
/// false when the powers do not match the claim (no zero cell in
/// `B^(l-1)`, or a zero cell in `B^l`); the first cell then stands in.
pub fn power_annotation(field: PrimeField, g: &Graph, split: f64, l: u64) -> (Annotation, bool) {
    let n = g.n as usize;
    let grid = Grid::new(g.n, split);
    let mut consistent = true;
    let f = &field;
    let identity: Dense = (0..n).map(|i| (0..n).map(|k| (i == k) as Fe).collect()).collect();
    let mut base = identity.clone();
    for &(u, v, _) in &g.edges {
        base[u as usize - 1][v as usize - 1] = f.add(base[u as usize - 1][v as usize - 1], 1);
        base[v as usize - 1][u as usize - 1] = f.add(base[v as usize - 1][u as usize - 1], 1);
    }
    let mut ann = Annotation::new(AnnHeader::new("diameter"));
    ann.push_ints(Tag::Claim, &[l as i64]);
    let (mut current, mut e) = (identity, 0u64);
    for multiply in power_chain(l) {
        let y = if multiply { base.clone() } else { current.clone() };
        let next = product(f, &current, &y);
        let target = if multiply { e + 1 } else { 2 * e };
        ann.push_ints(Tag::PowLevel, &[multiply as i64]);
        if target + 1 == l {
            let cell = (0..n * n).find(|&c| next[c / n][c % n] == 0).unwrap_or_else(|| {
                consistent = false;
                0
            });
            ann.push_ints(Tag::PowZeroCell, &[(cell / n) as i64 + 1, (cell % n) as i64 + 1]);
        }
        let entries: Vec<(u64, u64, Fe)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| current[i][j] != 0)
            .map(|(i, j)| (i as u64 + 1, j as u64 + 1, current[i][j]))
            .collect();
        let columns: Vec<Vec<Vec<Fe>>> = (0..n)
            .map(|k| {
                let col: Vec<Fe> = (0..n).map(|j| y[j][k]).collect();
                let prover = MatvecProver::new(field, grid, g.n, &entries, &col);
                (1..=g.n).map(|i| prover.row_values(i)).collect()
            })
            .collect();
        for i in 0..n {
            for col in &columns {
                for &v in &col[i] {
                    ann.push_ints(Tag::PowEval, &[v as i64]);
                }
            }
        }
        current = next;
        e = target;
    }
    consistent &= current.iter().flatten().all(|&v| v != 0);
    (ann, consistent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::connected_gnm;
    use crate::protocol::run_in_memory;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(s: &Stream, ann: &Annotation, seed: u64) -> (Outcome, crate::protocol::CostReport) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = DiameterVerifier::new(PrimeField::default(), &mut rng, &s.header).unwrap();
        run_in_memory(&mut v, s, ann)
    }

    fn value(g: &Graph) -> Outcome {
        let s = g.to_stream();
        run(&s, &prove_diameter(PrimeField::default(), &s).unwrap().unwrap(), 3).0
    }

    /// All-pairs distances by Floyd-Warshall.
    fn floyd_diameter(g: &Graph) -> u64 {
        let n = g.n as usize;
        let inf = u64::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for &(u, v, _) in &g.edges {
            let (u, v) = (u as usize - 1, v as usize - 1);
            if u != v {
                d[u][v] = 1;
                d[v][u] = 1;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                }
            }
        }
        d.into_iter().flatten().max().unwrap()
    }

    #[test]
    fn power_chains_reach_their_target() {
        for l in 0..200u64 {
            let mut e = 0;
            let mut seen_before = l < 2;
            for (k, m) in power_chain(l).into_iter().enumerate() {
                e = if m { e + 1 } else { 2 * e };
                seen_before |= e + 1 == l;
                assert!(k > 0 || m, "chain must start by multiplying");
            }
            assert_eq!(e, l);
            assert!(seen_before, "chain for {l} skips {}", l - 1);
            assert!(power_chain(l).len() as u32 <= 2 * (64 - l.leading_zeros()) + 1);
        }
    }

    #[test]
    fn small_examples() {
        let int = |v| Outcome::Value(Answer::Int(v));
        assert_eq!(value(&Graph::from_pairs(3, false, &[(1, 2), (2, 3), (1, 3)])), int(1));
        assert_eq!(value(&Graph::from_pairs(4, false, &[(1, 2), (2, 3), (3, 4)])), int(3));
        assert_eq!(value(&Graph::from_pairs(5, false, &[(1, 2), (1, 3), (1, 4), (1, 5)])), int(2));
        assert_eq!(value(&Graph::from_pairs(1, false, &[])), int(0));
        assert_eq!(value(&Graph::from_pairs(2, false, &[(1, 2), (1, 2)])), int(1));
    }

    #[test]
    fn random_graphs_match_floyd_warshall() {
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        for trial in 0..40 {
            let n = rng.gen_range(2..=20);
            let m = rng.gen_range(n as usize - 1..=(n * (n - 1) / 2) as usize);
            let g = connected_gnm(&mut rng, n, m).unwrap();
            let mut s = g.to_stream();
            s.header = s.header.with("alpha", ["0", "1/2", "1"][trial % 3]);
            let ann = prove_diameter(PrimeField::default(), &s).unwrap().unwrap();
            assert_eq!(run(&s, &ann, trial as u64).0, Outcome::Value(Answer::Int(floyd_diameter(&g) as i128)));
        }
    }

    #[test]
    fn wrong_claims_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let f = PrimeField::default();
        for trial in 0..30 {
            let g = connected_gnm(&mut rng, 10, 12).unwrap();
            let l = bfs_diameter(&g).unwrap();
            let s = g.to_stream();
            for claim in [l - 1, l + 1] {
                if claim > g.n {
                    continue;
                }
                let (ann, consistent) = power_annotation(f, &g, 0.0, claim);
                assert!(!consistent);
                assert!(run(&s, &ann, trial).0.is_bottom(), "claim {claim} of {l} accepted");
            }
        }
    }

    #[test]
    fn perturbed_products_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let f = PrimeField::default();
        for trial in 0..40 {
            let g = connected_gnm(&mut rng, 8, 10).unwrap();
            let s = g.to_stream();
            let mut ann = prove_diameter(f, &s).unwrap().unwrap();
            let evals: Vec<usize> = (0..ann.tokens.len()).filter(|&k| ann.tokens[k].tag == Tag::PowEval).collect();
            let k = evals[rng.gen_range(0..evals.len())];
            let v = ann.tokens[k].int(0).unwrap();
            ann.tokens[k] = AnnToken::ints(Tag::PowEval, &[(v + 1) % f.modulus() as i64]);
            assert!(run(&s, &ann, trial).0.is_bottom());
        }
    }

    #[test]
    fn disconnected_graph_has_no_certificate() {
        let g = Graph::from_pairs(4, false, &[(1, 2), (3, 4)]);
        assert!(prove_diameter(PrimeField::default(), &g.to_stream()).unwrap().is_none());
        for claim in 1..=4 {
            let (ann, _) = power_annotation(PrimeField::default(), &g, 0.0, claim);
            assert!(run(&g.to_stream(), &ann, claim).0.is_bottom());
        }
    }
}
