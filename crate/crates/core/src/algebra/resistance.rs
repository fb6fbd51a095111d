//! Effective resistance between `s` and `t` in an undirected graph.
//!
//! Grounding `t` leaves the reduced Laplacian `L'` on the other `n - 1` nodes
//! (renumbered in order). The helper sends a nonzero `d` and a vector `xh`
//! with `L' xh = d e_s`, proven row by row with the product check; then
//! `R = xh_s / d`, stated as a bounded fraction `a/b`.
//!
//! Layout: `RES-D d`, `RES-XHAT j xh_j` for `j = 1..n-1`, the product rows,
//! `RES-R a b`.

use super::eigen::operator_entries;
use super::exact::{q, small_ratio, solve, Q};
use super::lde::Grid;
use super::matvec::{feed_poly_token, split_of, MatvecCore, MatvecProver};
use crate::annotation::{AnnHeader, AnnToken, Annotation, Tag};
use crate::field::{Fe, PrimeField};
use crate::graph::{connected_gnm, with_weights};
use crate::protocol::{ensure, reject, Answer, Outcome, Reason, Reject, Verifier};
use crate::stream::{Stream, StreamHeader, StreamKind, StreamToken};
use num_rational::Ratio;
use rand::Rng;

/// Bound on `|a|` and `b` in the stated resistance `a/b`. Two distinct such
/// fractions cannot agree modulo a 61-bit prime.
pub const RATIO_BOUND: u64 = 1 << 29;

/// Endpoints `(s, t)`; defaults `s = 1`, `t = n`.
pub fn endpoints(header: &StreamHeader) -> (u64, u64) {
    (header.get_u64("s").unwrap_or(1), header.get_u64("t").unwrap_or(header.n))
}

/// Index of node `u` once `t` is removed.
fn reduced(u: u64, t: u64) -> Option<u64> {
    match u.cmp(&t) {
        std::cmp::Ordering::Less => Some(u),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Some(u - 1),
    }
}

fn reduced_entries(tok: &StreamToken, t: u64) -> Vec<(u64, u64, i64)> {
    operator_entries(tok)
        .unwrap_or_default()
        .into_iter()
        .filter_map(|(i, j, a)| Some((reduced(i, t)?, reduced(j, t)?, a)))
        .collect()
}

fn check_header(header: &StreamHeader) -> Result<(u64, u64, u64), Reject> {
    ensure(matches!(header.kind, StreamKind::Graph | StreamKind::WGraph), Reason::Structure, || {
        "resistance expects an undirected graph stream".into()
    })?;
    let n = header.n;
    let (s, t) = endpoints(header);
    ensure(n >= 2 && (1..=n).contains(&s) && (1..=n).contains(&t) && s != t, Reason::Domain, || {
        format!("endpoints s={s} t={t} invalid for n={n}")
    })?;
    Ok((n, reduced(s, t).expect("s != t"), t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Scale,
    Vector,
    Rows,
    Done,
}

pub struct ResistanceVerifier {
    core: MatvecCore,
    t: u64,
    source: u64,
    phase: Phase,
    d: Fe,
    next_x: u64,
    x_source: Fe,
    rows_done: u64,
    out: Option<Ratio<i128>>,
}

impl ResistanceVerifier {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        let (n, source, t) = check_header(header)?;
        let core = MatvecCore::new(field, rng, n - 1, n - 1, split_of(header))?;
        Ok(Self { core, t, source, phase: Phase::Scale, d: 0, next_x: 0, x_source: 0, rows_done: 0, out: None })
    }

    fn field_arg(&self, tok: &AnnToken, k: usize) -> Result<Fe, Reject> {
        Ok(tok.int_in(k, 0, self.core.field().modulus() as i64 - 1)? as Fe)
    }
}

impl Verifier for ResistanceVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        if !matches!(tok, StreamToken::Edge(..) | StreamToken::WeightedEdge(..)) {
            return reject(Reason::Structure, "resistance expects undirected edges");
        }
        let f = self.core.field();
        for (i, j, a) in reduced_entries(tok, self.t) {
            self.core.matrix(i, j, f.from_i64(a))?;
        }
        Ok(())
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        let f = self.core.field();
        let size = self.core.rows();
        match (self.phase, tok.tag) {
            (Phase::Scale, Tag::ResD) => {
                tok.expect_len(1)?;
                self.d = self.field_arg(tok, 0)?;
                ensure(self.d != 0, Reason::Domain, || "zero scale".into())?;
                self.phase = Phase::Vector;
            }
            (Phase::Vector, Tag::ResXhat) => {
                tok.expect_len(2)?;
                let j = tok.int(0)? as u64;
                ensure(j == self.next_x + 1, Reason::Structure, || format!("vector entry {j} out of order"))?;
                let x = self.field_arg(tok, 1)?;
                self.next_x = j;
                self.core.vector(j, x)?;
                if j == self.source {
                    self.x_source = x;
                }
                if j == size {
                    self.phase = Phase::Rows;
                }
            }
            (Phase::Rows, Tag::MvPoly | Tag::MvEval) => {
                if let Some((i, v)) = feed_poly_token(&mut self.core, tok)? {
                    let want = if i == self.source { self.d } else { 0 };
                    ensure(v == want, Reason::LocalCheck, || format!("row {i} of the reduced system is not satisfied"))?;
                    self.rows_done = i;
                }
            }
            (Phase::Rows, Tag::ResR) if self.rows_done == size => {
                tok.expect_len(2)?;
                let bound = RATIO_BOUND as i64;
                let (a, b) = (tok.int_in(0, -bound, bound)?, tok.int_in(1, 1, bound)?);
                ensure(f.mul(f.from_i64(a), self.d) == f.mul(f.from_i64(b), self.x_source), Reason::ClaimMismatch, || {
                    format!("{a}/{b} is not the stated solution entry")
                })?;
                self.out = Some(Ratio::new(a as i128, b as i128));
                self.phase = Phase::Done;
            }
            _ => return reject(Reason::Structure, format!("unexpected {} token", tok.tag.as_str())),
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        self.core.check()?;
        match self.out {
            Some(r) => Ok(Outcome::Value(Answer::Rat(r))),
            None => reject(Reason::Structure, "missing resistance value"),
        }
    }

    fn words(&self) -> usize {
        self.core.words() + 9
    }
}

/// Reduced Laplacian over the rationals.
fn reduced_laplacian(s: &Stream, t: u64) -> Vec<Vec<Q>> {
    let k = s.header.n as usize - 1;
    let mut a = vec![vec![q(0); k]; k];
    for tok in &s.tokens {
        for (i, j, v) in reduced_entries(tok, t) {
            a[i as usize - 1][j as usize - 1] += q(v);
        }
    }
    a
}

/// Exact effective resistance, or `None` when the reduced Laplacian is
/// singular (some node cannot reach `t`).
pub fn resistance(s: &Stream) -> Result<Option<Q>, Reject> {
    let (_, source, t) = check_header(&s.header)?;
    let a = reduced_laplacian(s, t);
    let mut rhs = vec![q(0); a.len()];
    rhs[source as usize - 1] = q(1);
    Ok(solve(&a, &rhs).map(|x| x[source as usize - 1].clone()))
}

/// Honest annotation; `None` when the resistance is infinite or its fraction
/// exceeds [`RATIO_BOUND`].
pub fn prove_resistance(field: PrimeField, s: &Stream) -> Result<Option<Annotation>, Reject> {
    let (n, source, t) = check_header(&s.header)?;
    let a = reduced_laplacian(s, t);
    let mut rhs = vec![q(0); a.len()];
    rhs[source as usize - 1] = q(1);
    let Some(x) = solve(&a, &rhs) else { return Ok(None) };
    let Some((num, den)) = small_ratio(&x[source as usize - 1], RATIO_BOUND) else { return Ok(None) };
    let mut xf = Vec::with_capacity(x.len());
    for v in &x {
        let conv = |b: &num_bigint::BigInt| field.from_i128((b % num_bigint::BigInt::from(field.modulus())).try_into().unwrap());
        match field.div(conv(v.numer()), conv(v.denom())) {
            Some(e) => xf.push(e),
            None => return Ok(None),
        }
    }
    let mut entries = Vec::new();
    for tok in &s.tokens {
        entries.extend(reduced_entries(tok, t).into_iter().map(|(i, j, v)| (i, j, field.from_i64(v))));
    }
    let prover = MatvecProver::new(field, Grid::new(n - 1, split_of(&s.header)), n - 1, &entries, &xf);
    let mut ann = Annotation::new(AnnHeader::new("resistance"));
    ann.push_ints(Tag::ResD, &[1]);
    for (j, &v) in xf.iter().enumerate() {
        ann.push_ints(Tag::ResXhat, &[j as i64 + 1, v as i64]);
    }
    ann.tokens.extend(prover.tokens());
    ann.push_ints(Tag::ResR, &[num as i64, den as i64]);
    Ok(Some(ann))
}

/// Connected weighted graph whose `1`-to-`n` resistance has a bounded
/// fraction; rejection-samples. `None` if no draw fits the bound.
pub fn gen_resistance<R: Rng + ?Sized>(rng: &mut R, n: u64, m: usize, alpha: &str) -> Option<Stream> {
    let n = n.max(2);
    for _ in 0..ATTEMPTS {
        let Some(g0) = connected_gnm(rng, n, m.max(n as usize - 1)) else { continue };
        let g = with_weights(rng, g0, 1, 4);
        let mut s = g.to_stream();
        s.header = s.header.with("alpha", alpha);
        if let Ok(Some(r)) = resistance(&s) {
            if small_ratio(&r, RATIO_BOUND).is_some() {
                return Some(s);
            }
        }
    }
    None
}

const ATTEMPTS: usize = 200;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::run_in_memory;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(s: &Stream, ann: &Annotation, seed: u64) -> Outcome {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = ResistanceVerifier::new(PrimeField::default(), &mut rng, &s.header).unwrap();
        run_in_memory(&mut v, s, ann).0
    }

    fn graph(n: u64, edges: &[(u64, u64)]) -> Stream {
        let toks = edges.iter().map(|&(u, v)| StreamToken::Edge(u, v)).collect();
        Stream::new(StreamHeader::new(StreamKind::Graph, n, 0), toks)
    }

    fn value(s: &Stream) -> Outcome {
        let ann = prove_resistance(PrimeField::default(), s).unwrap().unwrap();
        run(s, &ann, 7)
    }

    #[test]
    fn small_examples() {
        let rat = |a, b| Outcome::Value(Answer::Rat(Ratio::new(a, b)));
        assert_eq!(value(&graph(2, &[(1, 2)])), rat(1, 1));
        assert_eq!(value(&graph(2, &[(1, 2), (1, 2)])), rat(1, 2));
        assert_eq!(value(&graph(3, &[(1, 2), (2, 3)])), rat(2, 1));
        assert_eq!(value(&graph(3, &[(1, 2), (2, 3), (1, 3)])), rat(2, 3));
    }

    /// Potentials by Gauss-Seidel with unit current from `s` to `t`.
    fn float_resistance(s: &Stream) -> f64 {
        let n = s.header.n as usize;
        let (src, t) = endpoints(&s.header);
        let mut adj = vec![Vec::new(); n + 1];
        for tok in &s.tokens {
            let (u, v, w) = match *tok {
                StreamToken::WeightedEdge(u, v, w) => (u as usize, v as usize, w as f64),
                StreamToken::Edge(u, v) => (u as usize, v as usize, 1.0),
                _ => unreachable!(),
            };
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let mut phi = vec![0.0; n + 1];
        for _ in 0..20000 {
            for u in 1..=n {
                if u == t as usize || adj[u].is_empty() {
                    continue;
                }
                let inj = if u == src as usize { 1.0 } else { 0.0 };
                let (num, den) = adj[u].iter().fold((inj, 0.0), |(a, b), &(v, w)| (a + w * phi[v], b + w));
                phi[u] = num / den;
            }
        }
        phi[src as usize]
    }

    #[test]
    fn random_graphs_match_relaxation() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for trial in 0..25 {
            let n = rng.gen_range(2..=10);
            let m = rng.gen_range(n as usize - 1..=(n * (n - 1) / 2) as usize);
            let s = gen_resistance(&mut rng, n, m, ["0", "1/2", "1"][trial % 3]).unwrap();
            let Outcome::Value(Answer::Rat(r)) = value(&s) else { panic!("rejected honest run") };
            let want = float_resistance(&s);
            let got = *r.numer() as f64 / *r.denom() as f64;
            assert!((got - want).abs() < 1e-6 * want.max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn forged_values_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let f = PrimeField::default();
        for trial in 0..30 {
            let s = gen_resistance(&mut rng, 6, 9, "1/2").unwrap();
            let honest = prove_resistance(f, &s).unwrap().unwrap();
            let mut bad = honest.clone();
            let last = bad.tokens.len() - 1;
            let (a, b) = (bad.tokens[last].int(0).unwrap(), bad.tokens[last].int(1).unwrap());
            bad.tokens[last] = AnnToken::ints(Tag::ResR, &[a + 1, b]);
            assert!(run(&s, &bad, trial).is_bottom());
            let mut bad = honest.clone();
            let k = bad.tokens.iter().position(|t| t.tag == Tag::ResXhat).unwrap() + rng.gen_range(0..5);
            let (j, x) = (bad.tokens[k].int(0).unwrap(), bad.tokens[k].int(1).unwrap());
            bad.tokens[k] = AnnToken::ints(Tag::ResXhat, &[j, (x + 1) % f.modulus() as i64]);
            assert!(run(&s, &bad, trial).is_bottom());
        }
    }

    #[test]
    fn rejects_bad_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let h = StreamHeader::new(StreamKind::Graph, 3, 0).with("s", 2).with("t", 2);
        assert!(ResistanceVerifier::new(PrimeField::default(), &mut rng, &h).is_err());
        let h = StreamHeader::new(StreamKind::Digraph, 3, 0);
        assert!(ResistanceVerifier::new(PrimeField::default(), &mut rng, &h).is_err());
    }
}
