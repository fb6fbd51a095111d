//! Every protocol behind one tag: instance generation, honest proving,
//! verifier construction and a reference answer computed without the
//! annotation.

use crate::algebra::{diameter, eigen, lp_tradeoff, matvec, resistance};
use crate::annotation::Annotation;
use crate::dag::{prove_dag, DagVerifier};
use crate::field::PrimeField;
use crate::graph::{self, Graph};
use crate::labels::{prove_labels, LabelsVerifier};
use crate::lp::simplex::{self, LpSolution};
use crate::lp::tum::{prove_tum, reduce, TumParams, TumProblem, TumVerifier};
use crate::lp::{gen_lp, prove_lp, LpVerifier, SparseLp};
use crate::matching::{prove_matching, MatchingVerifier};
use crate::protocol::{run_in_memory, Answer, CostReport, Outcome, Reason, Reject, Verifier};
use crate::simulate::{prove_program, Program, SimVerifier, INF};
use crate::stream::{Stream, StreamHeader};
use crate::traversal::{dfs::prove_dfs, dfs::DfsVerifier, prove_bfs, prove_bipartite, source_of, BfsVerifier, BipartiteVerifier};
use num_rational::{BigRational, Ratio};
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolKind {
    Labels,
    Dag,
    Matching,
    Lp,
    Tum(TumProblemKey),
    Matvec,
    LpTradeoff,
    Eigen,
    Resistance,
    Diameter,
    Sim(ProgramKey),
    Bfs,
    Dfs,
    Bipartite,
}

/// Orderable stand-ins so the kind can be sorted and hashed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TumProblemKey {
    ShortestPath,
    MaxFlow,
    MinCut,
    Mwbpm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProgramKey {
    Count,
    Mst,
    Sssp,
    Apsp,
}

impl TumProblemKey {
    pub fn problem(self) -> TumProblem {
        match self {
            TumProblemKey::ShortestPath => TumProblem::ShortestPath,
            TumProblemKey::MaxFlow => TumProblem::MaxFlow,
            TumProblemKey::MinCut => TumProblem::MinCut,
            TumProblemKey::Mwbpm => TumProblem::Matching,
        }
    }
}

impl ProgramKey {
    pub fn program(self) -> Program {
        match self {
            ProgramKey::Count => Program::Count,
            ProgramKey::Mst => Program::Mst,
            ProgramKey::Sssp => Program::Sssp,
            ProgramKey::Apsp => Program::Apsp,
        }
    }
}

/// Size knobs for instance generation. Graph protocols read `n` and `m`,
/// matrix and LP protocols read `b`, `c` and `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n: u64,
    pub m: Option<u64>,
    pub b: u64,
    pub c: u64,
    pub alpha: String,
}

impl Default for GenParams {
    fn default() -> Self {
        Self { n: 8, m: None, b: 4, c: 4, alpha: "1/2".into() }
    }
}

/// Rejected generation parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

const WEIGHT_MAX: u64 = 9;
const SAMPLE_LIMIT: usize = 10_000;

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 20] = [
        ProtocolKind::Labels,
        ProtocolKind::Dag,
        ProtocolKind::Matching,
        ProtocolKind::Lp,
        ProtocolKind::Tum(TumProblemKey::ShortestPath),
        ProtocolKind::Tum(TumProblemKey::MaxFlow),
        ProtocolKind::Tum(TumProblemKey::MinCut),
        ProtocolKind::Tum(TumProblemKey::Mwbpm),
        ProtocolKind::Matvec,
        ProtocolKind::LpTradeoff,
        ProtocolKind::Eigen,
        ProtocolKind::Resistance,
        ProtocolKind::Diameter,
        ProtocolKind::Sim(ProgramKey::Count),
        ProtocolKind::Sim(ProgramKey::Mst),
        ProtocolKind::Sim(ProgramKey::Sssp),
        ProtocolKind::Sim(ProgramKey::Apsp),
        ProtocolKind::Bfs,
        ProtocolKind::Dfs,
        ProtocolKind::Bipartite,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::Labels => "labels",
            ProtocolKind::Dag => "dag",
            ProtocolKind::Matching => "matching",
            ProtocolKind::Lp => "lp",
            ProtocolKind::Tum(t) => t.problem().name(),
            ProtocolKind::Matvec => "matvec",
            ProtocolKind::LpTradeoff => "lp-tradeoff",
            ProtocolKind::Eigen => "eigen",
            ProtocolKind::Resistance => "resistance",
            ProtocolKind::Diameter => "diameter",
            ProtocolKind::Sim(p) => p.program().name(),
            ProtocolKind::Bfs => "bfs",
            ProtocolKind::Dfs => "dfs",
            ProtocolKind::Bipartite => "bipartite",
        }
    }

    /// Whether the instance size is given by `b` and `c` rather than `n`.
    pub fn sized_by_dims(&self) -> bool {
        matches!(self, ProtocolKind::Lp | ProtocolKind::Matvec | ProtocolKind::LpTradeoff)
    }

    /// Successful runs end in `Accept` rather than a value.
    pub fn accepts_only(&self) -> bool {
        matches!(self, ProtocolKind::Labels | ProtocolKind::Eigen)
    }

    fn default_m(&self, n: u64) -> u64 {
        let max = n * n.saturating_sub(1) / 2;
        match self {
            ProtocolKind::Tum(TumProblemKey::Mwbpm) => (n / 2 + n).min(n / 2 * (n / 2)),
            _ => (2 * n).min(max).max(n.saturating_sub(1)),
        }
    }

    fn graph_size(&self, p: &GenParams) -> Result<(u64, usize), UsageError> {
        let n = p.n;
        if n == 0 {
            return usage(format!("{} needs n >= 1", self.name()));
        }
        let m = p.m.unwrap_or_else(|| self.default_m(n));
        if m > n * n {
            return usage(format!("m = {m} exceeds n^2 = {}", n * n));
        }
        Ok((n, m as usize))
    }

    /// Random instance. Deterministic in `rng`.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R, p: &GenParams) -> Result<Stream, UsageError> {
        if self.sized_by_dims() {
            if p.b == 0 || p.c == 0 {
                return usage("b and c must be positive");
            }
            let s = match self {
                ProtocolKind::Lp => gen_lp(rng, p.b, p.c).map(|lp| lp.to_stream()),
                ProtocolKind::Matvec => Some(matvec::gen_matvec(rng, p.b, p.c, 4, &p.alpha)),
                _ => lp_tradeoff::gen_lp_tradeoff(rng, p.b, p.c, &p.alpha),
            };
            return s.ok_or_else(|| UsageError(format!("{}: no instance within the value bounds at this size", self.name())));
        }
        let (n, m) = self.graph_size(p)?;
        let simple = |directed: bool| if directed { n * (n - 1) } else { n * (n - 1) / 2 };
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { usage(format!("{}: {what}", self.name())) };
        let connected = |rng: &mut R| {
            need(m as u64 + 1 >= n && m as u64 <= simple(false), "need n - 1 <= m <= n(n-1)/2")?;
            Ok(graph::connected_gnm(rng, n, m).expect("size checked"))
        };
        let plain = |rng: &mut R, directed: bool| {
            need(m as u64 <= simple(directed), "too many edges for a simple graph")?;
            Ok(graph::gnm(rng, n, m, directed).expect("size checked"))
        };
        let g: Graph = match self {
            ProtocolKind::Labels | ProtocolKind::Matching | ProtocolKind::Bipartite => {
                let split = *self == ProtocolKind::Bipartite && rng.gen_bool(0.5);
                match split.then(|| random_bipartite(rng, n, m)).flatten() {
                    Some(g) => g,
                    None => plain(rng, false)?,
                }
            }
            ProtocolKind::Dag => {
                need(n >= 2 && m as u64 <= simple(false), "need n >= 2 and m <= n(n-1)/2")?;
                let cyclic = m >= 2 && rng.gen_bool(0.5);
                graph::random_dag(rng, n, m, cyclic).expect("size checked")
            }
            ProtocolKind::Tum(t) => return self.generate_tum(rng, *t, n, m),
            ProtocolKind::Eigen => return Ok(eigen::gen_eigen(rng, n, &p.alpha)),
            ProtocolKind::Resistance => {
                need(n >= 2, "need n >= 2")?;
                connected(rng)?;
                return resistance::gen_resistance(rng, n, m, &p.alpha)
                    .ok_or_else(|| UsageError("resistance: no instance within the ratio bound at this size".into()));
            }
            ProtocolKind::Diameter | ProtocolKind::Bfs | ProtocolKind::Dfs => connected(rng)?,
            ProtocolKind::Sim(ProgramKey::Count) => plain(rng, false)?,
            ProtocolKind::Sim(ProgramKey::Mst) => {
                let g = connected(rng)?;
                graph::with_weights(rng, g, 1, WEIGHT_MAX)
            }
            ProtocolKind::Sim(_) => {
                let g = plain(rng, true)?;
                graph::with_weights(rng, g, 1, WEIGHT_MAX)
            }
            _ => unreachable!("sized by dims"),
        };
        Ok(g.to_stream())
    }

    fn generate_tum<R: Rng + ?Sized>(&self, rng: &mut R, t: TumProblemKey, n: u64, m: usize) -> Result<Stream, UsageError> {
        if n < 2 {
            return usage(format!("{} needs n >= 2", self.name()));
        }
        for _ in 0..SAMPLE_LIMIT {
            let g = match t {
                TumProblemKey::Mwbpm => {
                    if n % 2 == 1 || (m as u64) < n / 2 || m as u64 > (n / 2) * (n / 2) {
                        return usage("mwbpm needs even n and n/2 <= m <= n^2/4");
                    }
                    perfect_bipartite(rng, n, m)
                }
                _ => {
                    if m as u64 > n * (n - 1) {
                        return usage("too many edges for a simple digraph");
                    }
                    graph::gnm(rng, n, m, true).expect("size checked")
                }
            };
            let g = graph::with_weights(rng, g, 1, WEIGHT_MAX);
            let params = TumParams { s: 1, t: n, left: n / 2 };
            if prove_tum(t.problem(), &g, params).is_some() {
                return Ok(g.to_stream());
            }
        }
        usage(format!("{}: no instance with a finite optimum found", self.name()))
    }

    /// Honest annotation, or `None` when the instance has no certificate.
    pub fn prove(&self, field: PrimeField, s: &Stream) -> Option<Annotation> {
        let g = || Graph::from_stream(s);
        match self {
            ProtocolKind::Labels => {
                let g = g()?;
                let labels = graph::components(&g);
                Some(prove_labels(&g, &labels, g.n))
            }
            ProtocolKind::Dag => Some(prove_dag(&g()?)),
            ProtocolKind::Matching => Some(prove_matching(&g()?)),
            ProtocolKind::Lp => prove_lp(&SparseLp::from_stream(s)?),
            ProtocolKind::Tum(t) => prove_tum(t.problem(), &g()?, TumParams::from_header(&s.header)),
            ProtocolKind::Matvec => {
                let p = matvec::prove_matvec(field, &s.header, &s.tokens).ok()?;
                let mut ann = Annotation::new(matvec::annotation_header("matvec"));
                ann.tokens.extend(p.tokens());
                Some(ann)
            }
            ProtocolKind::LpTradeoff => lp_tradeoff::prove_lp_tradeoff(field, s).ok()?,
            ProtocolKind::Eigen => eigen::prove_eigen(field, s).ok()?,
            ProtocolKind::Resistance => resistance::prove_resistance(field, s).ok()?,
            ProtocolKind::Diameter => diameter::prove_diameter(field, s).ok()?,
            ProtocolKind::Sim(p) => prove_program(p.program(), s),
            ProtocolKind::Bfs => prove_bfs(&g()?, source_of(&s.header)),
            ProtocolKind::Dfs => prove_dfs(&g()?, source_of(&s.header)),
            ProtocolKind::Bipartite => Some(prove_bipartite(&g()?)),
        }
    }

    /// Verifier with randomness drawn from `rng`.
    pub fn verifier<R: Rng + ?Sized>(
        &self,
        field: PrimeField,
        rng: &mut R,
        header: &StreamHeader,
    ) -> Result<Box<dyn Verifier>, Reject> {
        Ok(match self {
            ProtocolKind::Labels => Box::new(LabelsVerifier::new(field, rng, header)?),
            ProtocolKind::Dag => Box::new(DagVerifier::new(field, rng, header)?),
            ProtocolKind::Matching => Box::new(MatchingVerifier::new(field, rng, header)?),
            ProtocolKind::Lp => Box::new(LpVerifier::new(field, rng, header)?),
            ProtocolKind::Tum(t) => Box::new(TumVerifier::new(t.problem(), field, rng, header)?),
            ProtocolKind::Matvec => Box::new(matvec::MatvecVerifier::new(field, rng, header)?),
            ProtocolKind::LpTradeoff => Box::new(lp_tradeoff::LpTradeoffVerifier::new(field, rng, header)?),
            ProtocolKind::Eigen => Box::new(eigen::EigenVerifier::new(field, rng, header)?),
            ProtocolKind::Resistance => Box::new(resistance::ResistanceVerifier::new(field, rng, header)?),
            ProtocolKind::Diameter => Box::new(diameter::DiameterVerifier::new(field, rng, header)?),
            ProtocolKind::Sim(p) => Box::new(SimVerifier::new(p.program(), field, rng, header)?),
            ProtocolKind::Bfs => Box::new(BfsVerifier::new(field, rng, header)?),
            ProtocolKind::Dfs => Box::new(DfsVerifier::new(field, rng, header)?),
            ProtocolKind::Bipartite => Box::new(BipartiteVerifier::new(field, rng, header)?),
        })
    }

    /// Runs the verifier seeded by `seed`. An annotation for another
    /// protocol is rejected before any token is read.
    pub fn run(&self, field: PrimeField, seed: u64, s: &Stream, ann: &Annotation) -> (Outcome, CostReport) {
        let bottom = |r: Reject| (Outcome::Bottom(r), CostReport { m: s.tokens.len() as u64, ..Default::default() });
        if ann.header.protocol != self.name() {
            return bottom(Reject::new(
                Reason::ProtocolMismatch,
                format!("annotation is for {:?}, expected {}", ann.header.protocol, self.name()),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self.verifier(field, &mut rng, &s.header) {
            Ok(mut v) => run_in_memory(v.as_mut(), s, ann),
            Err(r) => bottom(r),
        }
    }

    /// Expected outcome computed directly from the stream, or `None` when
    /// the instance has no valid certificate.
    pub fn oracle(&self, s: &Stream) -> Option<Outcome> {
        let g = || Graph::from_stream(s);
        let int = |v: u64| Some(Outcome::Value(Answer::Int(v as i128)));
        let ints = |v: Vec<u64>| Some(Outcome::Value(Answer::Ints(v.into_iter().map(|x| x as i128).collect())));
        match self {
            ProtocolKind::Labels => Some(Outcome::Accept),
            ProtocolKind::Dag => int(graph::topo_or_cycle(&g()?).is_ok() as u64),
            ProtocolKind::Matching => {
                let g = g()?;
                let mut adj = vec![Vec::new(); g.n as usize];
                for &(u, v, _) in &g.edges {
                    let (u, v) = (u as usize - 1, v as usize - 1);
                    if u != v {
                        adj[u].push(v);
                        adj[v].push(u);
                    }
                }
                let mate = crate::matching::blossom::maximum_matching(&adj);
                int(mate.iter().filter(|m| m.is_some()).count() as u64 / 2)
            }
            ProtocolKind::Lp => lp_value(&SparseLp::from_stream(s)?, Answer::Rat),
            ProtocolKind::Tum(t) => {
                let g = g()?;
                let lp = SparseLp::from_stream(&reduce(t.problem(), &g, TumParams::from_header(&s.header)))?;
                lp_value(&lp, |r| {
                    let neg = if t.problem() == TumProblem::MaxFlow { -r } else { r };
                    if neg.is_integer() {
                        Answer::Int(*neg.numer())
                    } else {
                        Answer::Rat(neg)
                    }
                })
            }
            ProtocolKind::Matvec => Some(Outcome::Value(Answer::Ints(matvec::matvec_product(s)?))),
            ProtocolKind::LpTradeoff => {
                let r = lp_tradeoff::lp_optimum(s)?;
                Some(Outcome::Value(Answer::Rat(Ratio::new(*r.numer() as i128, *r.denom() as i128))))
            }
            ProtocolKind::Eigen => eigen::eigenvector(s).ok()?.map(|_| Outcome::Accept),
            ProtocolKind::Resistance => {
                let r = resistance::resistance(s).ok()??;
                Some(Outcome::Value(Answer::Rat(Ratio::new(r.numer().to_i128()?, r.denom().to_i128()?))))
            }
            ProtocolKind::Diameter => int(graph::diameter(&g()?)?),
            ProtocolKind::Sim(ProgramKey::Count) => int(s.tokens.len() as u64),
            ProtocolKind::Sim(ProgramKey::Mst) => {
                let g = g()?;
                let comps = graph::components(&g);
                let connected = comps.iter().skip(1).all(|&c| c == comps[1]);
                connected.then(|| Outcome::Value(Answer::Int(graph::mst_weight(&g) as i128)))
            }
            ProtocolKind::Sim(ProgramKey::Sssp) => {
                let src = source_of(&s.header);
                ints(graph::dijkstra(&g()?, src).into_iter().skip(1).map(|d| d.unwrap_or(INF)).collect())
            }
            ProtocolKind::Sim(ProgramKey::Apsp) => ints(graph::floyd_warshall(&g()?).into_iter().map(|d| d.unwrap_or(INF)).collect()),
            ProtocolKind::Bfs => {
                let d = graph::bfs_dist(&g()?, source_of(&s.header));
                ints(d.into_iter().skip(1).collect::<Option<Vec<u64>>>()?)
            }
            ProtocolKind::Dfs => ints(dfs_preorder(&g()?, source_of(&s.header))?),
            ProtocolKind::Bipartite => int(graph::is_bipartite(&g()?) as u64),
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UsageError(format!("unknown protocol {s:?}")))
    }
}

fn lp_value(lp: &SparseLp, wrap: impl Fn(Ratio<i128>) -> Answer) -> Option<Outcome> {
    let (a, b, c) = lp.dense();
    match simplex::solve(&a, &b, &c) {
        LpSolution::Optimal { value, .. } => {
            let value: BigRational = value;
            let (n, d) = (value.numer().to_i128()?, value.denom().to_i128()?);
            Some(Outcome::Value(wrap(Ratio::new(n, d))))
        }
        _ => None,
    }
}

/// Preorder of a recursive DFS that tries lower-id neighbors first.
fn dfs_preorder(g: &Graph, s: u64) -> Option<Vec<u64>> {
    let n = g.n as usize;
    let mut adj = vec![Vec::new(); n + 1];
    for &(u, v, _) in &g.edges {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
    }
    fn visit(u: u64, adj: &[Vec<u64>], seen: &mut [bool], out: &mut Vec<u64>) {
        seen[u as usize] = true;
        out.push(u);
        for &v in &adj[u as usize] {
            if !seen[v as usize] {
                visit(v, adj, seen, out);
            }
        }
    }
    let mut seen = vec![false; n + 1];
    let mut out = Vec::with_capacity(n);
    visit(s, &adj, &mut seen, &mut out);
    (out.len() == n).then_some(out)
}

/// Random bipartite graph on sides `1..=n/2` and the rest.
fn random_bipartite<R: Rng + ?Sized>(rng: &mut R, n: u64, m: usize) -> Option<Graph> {
    let left = n / 2;
    let mut all: Vec<(u64, u64)> = (1..=left).flat_map(|u| (left + 1..=n).map(move |v| (u, v))).collect();
    if m > all.len() {
        return None;
    }
    all.shuffle(rng);
    let mut pairs: Vec<(u64, u64)> = all.into_iter().take(m).collect();
    // Hide the bipartition behind a random relabeling.
    let mut perm: Vec<u64> = (1..=n).collect();
    perm.shuffle(rng);
    for e in pairs.iter_mut() {
        *e = (perm[e.0 as usize - 1], perm[e.1 as usize - 1]);
    }
    Some(Graph::from_pairs(n, false, &pairs))
}

/// Bipartite graph (left side `1..=n/2`) containing a random perfect
/// matching plus random extra crossing edges.
fn perfect_bipartite<R: Rng + ?Sized>(rng: &mut R, n: u64, m: usize) -> Graph {
    let left = n / 2;
    let mut right: Vec<u64> = (left + 1..=n).collect();
    right.shuffle(rng);
    let mut pairs: Vec<(u64, u64)> = (1..=left).zip(right.iter().copied()).collect();
    let mut rest: Vec<(u64, u64)> = (1..=left)
        .flat_map(|u| (left + 1..=n).map(move |v| (u, v)))
        .filter(|e| !pairs.contains(e))
        .collect();
    rest.shuffle(rng);
    pairs.extend(rest.into_iter().take(m - left as usize));
    pairs.shuffle(rng);
    Graph::from_pairs(n, false, &pairs)
}
