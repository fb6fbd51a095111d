//! Adversarial harness: mutate an honest annotation and count how often the
//! verifier rejects, each trial with fresh verifier randomness.

use crate::annotation::{AnnToken, Annotation, Num, Tag};
use crate::field::PrimeField;
use crate::graph::{bfs_dist, Graph};
use crate::lp::SparseLp;
use crate::registry::ProtocolKind;
use crate::stream::Stream;
use num_rational::Ratio;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutationKind {
    DropToken,
    DuplicateToken,
    PerturbValue,
    SwapAdjacent,
    Relabel,
    WrongAnswer,
}

impl MutationKind {
    pub const ALL: [MutationKind; 6] = [
        MutationKind::DropToken,
        MutationKind::DuplicateToken,
        MutationKind::PerturbValue,
        MutationKind::SwapAdjacent,
        MutationKind::Relabel,
        MutationKind::WrongAnswer,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MutationKind::DropToken => "drop-token",
            MutationKind::DuplicateToken => "duplicate-token",
            MutationKind::PerturbValue => "perturb-value",
            MutationKind::SwapAdjacent => "swap-adjacent",
            MutationKind::Relabel => "relabel",
            MutationKind::WrongAnswer => "wrong-answer",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MutationKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown mutation {s:?}"))
    }
}

/// One concrete mutation: which token, which argument, by how much.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mutation {
    pub kind: MutationKind,
    pub position: usize,
    pub arg: usize,
    pub magnitude: i64,
}

/// Argument positions holding node ids or row/column indices.
fn index_args(tok: &AnnToken) -> &'static [usize] {
    match tok.tag {
        Tag::NodeRow | Tag::MatchVm | Tag::MatchVs | Tag::LpX | Tag::LpRow | Tag::LpA | Tag::LpDualY => &[0],
        Tag::LpDualRow | Tag::LpAt | Tag::MvPoly | Tag::EigX | Tag::ResXhat | Tag::MemEpilogue | Tag::DfsPrologue => &[0],
        Tag::EdgeRow | Tag::DagCycle | Tag::DagRest | Tag::MatchM | Tag::MatchRest | Tag::PowZeroCell => &[0, 1],
        Tag::SimLoad | Tag::SimGuess | Tag::BfsEdge | Tag::OddWalk | Tag::OddRest => &[0, 1],
        Tag::BfsLevel => &[1],
        Tag::MemRow => &[2],
        Tag::DfsRow => match tok.args.first() {
            Some(Num::Int(0)) => &[1, 2],
            Some(Num::Int(1)) => &[1],
            Some(Num::Int(2)) => &[1, 3],
            _ => &[],
        },
        _ => &[],
    }
}

/// Tags whose tokens form a multiset: reordering two of them is harmless.
fn order_free(protocol: ProtocolKind, a: &AnnToken, b: &AnnToken) -> bool {
    if a.tag != b.tag {
        return false;
    }
    let same_arg = |k: usize| a.args.get(k) == b.args.get(k);
    match a.tag {
        Tag::EdgeRow | Tag::DagRest | Tag::MatchRest | Tag::OddRest | Tag::MatchM | Tag::MatchVm | Tag::MatchVs => true,
        Tag::BfsEdge | Tag::BfsLevel => true,
        Tag::LpA | Tag::LpAt => true,
        Tag::SimLoad => same_arg(0),
        Tag::SimGuess => same_arg(2),
        // The two arcs of a 2-cycle in either order are the same closed walk.
        Tag::DagCycle => protocol != ProtocolKind::Dag || (a.args.len() == 2 && a.args[0] == b.args[1] && a.args[1] == b.args[0]),
        // Two scans of non-tree edges under the same stack top.
        Tag::DfsRow => a.args.first() == Some(&Num::Int(0)) && b.args.first() == Some(&Num::Int(0)),
        _ => false,
    }
}

/// An LP variable or dual value that appears in no constraint and has a
/// zero coefficient: any value of the right sign certifies the same optimum.
fn unconstrained(tok: &AnnToken) -> bool {
    matches!(tok.tag, Tag::LpX | Tag::LpDualY)
        && tok.args.get(3) == Some(&Num::Int(0))
        && tok.args.get(1).is_some_and(|c| c.as_ratio() == 0.into())
}

/// The power step applied to `B^1`, where squaring and multiplying by `B`
/// produce the same matrix.
fn square_equals_multiply(toks: &[AnnToken]) -> Option<usize> {
    let mut e = 0u64;
    for (i, t) in toks.iter().enumerate().filter(|(_, t)| t.tag == Tag::PowLevel) {
        if e == 1 {
            return Some(i);
        }
        e = if t.args.first() == Some(&Num::Int(0)) { 2 * e } else { e + 1 };
    }
    None
}

fn bump(x: &mut Num, by: i64) {
    match x {
        Num::Int(v) => *v = v.wrapping_add(by),
        Num::Rat(r) => *r += by,
    }
}

fn signed_magnitude<R: Rng + ?Sized>(rng: &mut R) -> i64 {
    let m = rng.gen_range(1..=3);
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Token positions and the argument a wrong-answer mutation targets.
fn answer_sites(protocol: ProtocolKind, ann: &Annotation) -> Vec<(usize, usize)> {
    let toks = &ann.tokens;
    let all = |tag: Tag, arg: usize| -> Vec<(usize, usize)> {
        (0..toks.len()).filter(|&i| toks[i].tag == tag && toks[i].args.len() > arg).map(|i| (i, arg)).collect()
    };
    match protocol {
        ProtocolKind::Labels | ProtocolKind::Eigen => Vec::new(),
        ProtocolKind::Dag => vec![(0, usize::MAX)],
        ProtocolKind::Matching | ProtocolKind::Diameter | ProtocolKind::Bipartite => all(Tag::Claim, 0),
        // A variable with zero cost does not move the optimum.
        ProtocolKind::Lp | ProtocolKind::Tum(_) => all(Tag::LpX, 2)
            .into_iter()
            .filter(|&(i, _)| toks[i].args.get(1).is_some_and(|c| c.as_ratio() != 0.into()))
            .collect(),
        ProtocolKind::LpTradeoff => {
            let first_block = toks.iter().position(|t| t.tag != Tag::MvX).unwrap_or(0);
            (0..first_block).map(|i| (i, 1)).collect()
        }
        ProtocolKind::Matvec => all(Tag::MvEval, 0),
        ProtocolKind::Resistance => all(Tag::ResR, 0),
        ProtocolKind::Sim(_) => {
            let Some(halt) = toks.iter().position(|t| t.tag == Tag::SimHalt) else { return Vec::new() };
            let outputs = match toks[halt].args.first() {
                Some(Num::Int(k)) => *k as usize,
                _ => 1,
            };
            let reads: Vec<usize> = (0..halt)
                .rev()
                .filter(|&i| toks[i].tag == Tag::MemRow && toks[i].args.get(1) == Some(&Num::Int(0)))
                .take(outputs.max(1))
                .collect();
            reads.into_iter().map(|i| (i, 3)).collect()
        }
        ProtocolKind::Bfs => all(Tag::NodeRow, 1),
        ProtocolKind::Dfs => (0..toks.len())
            .filter(|&i| toks[i].tag == Tag::DfsRow && toks[i].args.first() == Some(&Num::Int(1)))
            .map(|i| (i, 1))
            .collect(),
    }
}

fn max_index(ann: &Annotation) -> i64 {
    let mut best = 2;
    for t in &ann.tokens {
        for &k in index_args(t) {
            if let Some(Num::Int(v)) = t.args.get(k) {
                best = best.max(*v);
            }
        }
    }
    best
}

/// Applies a random mutation of `kind`. `None` when the annotation offers no
/// position where the mutation changes its meaning.
pub fn mutate<R: Rng + ?Sized>(
    protocol: ProtocolKind,
    kind: MutationKind,
    ann: &Annotation,
    rng: &mut R,
) -> Option<(Mutation, Annotation)> {
    let toks = &ann.tokens;
    let mut out = ann.clone();
    let mut m = Mutation { kind, position: 0, arg: 0, magnitude: 0 };
    match kind {
        MutationKind::DropToken | MutationKind::DuplicateToken => {
            if toks.is_empty() {
                return None;
            }
            m.position = rng.gen_range(0..toks.len());
            if kind == MutationKind::DropToken {
                out.tokens.remove(m.position);
            } else {
                out.tokens.insert(m.position, toks[m.position].clone());
            }
        }
        MutationKind::PerturbValue => {
            let same_step = square_equals_multiply(toks);
            let sites: Vec<(usize, usize)> = (0..toks.len())
                .filter(|&i| !unconstrained(&toks[i]) && Some(i) != same_step)
                .flat_map(|i| (0..toks[i].args.len()).map(move |k| (i, k)))
                .collect();
            (m.position, m.arg) = *sites.choose(rng)?;
            m.magnitude = signed_magnitude(rng);
            bump(&mut out.tokens[m.position].args[m.arg], m.magnitude);
        }
        MutationKind::SwapAdjacent => {
            let sites: Vec<usize> = (0..toks.len().saturating_sub(1))
                .filter(|&i| toks[i] != toks[i + 1] && !order_free(protocol, &toks[i], &toks[i + 1]))
                .collect();
            m.position = *sites.choose(rng)?;
            out.tokens.swap(m.position, m.position + 1);
        }
        MutationKind::Relabel => {
            let sites: Vec<(usize, usize)> =
                (0..toks.len()).flat_map(|i| index_args(&toks[i]).iter().filter(move |&&k| k < toks[i].args.len()).map(move |&k| (i, k))).collect();
            (m.position, m.arg) = *sites.choose(rng)?;
            let Num::Int(old) = toks[m.position].args[m.arg] else { return None };
            let hi = max_index(ann);
            let mut new = rng.gen_range(1..=hi - 1);
            if new >= old {
                new += 1;
            }
            m.magnitude = new - old;
            out.tokens[m.position].args[m.arg] = Num::Int(new);
        }
        MutationKind::WrongAnswer => {
            let sites = answer_sites(protocol, ann);
            (m.position, m.arg) = *sites.choose(rng)?;
            if m.arg == usize::MAX {
                let tok = &mut out.tokens[m.position];
                tok.tag = if tok.tag == Tag::DagTopo { Tag::DagCycle } else { Tag::DagTopo };
            } else if protocol == ProtocolKind::Bipartite {
                let Num::Int(c) = toks[m.position].args[0] else { return None };
                out.tokens[m.position].args[0] = Num::Int(1 - c);
            } else {
                m.magnitude = match protocol {
                    ProtocolKind::Matching | ProtocolKind::Diameter | ProtocolKind::Bfs => 1,
                    _ => signed_magnitude(rng),
                };
                if protocol == ProtocolKind::Dfs {
                    let Num::Int(old) = toks[m.position].args[1] else { return None };
                    let hi = max_index(ann);
                    let new = if old < hi { old + 1 } else { 1 };
                    m.magnitude = new - old;
                }
                bump(&mut out.tokens[m.position].args[m.arg], m.magnitude);
            }
        }
    }
    Some((m, out))
}

/// Rejection counts for one mutation kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackRow {
    pub kind: MutationKind,
    pub trials: usize,
    pub rejected: usize,
}

impl AttackRow {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            1.0
        } else {
            self.rejected as f64 / self.trials as f64
        }
    }
}

/// A mutation that leaves another valid certificate for the same answer:
/// a diameter zero-cell witness moved onto another cell that is zero in
/// `B^(l-1)`, or tradeoff-LP vectors that still form an optimal primal-dual
/// pair.
fn equivalent_witness(protocol: ProtocolKind, stream: &Stream, honest: &Annotation, bad: &Annotation) -> bool {
    if honest.tokens.len() != bad.tokens.len() {
        return false;
    }
    let changed: Vec<usize> = (0..bad.tokens.len()).filter(|&i| honest.tokens[i] != bad.tokens[i]).collect();
    let [i] = changed[..] else { return false };
    let tok = &bad.tokens[i];
    match (protocol, tok.tag, &tok.args[..]) {
        (ProtocolKind::Diameter, Tag::PowZeroCell, [Num::Int(a), Num::Int(b)]) => {
            let Some(g) = Graph::from_stream(stream) else { return false };
            let Some(Num::Int(l)) = honest.tokens.iter().find(|t| t.tag == Tag::Claim).and_then(|t| t.args.first()) else {
                return false;
            };
            let in_range = |x: i64| x >= 1 && x as u64 <= g.n;
            in_range(*a) && in_range(*b) && bfs_dist(&g, *a as u64)[*b as usize].is_none_or(|d| d as i64 >= *l)
        }
        (ProtocolKind::LpTradeoff, Tag::MvX, [j, ..]) if honest.tokens[i].args.first() == Some(j) => SparseLp::from_stream(stream).is_some_and(|lp| optimal_pair(&lp, bad)),
        _ => false,
    }
}

/// Whether the two `MV-X` blocks of a tradeoff-LP annotation decode to
/// `x = u / D`, `y = w / E` with `D, E > 0`, `Ax <= b`, `A^T y = c`, `y <= 0`
/// and `c x = b y`.
fn optimal_pair(lp: &SparseLp, ann: &Annotation) -> bool {
    let wide = |r: &num_rational::Rational64| Ratio::new(*r.numer() as i128, *r.denom() as i128);
    let blocks: Vec<Vec<Ratio<i128>>> = ann
        .tokens
        .chunk_by(|a, b| (a.tag == Tag::MvX) == (b.tag == Tag::MvX))
        .filter(|run| run[0].tag == Tag::MvX)
        .map(|run| run.iter().filter_map(|t| t.args.get(1)).map(|v| wide(&v.as_ratio())).collect())
        .collect();
    let [u, w] = &blocks[..] else { return false };
    let (rows, cols) = (lp.rows as usize, lp.cols as usize);
    if u.len() != cols + 1 || w.len() != rows + 1 || u[cols] <= Ratio::zero() || w[rows] <= Ratio::zero() {
        return false;
    }
    let x: Vec<Ratio<i128>> = u[..cols].iter().map(|v| v / u[cols]).collect();
    let y: Vec<Ratio<i128>> = w[..rows].iter().map(|v| v / w[rows]).collect();
    let mut ax = vec![Ratio::zero(); rows];
    let mut aty = vec![Ratio::zero(); cols];
    for (&(i, j), a) in &lp.a {
        let (i, j) = (i as usize - 1, j as usize - 1);
        ax[i] += wide(a) * x[j];
        aty[j] += wide(a) * y[i];
    }
    let primal = (0..rows).all(|i| ax[i] <= wide(&lp.b[i]));
    let dual = (0..cols).all(|j| aty[j] == wide(&lp.c[j])) && y.iter().all(|v| *v <= Ratio::zero());
    let cx: Ratio<i128> = (0..cols).map(|j| wide(&lp.c[j]) * x[j]).sum();
    let by: Ratio<i128> = (0..rows).map(|i| wide(&lp.b[i]) * y[i]).sum();
    primal && dual && cx == by
}

/// Mutates `honest` `trials` times per kind and runs each result under a
/// fresh verifier seed. Mutations that leave a valid certificate are redrawn
/// a few times and otherwise skipped, so `trials` counts only real attacks.
/// Kinds with no applicable position are left out.
pub fn attack(
    protocol: ProtocolKind,
    field: PrimeField,
    stream: &Stream,
    honest: &Annotation,
    kinds: &[MutationKind],
    trials: usize,
    seed: u64,
) -> Vec<AttackRow> {
    const REDRAWS: usize = 16;
    kinds
        .iter()
        .filter_map(|&kind| {
            let outcomes: Vec<bool> = (0..trials)
                .into_par_iter()
                .filter_map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((kind as u64) << 48) ^ t as u64);
                    for _ in 0..REDRAWS {
                        let (_, bad) = mutate(protocol, kind, honest, &mut rng)?;
                        if !equivalent_witness(protocol, stream, honest, &bad) {
                            return Some(protocol.run(field, rng.gen(), stream, &bad).0.is_bottom());
                        }
                    }
                    None
                })
                .collect();
            (!outcomes.is_empty()).then(|| AttackRow {
                kind,
                trials: outcomes.len(),
                rejected: outcomes.iter().filter(|&&r| r).count(),
            })
        })
        .collect()
}
