//! LP optimum (`min c^T x` s.t. `Ax <= b`) checked with two product checks
//! instead of replaying the matrix.
//!
//! The helper sends `x = u / D` and `y = w / E` with integer `u`, `w` and
//! common denominators `D, E > 0`. Writing `x' = (u, D)` and `y' = (w, E)`:
//!
//! * the primal product uses `P = [[A, -b], [c^T, 0]]`, so `(P x')_i` is
//!   `D (Ax - b)_i` for `i <= rows` and `D c^T x` for the last row;
//! * the dual product uses `Q = [[A^T, -c], [b^T, 0]]`, so `(Q y')_j` is
//!   `E (A^T y - c)_j` and then `E b^T y`.
//!
//! Every stream entry lands in both banks, so nothing is replayed. The
//! verifier checks primal rows `<= 0`, dual rows `= 0`, `w <= 0`, and equal
//! objectives.
//!
//! Layout: `MV-X j u_j` for `j = 1..=cols` then `MV-X cols+1 D`, the primal
//! rows, `MV-X i w_i` for `i = 1..=rows` then `MV-X rows+1 E`, the dual rows.

use super::lde::Grid;
use super::matvec::{feed_poly_token, split_of, MatvecCore, MatvecProver};
use crate::annotation::{AnnHeader, AnnToken, Annotation, Tag};
use crate::field::{Fe, PrimeField};
use crate::lp::{lp_header, simplex, SparseLp};
use crate::protocol::{ensure, reject, Answer, Outcome, Reason, Reject, Verifier};
use crate::stream::{LpTarget, Stream, StreamHeader, StreamKind, StreamToken};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{Ratio, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

/// Bound on each streamed coefficient (integers only).
pub const ENTRY_BOUND: i64 = 1 << 16;
/// Bound on numerators and common denominators in the certificate.
pub const CERT_BOUND: i64 = 1 << 20;
/// Bound on `rows` and `cols`.
pub const DIM_BOUND: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Primal,
    PrimalRows,
    Dual,
    DualRows,
}

pub struct LpTradeoffVerifier {
    rows: u64,
    cols: u64,
    primal: MatvecCore,
    dual: MatvecCore,
    phase: Phase,
    next: u64,
    denom: (i64, i64),
    objective: (i128, i128),
}

fn dims(header: &StreamHeader) -> Result<(u64, u64), Reject> {
    ensure(header.kind == StreamKind::Lp, Reason::Structure, || "expected an LP stream".into())?;
    let (rows, cols) = header.dims().map_err(|e| Reject::new(Reason::Structure, e.to_string()))?;
    ensure((1..=DIM_BOUND).contains(&rows) && (1..=DIM_BOUND).contains(&cols), Reason::Domain, || {
        format!("dimensions {rows}x{cols} outside [1, {DIM_BOUND}]")
    })?;
    Ok((rows, cols))
}

/// Entries of `P` and `Q` produced by one stream token.
fn placements(tok: &StreamToken, rows: u64, cols: u64) -> Result<[(u64, u64, i64); 2], Reject> {
    let StreamToken::LpEntry { target, i, j, value } = *tok else {
        return reject(Reason::Structure, "expected LP entries");
    };
    ensure(value.is_integer() && value.numer().abs() <= ENTRY_BOUND, Reason::Domain, || {
        format!("coefficient {value} is not an integer of size at most {ENTRY_BOUND}")
    })?;
    let v = *value.numer();
    Ok(match target {
        LpTarget::A => [(i, j, v), (j, i, v)],
        LpTarget::B => [(i, cols + 1, -v), (cols + 1, i, v)],
        LpTarget::C => [(rows + 1, j, v), (j, rows + 1, -v)],
    })
}

impl LpTradeoffVerifier {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        let (rows, cols) = dims(header)?;
        let split = split_of(header);
        Ok(Self {
            rows,
            cols,
            primal: MatvecCore::new(field, rng, rows + 1, cols + 1, split)?,
            dual: MatvecCore::new(field, rng, cols + 1, rows + 1, split)?,
            phase: Phase::Primal,
            next: 0,
            denom: (0, 0),
            objective: (0, 0),
        })
    }

    /// Reads `MV-X k value` for the open vector of length `len + 1`.
    fn entry(&mut self, tok: &AnnToken, len: u64, dual: bool) -> Result<Option<i64>, Reject> {
        tok.expect_len(2)?;
        let k = tok.int(0)? as u64;
        ensure(k == self.next + 1, Reason::Structure, || format!("vector entry {k} out of order"))?;
        self.next = k;
        let (lo, hi) = match (k == len + 1, dual) {
            (true, _) => (1, CERT_BOUND),
            (false, false) => (-CERT_BOUND, CERT_BOUND),
            (false, true) => (-CERT_BOUND, 0),
        };
        let v = tok.int_in(1, lo, hi)?;
        let core = if dual { &mut self.dual } else { &mut self.primal };
        let f = core.field();
        core.vector(k, f.from_i64(v))?;
        Ok((k == len + 1).then_some(v))
    }
}

impl Verifier for LpTradeoffVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        let f = self.primal.field();
        let [(pi, pj, pv), (qi, qj, qv)] = placements(tok, self.rows, self.cols)?;
        self.primal.matrix(pi, pj, f.from_i64(pv))?;
        self.dual.matrix(qi, qj, f.from_i64(qv))
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        match (self.phase, tok.tag) {
            (Phase::Primal, Tag::MvX) => {
                if let Some(d) = self.entry(tok, self.cols, false)? {
                    self.denom.0 = d;
                    self.phase = Phase::PrimalRows;
                }
            }
            (Phase::PrimalRows, Tag::MvPoly | Tag::MvEval) => {
                if let Some((i, v)) = feed_poly_token(&mut self.primal, tok)? {
                    let v = self.primal.field().to_signed(v);
                    if i <= self.rows {
                        ensure(v <= 0, Reason::LocalCheck, || format!("constraint {i} violated"))?;
                    } else {
                        self.objective.0 = v;
                        self.phase = Phase::Dual;
                        self.next = 0;
                    }
                }
            }
            (Phase::Dual, Tag::MvX) => {
                if let Some(e) = self.entry(tok, self.rows, true)? {
                    self.denom.1 = e;
                    self.phase = Phase::DualRows;
                }
            }
            (Phase::DualRows, Tag::MvPoly | Tag::MvEval) => {
                if let Some((j, v)) = feed_poly_token(&mut self.dual, tok)? {
                    let v = self.dual.field().to_signed(v);
                    if j <= self.cols {
                        ensure(v == 0, Reason::LocalCheck, || format!("dual constraint {j} violated"))?;
                    } else {
                        self.objective.1 = v;
                    }
                }
            }
            _ => return reject(Reason::Structure, format!("unexpected {} token", tok.tag.as_str())),
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        ensure(self.phase == Phase::DualRows, Reason::Structure, || "certificate incomplete".into())?;
        self.primal.check()?;
        self.dual.check()?;
        let (cx, by) = self.objective;
        let (d, e) = (self.denom.0 as i128, self.denom.1 as i128);
        ensure(cx * e == by * d, Reason::DualityGap, || format!("c^T x = {cx}/{d} but b^T y = {by}/{e}"))?;
        Ok(Outcome::Value(Answer::Rat(Ratio::new(cx, d))))
    }

    fn words(&self) -> usize {
        self.primal.words() + self.dual.words() + 8
    }
}

/// Integer numerators over the least common denominator, if within
/// [`CERT_BOUND`].
fn common(v: &[simplex::Q]) -> Option<(Vec<i64>, i64)> {
    let lcm = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let nums = v.iter().map(|q| (q * simplex::Q::from_integer(lcm.clone())).to_integer().to_i64());
    let nums: Option<Vec<i64>> = nums.collect();
    let d = lcm.to_i64()?;
    let nums = nums?;
    (d <= CERT_BOUND && nums.iter().all(|u| u.abs() <= CERT_BOUND)).then_some((nums, d))
}

/// Field entries of `P` and `Q` for a stream.
fn operators(field: &PrimeField, s: &Stream, rows: u64, cols: u64) -> Result<[Vec<(u64, u64, Fe)>; 2], Reject> {
    let (mut p, mut q) = (Vec::new(), Vec::new());
    for tok in &s.tokens {
        let [(pi, pj, pv), (qi, qj, qv)] = placements(tok, rows, cols)?;
        p.push((pi, pj, field.from_i64(pv)));
        q.push((qi, qj, field.from_i64(qv)));
    }
    Ok([p, q])
}

/// Annotation for a given certificate `x = u / D`, `y = w / E`.
pub fn tradeoff_annotation(
    field: PrimeField,
    s: &Stream,
    (u, d): (&[i64], i64),
    (w, e): (&[i64], i64),
) -> Result<Annotation, Reject> {
    let (rows, cols) = dims(&s.header)?;
    let split = split_of(&s.header);
    let [p, q] = operators(&field, s, rows, cols)?;
    let xp: Vec<Fe> = u.iter().chain([&d]).map(|&v| field.from_i64(v)).collect();
    let yp: Vec<Fe> = w.iter().chain([&e]).map(|&v| field.from_i64(v)).collect();
    let mut ann = Annotation::new(AnnHeader::new("lp-tradeoff"));
    for (k, &v) in u.iter().chain([&d]).enumerate() {
        ann.push_ints(Tag::MvX, &[k as i64 + 1, v]);
    }
    ann.tokens.extend(MatvecProver::new(field, Grid::new(cols + 1, split), rows + 1, &p, &xp).tokens());
    for (k, &v) in w.iter().chain([&e]).enumerate() {
        ann.push_ints(Tag::MvX, &[k as i64 + 1, v]);
    }
    ann.tokens.extend(MatvecProver::new(field, Grid::new(rows + 1, split), cols + 1, &q, &yp).tokens());
    Ok(ann)
}

/// Honest annotation; `None` without a finite optimum or when the optimal
/// vertex needs denominators beyond [`CERT_BOUND`].
pub fn prove_lp_tradeoff(field: PrimeField, s: &Stream) -> Result<Option<Annotation>, Reject> {
    dims(&s.header)?;
    let lp = SparseLp::from_stream(s).ok_or_else(|| Reject::new(Reason::Structure, "expected an LP stream"))?;
    let (a, b, c) = lp.dense();
    let simplex::LpSolution::Optimal { x, y, .. } = simplex::solve(&a, &b, &c) else { return Ok(None) };
    let (Some(px), Some(py)) = (common(&x), common(&y)) else { return Ok(None) };
    tradeoff_annotation(field, s, (&px.0, px.1), (&py.0, py.1)).map(Some)
}

/// Integer LP with a finite optimum and a small-denominator optimal vertex.
/// `None` if no draw fits the certificate bounds.
pub fn gen_lp_tradeoff<R: Rng + ?Sized>(rng: &mut R, rows: u64, cols: u64, alpha: &str) -> Option<Stream> {
    for _ in 0..200 {
        let Some(lp) = crate::lp::gen_lp(rng, rows, cols) else { continue };
        let mut s = lp.to_stream();
        s.header = lp_header(rows, cols).with("alpha", alpha);
        s.header.m = s.tokens.len() as u64;
        if prove_lp_tradeoff(PrimeField::default(), &s).ok().flatten().is_some() {
            return Some(s);
        }
    }
    None
}

/// Optimum by exact simplex, for reference.
pub fn lp_optimum(s: &Stream) -> Option<Rational64> {
    let lp = SparseLp::from_stream(s)?;
    let (a, b, c) = lp.dense();
    match simplex::solve(&a, &b, &c) {
        simplex::LpSolution::Optimal { value, .. } => {
            let (n, d) = (value.numer().to_i64()?, value.denom().to_i64()?);
            (!d.is_zero()).then(|| Rational64::new(n, d))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::run_in_memory;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(s: &Stream, ann: &Annotation, seed: u64) -> (Outcome, crate::protocol::CostReport) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = LpTradeoffVerifier::new(PrimeField::default(), &mut rng, &s.header).unwrap();
        run_in_memory(&mut v, s, ann)
    }

    fn one_variable(alpha: &str) -> Stream {
        let r = |v| Rational64::from_integer(v);
        let toks = vec![
            StreamToken::LpEntry { target: LpTarget::A, i: 1, j: 1, value: r(-1) },
            StreamToken::LpEntry { target: LpTarget::B, i: 1, j: 0, value: r(-2) },
            StreamToken::LpEntry { target: LpTarget::C, i: 0, j: 1, value: r(3) },
        ];
        Stream::new(lp_header(1, 1).with("alpha", alpha), toks)
    }

    #[test]
    fn one_variable_example() {
        let f = PrimeField::default();
        for alpha in ["0", "1/2", "1"] {
            let s = one_variable(alpha);
            let ann = prove_lp_tradeoff(f, &s).unwrap().unwrap();
            assert_eq!(run(&s, &ann, 1).0, Outcome::Value(Answer::Rat(Ratio::from_integer(6))));
            // x = 3 is feasible but not optimal; no dual certificate matches it.
            let bad = tradeoff_annotation(f, &s, (&[3], 1), (&[-3], 1)).unwrap();
            assert!(run(&s, &bad, 2).0.is_bottom());
            let infeasible = tradeoff_annotation(f, &s, (&[1], 1), (&[-3], 1)).unwrap();
            assert!(run(&s, &infeasible, 3).0.is_bottom());
            let positive_dual = tradeoff_annotation(f, &s, (&[2], 1), (&[3], 1)).unwrap();
            assert!(run(&s, &positive_dual, 4).0.is_bottom());
        }
    }

    #[test]
    fn random_lps_match_the_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let f = PrimeField::default();
        for trial in 0..60 {
            let (rows, cols) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
            let s = gen_lp_tradeoff(&mut rng, rows, cols, ["0", "1/4", "1/2", "3/4"][trial % 4]).unwrap();
            let want = lp_optimum(&s).unwrap();
            let ann = prove_lp_tradeoff(f, &s).unwrap().unwrap();
            let Outcome::Value(Answer::Rat(got)) = run(&s, &ann, trial as u64).0 else { panic!("honest run rejected") };
            assert_eq!(got, Ratio::new(*want.numer() as i128, *want.denom() as i128));
        }
    }

    #[test]
    fn perturbed_rows_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let f = PrimeField::default();
        for trial in 0..40 {
            let s = gen_lp_tradeoff(&mut rng, 4, 5, "1/2").unwrap();
            let mut ann = prove_lp_tradeoff(f, &s).unwrap().unwrap();
            let evals: Vec<usize> = (0..ann.tokens.len()).filter(|&k| ann.tokens[k].tag == Tag::MvEval).collect();
            let k = evals[rng.gen_range(0..evals.len())];
            let v = ann.tokens[k].int(0).unwrap();
            ann.tokens[k] = AnnToken::ints(Tag::MvEval, &[(v + 1) % f.modulus() as i64]);
            assert!(run(&s, &ann, trial).0.is_bottom());
        }
    }

    #[test]
    fn rational_coefficients_refused() {
        let mut s = one_variable("1/2");
        s.tokens[0] = StreamToken::LpEntry { target: LpTarget::A, i: 1, j: 1, value: Rational64::new(1, 2) };
        let ann = Annotation::new(AnnHeader::new("lp-tradeoff"));
        assert!(run(&s, &ann, 0).0.is_bottom());
    }

    #[test]
    fn space_shrinks_with_the_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let s0 = gen_lp_tradeoff(&mut rng, 4, 200, "0").unwrap();
        let f = PrimeField::default();
        let mut costs = Vec::new();
        for alpha in ["0", "1/2"] {
            let mut s = s0.clone();
            s.header = s.header.with("alpha", alpha);
            let ann = prove_lp_tradeoff(f, &s).unwrap().unwrap();
            let (out, cost) = run(&s, &ann, 5);
            assert!(!out.is_bottom());
            costs.push(cost);
        }
        assert!(costs[1].vcost * 3 < costs[0].vcost, "{costs:?}");
    }
}
