//! Linear programs `min c^T x` subject to `A x <= b`, `x` free.
//!
//! The helper sends a primal solution and, row by row, each constraint with
//! its entries annotated by the matching `x_j`. Then a dual `y <= 0` and,
//! column by column, the transposed entries annotated by `y_i`. The verifier
//! checks every row `<= b_i`, every column `== c_j`, equal objectives, and
//! that both replays of `A`, `b`, `c` match the stream.
//!
//! Layout: `LP-X j c_j x_j cnt_j` for every column; `LP-ROW i b_i` followed
//! by `LP-A j a_ij x_j` for every row; `LP-DUAL-Y i b_i y_i cnt_i` for every
//! row; `LP-DUAL-ROW j c_j` followed by `LP-AT i a_ij y_i` for every column.
//! `cnt` is the number of times the value is repeated in the entry rows.

pub mod simplex;
pub mod tum;

use crate::annotation::{AnnHeader, AnnToken, Annotation, Num, Tag};
use crate::field::PrimeField;
use crate::fingerprint::{DomainEncoder, Fingerprint, TupleFingerprint, FINGERPRINT_WORDS};
use crate::protocol::{ensure, reject, Answer, Outcome, Reason, Reject, Verifier};
use crate::stream::{LpTarget, Stream, StreamHeader, StreamKind, StreamToken};
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio, Rational64};
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use std::collections::BTreeMap;

/// Bound on numerators and denominators of every value the verifier
/// fingerprints, so that distinct values have distinct field images.
pub const VALUE_BOUND: i64 = 1 << 30;

/// An LP with duplicate entries summed and zero entries dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLp {
    pub rows: u64,
    pub cols: u64,
    pub a: BTreeMap<(u64, u64), Rational64>,
    pub b: Vec<Rational64>,
    pub c: Vec<Rational64>,
}

impl SparseLp {
    pub fn new(rows: u64, cols: u64) -> Self {
        Self {
            rows,
            cols,
            a: BTreeMap::new(),
            b: vec![Rational64::zero(); rows as usize],
            c: vec![Rational64::zero(); cols as usize],
        }
    }

    pub fn add(&mut self, tok: &StreamToken) {
        if let StreamToken::LpEntry { target, i, j, value } = *tok {
            match target {
                LpTarget::A => {
                    let e = self.a.entry((i, j)).or_insert_with(Rational64::zero);
                    *e += value;
                    if e.is_zero() {
                        self.a.remove(&(i, j));
                    }
                }
                LpTarget::B => self.b[i as usize - 1] += value,
                LpTarget::C => self.c[j as usize - 1] += value,
            }
        }
    }

    pub fn from_stream(s: &Stream) -> Option<Self> {
        if s.header.kind != StreamKind::Lp {
            return None;
        }
        let (rows, cols) = s.header.dims().ok()?;
        let mut lp = Self::new(rows, cols);
        for t in &s.tokens {
            lp.add(t);
        }
        Some(lp)
    }

    pub fn to_stream(&self) -> Stream {
        let header = lp_header(self.rows, self.cols);
        let mut tokens = Vec::new();
        for (&(i, j), &value) in &self.a {
            tokens.push(StreamToken::LpEntry { target: LpTarget::A, i, j, value });
        }
        for (k, &value) in self.b.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            tokens.push(StreamToken::LpEntry { target: LpTarget::B, i: k as u64 + 1, j: 0, value });
        }
        for (k, &value) in self.c.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            tokens.push(StreamToken::LpEntry { target: LpTarget::C, i: 0, j: k as u64 + 1, value });
        }
        Stream::new(header, tokens)
    }

    pub fn dense(&self) -> (Vec<Vec<BigRational>>, Vec<BigRational>, Vec<BigRational>) {
        let mut a = vec![vec![BigRational::zero(); self.cols as usize]; self.rows as usize];
        for (&(i, j), v) in &self.a {
            a[i as usize - 1][j as usize - 1] = big(v);
        }
        (a, self.b.iter().map(big).collect(), self.c.iter().map(big).collect())
    }

    /// Objective `c^T x` exactly.
    pub fn objective(&self, x: &[Rational64]) -> BigRational {
        self.c.iter().zip(x).fold(BigRational::zero(), |acc, (c, x)| acc + big(c) * big(x))
    }
}

pub fn lp_header(rows: u64, cols: u64) -> StreamHeader {
    StreamHeader::new(StreamKind::Lp, 0, 0).with("b", rows).with("c", cols)
}

pub fn big(r: &Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Narrows to a bounded `Rational64`, or `None` if out of range.
pub fn small(r: &BigRational) -> Option<Rational64> {
    let (n, d) = (r.numer().to_i64()?, r.denom().to_i64()?);
    (n.abs() <= VALUE_BOUND && d <= VALUE_BOUND).then(|| Rational64::new(n, d))
}

fn bounded(r: Rational64) -> Result<Rational64, Reject> {
    ensure(r.numer().abs() <= VALUE_BOUND && *r.denom() <= VALUE_BOUND, Reason::Domain, || {
        format!("value {r} exceeds the bound {VALUE_BOUND}")
    })?;
    Ok(r)
}

fn num(r: Rational64) -> Num {
    if *r.denom() == 1 {
        Num::Int(*r.numer())
    } else {
        Num::Rat(r)
    }
}

/// Certificate for `lp` from a primal `x` and dual `y`. `None` if a value
/// exceeds [`VALUE_BOUND`].
pub fn lp_annotation(protocol: &str, lp: &SparseLp, x: &[Rational64], y: &[Rational64]) -> Option<Annotation> {
    let within = |r: &Rational64| r.numer().abs() <= VALUE_BOUND && *r.denom() <= VALUE_BOUND;
    if !x.iter().chain(y).chain(&lp.b).chain(&lp.c).chain(lp.a.values()).all(within) {
        return None;
    }
    let mut col_count = vec![0i64; lp.cols as usize];
    let mut row_count = vec![0i64; lp.rows as usize];
    let mut by_col: Vec<Vec<(u64, Rational64)>> = vec![Vec::new(); lp.cols as usize];
    for (&(i, j), &a) in &lp.a {
        col_count[j as usize - 1] += 1;
        row_count[i as usize - 1] += 1;
        by_col[j as usize - 1].push((i, a));
    }
    let mut ann = Annotation::new(AnnHeader::new(protocol));
    let tok = |tag, args: Vec<Num>| AnnToken::new(tag, args);
    for j in 0..lp.cols as usize {
        ann.push(tok(Tag::LpX, vec![Num::Int(j as i64 + 1), num(lp.c[j]), num(x[j]), Num::Int(col_count[j])]));
    }
    let mut entries = lp.a.iter().peekable();
    for i in 1..=lp.rows {
        ann.push(tok(Tag::LpRow, vec![Num::Int(i as i64), num(lp.b[i as usize - 1])]));
        while let Some((&(_, j), &a)) = entries.next_if(|e| e.0 .0 == i) {
            ann.push(tok(Tag::LpA, vec![Num::Int(j as i64), num(a), num(x[j as usize - 1])]));
        }
    }
    for i in 0..lp.rows as usize {
        ann.push(tok(Tag::LpDualY, vec![Num::Int(i as i64 + 1), num(lp.b[i]), num(y[i]), Num::Int(row_count[i])]));
    }
    for (j, col) in by_col.iter().enumerate() {
        ann.push(tok(Tag::LpDualRow, vec![Num::Int(j as i64 + 1), num(lp.c[j])]));
        for &(i, a) in col {
            ann.push(tok(Tag::LpAt, vec![Num::Int(i as i64), num(a), num(y[i as usize - 1])]));
        }
    }
    Some(ann)
}

/// Honest prover for a general LP via exact simplex. `None` unless the LP
/// has a finite optimum whose certificate fits the value bound.
pub fn prove_lp(lp: &SparseLp) -> Option<Annotation> {
    let (a, b, c) = lp.dense();
    match simplex::solve(&a, &b, &c) {
        simplex::LpSolution::Optimal { x, y, .. } => {
            let x: Option<Vec<_>> = x.iter().map(small).collect();
            let y: Option<Vec<_>> = y.iter().map(small).collect();
            lp_annotation("lp", lp, &x?, &y?)
        }
        _ => None,
    }
}

/// Random LP with a finite optimum: `b` is built around a feasible point and
/// `c` from a nonpositive dual, then checked by the simplex. `None` if no
/// draw has a certificate within the value bound.
pub fn gen_lp<R: Rng + ?Sized>(rng: &mut R, rows: u64, cols: u64) -> Option<SparseLp> {
    for _ in 0..200 {
        let mut lp = SparseLp::new(rows, cols);
        for i in 1..=rows {
            for j in 1..=cols {
                if rng.gen_bool(0.6) {
                    let v = rng.gen_range(-3i64..=3);
                    if v != 0 {
                        lp.a.insert((i, j), Rational64::from_integer(v));
                    }
                }
            }
        }
        let x0: Vec<i64> = (0..cols).map(|_| rng.gen_range(-3..=3)).collect();
        let y0: Vec<i64> = (0..rows).map(|_| rng.gen_range(-3..=0)).collect();
        for i in 0..rows as usize {
            lp.b[i] = Rational64::from_integer(rng.gen_range(0..=3));
        }
        for (&(i, j), a) in &lp.a {
            lp.b[i as usize - 1] += a * x0[j as usize - 1];
            lp.c[j as usize - 1] += a * y0[i as usize - 1];
        }
        if prove_lp(&lp).is_some() {
            return Some(lp);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Phase {
    Primal,
    Rows,
    DualValues,
    Columns,
}

const ANSWER_SLOT: usize = 2;

/// Verifier for the LP certificate. Outputs the optimum.
#[derive(Debug, Clone)]
pub struct LpVerifier {
    rows: u64,
    cols: u64,
    cells: DomainEncoder,
    a: [Fingerprint; 3],
    b: [Fingerprint; 3],
    c: [Fingerprint; 3],
    x_listed: TupleFingerprint<3>,
    x_used: TupleFingerprint<3>,
    y_listed: TupleFingerprint<3>,
    y_used: TupleFingerprint<3>,
    phase: Phase,
    index: u64,
    open: Option<BigRational>,
    bound: BigRational,
    primal: BigRational,
    dual: BigRational,
}

impl LpVerifier {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        let (rows, cols) = header.dims().map_err(|e| Reject::new(Reason::Structure, e.to_string()))?;
        Self::with_dims(field, rng, rows, cols)
    }

    pub fn with_dims<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, rows: u64, cols: u64) -> Result<Self, Reject> {
        ensure(rows >= 1 && cols >= 1, Reason::Domain, || "empty LP".into())?;
        let cells = DomainEncoder::IndexedTuple { bounds: vec![rows, cols] };
        let q = cells.domain().ok_or_else(|| Reject::new(Reason::Domain, "LP too large"))?;
        let fp = |rng: &mut R, q| -> Result<[Fingerprint; 3], Reject> {
            let f = Fingerprint::new(field, field.random_nonzero(rng), q)?;
            Ok([f; 3])
        };
        let x_listed = TupleFingerprint::random(field, rng);
        let y_listed = TupleFingerprint::random(field, rng);
        Ok(Self {
            rows,
            cols,
            cells,
            a: fp(rng, q)?,
            b: fp(rng, rows)?,
            c: fp(rng, cols)?,
            x_used: x_listed.empty_like(),
            x_listed,
            y_used: y_listed.empty_like(),
            y_listed,
            phase: Phase::Primal,
            index: 0,
            open: None,
            bound: BigRational::zero(),
            primal: BigRational::zero(),
            dual: BigRational::zero(),
        })
    }

    fn fe(&self, r: Rational64) -> u64 {
        let f = self.a[0].field();
        f.from_ratio(*r.numer() as i128, *r.denom() as i128).expect("bounded denominator is nonzero")
    }

    fn value_item(k: u64, r: Rational64) -> [u64; 3] {
        [k, (r.numer() + VALUE_BOUND) as u64, *r.denom() as u64]
    }

    /// One entry of the (reduced) LP stream.
    pub fn stream_entry(&mut self, target: LpTarget, i: u64, j: u64, value: Rational64) -> Result<(), Reject> {
        let value = bounded(value)?;
        let fe = self.fe(value);
        match target {
            LpTarget::A => {
                let key = self.cells.encode(&[i, j])?;
                self.a[0].update_fe(key, fe)?;
            }
            LpTarget::B => self.b[0].update_fe(i, fe)?,
            LpTarget::C => self.c[0].update_fe(j, fe)?,
        }
        Ok(())
    }

    fn close_open(&mut self) -> Result<(), Reject> {
        if let Some(sum) = self.open.take() {
            match self.phase {
                Phase::Rows => ensure(sum <= self.bound, Reason::LocalCheck, || {
                    format!("row {} has A x = {sum} > {}", self.index, self.bound)
                })?,
                _ => ensure(sum == self.bound, Reason::LocalCheck, || {
                    format!("column {} has A^T y = {sum} != {}", self.index, self.bound)
                })?,
            }
        }
        Ok(())
    }

    fn enter(&mut self, phase: Phase) -> Result<(), Reject> {
        if self.phase == phase {
            return Ok(());
        }
        ensure(self.phase < phase, Reason::Structure, || format!("{phase:?} section after {:?}", self.phase))?;
        self.close_open()?;
        let expected = match self.phase {
            Phase::Primal | Phase::Columns => self.cols,
            Phase::Rows | Phase::DualValues => self.rows,
        };
        ensure(self.index == expected, Reason::Structure, || {
            format!("{:?} section has {} of {expected} rows", self.phase, self.index)
        })?;
        ensure(phase as u8 == self.phase as u8 + 1, Reason::Structure, || format!("{phase:?} section out of order"))?;
        self.phase = phase;
        self.index = 0;
        Ok(())
    }

    /// Next index of a complete, increasing listing.
    fn next_index(&mut self, tok: &AnnToken, limit: u64) -> Result<u64, Reject> {
        let k = tok.int_in(0, 1, limit as i64)? as u64;
        ensure(k == self.index + 1, Reason::Structure, || format!("index {k} after {}", self.index))?;
        self.index = k;
        Ok(k)
    }

    fn count(tok: &AnnToken, k: usize) -> Result<i64, Reject> {
        tok.int_in(k, 0, VALUE_BOUND)
    }

    fn value(tok: &AnnToken, k: usize) -> Result<Rational64, Reject> {
        bounded(tok.ratio(k)?)
    }

    pub fn words_static() -> usize {
        9 * FINGERPRINT_WORDS + 4 * 4 + 4
    }
}

fn rat_words(r: &BigRational) -> usize {
    let w = |b: u64| (b as usize).div_ceil(64).max(1);
    w(r.numer().bits()) + w(r.denom().bits())
}

fn to_answer(r: &BigRational) -> Result<Answer, Reject> {
    match (r.numer().to_i128(), r.denom().to_i128()) {
        (Some(n), Some(d)) => Ok(Answer::Rat(Ratio::new(n, d))),
        _ => reject(Reason::Domain, "optimum does not fit the output range"),
    }
}

impl Verifier for LpVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        match *tok {
            StreamToken::LpEntry { target, i, j, value } => self.stream_entry(target, i, j, value),
            _ => reject(Reason::Structure, "lp expects an LP stream"),
        }
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        match tok.tag {
            Tag::LpX => {
                self.enter(Phase::Primal)?;
                tok.expect_len(4)?;
                let j = self.next_index(tok, self.cols)?;
                let (c, x, cnt) = (Self::value(tok, 1)?, Self::value(tok, ANSWER_SLOT)?, Self::count(tok, 3)?);
                let fe = self.fe(c);
                self.c[1].update_fe(j, fe)?;
                self.x_listed.update(Self::value_item(j, x), cnt);
                self.primal += big(&c) * big(&x);
            }
            Tag::LpRow => {
                self.enter(Phase::Rows)?;
                tok.expect_len(2)?;
                self.close_open()?;
                let i = self.next_index(tok, self.rows)?;
                let b = Self::value(tok, 1)?;
                let fe = self.fe(b);
                self.b[1].update_fe(i, fe)?;
                self.bound = big(&b);
                self.open = Some(BigRational::zero());
            }
            Tag::LpA if self.phase == Phase::Rows && self.open.is_some() => {
                tok.expect_len(3)?;
                let j = tok.int_in(0, 1, self.cols as i64)? as u64;
                let (a, x) = (Self::value(tok, 1)?, Self::value(tok, 2)?);
                let key = self.cells.encode(&[self.index, j])?;
                let fe = self.fe(a);
                self.a[1].update_fe(key, fe)?;
                self.x_used.update(Self::value_item(j, x), 1);
                *self.open.as_mut().expect("row is open") += big(&a) * big(&x);
            }
            Tag::LpDualY => {
                self.enter(Phase::DualValues)?;
                tok.expect_len(4)?;
                let i = self.next_index(tok, self.rows)?;
                let (b, y, cnt) = (Self::value(tok, 1)?, Self::value(tok, 2)?, Self::count(tok, 3)?);
                ensure(!y.is_positive(), Reason::LocalCheck, || format!("dual y_{i} = {y} is positive"))?;
                let fe = self.fe(b);
                self.b[2].update_fe(i, fe)?;
                self.y_listed.update(Self::value_item(i, y), cnt);
                self.dual += big(&b) * big(&y);
            }
            Tag::LpDualRow => {
                self.enter(Phase::Columns)?;
                tok.expect_len(2)?;
                self.close_open()?;
                let j = self.next_index(tok, self.cols)?;
                let c = Self::value(tok, 1)?;
                let fe = self.fe(c);
                self.c[2].update_fe(j, fe)?;
                self.bound = big(&c);
                self.open = Some(BigRational::zero());
            }
            Tag::LpAt if self.phase == Phase::Columns && self.open.is_some() => {
                tok.expect_len(3)?;
                let i = tok.int_in(0, 1, self.rows as i64)? as u64;
                let (a, y) = (Self::value(tok, 1)?, Self::value(tok, 2)?);
                let key = self.cells.encode(&[i, self.index])?;
                let fe = self.fe(a);
                self.a[2].update_fe(key, fe)?;
                self.y_used.update(Self::value_item(i, y), 1);
                *self.open.as_mut().expect("column is open") += big(&a) * big(&y);
            }
            _ => return reject(Reason::Structure, format!("unexpected {} token", tok.tag.as_str())),
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        ensure(self.phase == Phase::Columns, Reason::Structure, || "certificate is incomplete".into())?;
        self.close_open()?;
        ensure(self.index == self.cols, Reason::Structure, || format!("{} of {} dual columns", self.index, self.cols))?;
        for (name, fps) in [("A", &self.a), ("b", &self.b), ("c", &self.c)] {
            for (pass, fp) in fps[1..].iter().enumerate() {
                ensure(fp.acc() == fps[0].acc(), Reason::StreamMismatch, || {
                    format!("{name} replay {} differs from the stream", pass + 1)
                })?;
            }
        }
        ensure(self.x_listed.acc() == self.x_used.acc(), Reason::LocalCheck, || "inconsistent x values".into())?;
        ensure(self.y_listed.acc() == self.y_used.acc(), Reason::LocalCheck, || "inconsistent y values".into())?;
        ensure(self.primal == self.dual, Reason::DualityGap, || format!("c^T x = {} but b^T y = {}", self.primal, self.dual))?;
        Ok(Outcome::Value(to_answer(&self.primal)?))
    }

    fn words(&self) -> usize {
        let open = self.open.as_ref().map_or(0, rat_words);
        Self::words_static() + rat_words(&self.bound) + rat_words(&self.primal) + rat_words(&self.dual) + open
    }
}
