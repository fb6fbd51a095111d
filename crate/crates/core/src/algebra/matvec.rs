//! Matrix-vector products with a space/annotation tradeoff.
//!
//! The `b x c` matrix streams in with the vector. Each column index lives on
//! an `h x v` grid. The verifier keeps, per grid column `y`, the fingerprint
//! `sum_i alpha^i f_i(r, y)` of the matrix rows and the vector extension
//! `f_x(r, y)`: `2v` field elements. The helper sends, for every row `i`, the
//! polynomial `s_i(z) = sum_y f_i(z, y) f_x(z, y)` by its values at
//! `z = 1..=2h-1`; `(Ax)_i` is `s_i(1) + ... + s_i(h)`. The verifier accepts
//! when `sum_y bank_y * f_x(r, y) == sum_i alpha^i s_i(r)`.
//!
//! Layout: `MV-POLY i` then `2h - 1` tokens `MV-EVAL s_i(z)`, for every row.

use super::lde::{chi, ChiTable, Grid, StreamingInterp};
use crate::annotation::{AnnHeader, AnnToken, Num, Tag};
use crate::field::{Fe, PrimeField};
use crate::protocol::{ensure, reject, Answer, Outcome, Reason, Reject, Verifier};
use crate::stream::{Stream, StreamHeader, StreamKind, StreamToken};
use rand::seq::SliceRandom;
use rand::Rng;

/// Column split exponent from the stream header (`alpha`, default `1/2`).
pub fn split_of(header: &StreamHeader) -> f64 {
    header.get_ratio("alpha").map_or(0.5, |r| *r.numer() as f64 / *r.denom() as f64)
}

/// Verifier state shared by every protocol built on the product check.
#[derive(Debug, Clone)]
pub struct MatvecCore {
    field: PrimeField,
    grid: Grid,
    rows: u64,
    cols: u64,
    r: Fe,
    alpha: Fe,
    bank: Vec<Fe>,
    vector: Vec<Fe>,
    fp_out: Fe,
    interp: StreamingInterp,
    row: u64,
    head: Fe,
}

impl MatvecCore {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, rows: u64, cols: u64, split: f64) -> Result<Self, Reject> {
        ensure(rows >= 1 && cols >= 1, Reason::Domain, || "empty matrix".into())?;
        let grid = Grid::new(cols, split);
        ensure(2 * grid.h + 1 < field.modulus(), Reason::Domain, || "grid too large for the field".into())?;
        let r = field.random_at_least(rng, 2 * grid.h + 1);
        let alpha = field.random_nonzero(rng);
        Ok(Self {
            field,
            grid,
            rows,
            cols,
            r,
            alpha,
            bank: vec![0; grid.v as usize],
            vector: vec![0; grid.v as usize],
            fp_out: 0,
            interp: StreamingInterp::new(field, r, grid.points()),
            row: 0,
            head: 0,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    fn index(&self, j: u64, bound: u64, what: &str) -> Result<(), Reject> {
        ensure((1..=bound).contains(&j), Reason::Domain, || format!("{what} {j} outside [1, {bound}]"))
    }

    /// Matrix entry `A_ij += a`.
    pub fn matrix(&mut self, i: u64, j: u64, a: Fe) -> Result<(), Reject> {
        self.index(i, self.rows, "row")?;
        self.index(j, self.cols, "column")?;
        let f = &self.field;
        let (x, y) = self.grid.cell(j);
        let w = f.mul(f.mul(a, chi(f, self.grid.h, x, self.r)), f.pow(self.alpha, i));
        self.bank[y as usize - 1] = f.add(self.bank[y as usize - 1], w);
        Ok(())
    }

    /// Vector entry `x_j += value`.
    pub fn vector(&mut self, j: u64, value: Fe) -> Result<(), Reject> {
        self.index(j, self.cols, "index")?;
        let f = &self.field;
        let (x, y) = self.grid.cell(j);
        let w = f.mul(value, chi(f, self.grid.h, x, self.r));
        self.vector[y as usize - 1] = f.add(self.vector[y as usize - 1], w);
        Ok(())
    }

    /// Starts row `i`; rows must come in order `1..=rows`.
    pub fn begin_row(&mut self, i: u64) -> Result<(), Reject> {
        ensure(self.row == 0 || self.interp.count() == self.grid.points(), Reason::Structure, || "previous row incomplete".into())?;
        ensure(i == self.row + 1 && i <= self.rows, Reason::Structure, || format!("row {i} after row {}", self.row))?;
        self.row = i;
        self.head = 0;
        self.interp.reset();
        Ok(())
    }

    /// Next evaluation of the open row. Returns `(Ax)_i` when the row is
    /// complete.
    pub fn eval(&mut self, value: Fe) -> Result<Option<Fe>, Reject> {
        ensure(self.row > 0, Reason::Structure, || "evaluation before any row".into())?;
        let d = self.grid.points();
        ensure(self.interp.count() < d, Reason::Structure, || format!("row {} has more than {d} values", self.row))?;
        ensure(value < self.field.modulus(), Reason::Domain, || "value outside the field".into())?;
        if self.interp.count() < self.grid.h {
            self.head = self.field.add(self.head, value);
        }
        self.interp.push(value);
        if self.interp.count() < d {
            return Ok(None);
        }
        let f = &self.field;
        self.fp_out = f.add(self.fp_out, f.mul(f.pow(self.alpha, self.row), self.interp.value()));
        Ok(Some(self.head))
    }

    /// Whether every row has been fully received.
    pub fn complete(&self) -> bool {
        self.row == self.rows && self.interp.count() == self.grid.points()
    }

    /// The product identity.
    pub fn check(&self) -> Result<(), Reject> {
        ensure(self.complete(), Reason::Structure, || format!("{} of {} rows", self.row, self.rows))?;
        let f = &self.field;
        let lhs = self.bank.iter().zip(&self.vector).fold(0, |acc, (&a, &x)| f.mul_add(a, x, acc));
        ensure(lhs == self.fp_out, Reason::PolyMismatch, || "row polynomials disagree with the stream".into())
    }

    pub fn words(&self) -> usize {
        2 * self.grid.v as usize + StreamingInterp::WORDS + 8
    }
}

/// Honest row polynomials.
pub struct MatvecProver {
    field: PrimeField,
    grid: Grid,
    chi: ChiTable,
    /// Row `i - 1` holds `(x, y, a)` entries.
    by_row: Vec<Vec<(u64, u64, Fe)>>,
    /// `f_x(z, y)` for `z = h+1..=2h-1`, indexed `[y - 1][z - h - 1]`.
    ext: Vec<Vec<Fe>>,
    /// The vector on the grid, indexed `[y - 1][x - 1]`.
    grid_x: Vec<Vec<Fe>>,
}

impl MatvecProver {
    pub fn new(field: PrimeField, grid: Grid, rows: u64, entries: &[(u64, u64, Fe)], x: &[Fe]) -> Self {
        let f = &field;
        let d = grid.points();
        let chi = ChiTable::new(field, grid.h, d);
        let mut by_row = vec![Vec::new(); rows as usize];
        for &(i, j, a) in entries {
            let (cx, cy) = grid.cell(j);
            by_row[i as usize - 1].push((cx, cy, a));
        }
        let mut grid_x = vec![vec![0; grid.h as usize]; grid.v as usize];
        for (j, &xj) in x.iter().enumerate() {
            let (cx, cy) = grid.cell(j as u64 + 1);
            grid_x[cy as usize - 1][cx as usize - 1] = f.add(grid_x[cy as usize - 1][cx as usize - 1], xj);
        }
        let ext = grid_x
            .iter()
            .map(|col| {
                (grid.h + 1..=d)
                    .map(|z| col.iter().enumerate().fold(0, |acc, (k, &xv)| f.mul_add(xv, chi.at(k as u64 + 1, z), acc)))
                    .collect()
            })
            .collect();
        Self { field, grid, chi, by_row, ext, grid_x }
    }

    /// Values `s_i(1), ..., s_i(2h-1)`.
    pub fn row_values(&self, i: u64) -> Vec<Fe> {
        let f = &self.field;
        let h = self.grid.h;
        let mut out = vec![0; self.grid.points() as usize];
        for &(x, y, a) in &self.by_row[i as usize - 1] {
            let col = &self.grid_x[y as usize - 1];
            out[x as usize - 1] = f.mul_add(a, col[x as usize - 1], out[x as usize - 1]);
            for z in h + 1..=self.grid.points() {
                let k = (z - 1) as usize;
                let term = f.mul(f.mul(a, self.chi.at(x, z)), self.ext[y as usize - 1][(z - h - 1) as usize]);
                out[k] = f.add(out[k], term);
            }
        }
        out
    }

    /// Annotation tokens for rows `1..=rows`, produced lazily.
    pub fn tokens(&self) -> impl Iterator<Item = AnnToken> + '_ {
        (1..=self.by_row.len() as u64).flat_map(move |i| {
            std::iter::once(AnnToken::ints(Tag::MvPoly, &[i as i64]))
                .chain(self.row_values(i).into_iter().map(|v| AnnToken::new(Tag::MvEval, vec![Num::Int(v as i64)])))
        })
    }
}

/// Reads one `MV-POLY` / `MV-EVAL` token into `core`. Returns the finished
/// row's `(i, (Ax)_i)` when a row completes.
pub fn feed_poly_token(core: &mut MatvecCore, tok: &AnnToken) -> Result<Option<(u64, Fe)>, Reject> {
    match tok.tag {
        Tag::MvPoly => {
            tok.expect_len(1)?;
            core.begin_row(tok.int_in(0, 1, core.rows() as i64)? as u64)?;
            Ok(None)
        }
        Tag::MvEval => {
            tok.expect_len(1)?;
            let v = tok.int_in(0, 0, i64::MAX)? as u64;
            Ok(core.eval(v)?.map(|out| (core.row, out)))
        }
        _ => reject(Reason::Structure, format!("unexpected {} token", tok.tag.as_str())),
    }
}

pub fn annotation_header(protocol: &str) -> AnnHeader {
    AnnHeader::new(protocol)
}

/// Outputs `Ax` for a matrix stream (entries `M i j a`, `V j x`).
pub struct MatvecVerifier {
    core: MatvecCore,
    out: Vec<i128>,
}

impl MatvecVerifier {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        let (b, c) = header.dims().map_err(|e| Reject::new(Reason::Structure, e.to_string()))?;
        Ok(Self { core: MatvecCore::new(field, rng, b, c, split_of(header))?, out: Vec::new() })
    }
}

impl Verifier for MatvecVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        let f = self.core.field();
        match *tok {
            StreamToken::MatEntry(i, j, a) => self.core.matrix(i, j, f.from_i64(a)),
            StreamToken::VecEntry(j, x) => self.core.vector(j, f.from_i64(x)),
            _ => reject(Reason::Structure, "matvec expects a matrix stream"),
        }
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        if let Some((_, v)) = feed_poly_token(&mut self.core, tok)? {
            self.out.push(self.core.field().to_signed(v));
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        self.core.check()?;
        Ok(Outcome::Value(Answer::Ints(std::mem::take(&mut self.out))))
    }

    fn words(&self) -> usize {
        self.core.words()
    }
}

/// Matrix and vector entries of a matrix stream, reduced into the field.
pub fn split_stream(field: &PrimeField, tokens: &[StreamToken], cols: u64) -> (Vec<(u64, u64, Fe)>, Vec<Fe>) {
    let mut entries = Vec::new();
    let mut x = vec![0; cols as usize];
    for t in tokens {
        match *t {
            StreamToken::MatEntry(i, j, a) => entries.push((i, j, field.from_i64(a))),
            StreamToken::VecEntry(j, v) => x[j as usize - 1] = field.add(x[j as usize - 1], field.from_i64(v)),
            _ => {}
        }
    }
    (entries, x)
}

/// Honest annotation tokens for a matrix stream.
pub fn prove_matvec(field: PrimeField, header: &StreamHeader, tokens: &[StreamToken]) -> Result<MatvecProver, Reject> {
    let (b, c) = header.dims().map_err(|e| Reject::new(Reason::Structure, e.to_string()))?;
    let (entries, x) = split_stream(&field, tokens, c);
    Ok(MatvecProver::new(field, Grid::new(c, split_of(header)), b, &entries, &x))
}

/// Random `b x c` matrix with `per_row` nonzero entries per row (positions
/// may repeat and then add up) and a dense vector, entries in `[-9, 9]`.
pub fn gen_matvec<R: Rng + ?Sized>(rng: &mut R, b: u64, c: u64, per_row: usize, alpha: &str) -> Stream {
    let mut tokens = Vec::new();
    for i in 1..=b {
        for _ in 0..per_row {
            let a = rng.gen_range(-9..=9);
            if a != 0 {
                tokens.push(StreamToken::MatEntry(i, rng.gen_range(1..=c), a));
            }
        }
    }
    for j in 1..=c {
        tokens.push(StreamToken::VecEntry(j, rng.gen_range(-9..=9)));
    }
    tokens.shuffle(rng);
    let header = StreamHeader::new(StreamKind::Matrix, 0, 0).with("b", b).with("c", c).with("alpha", alpha);
    Stream::new(header, tokens)
}

/// Exact `Ax` over the integers.
pub fn matvec_product(s: &Stream) -> Option<Vec<i128>> {
    let (b, c) = s.header.dims().ok()?;
    let mut x = vec![0i128; c as usize];
    for t in &s.tokens {
        if let StreamToken::VecEntry(j, v) = *t {
            x[j as usize - 1] += v as i128;
        }
    }
    let mut out = vec![0i128; b as usize];
    for t in &s.tokens {
        if let StreamToken::MatEntry(i, j, a) = *t {
            out[i as usize - 1] += a as i128 * x[j as usize - 1];
        }
    }
    Some(out)
}
