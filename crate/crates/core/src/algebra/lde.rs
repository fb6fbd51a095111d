//! Grid layout and Lagrange helpers for low-degree extensions in one
//! variable over the nodes `1..=h`.

use crate::field::{Fe, PrimeField};

/// A length-`c` vector viewed as an `h x v` array with `h * v >= c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub h: u64,
    pub v: u64,
}

impl Grid {
    /// `h = round(c^split)` clamped to `[1, c]`, `v = ceil(c / h)`.
    pub fn new(c: u64, split: f64) -> Self {
        let c = c.max(1);
        let h = ((c as f64).powf(split).round() as u64).clamp(1, c);
        Self { h, v: c.div_ceil(h) }
    }

    /// Index `j` (1-based) to cell `(x, y)` in `[1, h] x [1, v]`.
    pub fn cell(&self, j: u64) -> (u64, u64) {
        (j.div_ceil(self.v), (j - 1) % self.v + 1)
    }

    /// Number of evaluation points of a row polynomial, `2h - 1`.
    pub fn points(&self) -> u64 {
        2 * self.h - 1
    }
}

/// `chi_x(r)`: the Lagrange basis polynomial over nodes `1..=h` that is 1 at
/// `x`, evaluated at `r`. O(h) time, O(1) words.
pub fn chi(f: &PrimeField, h: u64, x: u64, r: Fe) -> Fe {
    let (mut num, mut den) = (1, 1);
    for k in (1..=h).filter(|&k| k != x) {
        num = f.mul(num, f.sub(r, f.from_u64(k)));
        den = f.mul(den, f.from_i64(x as i64 - k as i64));
    }
    f.div(num, den).expect("distinct nodes")
}

/// Evaluates at a fixed `r` a polynomial given by its values at `1..=d`,
/// one value at a time, holding a constant number of field elements.
#[derive(Debug, Clone)]
pub struct StreamingInterp {
    field: PrimeField,
    r: Fe,
    d: u64,
    first: Fe,
    k: u64,
    basis: (Fe, Fe),
    sum: (Fe, Fe),
}

impl StreamingInterp {
    /// `r` must lie outside `[1, d]`.
    pub fn new(field: PrimeField, r: Fe, d: u64) -> Self {
        let first = chi(&field, d, 1, r);
        Self { field, r, d, first, k: 0, basis: (first, 1), sum: (0, 1) }
    }

    pub fn reset(&mut self) {
        self.k = 0;
        self.basis = (self.first, 1);
        self.sum = (0, 1);
    }

    pub fn count(&self) -> u64 {
        self.k
    }

    /// Feeds the value at the next point `k + 1`.
    pub fn push(&mut self, value: Fe) {
        let f = &self.field;
        if self.k > 0 {
            // L_{k+1} = L_k * (r - k) * -(d - k) / ((r - k - 1) * k)
            let k = self.k;
            let (n, d) = self.basis;
            let n = f.mul(n, f.mul(f.sub(self.r, f.from_u64(k)), f.neg(f.from_u64(self.d - k))));
            let d = f.mul(d, f.mul(f.sub(self.r, f.from_u64(k + 1)), f.from_u64(k)));
            self.basis = (n, d);
        }
        let (sn, sd) = self.sum;
        let (bn, bd) = self.basis;
        self.sum = (f.add(f.mul(sn, bd), f.mul(f.mul(value, bn), sd)), f.mul(sd, bd));
        self.k += 1;
    }

    /// The polynomial at `r`, once all `d` values are in.
    pub fn value(&self) -> Fe {
        self.field.div(self.sum.0, self.sum.1).expect("nonzero denominator")
    }

    pub const WORDS: usize = 7;
}

/// Tables for evaluating `chi_x(z)` at integer `z` in `h+1..=d` in O(1).
#[derive(Debug, Clone)]
pub struct ChiTable {
    field: PrimeField,
    h: u64,
    /// `prod_{x'} (z - x')` indexed by `z - h - 1`.
    span: Vec<Fe>,
    /// `1 / prod_{x' != x} (x - x')` indexed by `x - 1`.
    weight: Vec<Fe>,
    /// `1 / t` indexed by `t - 1` for `t` in `1..d`.
    inverse: Vec<Fe>,
}

impl ChiTable {
    pub fn new(field: PrimeField, h: u64, d: u64) -> Self {
        let f = &field;
        let fact = |k: u64| (1..=k).fold(1, |a, i| f.mul(a, f.from_u64(i)));
        let weight = (1..=h)
            .map(|x| {
                let w = f.inv(f.mul(fact(x - 1), fact(h - x))).expect("factorials below p");
                if (h - x) % 2 == 1 {
                    f.neg(w)
                } else {
                    w
                }
            })
            .collect();
        let span = (h + 1..=d).map(|z| (1..=h).fold(1, |a, x| f.mul(a, f.from_u64(z - x)))).collect();
        let inverse = (1..d.max(1)).map(|t| f.inv(f.from_u64(t)).expect("below p")).collect();
        Self { field, h, span, weight, inverse }
    }

    /// `chi_x(z)` for integer `z` in `1..=d`.
    pub fn at(&self, x: u64, z: u64) -> Fe {
        if z <= self.h {
            return (x == z) as Fe;
        }
        let f = &self.field;
        f.mul(f.mul(self.span[(z - self.h - 1) as usize], self.inverse[(z - x - 1) as usize]), self.weight[x as usize - 1])
    }
}
