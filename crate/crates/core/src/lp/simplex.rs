//! Exact two-phase simplex with Bland's rule over big rationals.
//!
//! Solves `min c^T x` subject to `A x <= b` with `x` free, and returns an
//! optimal dual `y <= 0` with `A^T y = c`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { x: Vec<Q>, y: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// Rows of `[coefficients | rhs]`.
    t: Vec<Vec<Q>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.t[r][j].clone();
        for x in self.t[r].iter_mut() {
            *x = &*x / &p;
        }
        let row = self.t[r].clone();
        for (i, other) in self.t.iter_mut().enumerate() {
            if i == r || other[j].is_zero() {
                continue;
            }
            let f = other[j].clone();
            for (x, y) in other.iter_mut().zip(&row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[r] = j;
    }

    fn reduced(&self, cost: &[Q], j: usize) -> Q {
        let mut r = cost[j].clone();
        for (i, &bj) in self.basis.iter().enumerate() {
            if !cost[bj].is_zero() && !self.t[i][j].is_zero() {
                r -= &cost[bj] * &self.t[i][j];
            }
        }
        r
    }

    /// Bland's rule. `allowed` masks columns that may enter. Returns false
    /// when unbounded.
    fn optimize(&mut self, cost: &[Q], allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.cols).find(|&j| allowed[j] && self.reduced(cost, j).is_negative());
            let Some(j) = entering else { return true };
            let rhs = self.cols;
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.t.len() {
                if !self.t[i][j].is_positive() {
                    continue;
                }
                let ratio = &self.t[i][rhs] / &self.t[i][j];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, j),
                None => return false,
            }
        }
    }
}

/// `a` is dense `rows x cols`.
pub fn solve(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> LpSolution {
    let (rows, n) = (b.len(), c.len());
    // Columns: x+ (n), x- (n), slack (rows), artificial (rows).
    let (xp, xm, sl, ar) = (0, n, 2 * n, 2 * n + rows);
    let cols = 2 * n + 2 * rows;
    let mut t = Vec::with_capacity(rows);
    let mut basis = Vec::with_capacity(rows);
    for i in 0..rows {
        let sign: Q = if b[i].is_negative() { -Q::from_integer(1.into()) } else { Q::from_integer(1.into()) };
        let mut row = vec![Q::zero(); cols + 1];
        for j in 0..n {
            row[xp + j] = &sign * &a[i][j];
            row[xm + j] = -&row[xp + j];
        }
        row[sl + i] = sign.clone();
        row[cols] = &sign * &b[i];
        if b[i].is_negative() {
            row[ar + i] = Q::from_integer(1.into());
            basis.push(ar + i);
        } else {
            basis.push(sl + i);
        }
        t.push(row);
    }
    let mut tab = Tableau { t, basis, cols };

    let one = Q::from_integer(BigInt::from(1));
    let mut phase1 = vec![Q::zero(); cols];
    for k in 0..rows {
        phase1[ar + k] = one.clone();
    }
    let all = vec![true; cols];
    tab.optimize(&phase1, &all);
    let infeasible = tab.basis.iter().enumerate().any(|(i, &bj)| bj >= ar && !tab.t[i][cols].is_zero());
    if infeasible {
        return LpSolution::Infeasible;
    }
    for i in 0..rows {
        if tab.basis[i] >= ar {
            if let Some(j) = (0..ar).find(|&j| !tab.t[i][j].is_zero()) {
                tab.pivot(i, j);
            }
        }
    }

    let mut cost = vec![Q::zero(); cols];
    for j in 0..n {
        cost[xp + j] = c[j].clone();
        cost[xm + j] = -&c[j];
    }
    let allowed: Vec<bool> = (0..cols).map(|j| j < ar).collect();
    if !tab.optimize(&cost, &allowed) {
        return LpSolution::Unbounded;
    }

    let mut val = vec![Q::zero(); cols];
    for (i, &bj) in tab.basis.iter().enumerate() {
        val[bj] = tab.t[i][cols].clone();
    }
    let x: Vec<Q> = (0..n).map(|j| &val[xp + j] - &val[xm + j]).collect();
    let y: Vec<Q> = (0..rows).map(|i| -tab.reduced(&cost, sl + i)).collect();
    let value = x.iter().zip(c).fold(Q::zero(), |acc, (xj, cj)| acc + xj * cj);
    LpSolution::Optimal { x, y, value }
}
