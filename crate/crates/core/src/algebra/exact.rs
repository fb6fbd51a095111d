//! Exact rational linear algebra for the honest provers and test oracles.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type Q = BigRational;

/// Reduced row echelon form in place; returns the pivot column of each
/// nonzero row.
pub fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        let top = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r != row && !other[col].is_zero() {
                let k = other[col].clone();
                for (x, y) in other.iter_mut().zip(&top) {
                    *x -= &k * y;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}

/// A nonzero vector in the kernel of `m`, if any.
pub fn kernel_vector(m: &[Vec<Q>]) -> Option<Vec<Q>> {
    let cols = m.first()?.len();
    let mut work = m.to_vec();
    let pivots = rref(&mut work);
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut x = vec![Q::zero(); cols];
    x[free] = Q::one();
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = -work[r][free].clone();
    }
    Some(x)
}

/// The unique solution of `m x = rhs` for square nonsingular `m`.
pub fn solve(m: &[Vec<Q>], rhs: &[Q]) -> Option<Vec<Q>> {
    let n = m.len();
    let mut work: Vec<Vec<Q>> = m.iter().zip(rhs).map(|(row, b)| row.iter().cloned().chain([b.clone()]).collect()).collect();
    let pivots = rref(&mut work);
    if pivots.len() < n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(work.into_iter().map(|r| r[n].clone()).collect())
}

/// Scales a rational vector to coprime integers; `None` when an entry does
/// not fit in `i64`.
pub fn to_integers(x: &[Q]) -> Option<Vec<i64>> {
    let lcm = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = x.iter().map(|v| (v * Q::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let g = if g.is_zero() { BigInt::one() } else { g };
    ints.iter().map(|v| (v / &g).to_i64()).collect()
}

pub fn q(v: i64) -> Q {
    Q::from_integer(v.into())
}

/// `num/den` as `i128` parts when both are at most `bound` in size.
pub fn small_ratio(v: &Q, bound: u64) -> Option<(i128, i128)> {
    let (n, d) = (v.numer().to_i128()?, v.denom().to_i128()?);
    (n.unsigned_abs() <= bound as u128 && d.abs() <= bound as i128).then_some((n, d))
}
