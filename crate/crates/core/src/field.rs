//! Prime-field arithmetic over `F_p` with `p < 2^62`.
//!
//! Elements are plain `u64` values in `[0, p)`; the modulus lives in a small
//! copyable context so that the same code runs over the default Mersenne
//! prime and over tiny primes used for hand-checkable test vectors.

use rand::Rng;
use thiserror::Error;

/// 2^61 - 1.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// A field element. Always reduced into `[0, p)` by the owning [`PrimeField`].
pub type Fe = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} must lie in [3, 2^62)")]
    OutOfRange(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl Default for PrimeField {
    fn default() -> Self {
        Self { p: MERSENNE_61 }
    }
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if !(3..(1 << 62)).contains(&p) {
            return Err(FieldError::OutOfRange(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p })
    }

    /// Reads `ANNOSTREAM_FIELD_P` if set, else the default Mersenne prime.
    pub fn from_env() -> Result<Self, FieldError> {
        match std::env::var("ANNOSTREAM_FIELD_P") {
            Ok(s) => {
                let p = s.trim().parse::<u64>().map_err(|_| FieldError::OutOfRange(0))?;
                Self::new(p)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    fn reduce128(&self, x: u128) -> u64 {
        if self.p == MERSENNE_61 {
            let lo = (x as u64) & MERSENNE_61;
            let hi = (x >> 61) as u64;
            // hi < 2^67 / 2^61 only if x < 2^122, which holds for products of reduced elements.
            let s = lo + (hi & MERSENNE_61) + (hi >> 61);
            let s = (s & MERSENNE_61) + (s >> 61);
            if s >= MERSENNE_61 {
                s - MERSENNE_61
            } else {
                s
            }
        } else {
            (x % self.p as u128) as u64
        }
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        self.reduce128(a as u128 * b as u128)
    }

    /// `a * b + c`.
    #[inline]
    pub fn mul_add(&self, a: Fe, b: Fe, c: Fe) -> Fe {
        self.add(self.mul(a, b), c)
    }

    pub fn pow(&self, mut base: Fe, mut exp: u64) -> Fe {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a == 0 {
            return None;
        }
        let (mut t, mut new_t) = (0i128, 1i128);
        let (mut r, mut new_r) = (self.p as i128, a as i128);
        while new_r != 0 {
            let q = r / new_r;
            (t, new_t) = (new_t, t - q * new_t);
            (r, new_r) = (new_r, r - q * new_r);
        }
        debug_assert_eq!(r, 1);
        if t < 0 {
            t += self.p as i128;
        }
        Some(t as u64)
    }

    pub fn div(&self, a: Fe, b: Fe) -> Option<Fe> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    #[inline]
    pub fn from_u64(&self, x: u64) -> Fe {
        if x < self.p {
            x
        } else {
            x % self.p
        }
    }

    #[inline]
    pub fn from_i64(&self, x: i64) -> Fe {
        self.from_i128(x as i128)
    }

    #[inline]
    pub fn from_i128(&self, x: i128) -> Fe {
        x.rem_euclid(self.p as i128) as u64
    }

    /// Maps `num/den` into the field; `None` when `den ≡ 0`.
    pub fn from_ratio(&self, num: i128, den: i128) -> Option<Fe> {
        self.div(self.from_i128(num), self.from_i128(den))
    }

    /// Centered lift into `(-p/2, p/2]`.
    pub fn to_signed(&self, a: Fe) -> i128 {
        if a > self.p / 2 {
            a as i128 - self.p as i128
        } else {
            a as i128
        }
    }

    /// Uniform element of `[1, p-1]`.
    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        rng.gen_range(1..self.p)
    }

    /// Uniform element of `[lo, p-1]`.
    pub fn random_at_least<R: Rng + ?Sized>(&self, rng: &mut R, lo: u64) -> Fe {
        rng.gen_range(lo.min(self.p - 1)..self.p)
    }

    /// Rational reconstruction: finds `a/b ≡ x` with `|a|, b <= bound`.
    pub fn reconstruct_ratio(&self, x: Fe, bound: u64) -> Option<(i128, i128)> {
        let (mut r0, mut r1) = (self.p as i128, x as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 > bound as i128 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if t1 == 0 || t1.unsigned_abs() > bound as u128 {
            return None;
        }
        let (mut a, mut b) = (r1, t1);
        if b < 0 {
            a = -a;
            b = -b;
        }
        let g = num_integer::gcd(a, b);
        Some((a / g, b / g))
    }
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(sp) {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
