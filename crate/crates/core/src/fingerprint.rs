//! Linear multiset fingerprints.
//!
//! A multiset `M = {i : m(i)}` over `[q]` is hashed to `sum m(i) * alpha^i`
//! in `F_p` for a secret `alpha`. Two distinct multisets collide with
//! probability at most `q/p` over the choice of `alpha`. The hash is linear,
//! so fingerprints of unions add and multiplicities scale.

use crate::field::{Fe, PrimeField};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FingerprintError {
    #[error("domain bound q={q} must be below the modulus p={p}")]
    DomainTooLarge { q: u64, p: u64 },
    #[error("alpha must be nonzero")]
    ZeroAlpha,
    #[error("item {item} outside [1, {q}]")]
    OutOfDomain { item: u64, q: u64 },
    #[error("multiplicity {0} not below the modulus")]
    Multiplicity(i128),
    #[error("fingerprints use different parameters")]
    Incompatible,
    #[error("component {index} = {value} outside [1, {bound}]")]
    Component { index: usize, value: u64, bound: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fingerprint {
    field: PrimeField,
    alpha: Fe,
    q: u64,
    acc: Fe,
}

impl Fingerprint {
    pub fn new(field: PrimeField, alpha: Fe, q: u64) -> Result<Self, FingerprintError> {
        if q >= field.modulus() {
            return Err(FingerprintError::DomainTooLarge { q, p: field.modulus() });
        }
        if alpha.is_multiple_of(field.modulus()) {
            return Err(FingerprintError::ZeroAlpha);
        }
        Ok(Self { field, alpha: field.from_u64(alpha), q, acc: 0 })
    }

    pub fn acc(&self) -> Fe {
        self.acc
    }

    pub fn alpha(&self) -> Fe {
        self.alpha
    }

    pub fn domain(&self) -> u64 {
        self.q
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// `alpha^item`, the basis monomial of one item.
    pub fn monomial(&self, item: u64) -> Result<Fe, FingerprintError> {
        if item == 0 || item > self.q {
            return Err(FingerprintError::OutOfDomain { item, q: self.q });
        }
        Ok(self.field.pow(self.alpha, item))
    }

    /// Adds `mult` copies of `item`.
    pub fn update(&mut self, item: u64, mult: i64) -> Result<(), FingerprintError> {
        let mono = self.monomial(item)?;
        let m = self.field.from_i64(mult);
        if (mult as i128).unsigned_abs() >= self.field.modulus() as u128 {
            return Err(FingerprintError::Multiplicity(mult as i128));
        }
        self.acc = self.field.mul_add(m, mono, self.acc);
        Ok(())
    }

    /// Adds a field-valued multiplicity (used when values are the multiplicities).
    pub fn update_fe(&mut self, item: u64, mult: Fe) -> Result<(), FingerprintError> {
        let mono = self.monomial(item)?;
        self.acc = self.field.mul_add(mult, mono, self.acc);
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, FingerprintError> {
        self.compatible(other)?;
        Ok(Self { acc: self.field.add(self.acc, other.acc), ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FingerprintError> {
        self.compatible(other)?;
        Ok(Self { acc: self.field.sub(self.acc, other.acc), ..*self })
    }

    pub fn scale(&self, s: Fe) -> Self {
        Self { acc: self.field.mul(self.acc, self.field.from_u64(s)), ..*self }
    }

    /// A fresh, empty fingerprint sharing `alpha` and the field.
    pub fn empty_like(&self) -> Self {
        Self { acc: 0, ..*self }
    }

    /// Fingerprint of the set `{1, ..., k}` computed in O(1) words.
    pub fn range_set(&self, k: u64) -> Result<Self, FingerprintError> {
        let mut out = self.empty_like();
        if k > self.q {
            return Err(FingerprintError::OutOfDomain { item: k, q: self.q });
        }
        let mut mono = 1;
        for _ in 0..k {
            mono = self.field.mul(mono, self.alpha);
            out.acc = self.field.add(out.acc, mono);
        }
        Ok(out)
    }

    fn compatible(&self, other: &Self) -> Result<(), FingerprintError> {
        if self.field != other.field || self.alpha != other.alpha || self.q != other.q {
            return Err(FingerprintError::Incompatible);
        }
        Ok(())
    }
}

/// Number of machine words a [`Fingerprint`] occupies in verifier state
/// (`alpha`, accumulator).
pub const FINGERPRINT_WORDS: usize = 2;

/// Fingerprint over tuples `(x_1, ..., x_k)` with one secret base per
/// component: `sum m * prod_k beta_k^{x_k}`. Distinct tuples give distinct
/// monomials, so a nonzero multiset difference is a nonzero polynomial of
/// total degree at most `sum bounds`, which bounds the collision probability
/// by `sum bounds / p`. Used where a product domain would not fit below `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleFingerprint<const K: usize> {
    field: PrimeField,
    bases: [Fe; K],
    acc: Fe,
}

impl<const K: usize> TupleFingerprint<K> {
    pub fn new(field: PrimeField, bases: [Fe; K]) -> Result<Self, FingerprintError> {
        if bases.iter().any(|b| b % field.modulus() == 0) {
            return Err(FingerprintError::ZeroAlpha);
        }
        Ok(Self { field, bases, acc: 0 })
    }

    pub fn random<R: rand::Rng + ?Sized>(field: PrimeField, rng: &mut R) -> Self {
        let bases = std::array::from_fn(|_| field.random_nonzero(rng));
        Self { field, bases, acc: 0 }
    }

    pub fn acc(&self) -> Fe {
        self.acc
    }

    pub fn empty_like(&self) -> Self {
        Self { acc: 0, ..self.clone() }
    }

    pub fn monomial(&self, item: [u64; K]) -> Fe {
        let mut m = 1;
        for (b, e) in self.bases.iter().zip(item) {
            m = self.field.mul(m, self.field.pow(*b, e));
        }
        m
    }

    pub fn update(&mut self, item: [u64; K], mult: i64) {
        let mono = self.monomial(item);
        self.acc = self.field.mul_add(self.field.from_i64(mult), mono, self.acc);
    }

    pub fn words(&self) -> usize {
        K + 1
    }
}

/// Injective maps from structured objects into `[1, q]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainEncoder {
    /// `v` in `[1, n]`.
    Node { n: u64 },
    /// `(u, v)` in `[1, n]^2` as `(u-1)n + v`.
    EdgePair { n: u64 },
    /// `(u, v, w)` with `w` in `[1, wmax]` as `((u-1)n + v - 1) wmax + w`.
    WeightedEdge { n: u64, wmax: u64 },
    /// Mixed radix over `[1, b_1] x ... x [1, b_k]`.
    IndexedTuple { bounds: Vec<u64> },
}

impl DomainEncoder {
    /// Size of the target domain `[1, q]`; `None` on overflow.
    pub fn domain(&self) -> Option<u64> {
        match self {
            DomainEncoder::Node { n } => Some(*n),
            DomainEncoder::EdgePair { n } => n.checked_mul(*n),
            DomainEncoder::WeightedEdge { n, wmax } => n.checked_mul(*n)?.checked_mul(*wmax),
            DomainEncoder::IndexedTuple { bounds } => {
                bounds.iter().try_fold(1u64, |acc, b| acc.checked_mul(*b))
            }
        }
    }

    pub fn encode(&self, parts: &[u64]) -> Result<u64, FingerprintError> {
        let check = |index: usize, value: u64, bound: u64| {
            if value == 0 || value > bound {
                Err(FingerprintError::Component { index, value, bound })
            } else {
                Ok(())
            }
        };
        match self {
            DomainEncoder::Node { n } => {
                check(0, parts[0], *n)?;
                Ok(parts[0])
            }
            DomainEncoder::EdgePair { n } => {
                check(0, parts[0], *n)?;
                check(1, parts[1], *n)?;
                Ok((parts[0] - 1) * n + parts[1])
            }
            DomainEncoder::WeightedEdge { n, wmax } => {
                check(0, parts[0], *n)?;
                check(1, parts[1], *n)?;
                check(2, parts[2], *wmax)?;
                Ok(((parts[0] - 1) * n + parts[1] - 1) * wmax + parts[2])
            }
            DomainEncoder::IndexedTuple { bounds } => {
                if parts.len() != bounds.len() {
                    return Err(FingerprintError::Component { index: parts.len(), value: 0, bound: 0 });
                }
                let mut idx = 0u64;
                for (i, (&x, &b)) in parts.iter().zip(bounds).enumerate() {
                    check(i, x, b)?;
                    idx = idx * b + (x - 1);
                }
                Ok(idx + 1)
            }
        }
    }
}
