//! Eigenpair checking on top of the product check.
//!
//! The stream is a square matrix or an undirected graph (read as its
//! Laplacian); `lambda` comes from the header. The helper sends a vector
//! `x` as `EIG-X j x_j` for `j = 1..=n` and then the product rows for `Ax`.
//! The verifier fingerprints `x` and the product rows with the same base and
//! accepts when they differ by the factor `lambda` and `x` is nonzero.

use super::exact::{kernel_vector, q, to_integers, Q};
use super::lde::Grid;
use super::matvec::{feed_poly_token, split_of, MatvecCore, MatvecProver};
use crate::annotation::{AnnHeader, AnnToken, Annotation, Tag};
use crate::field::{Fe, PrimeField};
use crate::protocol::{ensure, reject, Outcome, Reason, Reject, Verifier};
use crate::stream::{Stream, StreamHeader, StreamKind, StreamToken};
use num_rational::Rational64;
use rand::Rng;

/// Matrix entries contributed by one stream token: itself for a matrix
/// stream, the four Laplacian updates for an undirected edge.
pub fn operator_entries(tok: &StreamToken) -> Option<Vec<(u64, u64, i64)>> {
    let lap = |u, v, w: i64| vec![(u, u, w), (v, v, w), (u, v, -w), (v, u, -w)];
    match *tok {
        StreamToken::MatEntry(i, j, a) => Some(vec![(i, j, a)]),
        StreamToken::Edge(u, v) => Some(lap(u, v, 1)),
        StreamToken::WeightedEdge(u, v, w) => Some(lap(u, v, w as i64)),
        _ => None,
    }
}

/// Side length of the square operator described by `header`.
pub fn operator_size(header: &StreamHeader) -> Result<u64, Reject> {
    match header.kind {
        StreamKind::Graph | StreamKind::WGraph => Ok(header.n),
        StreamKind::Matrix => {
            let (b, c) = header.dims().map_err(|e| Reject::new(Reason::Structure, e.to_string()))?;
            ensure(b == c, Reason::Structure, || format!("{b}x{c} matrix is not square"))?;
            Ok(b)
        }
        other => reject(Reason::Structure, format!("{} stream has no square operator", other.as_str())),
    }
}

/// Dense operator over the rationals.
pub fn dense_operator(s: &Stream) -> Result<Vec<Vec<Q>>, Reject> {
    let n = operator_size(&s.header)? as usize;
    let mut a = vec![vec![q(0); n]; n];
    for t in &s.tokens {
        for (i, j, v) in operator_entries(t).unwrap_or_default() {
            a[i as usize - 1][j as usize - 1] += q(v);
        }
    }
    Ok(a)
}

pub fn lambda_of(header: &StreamHeader) -> Rational64 {
    header.get_ratio("lambda").unwrap_or_default()
}

pub struct EigenVerifier {
    core: MatvecCore,
    n: u64,
    lambda: (Fe, Fe),
    beta: Fe,
    fp_x: Fe,
    fp_out: Fe,
    next_x: u64,
    nonzero: bool,
}

impl EigenVerifier {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        let n = operator_size(header)?;
        let core = MatvecCore::new(field, rng, n, n, split_of(header))?;
        let l = lambda_of(header);
        let lambda = (field.from_i64(*l.numer()), field.from_i64(*l.denom()));
        Ok(Self { core, n, lambda, beta: field.random_nonzero(rng), fp_x: 0, fp_out: 0, next_x: 0, nonzero: false })
    }
}

impl Verifier for EigenVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        let f = self.core.field();
        let Some(entries) = operator_entries(tok) else {
            return reject(Reason::Structure, "eigen expects a matrix or undirected graph stream");
        };
        for (i, j, a) in entries {
            self.core.matrix(i, j, f.from_i64(a))?;
        }
        Ok(())
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        let f = self.core.field();
        if tok.tag == Tag::EigX {
            tok.expect_len(2)?;
            let j = tok.int(0)?;
            ensure(j as u64 == self.next_x + 1 && j as u64 <= self.n, Reason::Structure, || format!("vector entry {j} out of order"))?;
            let x = tok.int(1)?;
            self.next_x += 1;
            self.nonzero |= x != 0;
            self.core.vector(j as u64, f.from_i64(x))?;
            self.fp_x = f.add(self.fp_x, f.mul(f.from_i64(x), f.pow(self.beta, j as u64)));
            return Ok(());
        }
        ensure(self.next_x == self.n, Reason::Structure, || "product rows before the full vector".into())?;
        if let Some((i, v)) = feed_poly_token(&mut self.core, tok)? {
            self.fp_out = f.add(self.fp_out, f.mul(v, f.pow(self.beta, i)));
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        self.core.check()?;
        ensure(self.nonzero, Reason::LocalCheck, || "zero vector".into())?;
        let f = self.core.field();
        let (num, den) = self.lambda;
        ensure(f.mul(den, self.fp_out) == f.mul(num, self.fp_x), Reason::ClaimMismatch, || "Ax is not lambda x".into())?;
        Ok(Outcome::Accept)
    }

    fn words(&self) -> usize {
        self.core.words() + 7
    }
}

/// Tokens proving that `x` is an eigenvector of the operator in `s`.
pub fn eigen_annotation(field: PrimeField, s: &Stream, x: &[i64]) -> Result<Annotation, Reject> {
    let n = operator_size(&s.header)?;
    let mut entries = Vec::new();
    for t in &s.tokens {
        for (i, j, a) in operator_entries(t).unwrap_or_default() {
            entries.push((i, j, field.from_i64(a)));
        }
    }
    let xf: Vec<Fe> = x.iter().map(|&v| field.from_i64(v)).collect();
    let prover = MatvecProver::new(field, Grid::new(n, split_of(&s.header)), n, &entries, &xf);
    let mut ann = Annotation::new(AnnHeader::new("eigen"));
    for (j, &v) in x.iter().enumerate() {
        ann.push_ints(Tag::EigX, &[j as i64 + 1, v]);
    }
    ann.tokens.extend(prover.tokens());
    Ok(ann)
}

/// An integer eigenvector for `lambda`, if `lambda` is an eigenvalue.
pub fn eigenvector(s: &Stream) -> Result<Option<Vec<i64>>, Reject> {
    let mut a = dense_operator(s)?;
    let l = lambda_of(&s.header);
    let l = Q::new((*l.numer()).into(), (*l.denom()).into());
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= &l;
    }
    Ok(kernel_vector(&a).and_then(|x| to_integers(&x)))
}

/// Honest annotation, or `None` when `lambda` is not an eigenvalue.
pub fn prove_eigen(field: PrimeField, s: &Stream) -> Result<Option<Annotation>, Reject> {
    match eigenvector(s)? {
        Some(x) => eigen_annotation(field, s, &x).map(Some),
        None => Ok(None),
    }
}

/// A random `n x n` matrix `lambda I + u w^T` with `w` orthogonal to a random
/// nonzero `x`, so `lambda` is an eigenvalue.
pub fn gen_eigen<R: Rng + ?Sized>(rng: &mut R, n: u64, alpha: &str) -> Stream {
    let n = n.max(1) as usize;
    let lambda: i64 = rng.gen_range(-5..=5);
    let mut x: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
    if x.iter().all(|&v| v == 0) {
        x[rng.gen_range(0..n)] = 1;
    }
    let w0: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
    let xx: i64 = x.iter().map(|v| v * v).sum();
    let wx: i64 = w0.iter().zip(&x).map(|(a, b)| a * b).sum();
    let w: Vec<i64> = w0.iter().zip(&x).map(|(&wi, &xi)| xx * wi - wx * xi).collect();
    let u: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
    let mut tokens = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let a = u[i] * w[j] + if i == j { lambda } else { 0 };
            if a != 0 {
                tokens.push(StreamToken::MatEntry(i as u64 + 1, j as u64 + 1, a));
            }
        }
    }
    let header = StreamHeader::new(StreamKind::Matrix, 0, 0)
        .with("b", n)
        .with("c", n)
        .with("alpha", alpha)
        .with("lambda", lambda);
    Stream::new(header, tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::run_in_memory;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check(s: &Stream, ann: &Annotation, seed: u64) -> Outcome {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = EigenVerifier::new(PrimeField::default(), &mut rng, &s.header).unwrap();
        run_in_memory(&mut v, s, ann).0
    }

    fn diag(lambda: &str) -> Stream {
        let h = StreamHeader::new(StreamKind::Matrix, 0, 0).with("b", 2).with("c", 2).with("lambda", lambda);
        Stream::new(h, vec![StreamToken::MatEntry(1, 1, 2), StreamToken::MatEntry(2, 2, 3)])
    }

    #[test]
    fn diagonal_example() {
        let f = PrimeField::default();
        let s = diag("3");
        let ann = eigen_annotation(f, &s, &[0, 1]).unwrap();
        assert_eq!(check(&s, &ann, 1), Outcome::Accept);
        assert_eq!(eigenvector(&s).unwrap(), Some(vec![0, 1]));
        let wrong = diag("1");
        assert!(prove_eigen(f, &wrong).unwrap().is_none());
        for x in [[1, 0], [0, 1], [1, 1]] {
            let ann = eigen_annotation(f, &wrong, &x).unwrap();
            assert!(check(&wrong, &ann, 2).is_bottom());
        }
        let zero = eigen_annotation(f, &s, &[0, 0]).unwrap();
        assert!(check(&s, &zero, 3).is_bottom());
    }

    #[test]
    fn laplacian_of_an_edge() {
        let h = StreamHeader::new(StreamKind::Graph, 2, 1).with("lambda", 2);
        let s = Stream::new(h, vec![StreamToken::Edge(1, 2)]);
        let f = PrimeField::default();
        assert_eq!(check(&s, &eigen_annotation(f, &s, &[1, -1]).unwrap(), 4), Outcome::Accept);
        assert!(check(&s, &eigen_annotation(f, &s, &[1, 1]).unwrap(), 5).is_bottom());
        assert_eq!(check(&s, &prove_eigen(f, &s).unwrap().unwrap(), 6), Outcome::Accept);
    }

    #[test]
    fn generated_instances_accept() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let f = PrimeField::default();
        for trial in 0..60 {
            let alpha = ["0", "1/4", "1/2", "3/4"][trial % 4];
            let n = rng.gen_range(1..=16);
            let s = gen_eigen(&mut rng, n, alpha);
            let ann = prove_eigen(f, &s).unwrap().expect("lambda is an eigenvalue");
            assert_eq!(check(&s, &ann, trial as u64), Outcome::Accept);
        }
    }

    #[test]
    fn perturbed_vector_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let f = PrimeField::default();
        for trial in 0..40 {
            let s = gen_eigen(&mut rng, 6, "1/2");
            let mut x = eigenvector(&s).unwrap().unwrap();
            let k = rng.gen_range(0..x.len());
            x[k] += 1;
            let Ok(ann) = eigen_annotation(f, &s, &x) else { continue };
            let mut a = dense_operator(&s).unwrap();
            let l = q(*lambda_of(&s.header).numer());
            for (i, row) in a.iter_mut().enumerate() {
                row[i] -= &l;
            }
            let still = a.iter().all(|row| row.iter().zip(&x).map(|(p, v)| p * q(*v)).sum::<Q>() == q(0));
            assert_eq!(check(&s, &ann, trial) == Outcome::Accept, still);
        }
    }
}
