use crate::common::{fail, rng};
use annostream_core::{Fingerprint, PrimeField};
use rand::seq::SliceRandom;
use rand::Rng;

const COLLISION_TRIALS: u64 = 1_000_000;
const DOMAIN: u64 = 1_000_000;
const ITEMS: usize = 4;

type Multiset = Vec<(u64, i64)>;

fn fingerprint(field: PrimeField, alpha: u64, q: u64, items: &[(u64, i64)]) -> Result<Fingerprint, String> {
    let mut fp = Fingerprint::new(field, alpha, q).map_err(|e| e.to_string())?;
    for &(i, m) in items {
        fp.update(i, m).map_err(|e| e.to_string())?;
    }
    Ok(fp)
}

fn random_multiset<R: Rng>(r: &mut R, len: usize) -> Multiset {
    (0..len).map(|_| (r.gen_range(1..=DOMAIN), r.gen_range(-3..=3))).collect()
}

fn small_example() -> Result<(), String> {
    let field = PrimeField::new(97).map_err(|e| e.to_string())?;
    let acc = fingerprint(field, 5, 10, &[(3, 2)])?.acc();
    if acc != 56 {
        return fail(format!("p=97 alpha=5 item 3 x2 gave {acc}, expected 56"));
    }
    Ok(())
}

fn invariance_and_linearity() -> Result<(), String> {
    let field = PrimeField::default();
    let mut r = rng(71);
    for trial in 0..2000 {
        let alpha = field.random_nonzero(&mut r);
        let a = random_multiset(&mut r, 20);
        let b = random_multiset(&mut r, 20);
        let mut shuffled = a.clone();
        shuffled.shuffle(&mut r);
        if fingerprint(field, alpha, DOMAIN, &a)? != fingerprint(field, alpha, DOMAIN, &shuffled)? {
            return fail(format!("trial {trial}: order changed the fingerprint"));
        }
        let union: Multiset = a.iter().chain(&b).copied().collect();
        let (fa, fb) = (fingerprint(field, alpha, DOMAIN, &a)?, fingerprint(field, alpha, DOMAIN, &b)?);
        if fa.add(&fb).map_err(|e| e.to_string())? != fingerprint(field, alpha, DOMAIN, &union)? {
            return fail(format!("trial {trial}: fingerprint of a sum is not the sum"));
        }
        let s = r.gen_range(0..50i64);
        let scaled: Multiset = a.iter().map(|&(i, m)| (i, m * s)).collect();
        if fa.scale(s as u64) != fingerprint(field, alpha, DOMAIN, &scaled)? {
            return fail(format!("trial {trial}: scaling multiplicities is not scaling the fingerprint"));
        }
    }
    Ok(())
}

/// Distinct multiset pairs under fresh random bases. Returns the collision count.
fn collisions() -> Result<u64, String> {
    let field = PrimeField::default();
    let mut r = rng(2024);
    let mut hits = 0;
    for _ in 0..COLLISION_TRIALS {
        let alpha = field.random_nonzero(&mut r);
        let a = random_multiset(&mut r, ITEMS);
        let mut b = a.clone();
        // One extra copy of an item makes the multisets differ.
        b.push((r.gen_range(1..=DOMAIN), if r.gen_bool(0.5) { 1 } else { -1 }));
        if fingerprint(field, alpha, DOMAIN, &a)?.acc() == fingerprint(field, alpha, DOMAIN, &b)?.acc() {
            hits += 1;
        }
    }
    Ok(hits)
}

pub fn run() -> Result<String, String> {
    small_example()?;
    invariance_and_linearity()?;
    let hits = collisions()?;
    if hits != 0 {
        return fail(format!("{hits} collisions in {COLLISION_TRIALS} trials"));
    }
    Ok(format!("p=97 example ok, invariance and linearity ok, 0 collisions in {COLLISION_TRIALS} trials at q={DOMAIN}"))
}
