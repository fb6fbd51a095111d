//! Offline memory checking.
//!
//! Every operation reads the old `(value, timestamp)` of a cell and writes a
//! new one stamped with the current clock. The checker folds each read into
//! one fingerprint and each write into another; after an epilogue that reads
//! every touched cell once more, the two agree exactly when each read saw the
//! last value written. Memory starts zeroed with timestamp 0.
//!
//! Annotation rows: `MEM-ROW t op addr value wts [new]` with `op` 0 for a
//! read (value returned, `new` omitted) and 1 for a write (`value` is the
//! overwritten value, `new` the stored one); `MEM-EPILOGUE addr value wts`
//! once per touched address in increasing order.

use crate::annotation::{AnnToken, Tag};
use crate::field::PrimeField;
use crate::fingerprint::TupleFingerprint;
use crate::protocol::{ensure, Reason, Reject};
use rand::Rng;
use std::collections::BTreeMap;

/// Largest storable value.
pub const VALUE_MAX: u64 = 1 << 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemOp {
    Read,
    Write(u64),
}

/// One transcript row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemRow {
    pub t: u64,
    pub addr: u64,
    pub op: MemOp,
    /// Value seen before the operation.
    pub value: u64,
    /// Timestamp of the write that stored `value`.
    pub wts: u64,
}

impl MemRow {
    pub fn stored(&self) -> u64 {
        match self.op {
            MemOp::Read => self.value,
            MemOp::Write(v) => v,
        }
    }

    pub fn token(&self) -> AnnToken {
        let (t, a, v, w) = (self.t as i64, self.addr as i64, self.value as i64, self.wts as i64);
        match self.op {
            MemOp::Read => AnnToken::ints(Tag::MemRow, &[t, 0, a, v, w]),
            MemOp::Write(new) => AnnToken::ints(Tag::MemRow, &[t, 1, a, v, w, new as i64]),
        }
    }

    pub fn parse(tok: &AnnToken) -> Result<Self, Reject> {
        ensure(tok.tag == Tag::MemRow, Reason::Structure, || format!("expected MEM-ROW, got {}", tok.tag.as_str()))?;
        let op = tok.int_in(1, 0, 1)?;
        tok.expect_len(5 + op as usize)?;
        let word = |k| tok.int_in(k, 0, VALUE_MAX as i64).map(|v| v as u64);
        Ok(Self {
            t: word(0)?,
            addr: word(2)?,
            op: if op == 0 { MemOp::Read } else { MemOp::Write(word(5)?) },
            value: word(3)?,
            wts: word(4)?,
        })
    }
}

/// Streaming checker state: two tuple fingerprints and a clock.
#[derive(Debug, Clone)]
pub struct MemChecker {
    reads: TupleFingerprint<3>,
    writes: TupleFingerprint<3>,
    clock: u64,
    addr_max: u64,
    last_epilogue: Option<u64>,
}

impl MemChecker {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, addr_max: u64) -> Self {
        let reads = TupleFingerprint::random(field, rng);
        Self { writes: reads.empty_like(), reads, clock: 0, addr_max, last_epilogue: None }
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    /// Checks and folds one row; rows must carry consecutive timestamps.
    pub fn step(&mut self, row: &MemRow) -> Result<(), Reject> {
        ensure(self.last_epilogue.is_none(), Reason::Structure, || "operation after the epilogue".into())?;
        ensure(row.t == self.clock + 1, Reason::Structure, || format!("clock jumps from {} to {}", self.clock, row.t))?;
        ensure(row.wts < row.t, Reason::MemoryInconsistent, || format!("read at {} claims a write at {}", row.t, row.wts))?;
        ensure((1..=self.addr_max).contains(&row.addr), Reason::Domain, || format!("address {} outside [1, {}]", row.addr, self.addr_max))?;
        ensure(row.stored() <= VALUE_MAX, Reason::Domain, || "value too large".into())?;
        self.clock = row.t;
        self.reads.update([row.addr, row.value, row.wts], 1);
        self.writes.update([row.addr, row.stored(), row.t], 1);
        Ok(())
    }

    /// A write to a never-touched cell, performed by the verifier itself.
    pub fn fresh_write(&mut self, addr: u64, value: u64) -> Result<(), Reject> {
        let row = MemRow { t: self.clock + 1, addr, op: MemOp::Write(value), value: 0, wts: 0 };
        self.step(&row)
    }

    /// One epilogue row: the final contents of `addr`.
    pub fn epilogue(&mut self, addr: u64, value: u64, wts: u64) -> Result<(), Reject> {
        ensure(self.last_epilogue.is_none_or(|a| a < addr), Reason::Structure, || format!("epilogue address {addr} out of order"))?;
        ensure((1..=self.addr_max).contains(&addr), Reason::Domain, || format!("address {addr} outside [1, {}]", self.addr_max))?;
        ensure(wts <= self.clock, Reason::MemoryInconsistent, || format!("epilogue timestamp {wts} after the clock"))?;
        self.last_epilogue = Some(addr);
        self.reads.update([addr, value, wts], 1);
        self.writes.update([addr, 0, 0], 1);
        Ok(())
    }

    pub fn epilogue_token(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        ensure(tok.tag == Tag::MemEpilogue, Reason::Structure, || format!("expected MEM-EPILOGUE, got {}", tok.tag.as_str()))?;
        tok.expect_len(3)?;
        let word = |k| tok.int_in(k, 0, VALUE_MAX as i64).map(|v| v as u64);
        self.epilogue(word(0)?, word(1)?, word(2)?)
    }

    pub fn finish(&self) -> Result<(), Reject> {
        ensure(self.reads.acc() == self.writes.acc(), Reason::MemoryInconsistent, || "reads do not match writes".into())
    }

    pub fn words(&self) -> usize {
        self.reads.words() + self.writes.words() + 3
    }
}

/// Honest memory that records the transcript.
#[derive(Debug, Clone, Default)]
pub struct TracedMemory {
    cells: BTreeMap<u64, (u64, u64)>,
    clock: u64,
    pub rows: Vec<MemRow>,
}

impl TracedMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    fn apply(&mut self, addr: u64, op: MemOp) -> u64 {
        self.clock += 1;
        let (value, wts) = self.cells.get(&addr).copied().unwrap_or((0, 0));
        let row = MemRow { t: self.clock, addr, op, value, wts };
        self.cells.insert(addr, (row.stored(), self.clock));
        self.rows.push(row);
        value
    }

    pub fn read(&mut self, addr: u64) -> u64 {
        self.apply(addr, MemOp::Read)
    }

    pub fn write(&mut self, addr: u64, value: u64) {
        self.apply(addr, MemOp::Write(value));
    }

    /// `(addr, value, wts)` for every touched cell, by address.
    pub fn epilogue(&self) -> Vec<(u64, u64, u64)> {
        self.cells.iter().map(|(&a, &(v, t))| (a, v, t)).collect()
    }

    pub fn epilogue_tokens(&self) -> impl Iterator<Item = AnnToken> + '_ {
        self.epilogue().into_iter().map(|(a, v, t)| AnnToken::ints(Tag::MemEpilogue, &[a as i64, v as i64, t as i64]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check(rows: &[MemRow], epilogue: &[(u64, u64, u64)], addr_max: u64, seed: u64) -> Result<(), Reject> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = MemChecker::new(PrimeField::default(), &mut rng, addr_max);
        for r in rows {
            c.step(&MemRow::parse(&r.token())?)?;
        }
        for &(a, v, t) in epilogue {
            c.epilogue(a, v, t)?;
        }
        c.finish()
    }

    fn random_trace(rng: &mut ChaCha8Rng, ops: usize, addrs: u64) -> TracedMemory {
        let mut mem = TracedMemory::new();
        for _ in 0..ops {
            let a = rng.gen_range(1..=addrs);
            if rng.gen_bool(0.5) {
                mem.read(a);
            } else {
                mem.write(a, rng.gen_range(0..1000));
            }
        }
        mem
    }

    /// Replays reads against a plain array; true when every read matches.
    fn replay_consistent(rows: &[MemRow], epilogue: &[(u64, u64, u64)]) -> bool {
        let mut cells: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
        for r in rows {
            if cells.get(&r.addr).copied().unwrap_or((0, 0)) != (r.value, r.wts) {
                return false;
            }
            cells.insert(r.addr, (r.stored(), r.t));
        }
        epilogue.len() == cells.len() && epilogue.iter().all(|&(a, v, t)| cells.get(&a) == Some(&(v, t)))
    }

    #[test]
    fn small_examples() {
        let w = MemRow { t: 1, addr: 1, op: MemOp::Write(5), value: 0, wts: 0 };
        let r = MemRow { t: 2, addr: 1, op: MemOp::Read, value: 5, wts: 1 };
        assert!(check(&[w, r], &[(1, 5, 2)], 4, 1).is_ok());
        let bad = MemRow { value: 6, ..r };
        assert!(check(&[w, bad], &[(1, 6, 2)], 4, 2).is_err());
        let fresh = MemRow { t: 1, addr: 3, op: MemOp::Read, value: 0, wts: 0 };
        assert!(check(&[fresh], &[(3, 0, 1)], 4, 3).is_ok());
        assert!(check(&[], &[], 4, 4).is_ok());
    }

    #[test]
    fn local_checks() {
        let w = MemRow { t: 1, addr: 1, op: MemOp::Write(5), value: 0, wts: 0 };
        assert_eq!(check(&[MemRow { wts: 1, ..w }], &[], 4, 0).unwrap_err().reason, Reason::MemoryInconsistent);
        assert_eq!(check(&[MemRow { t: 2, ..w }], &[], 4, 0).unwrap_err().reason, Reason::Structure);
        assert_eq!(check(&[w], &[(1, 5, 1), (1, 5, 1)], 4, 0).unwrap_err().reason, Reason::Structure);
        assert_eq!(check(&[MemRow { addr: 5, ..w }], &[], 4, 0).unwrap_err().reason, Reason::Domain);
    }

    #[test]
    fn honest_traces_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(80);
        let mem = random_trace(&mut rng, 10_000, 1000);
        assert!(check(&mem.rows, &mem.epilogue(), 1000, 1).is_ok());
        for seed in 0..200 {
            let mem = random_trace(&mut rng, 50, 8);
            assert!(check(&mem.rows, &mem.epilogue(), 8, seed).is_ok());
        }
    }

    #[test]
    fn checker_agrees_with_replay_under_mutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let mut inconsistent = 0;
        for seed in 0..2000 {
            let mem = random_trace(&mut rng, 40, 6);
            let (mut rows, mut epi) = (mem.rows.clone(), mem.epilogue());
            match rng.gen_range(0..4) {
                0 => {
                    let k = rng.gen_range(0..rows.len());
                    rows[k].value += rng.gen_range(1..3);
                }
                1 => {
                    let k = rng.gen_range(0..rows.len());
                    rows[k].wts = rows[k].wts.saturating_sub(1);
                }
                2 => {
                    epi.remove(rng.gen_range(0..epi.len()));
                }
                _ => {
                    let k = rng.gen_range(0..epi.len());
                    epi[k].1 += 1;
                }
            }
            let consistent = replay_consistent(&rows, &epi);
            inconsistent += !consistent as u32;
            assert_eq!(check(&rows, &epi, 6, seed).is_ok(), consistent, "seed {seed}");
        }
        assert!(inconsistent > 1900);
    }

    #[test]
    fn state_is_constant_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        let c = MemChecker::new(PrimeField::default(), &mut rng, 1 << 30);
        assert_eq!(c.words(), 11);
    }
}
