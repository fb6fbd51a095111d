//! Verifier and honest prover for simulated programs.

use super::{listed_items, Abort, Layout, Listing, Loader, Program, Ram, Run, REGISTERS};
use crate::annotation::{AnnHeader, AnnToken, Annotation, Tag};
use crate::field::PrimeField;
use crate::fingerprint::TupleFingerprint;
use crate::memcheck::{MemChecker, MemOp, MemRow, TracedMemory, VALUE_MAX};
use crate::protocol::{ensure, reject, Answer, Outcome, Reason, Reject, Verifier};
use crate::stream::{Stream, StreamHeader, StreamToken};
use corosensei::{Coroutine, CoroutineResult, Yielder};
use rand::Rng;

enum Request {
    Op(u64, MemOp),
    Output(u64),
}

struct YieldRam<'a> {
    y: &'a Yielder<u64, Request>,
}

impl Ram for YieldRam<'_> {
    fn read(&mut self, addr: u64) -> Result<u64, Abort> {
        Ok(self.y.suspend(Request::Op(addr, MemOp::Read)))
    }

    fn write(&mut self, addr: u64, value: u64) -> Run {
        self.y.suspend(Request::Op(addr, MemOp::Write(value)));
        Ok(())
    }

    fn output(&mut self, value: u64) -> Run {
        self.y.suspend(Request::Output(value));
        Ok(())
    }
}

/// What the program does next.
enum Next {
    Op(u64, MemOp),
    Done(Run),
}

/// The program suspended between memory operations.
struct Machine {
    co: Coroutine<u64, Request, Run>,
    next: Next,
    outputs: Vec<u64>,
}

impl Machine {
    fn start(program: Program, layout: Layout) -> Self {
        let co = Coroutine::new(move |y: &Yielder<u64, Request>, _| program.run(&mut YieldRam { y }, &layout));
        let mut m = Self { co, next: Next::Done(Ok(())), outputs: Vec::new() };
        m.resume(0);
        m
    }

    fn resume(&mut self, input: u64) {
        let mut r = self.co.resume(input);
        loop {
            match r {
                CoroutineResult::Yield(Request::Output(v)) => {
                    self.outputs.push(v);
                    r = self.co.resume(0);
                }
                CoroutineResult::Yield(Request::Op(a, op)) => return self.next = Next::Op(a, op),
                CoroutineResult::Return(run) => return self.next = Next::Done(run),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Load,
    Run,
    Halted,
}

/// Streams the input into a fingerprint, rebuilds memory from the listing,
/// then steps the program against the transcript.
pub struct SimVerifier {
    program: Program,
    layout: Layout,
    directed: bool,
    mem: MemChecker,
    stream_fp: TupleFingerprint<3>,
    list_fp: TupleFingerprint<3>,
    loader: Loader,
    seen: u64,
    steps: u64,
    phase: Phase,
    machine: Option<Machine>,
}

impl SimVerifier {
    pub fn new<R: Rng + ?Sized>(
        program: Program,
        field: PrimeField,
        rng: &mut R,
        header: &StreamHeader,
    ) -> Result<Self, Reject> {
        ensure(program.accepts(header.kind), Reason::Structure, || {
            format!("{} does not run on {} streams", program.name(), header.kind.as_str())
        })?;
        ensure(header.n >= 1, Reason::Domain, || "empty node set".into())?;
        let layout = Layout::new(program.listing(), header);
        let mut mem = MemChecker::new(field, rng, program.addr_max(&layout));
        let stream_fp = TupleFingerprint::random(field, rng);
        let loader = Loader::new(program.listing(), layout);
        loader.prologue(&mut |a, v| mem.fresh_write(a, v))?;
        Ok(Self {
            program,
            layout,
            directed: header.kind.is_directed(),
            mem,
            list_fp: stream_fp.empty_like(),
            stream_fp,
            loader,
            seen: 0,
            steps: 0,
            phase: Phase::Load,
            machine: None,
        })
    }

    fn load_tag(&self) -> Option<Tag> {
        match self.program.listing() {
            Listing::None => None,
            Listing::Adjacency => Some(Tag::SimLoad),
            Listing::ByWeight => Some(Tag::SimGuess),
        }
    }

    fn end_load(&mut self) -> Result<(), Reject> {
        let mem = &mut self.mem;
        self.loader.finish(&mut |a, v| mem.fresh_write(a, v))?;
        ensure(self.seen == self.layout.m, Reason::Structure, || {
            format!("stream has {} edges, header says {}", self.seen, self.layout.m)
        })?;
        ensure(self.list_fp.acc() == self.stream_fp.acc(), Reason::EdgesMismatch, || {
            "listing differs from the stream".into()
        })?;
        self.machine = Some(Machine::start(self.program, self.layout));
        self.phase = Phase::Run;
        Ok(())
    }

    fn row(&mut self, row: MemRow) -> Result<(), Reject> {
        self.steps += 1;
        ensure(self.steps <= self.program.step_bound(&self.layout), Reason::LocalCheck, || {
            "program exceeds its step bound".into()
        })?;
        let m = self.machine.as_mut().expect("running");
        match m.next {
            Next::Op(a, op) => ensure(a == row.addr && op == row.op, Reason::Transcript, || {
                format!("row {} is {:?} at {}, program wants {:?} at {a}", row.t, row.op, row.addr, op)
            })?,
            Next::Done(_) => return reject(Reason::Transcript, "transcript continues after the program halts"),
        }
        self.mem.step(&row)?;
        m.resume(if row.op == MemOp::Read { row.value } else { 0 });
        Ok(())
    }

    fn halt(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        tok.expect_len(1)?;
        let k = tok.int_in(0, 0, i64::MAX)? as usize;
        let m = self.machine.as_ref().expect("running");
        match &m.next {
            Next::Op(..) => return reject(Reason::Transcript, "transcript ends before the program halts"),
            Next::Done(Err(Abort::Fail(why))) => return reject(Reason::LocalCheck, why.clone()),
            Next::Done(Err(Abort::Detached)) => return reject(Reason::Transcript, "program detached"),
            Next::Done(Ok(())) => {}
        }
        ensure(m.outputs.len() == k, Reason::ClaimMismatch, || {
            format!("program produced {} outputs, halt claims {k}", m.outputs.len())
        })?;
        self.phase = Phase::Halted;
        Ok(())
    }
}

impl Verifier for SimVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        self.seen += 1;
        for item in listed_items(self.program.listing(), self.directed, tok)? {
            self.stream_fp.update(item, 1);
        }
        Ok(())
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        if self.phase == Phase::Load {
            if Some(tok.tag) == self.load_tag() {
                tok.expect_len(3)?;
                let word = |k| tok.int_in(k, 0, VALUE_MAX as i64).map(|x| x as u64);
                let item = [word(0)?, word(1)?, word(2)?];
                self.list_fp.update(item, 1);
                let mem = &mut self.mem;
                return self.loader.push(item, &mut |a, v| mem.fresh_write(a, v));
            }
            self.end_load()?;
        }
        match (self.phase, tok.tag) {
            (Phase::Run, Tag::MemRow) => self.row(MemRow::parse(tok)?),
            (Phase::Run, Tag::SimHalt) => self.halt(tok),
            (Phase::Halted, Tag::MemEpilogue) => self.mem.epilogue_token(tok),
            (_, other) => reject(Reason::Structure, format!("unexpected {} token", other.as_str())),
        }
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        ensure(self.phase == Phase::Halted, Reason::Structure, || "missing SIM-HALT".into())?;
        self.mem.finish()?;
        let out = &self.machine.as_ref().expect("halted").outputs;
        let answer = match self.program {
            Program::Count | Program::Mst => Answer::Int(out[0] as i128),
            Program::Sssp | Program::Apsp => Answer::Ints(out.iter().map(|&x| x as i128).collect()),
        };
        Ok(Outcome::Value(answer))
    }

    fn words(&self) -> usize {
        self.mem.words() + self.stream_fp.words() + self.list_fp.words() + REGISTERS + 6
    }
}

/// Memory that serves the honest prover and records every operation.
struct HonestRam<'a> {
    mem: &'a mut TracedMemory,
    outputs: Vec<u64>,
}

impl Ram for HonestRam<'_> {
    fn read(&mut self, addr: u64) -> Result<u64, Abort> {
        Ok(self.mem.read(addr))
    }

    fn write(&mut self, addr: u64, value: u64) -> Run {
        if value > VALUE_MAX {
            return Err(Abort::Fail("value too large".into()));
        }
        self.mem.write(addr, value);
        Ok(())
    }

    fn output(&mut self, value: u64) -> Run {
        self.outputs.push(value);
        Ok(())
    }
}

/// Honest transcript, or `None` when the program rejects the input.
pub fn prove_program(program: Program, s: &Stream) -> Option<Annotation> {
    let listing = program.listing();
    let directed = s.header.kind.is_directed();
    let mut items = Vec::new();
    for tok in &s.tokens {
        items.extend(listed_items(listing, directed, tok).ok()?);
    }
    match listing {
        Listing::ByWeight => items.sort_by_key(|it| it[2]),
        _ => items.sort_by_key(|it| it[0]),
    }
    let layout = Layout::new(listing, &s.header);
    let mut mem = TracedMemory::new();
    let mut loader = Loader::new(listing, layout);
    let mut sink = |a, v| {
        mem.write(a, v);
        Ok(())
    };
    loader.prologue(&mut sink).ok()?;
    for &it in &items {
        loader.push(it, &mut sink).ok()?;
    }
    loader.finish(&mut sink).ok()?;
    let skip = mem.rows.len();
    let mut ram = HonestRam { mem: &mut mem, outputs: Vec::new() };
    program.run(&mut ram, &layout).ok()?;
    let outputs = ram.outputs.len();
    if (mem.rows.len() - skip) as u64 > program.step_bound(&layout) {
        return None;
    }

    let mut ann = Annotation::new(AnnHeader::new(program.name()));
    let tag = if listing == Listing::ByWeight { Tag::SimGuess } else { Tag::SimLoad };
    for [u, v, w] in items {
        ann.push_ints(tag, &[u as i64, v as i64, w as i64]);
    }
    ann.tokens.extend(mem.rows[skip..].iter().map(MemRow::token));
    ann.push_ints(Tag::SimHalt, &[outputs as i64]);
    ann.tokens.extend(mem.epilogue_tokens());
    Some(ann)
}
