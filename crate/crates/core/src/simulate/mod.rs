//! Generic RAM simulation over checked memory. The verifier loads the input
//! graph into memory itself, then runs a fixed program whose every memory
//! operation is supplied (and checked) by the annotation transcript.

pub mod programs;
mod runner;

pub use programs::Program;
pub use runner::{prove_program, SimVerifier};

use crate::protocol::{ensure, Reason, Reject};
use crate::stream::{StreamHeader, StreamToken};

/// Distance reported for unreachable nodes.
pub const INF: u64 = 1 << 40;

/// Register words a program may hold besides checked memory.
pub const REGISTERS: usize = 16;

/// Reason a program stopped early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Abort {
    /// The program itself rejected its input.
    Fail(String),
    /// The driving side went away.
    Detached,
}

pub type Run = Result<(), Abort>;

/// Memory as seen by a program.
pub trait Ram {
    fn read(&mut self, addr: u64) -> Result<u64, Abort>;
    fn write(&mut self, addr: u64, value: u64) -> Run;
    fn output(&mut self, value: u64) -> Run;
}

/// How input items are listed before the program starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Listing {
    /// Nothing is loaded beyond the size cells.
    None,
    /// Adjacency entries grouped by owner; undirected edges appear twice.
    Adjacency,
    /// Edges `(u, v, w)` by nondecreasing weight.
    ByWeight,
}

/// Fixed memory map shared by the loader and every program.
///
/// Cells 1..=4 hold `n`, `m`, the number of listed entries and the source
/// node; `off(u)` for `u = 1..=n+1` follows; then the entry area, then the
/// program's work area.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n: u64,
    pub m: u64,
    pub entries: u64,
    pub source: u64,
    pub width: u64,
    pub work: u64,
}

impl Layout {
    pub fn new(listing: Listing, header: &StreamHeader) -> Self {
        let (n, m) = (header.n, header.m);
        let entries = match listing {
            Listing::None => 0,
            Listing::Adjacency if !header.kind.is_directed() => 2 * m,
            _ => m,
        };
        let width = if listing == Listing::ByWeight { 3 } else { 2 };
        let source = header.get_u64("s").unwrap_or(1);
        Self { n, m, entries, source, width, work: n + 6 + width * entries }
    }

    pub fn off(&self, u: u64) -> u64 {
        4 + u
    }

    /// First cell of entry `k` (1-based).
    pub fn entry(&self, k: u64) -> u64 {
        self.n + 6 + self.width * (k - 1)
    }
}

/// `(u, v, w)` items a stream token contributes to the listing.
pub fn listed_items(listing: Listing, directed: bool, tok: &StreamToken) -> Result<Vec<[u64; 3]>, Reject> {
    let (u, v, w) = match *tok {
        StreamToken::Edge(u, v) | StreamToken::DirectedEdge(u, v) => (u, v, 1),
        StreamToken::WeightedEdge(u, v, w) => (u, v, w),
        _ => return Err(Reject::new(Reason::Structure, "simulation expects a graph stream")),
    };
    Ok(match listing {
        Listing::None => vec![],
        Listing::Adjacency if directed => vec![[u, v, w]],
        Listing::Adjacency => vec![[u, v, w], [v, u, w]],
        Listing::ByWeight => vec![[u.min(v), u.max(v), w]],
    })
}

/// Turns listed items into verifier-side memory writes. Streaming: holds the
/// last owner or weight and a counter.
#[derive(Debug, Clone)]
pub struct Loader {
    listing: Listing,
    layout: Layout,
    count: u64,
    last: u64,
}

impl Loader {
    pub fn new(listing: Listing, layout: Layout) -> Self {
        Self { listing, layout, count: 0, last: 0 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Writes for the size cells; issued before any item.
    pub fn prologue(&self, sink: &mut dyn FnMut(u64, u64) -> Result<(), Reject>) -> Result<(), Reject> {
        let l = &self.layout;
        for (a, v) in [(1, l.n), (2, l.m), (3, l.entries), (4, l.source)] {
            sink(a, v)?;
        }
        Ok(())
    }

    pub fn push(&mut self, item: [u64; 3], sink: &mut dyn FnMut(u64, u64) -> Result<(), Reject>) -> Result<(), Reject> {
        let l = self.layout;
        let [u, v, w] = item;
        ensure(self.count < l.entries, Reason::Structure, || "too many listed entries".into())?;
        ensure((1..=l.n).contains(&u) && (1..=l.n).contains(&v), Reason::Domain, || format!("node out of range in ({u}, {v})"))?;
        self.count += 1;
        let k = self.count;
        match self.listing {
            Listing::None => unreachable!("entries is zero"),
            Listing::Adjacency => {
                ensure(u >= self.last, Reason::LocalCheck, || format!("owner {u} listed after {}", self.last))?;
                for owner in self.last + 1..=u {
                    sink(l.off(owner), k)?;
                }
                self.last = u;
                sink(l.entry(k), v)?;
                sink(l.entry(k) + 1, w)
            }
            Listing::ByWeight => {
                ensure(w >= self.last, Reason::LocalCheck, || format!("weight {w} listed after {}", self.last))?;
                self.last = w;
                for (i, x) in [u, v, w].into_iter().enumerate() {
                    sink(l.entry(k) + i as u64, x)?;
                }
                Ok(())
            }
        }
    }

    /// Remaining offsets once every entry has been listed.
    pub fn finish(&mut self, sink: &mut dyn FnMut(u64, u64) -> Result<(), Reject>) -> Result<(), Reject> {
        let l = self.layout;
        ensure(self.count == l.entries, Reason::Structure, || format!("listed {} of {} entries", self.count, l.entries))?;
        if self.listing == Listing::Adjacency {
            for owner in self.last + 1..=l.n + 1 {
                sink(l.off(owner), l.entries + 1)?;
            }
            self.last = l.n + 1;
        }
        Ok(())
    }
}
