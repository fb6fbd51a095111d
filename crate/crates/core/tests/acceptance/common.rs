use annostream_core::registry::{GenParams, ProgramKey, ProtocolKind, TumProblemKey};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fail<T>(msg: impl Into<String>) -> Result<T, String> {
    Err(msg.into())
}

/// Largest node count per protocol in the completeness sweep. Protocols whose
/// helper cost grows fast get smaller caps.
fn node_cap(kind: ProtocolKind) -> u64 {
    match kind {
        ProtocolKind::Tum(_) => 8,
        ProtocolKind::Resistance => 10,
        ProtocolKind::Eigen | ProtocolKind::Diameter | ProtocolKind::Sim(ProgramKey::Apsp) => 16,
        _ => 64,
    }
}

/// Instance size for `seed`, with `n <= 64` throughout.
pub fn sweep_params(kind: ProtocolKind, seed: u64) -> GenParams {
    let mut r = rng(seed ^ 0x5eed);
    let mut p = GenParams::default();
    if kind.sized_by_dims() {
        let cap = if kind == ProtocolKind::Matvec { 64 } else { 6 };
        p.b = r.gen_range(1..=cap);
        p.c = r.gen_range(1..=cap);
        if kind == ProtocolKind::LpTradeoff {
            p.c = p.c.max(p.b);
        }
        p.alpha = ["0", "1/4", "1/2", "3/4", "1"][r.gen_range(0..5)].into();
        return p;
    }
    let lo = if matches!(kind, ProtocolKind::Tum(_)) { 3 } else { 2 };
    p.n = r.gen_range(lo..=node_cap(kind));
    if kind == ProtocolKind::Tum(TumProblemKey::Mwbpm) {
        p.n &= !1;
    }
    if varies_density(kind) {
        let n = p.n;
        let max = n * (n - 1) / 2;
        p.m = Some(r.gen_range(n - 1..=(3 * n).min(max)));
    }
    p
}

/// Small instances for the attack runs.
pub fn attack_params(kind: ProtocolKind, seed: u64) -> GenParams {
    let mut r = rng(seed ^ 0xa77ac);
    let mut p = GenParams::default();
    if kind.sized_by_dims() {
        p.b = r.gen_range(3..=5);
        p.c = r.gen_range(p.b..=5);
        return p;
    }
    p.n = r.gen_range(6..=9);
    if kind == ProtocolKind::Tum(TumProblemKey::Mwbpm) {
        p.n &= !1;
    }
    p
}

fn varies_density(kind: ProtocolKind) -> bool {
    matches!(
        kind,
        ProtocolKind::Labels
            | ProtocolKind::Dag
            | ProtocolKind::Matching
            | ProtocolKind::Bipartite
            | ProtocolKind::Diameter
            | ProtocolKind::Bfs
            | ProtocolKind::Dfs
            | ProtocolKind::Sim(ProgramKey::Count)
            | ProtocolKind::Sim(ProgramKey::Mst)
    )
}
