use crate::common::{fail, rng};
use annostream_core::{GenParams, PrimeField, ProtocolKind};

const PROTOCOLS: [&str; 7] = ["dag", "matching", "shortest-path", "mst", "bfs", "dfs", "bipartite"];
const EDGE_EXPONENTS: [u32; 4] = [8, 10, 12, 14];
/// Largest over smallest verifier space across sizes.
const VCOST_SPREAD: f64 = 1.1;
/// Annotation words per stream edge.
const HCOST_PER_EDGE: f64 = 64.0;

pub fn run() -> Result<String, String> {
    let field = PrimeField::default();
    let mut summary = Vec::new();
    for name in PROTOCOLS {
        let kind: ProtocolKind = name.parse().map_err(|_| format!("unknown protocol {name}"))?;
        let mut vcosts = Vec::new();
        let mut per_edge = Vec::new();
        for e in EDGE_EXPONENTS {
            let m = 1u64 << e;
            let p = GenParams { n: m / 4, m: Some(m), ..GenParams::default() };
            let s = kind.generate(&mut rng(e as u64), &p).map_err(|err| format!("{name} m={m}: {}", err.0))?;
            let ann = kind.prove(field, &s).ok_or_else(|| format!("{name} m={m}: no certificate"))?;
            let (out, cost) = kind.run(field, e as u64, &s, &ann);
            if out.is_bottom() {
                return fail(format!("{name} m={m}: honest run rejected: {out:?}"));
            }
            vcosts.push(cost.vcost as f64);
            per_edge.push(cost.hcost as f64 / m as f64);
        }
        let spread = max(&vcosts) / min(&vcosts);
        if spread > VCOST_SPREAD {
            return fail(format!("{name}: vcost {vcosts:?} spread {spread:.3}"));
        }
        if max(&per_edge) > HCOST_PER_EDGE {
            return fail(format!("{name}: hcost/m {per_edge:?} above {HCOST_PER_EDGE}"));
        }
        summary.push(format!("{name}:v={},h/m<={:.1}", vcosts[0], max(&per_edge)));
    }
    Ok(summary.join(" "))
}

pub fn max(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::MIN, f64::max)
}

pub fn min(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::MAX, f64::min)
}
