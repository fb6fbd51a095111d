use crate::common::{fail, rng};
use crate::costs::{max, min};
use annostream_core::{GenParams, PrimeField, ProtocolKind};

const SIZES: [u64; 4] = [8, 16, 32, 64];
const SEEDS: u64 = 3;
/// Largest over smallest normalized cost across sizes.
const SPREAD: f64 = 8.0;

struct Case {
    name: &'static str,
    edges_per_node: u64,
    /// Upper bound on the normalized cost.
    cap: f64,
    model: fn(f64, f64) -> f64,
}

const CASES: [Case; 3] = [
    Case { name: "sssp", edges_per_node: 4, cap: 64.0, model: |n, m| m + n * n.log2() },
    Case { name: "apsp", edges_per_node: 2, cap: 16.0, model: |n, _| n * n * n },
    Case { name: "diameter", edges_per_node: 2, cap: 4.0, model: |n, _| n * n * n.log2() },
];

pub fn run() -> Result<String, String> {
    let field = PrimeField::default();
    let mut summary = Vec::new();
    for case in &CASES {
        let kind: ProtocolKind = case.name.parse().map_err(|_| format!("unknown protocol {}", case.name))?;
        let mut ratios = Vec::new();
        for n in SIZES {
            let m = case.edges_per_node * n;
            let mut total = 0.0;
            for seed in 0..SEEDS {
                let p = GenParams { n, m: Some(m), ..GenParams::default() };
                let s = kind.generate(&mut rng(seed), &p).map_err(|e| format!("{} n={n}: {}", case.name, e.0))?;
                let ann = kind.prove(field, &s).ok_or_else(|| format!("{} n={n}: no certificate", case.name))?;
                let (out, cost) = kind.run(field, seed, &s, &ann);
                if Some(&out) != kind.oracle(&s).as_ref() {
                    return fail(format!("{} n={n} seed {seed}: {out:?} disagrees with the oracle", case.name));
                }
                total += cost.hcost as f64 / (case.model)(n as f64, m as f64);
            }
            ratios.push(total / SEEDS as f64);
        }
        if max(&ratios) > case.cap {
            return fail(format!("{}: normalized hcost {ratios:?} above {}", case.name, case.cap));
        }
        if max(&ratios) / min(&ratios) > SPREAD {
            return fail(format!("{}: normalized hcost {ratios:?} not flat", case.name));
        }
        let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
        summary.push(format!("{}=[{}]", case.name, shown.join(",")));
    }
    Ok(summary.join(" "))
}
