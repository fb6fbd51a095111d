use crate::common::{fail, rng, sweep_params};
use annostream_core::{PrimeField, ProtocolKind};
use std::time::{Duration, Instant};

const INSTANCES: u64 = 1000;
const BUDGET: Duration = Duration::from_secs(300);

pub fn run() -> Result<String, String> {
    let field = PrimeField::default();
    let start = Instant::now();
    for kind in ProtocolKind::ALL {
        for seed in 0..INSTANCES {
            let p = sweep_params(kind, seed);
            let s = kind.generate(&mut rng(seed), &p).map_err(|e| format!("{kind} seed {seed}: {}", e.0))?;
            let Some(expect) = kind.oracle(&s) else { return fail(format!("{kind} seed {seed}: oracle has no answer")) };
            let Some(ann) = kind.prove(field, &s) else { return fail(format!("{kind} seed {seed}: no certificate")) };
            let (out, _) = kind.run(field, seed, &s, &ann);
            if out != expect {
                return fail(format!("{kind} seed {seed} {p:?}: got {out:?}, oracle {expect:?}"));
            }
        }
    }
    let took = start.elapsed();
    if took > BUDGET {
        return fail(format!("took {took:?}, budget {BUDGET:?}"));
    }
    Ok(format!("{} protocols x {INSTANCES} instances, all match", ProtocolKind::ALL.len()))
}
