use crate::common::{attack_params, fail, rng};
use annostream_core::{attack, MutationKind, PrimeField, ProtocolKind};
use std::collections::BTreeMap;

const MIN_TRIALS: usize = 500;
const MIN_RATE: f64 = 0.99;
const PER_INSTANCE: usize = 125;
const MAX_INSTANCES: u64 = 40;

pub fn run() -> Result<String, String> {
    let field = PrimeField::default();
    if field.modulus() != (1 << 61) - 1 {
        return fail("default field is not 2^61 - 1");
    }
    let mut cells = 0;
    let mut worst = (1.0f64, String::new());
    for kind in ProtocolKind::ALL {
        let mut tally: BTreeMap<MutationKind, (usize, usize)> = BTreeMap::new();
        for seed in 0..MAX_INSTANCES {
            let pending: Vec<MutationKind> = MutationKind::ALL
                .into_iter()
                .filter(|mk| tally.get(mk).map_or(0, |t| t.0) < MIN_TRIALS)
                .collect();
            if pending.is_empty() {
                break;
            }
            let s = kind.generate(&mut rng(seed), &attack_params(kind, seed)).map_err(|e| format!("{kind}: {}", e.0))?;
            let honest = kind.prove(field, &s).ok_or_else(|| format!("{kind} seed {seed}: no certificate"))?;
            for row in attack(kind, field, &s, &honest, &pending, PER_INSTANCE, seed) {
                let t = tally.entry(row.kind).or_default();
                t.0 += row.trials;
                t.1 += row.rejected;
            }
        }
        for mk in MutationKind::ALL {
            let (trials, rejected) = tally.get(&mk).copied().unwrap_or_default();
            if trials == 0 && mk == MutationKind::WrongAnswer && kind.accepts_only() {
                continue;
            }
            if trials < MIN_TRIALS {
                return fail(format!("{kind} {mk}: only {trials} attacked runs"));
            }
            let rate = rejected as f64 / trials as f64;
            if rate < MIN_RATE {
                return fail(format!("{kind} {mk}: rejection rate {rate:.4} over {trials} runs"));
            }
            if rate <= worst.0 {
                worst = (rate, format!("{kind} {mk}"));
            }
            cells += 1;
        }
    }
    Ok(format!("{cells} protocol/mutation cells, lowest rate {:.4} ({})", worst.0, worst.1))
}
