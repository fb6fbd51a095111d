use crate::common::{fail, rng};
use annostream_core::algebra::matvec::{gen_matvec, matvec_product};
use annostream_core::{Answer, Outcome, PrimeField, ProtocolKind};
use std::time::{Duration, Instant};

const B: u64 = 4096;
const C: u64 = 4096;
const NONZEROS_PER_ROW: usize = 4;
const SPLITS: [(&str, f64); 4] = [("0", 0.0), ("1/4", 0.25), ("1/2", 0.5), ("3/4", 0.75)];
/// Each measured cost must be within this factor of its model.
const FACTOR: f64 = 2.0;
const BUDGET: Duration = Duration::from_secs(120);

pub fn run() -> Result<String, String> {
    let field = PrimeField::default();
    let start = Instant::now();
    let kind = ProtocolKind::Matvec;
    // (measured, model without K) for vcost and hcost at every split.
    let mut points = Vec::new();
    for (k, (alpha, a)) in SPLITS.iter().enumerate() {
        let s = gen_matvec(&mut rng(k as u64), B, C, NONZEROS_PER_ROW, alpha);
        let ann = kind.prove(field, &s).ok_or("no certificate")?;
        let (out, cost) = kind.run(field, k as u64, &s, &ann);
        let expect = matvec_product(&s).ok_or("no product")?;
        if out != Outcome::Value(Answer::Ints(expect)) {
            return fail(format!("alpha={alpha}: wrong product or rejected"));
        }
        let c = C as f64;
        points.push((format!("v@{alpha}"), cost.vcost as f64, c.powf(1.0 - a)));
        points.push((format!("h@{alpha}"), cost.hcost as f64, B as f64 * c.powf(*a)));
    }
    let log_k = points.iter().map(|(_, got, model)| (got / model).ln()).sum::<f64>() / points.len() as f64;
    let k = log_k.exp();
    for (what, got, model) in &points {
        let ratio = got / (k * model);
        if !(1.0 / FACTOR..=FACTOR).contains(&ratio) {
            return fail(format!("{what}: {got} is {ratio:.2}x of K*model with K={k:.3}"));
        }
    }
    let took = start.elapsed();
    if took > BUDGET {
        return fail(format!("took {took:?}, budget {BUDGET:?}"));
    }
    let shown: Vec<String> = points.iter().map(|(w, got, _)| format!("{w}={got}")).collect();
    Ok(format!("K={k:.3} {}", shown.join(" ")))
}
