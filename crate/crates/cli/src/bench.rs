use crate::commands::{field, generate, honest};
use crate::report::Record;
use crate::{CliError, CliResult, SizeArgs};
use annostream_core::{GenParams, ProtocolKind};
use rayon::prelude::*;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Param {
    N,
    M,
    B,
    C,
    Alpha,
}

fn parse_ladder(text: &str) -> Result<(Param, Vec<String>), CliError> {
    let usage = || CliError::Usage(format!("ladder {text:?} should look like m=256,1024,4096"));
    let (name, values) = text.split_once('=').ok_or_else(usage)?;
    let param = match name.trim() {
        "n" => Param::N,
        "m" => Param::M,
        "b" => Param::B,
        "c" => Param::C,
        "alpha" => Param::Alpha,
        _ => return Err(usage()),
    };
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(usage());
    }
    Ok((param, values))
}

fn default_ladder(kind: ProtocolKind) -> (Param, Vec<String>) {
    let values: &[&str] = if kind.sized_by_dims() { &["16", "64", "256"] } else { &["8", "16", "32", "64"] };
    (if kind.sized_by_dims() { Param::C } else { Param::N }, values.iter().map(|v| v.to_string()).collect())
}

/// Smallest `n` whose simple graph holds `m` edges.
fn nodes_for(m: u64) -> u64 {
    let mut n = 2;
    while n * (n - 1) / 2 < m {
        n += 1;
    }
    n.max(m / 4)
}

fn params_at(base: &SizeArgs, param: Param, value: &str) -> Result<GenParams, CliError> {
    let num = || value.parse::<u64>().map_err(|_| CliError::Usage(format!("ladder value {value:?} is not an integer")));
    let mut p = base.params();
    match param {
        Param::N => p.n = num()?,
        Param::M => {
            p.m = Some(num()?);
            if base.n.is_none() {
                p.n = nodes_for(num()?);
            }
        }
        Param::B => {
            p.b = num()?;
            if base.c.is_none() {
                p.c = p.b;
            }
        }
        Param::C => {
            p.c = num()?;
            if base.b.is_none() {
                p.b = p.c;
            }
        }
        Param::Alpha => p.alpha = value.to_string(),
    }
    Ok(p)
}

struct Sample {
    step: usize,
    seed: u64,
    hcost: u64,
    vcost: u64,
    rejected: bool,
    wall_ms: f64,
}

pub fn run(kind: ProtocolKind, size: &SizeArgs, ladder: Option<&str>, trials: u64, seed: u64, human: bool) -> CliResult {
    let field = field()?;
    let (param, values) = match ladder {
        Some(text) => parse_ladder(text)?,
        None => default_ladder(kind),
    };
    let jobs: Vec<(usize, GenParams, u64)> = values
        .iter()
        .enumerate()
        .map(|(step, v)| params_at(size, param, v).map(|p| (0..trials).map(move |t| (step, p.clone(), seed + t))))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut samples: Vec<Sample> = jobs
        .par_iter()
        .map(|(step, p, seed)| {
            let s = generate(kind, p, *seed)?;
            let start = Instant::now();
            let ann = honest(kind, field, &s)?;
            let (out, cost) = kind.run(field, *seed, &s, &ann);
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(Sample { step: *step, seed: *seed, hcost: cost.hcost, vcost: cost.vcost, rejected: out.is_bottom(), wall_ms })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    samples.sort_by_key(|s| (s.step, s.seed));

    let name = match param {
        Param::N => "n",
        Param::M => "m",
        Param::B => "b",
        Param::C => "c",
        Param::Alpha => "alpha",
    };
    if human {
        println!("{:>8} {:>12} {:>8} {:>12} {:>8}", name, "hcost", "vcost", "wall_ms", "rejected");
    }
    let mut any_rejected = false;
    for (step, value) in values.iter().enumerate() {
        let rows: Vec<&Sample> = samples.iter().filter(|s| s.step == step).collect();
        let k = rows.len().max(1) as f64;
        let hcost = rows.iter().map(|s| s.hcost as f64).sum::<f64>() / k;
        let vcost = rows.iter().map(|s| s.vcost).max().unwrap_or(0);
        let wall = rows.iter().map(|s| s.wall_ms).sum::<f64>() / k;
        let rejected = rows.iter().filter(|s| s.rejected).count();
        any_rejected |= rejected > 0;
        if human {
            println!("{value:>8} {hcost:>12.1} {vcost:>8} {wall:>12.3} {rejected:>8}");
        } else {
            let rec = Record::new()
                .with("protocol", kind)
                .with(name, value)
                .with("trials", rows.len())
                .with("hcost", format!("{hcost:.1}"))
                .with("vcost", vcost)
                .with("wall_ms", format!("{wall:.3}"))
                .with("rejected", rejected);
            println!("{}", rec.render(false));
        }
    }
    Ok(if any_rejected { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_syntax() {
        let (p, v) = parse_ladder("m=256, 1024").unwrap();
        assert_eq!(p, Param::M);
        assert_eq!(v, vec!["256", "1024"]);
        assert!(parse_ladder("q=1").is_err());
        assert!(parse_ladder("m=").is_err());
    }

    #[test]
    fn edge_ladder_picks_enough_nodes() {
        for m in [1, 10, 256, 16384] {
            let n = nodes_for(m);
            assert!(n * (n - 1) / 2 >= m);
        }
        assert_eq!(nodes_for(16384), 4096);
    }
}
