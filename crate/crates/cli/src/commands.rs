use crate::report::Record;
use crate::{CliError, CliResult};
use annostream_core::{attack as run_attack, Annotation, GenParams, MutationKind, Outcome, PrimeField, ProtocolKind, Stream};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

pub fn field() -> Result<PrimeField, CliError> {
    PrimeField::from_env().map_err(|e| CliError::Usage(format!("ANNOSTREAM_FIELD_P: {e}")))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn read_stream(path: &Path) -> Result<Stream, CliError> {
    Stream::parse(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn read_annotation(path: &Path) -> Result<Annotation, CliError> {
    Annotation::parse(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Failed(e.to_string())),
    }
}

pub fn generate(kind: ProtocolKind, p: &GenParams, seed: u64) -> Result<Stream, CliError> {
    kind.generate(&mut ChaCha8Rng::seed_from_u64(seed), p).map_err(|e| CliError::Usage(e.0))
}

pub fn honest(kind: ProtocolKind, field: PrimeField, s: &Stream) -> Result<Annotation, CliError> {
    kind.prove(field, s).ok_or_else(|| CliError::Failed(format!("{kind}: the instance has no certificate")))
}

pub fn gen(kind: ProtocolKind, p: &GenParams, seed: u64, out: Option<&Path>) -> CliResult {
    write_out(out, &generate(kind, p, seed)?.to_text())?;
    Ok(ExitCode::SUCCESS)
}

pub fn prove(kind: ProtocolKind, input: &Path, out: Option<&Path>) -> CliResult {
    let s = read_stream(input)?;
    write_out(out, &honest(kind, field()?, &s)?.to_text())?;
    Ok(ExitCode::SUCCESS)
}

pub fn verify(kind: ProtocolKind, input: &Path, ann: &Path, seed: Option<u64>, human: bool) -> CliResult {
    let field = field()?;
    let s = read_stream(input)?;
    let ann = read_annotation(ann)?;
    if ann.header.protocol != kind.name() {
        return Err(CliError::Usage(format!("annotation is for protocol {:?}, not {kind}", ann.header.protocol)));
    }
    let (out, cost) = kind.run(field, seed.unwrap_or_else(rand::random), &s, &ann);
    let mut rec = Record::new().with("protocol", kind);
    rec = match &out {
        Outcome::Value(v) => rec.with("outcome", "value").with("value", v),
        Outcome::Accept => rec.with("outcome", "accept"),
        Outcome::Bottom(r) => rec.with("outcome", "bottom").with("reason", r.reason.code()).with("detail", &r.detail),
    };
    let rec = rec.with("hcost", cost.hcost).with("vcost", cost.vcost).with("m", cost.m);
    println!("{}", rec.render(human));
    Ok(if out.is_bottom() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

pub fn attack(
    kind: ProtocolKind,
    input: &Path,
    ann: Option<&Path>,
    kinds: &[MutationKind],
    trials: usize,
    seed: u64,
    human: bool,
) -> CliResult {
    let field = field()?;
    let s = read_stream(input)?;
    let base = match ann {
        Some(p) => read_annotation(p)?,
        None => honest(kind, field, &s)?,
    };
    let rows = run_attack(kind, field, &s, &base, kinds, trials, seed);
    for mk in kinds {
        let rec = Record::new().with("protocol", kind).with("mutation", mk);
        let rec = match rows.iter().find(|r| r.kind == *mk) {
            Some(r) => rec.with("trials", r.trials).with("rejected", r.rejected).with("rate", format!("{:.4}", r.rate())),
            None => rec.with("trials", 0).with("applicable", false),
        };
        println!("{}", rec.render(human));
    }
    Ok(ExitCode::SUCCESS)
}
