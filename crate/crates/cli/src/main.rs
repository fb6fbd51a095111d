mod bench;
mod commands;
mod report;

use annostream_core::{GenParams, MutationKind, ProtocolKind};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Generate stream instances, annotate them, and check annotations with a
/// small-space one-pass verifier.
#[derive(Debug, Parser)]
#[command(name = "annostream", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print reports as aligned `key: value` lines instead of one `key=value` line.
    #[arg(long, global = true)]
    human: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random instance for a protocol.
    Gen {
        #[command(flatten)]
        protocol: ProtocolArg,
        #[command(flatten)]
        size: SizeArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the honest annotation for a stream.
    Prove {
        #[command(flatten)]
        protocol: ProtocolArg,
        /// Stream file.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verifier over a stream and an annotation.
    Verify {
        #[command(flatten)]
        protocol: ProtocolArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        ann: PathBuf,
        /// Verifier randomness (default: drawn from the OS).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Mutate an annotation many times and report how often the verifier rejects.
    Attack {
        #[command(flatten)]
        protocol: ProtocolArg,
        #[arg(long = "in")]
        input: PathBuf,
        /// Annotation to mutate (default: the honest one).
        #[arg(long)]
        ann: Option<PathBuf>,
        /// Mutation kind, or `all`.
        #[arg(long, default_value = "all")]
        mutate: String,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Measure helper and verifier cost over a ladder of sizes.
    Bench {
        #[command(flatten)]
        protocol: ProtocolArg,
        #[command(flatten)]
        size: SizeArgs,
        /// Parameter to vary and its values, e.g. `m=256,1024,4096` or `alpha=0,1/2`.
        #[arg(long)]
        ladder: Option<String>,
        /// Instances per size.
        #[arg(long, default_value_t = 3)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct ProtocolArg {
    /// Protocol tag, e.g. `dag`, `matching`, `lp`, `mst`.
    #[arg(long)]
    protocol: String,
}

#[derive(Debug, Args, Clone)]
struct SizeArgs {
    /// Nodes.
    #[arg(long)]
    n: Option<u64>,
    /// Edges (default depends on the protocol).
    #[arg(long)]
    m: Option<u64>,
    /// Matrix or LP rows.
    #[arg(long)]
    b: Option<u64>,
    /// Matrix or LP columns.
    #[arg(long)]
    c: Option<u64>,
    /// Column split exponent, e.g. `1/2`.
    #[arg(long)]
    alpha: Option<String>,
}

impl SizeArgs {
    fn params(&self) -> GenParams {
        let d = GenParams::default();
        GenParams {
            n: self.n.unwrap_or(d.n),
            m: self.m,
            b: self.b.unwrap_or(d.b),
            c: self.c.unwrap_or(d.c),
            alpha: self.alpha.clone().unwrap_or(d.alpha),
        }
    }
}

/// A failed command. Usage errors exit 2, rejections and missing
/// certificates exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

pub type CliResult = Result<ExitCode, CliError>;

impl ProtocolArg {
    fn kind(&self) -> Result<ProtocolKind, CliError> {
        self.protocol.parse().map_err(|e: annostream_core::UsageError| CliError::Usage(e.0))
    }
}

fn mutations(list: &str) -> Result<Vec<MutationKind>, CliError> {
    if list == "all" {
        return Ok(MutationKind::ALL.to_vec());
    }
    list.split(',').map(|s| s.trim().parse::<MutationKind>().map_err(|_| CliError::Usage(format!("unknown mutation {s:?}")))).collect()
}

fn dispatch(cli: Cli) -> CliResult {
    let human = cli.human;
    match cli.command {
        Command::Gen { protocol, size, seed, out } => commands::gen(protocol.kind()?, &size.params(), seed, out.as_deref()),
        Command::Prove { protocol, input, out } => commands::prove(protocol.kind()?, &input, out.as_deref()),
        Command::Verify { protocol, input, ann, seed } => commands::verify(protocol.kind()?, &input, &ann, seed, human),
        Command::Attack { protocol, input, ann, mutate, trials, seed } => {
            commands::attack(protocol.kind()?, &input, ann.as_deref(), &mutations(&mutate)?, trials, seed, human)
        }
        Command::Bench { protocol, size, ladder, trials, seed } => {
            bench::run(protocol.kind()?, &size, ladder.as_deref(), trials, seed, human)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
