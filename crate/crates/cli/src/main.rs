mod error;
mod ops;
mod shard;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use piggyback::analysis::{self, SweepRow};
use piggyback::{CodeParams, GeneratorFamily};

use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "pgb", version, about = "Piggybacked erasure coding for shard files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a file into n shard files
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Rebuild the original file from the shards in a directory
    Decode {
        #[arg(long)]
        in_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild one lost shard, reading only the symbols repair needs
    Repair {
        #[arg(long)]
        node: usize,
        #[arg(long)]
        in_dir: PathBuf,
        #[arg(long, value_enum)]
        report: Option<ReportFormat>,
    },
    /// Rebuild several lost shards at once
    Recover {
        #[arg(long, value_delimiter = ',', required = true)]
        nodes: Vec<usize>,
        #[arg(long)]
        in_dir: PathBuf,
    },
    /// Run invariant checks for a parameter tuple
    Verify {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_enum, default_value_t = Family::Rs)]
        family: Family,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Ratio and overhead tables as CSV on stdout
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    design: u8,
    #[arg(short)]
    n: usize,
    #[arg(short)]
    k: usize,
    #[arg(short)]
    s: usize,
    #[arg(long)]
    kprime: Option<usize>,
    #[arg(short, default_value_t = 16)]
    w: u8,
}

impl CodeArgs {
    fn params(&self) -> CliResult<CodeParams> {
        let kprime = match (self.design, self.kprime) {
            (1, None) => return Err(CliError::Parameter("design 1 requires --kprime".into())),
            (1, Some(0)) => return Err(CliError::Parameter("design 1 requires k' >= 1; use --design 2".into())),
            (2, Some(kp)) if kp != 0 => return Err(CliError::Parameter("design 2 has k' = 0".into())),
            (_, kp) => kp.unwrap_or(0),
        };
        Ok(CodeParams::new(self.n, self.k, self.s, kprime, self.w)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    /// Vandermonde over distinct points made systematic; MDS for n <= 2^w
    Rs,
    /// Parity row j has entries eta^(c (j - 1)); not always MDS
    Literal,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepVariant {
    #[value(name = "design1_mds")]
    Design1Mds,
    /// k' = k - s r - 1
    #[value(name = "design1")]
    Design1,
    #[value(name = "design2")]
    Design2,
}

#[derive(Subcommand)]
enum Analyze {
    /// One parameter tuple
    Gamma {
        #[command(flatten)]
        code: CodeArgs,
    },
    /// k' = k bounds for every s in range
    Bounds {
        #[arg(short)]
        r: usize,
        #[arg(long)]
        k_min: usize,
        #[arg(long)]
        k_max: usize,
        #[arg(long, default_value_t = 1)]
        s_min: usize,
        /// Defaults to r - 2
        #[arg(long)]
        s_max: Option<usize>,
    },
    /// Fixed r, k over a range, with the OOP baseline alongside
    Sweep {
        #[arg(short)]
        r: usize,
        #[arg(long)]
        k_min: usize,
        #[arg(long)]
        k_max: usize,
        #[arg(long, value_enum, default_value_t = SweepVariant::Design1Mds)]
        variant: SweepVariant,
        /// Sub-packetization minus one; chosen automatically for design1_mds
        #[arg(short)]
        s: Option<usize>,
    },
    /// Design-2 codes against Azure-LRC and optimal-LRC at fixed n and fault tolerance
    LrcCompare {
        #[arg(short)]
        n: usize,
        #[arg(long)]
        tolerance: usize,
        #[arg(long)]
        g_min: usize,
        #[arg(long)]
        g_max: usize,
    },
}

fn print_json(value: &impl serde::Serialize) -> CliResult<()> {
    let text = serde_json::to_string(value).map_err(|e| CliError::Data(format!("json output failed: {e}")))?;
    stdout_line(&text)
}

fn stdout_line(text: &str) -> CliResult<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Data(format!("writing stdout: {e}"))),
        _ => Ok(()),
    }
}

fn analyze(what: Analyze) -> CliResult<()> {
    let rows: Vec<SweepRow> = match what {
        Analyze::Gamma { code } => vec![analysis::params_row(&code.params()?)?],
        Analyze::Bounds { r, k_min, k_max, s_min, s_max } => {
            analysis::bounds_sweep(r, k_min..=k_max, s_min..=s_max.unwrap_or(r.saturating_sub(2)))
        }
        Analyze::Sweep { r, k_min, k_max, variant, s } => match variant {
            SweepVariant::Design1Mds => analysis::mds_sweep(r, k_min..=k_max),
            SweepVariant::Design1 => {
                // smallest s with s >= 2 + sqrt(r - 1)
                let s = s.unwrap_or_else(|| 2 + analysis::ceil_sqrt(r.saturating_sub(1)));
                analysis::lemma_sweep(r, k_min..=k_max, s)
            }
            SweepVariant::Design2 => {
                let s = s.ok_or_else(|| CliError::Parameter("design2 sweep requires -s".into()))?;
                analysis::design2_sweep(r, k_min..=k_max, s)
            }
        },
        Analyze::LrcCompare { n, tolerance, g_min, g_max } => analysis::lrc_sweep(n, tolerance, g_min..=g_max),
    };
    if rows.is_empty() {
        eprintln!("warning: empty parameter range, writing header only");
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    analysis::write_csv(&mut lock, &rows)?;
    match lock.flush() {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Data(format!("writing stdout: {e}"))),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Encode { code, input, out_dir } => print_json(&ops::encode(code.params()?, &input, &out_dir)?),
        Command::Decode { in_dir, out } => print_json(&ops::decode(&in_dir, &out)?),
        Command::Repair { node, in_dir, report } => {
            let rep = ops::repair(node, &in_dir)?;
            match report {
                Some(ReportFormat::Json) => print_json(&rep),
                None => stdout_line(&format!(
                    "repaired node {}: {} symbols per stripe, {} symbols read",
                    rep.node,
                    rep.bandwidth_symbols,
                    rep.reads.len()
                )),
            }
        }
        Command::Recover { nodes, in_dir } => print_json(&ops::recover(&nodes, &in_dir)?),
        Command::Verify { code, family, seed } => {
            let family = match family {
                Family::Rs => GeneratorFamily::GuaranteedRs,
                Family::Literal => GeneratorFamily::VandermondeLiteral,
            };
            let report = verify::verify(code.params()?, family, seed)?;
            print_json(&report)?;
            if report.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                Err(CliError::Data(format!("verification failed: {}", failed.join(", "))))
            }
        }
        Command::Analyze { what } => analyze(what),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
