//! `pracsim` command-line frontend.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data or config errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pracsim::experiments::SweepParam;
use pracsim::{CoreModel, PolicyKind, TimingPreset};

/// Config file used when `--config` is not given.
pub const CONFIG_ENV: &str = "PRACSIM_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "pracsim", version, about = "Trace-driven DDR5 channel simulator")]
struct Cli {
    /// Seed for generator-backed benches.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// TOML config file (falls back to $PRACSIM_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one trace and write a JSON report.
    Simulate(SimulateArgs),
    /// Sweep one timing parameter over the SBDR microbenchmark.
    Sweep(SweepArgs),
    /// Run traces under the Default and PRAC presets and report the overhead.
    ComparePrac(ComparePracArgs),
    /// Run one trace under the open, adaptive and close policies.
    ComparePolicies(ComparePoliciesArgs),
    /// Generate a synthetic trace.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    trace: PathBuf,
    /// `default`, `prac`, or a TOML timing file. Without it the config
    /// file's timing applies, else `default`.
    #[arg(long)]
    timing: Option<String>,
    #[arg(long, value_parser = parse_policy)]
    policy: Option<PolicyKind>,
    #[arg(long, value_parser = parse_core)]
    core: Option<CoreModel>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the issued command log (defaults to `<out>.cmds`).
    #[arg(long, num_args = 0..=1, value_name = "FILE")]
    log_commands: Option<Option<PathBuf>>,
    /// Per-request CSV: `index,class,latency_ns,premature`.
    #[arg(long, value_name = "FILE")]
    completions: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Bench {
    Sbdr,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_parser = parse_sweep_param)]
    param: SweepParam,
    /// Nanoseconds.
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    step: f64,
    #[arg(long, value_enum, default_value = "sbdr")]
    bench: Bench,
    #[arg(long, value_parser = parse_preset, default_value = "default")]
    base: TimingPreset,
    /// Use tRCD + tRTP = 16 ns.
    #[arg(long)]
    reduce_rcd_rtp: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ComparePracArgs {
    #[arg(long, num_args = 1.., required = true)]
    trace: Vec<PathBuf>,
    #[arg(long, value_parser = parse_policy)]
    policy: Option<PolicyKind>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ComparePoliciesArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value = "prac")]
    timing: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Same-bank different-row loop.
    Sbdr {
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        bank: usize,
        #[arg(long, default_value_t = 1)]
        row_a: u64,
        #[arg(long, default_value_t = 2)]
        row_b: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random workload with a target row-conflict fraction.
    Mixed {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long)]
        miss_ratio: f64,
        #[arg(long, default_value_t = 4)]
        banks: usize,
        #[arg(long, default_value_t = 0.0)]
        write_ratio: f64,
        #[arg(long, default_value_t = 200)]
        nonmem_max: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse().map_err(|e: pracsim::Error| e.to_string())
}

fn parse_core(s: &str) -> Result<CoreModel, String> {
    s.parse().map_err(|e: pracsim::Error| e.to_string())
}

fn parse_preset(s: &str) -> Result<TimingPreset, String> {
    s.parse().map_err(|e: pracsim::Error| e.to_string())
}

fn parse_sweep_param(s: &str) -> Result<SweepParam, String> {
    s.parse().map_err(|e: pracsim::Error| e.to_string())
}

/// Failure classes, mapped onto exit statuses.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

impl From<pracsim::Error> for CliError {
    fn from(e: pracsim::Error) -> Self {
        match e {
            pracsim::Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let config = cli.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let ctx = commands::Context {
        seed: cli.seed,
        config,
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(
            &ctx,
            commands::SimulateOpts {
                trace: a.trace,
                timing: a.timing,
                policy: a.policy,
                core: a.core,
                out: a.out.clone(),
                log_commands: a.log_commands.map(|p| p.unwrap_or_else(|| a.out.with_extension("cmds"))),
                completions: a.completions,
            },
        ),
        Command::Sweep(a) => {
            let Bench::Sbdr = a.bench;
            commands::sweep(&ctx, a.param, a.from, a.to, a.step, a.base, a.reduce_rcd_rtp, &a.out)
        }
        Command::ComparePrac(a) => commands::compare_prac(&ctx, &a.trace, a.policy, &a.out),
        Command::ComparePolicies(a) => commands::compare_policies(&ctx, &a.trace, &a.timing, &a.out),
        Command::Gen(GenCommand::Sbdr {
            pairs,
            bank,
            row_a,
            row_b,
            out,
        }) => commands::gen_sbdr(&ctx, pairs, bank, row_a, row_b, &out),
        Command::Gen(GenCommand::Mixed {
            n,
            miss_ratio,
            banks,
            write_ratio,
            nonmem_max,
            out,
        }) => commands::gen_mixed(&ctx, n, miss_ratio, banks, write_ratio, nonmem_max, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pracsim: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
