//! Batch pipeline: load a corpus, classify AI patents four ways, compute the
//! GPT metrics per group and year, compare groups pairwise, and plot.

pub mod config;
pub mod manifest;
pub mod pipeline;
pub mod runlog;

use std::ffi::OsString;
use std::path::PathBuf;

use aigpt_core::synth::SynthConfig;
use aigpt_core::{Error, Result};
use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use pipeline::{Pipeline, Stage};

/// Exit status for configuration problems.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for bad or missing data, including missing stage outputs.
pub const EXIT_DATA: i32 = 3;
/// Exit status for file system failures.
pub const EXIT_IO: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::CpcParse { .. } => EXIT_CONFIG,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_DATA,
    }
}

#[derive(Parser, Debug)]
#[command(name = "aigpt", version, about = "AI patent classification and general-purpose-technology metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run classify, metrics, stats and report in order
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Run a single stage instead of the whole pipeline
        #[arg(long, value_name = "STAGE")]
        only: Option<String>,
    },
    /// Classify patents and write one id list per group
    Classify(CommonArgs),
    /// Compute metric series and tables from the group lists
    Metrics(CommonArgs),
    /// Pairwise signed-rank tests and summaries over the metric series
    Stats(CommonArgs),
    /// Plot every metric series
    Report(CommonArgs),
    /// Generate a synthetic corpus with planted groups
    Synth(CommonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Run config (or synth config for `synth`)
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory, overriding the config
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Abort on the first rejected input row
    #[arg(long)]
    pub strict: bool,
    /// RNG seed, overriding the config
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads for per-group work (default: all cores)
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

fn pipeline_for(args: &CommonArgs) -> Result<Pipeline> {
    let mut config = RunConfig::load(&args.config)?;
    config.strict |= args.strict;
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    let out = args.out.clone().unwrap_or_else(|| config.out_dir.clone());
    Pipeline::new(config, out)
}

fn run_stages(args: &CommonArgs, stages: &[Stage]) -> Result<()> {
    let pipeline = pipeline_for(args)?;
    let result = pipeline.run(stages);
    if let Err(e) = &result {
        pipeline.log.error(&e.to_string());
    }
    result
}

fn synth(args: &CommonArgs) -> Result<()> {
    let mut config = SynthConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let log = runlog::RunLog::open(&out.join(runlog::RUN_LOG))?;
    let result = pipeline::synth_to_dir(&config, &out, &log);
    if let Err(e) = &result {
        log.error(&e.to_string());
    }
    result
}

pub fn execute(command: &Command) -> Result<()> {
    let (common, stages): (&CommonArgs, Vec<Stage>) = match command {
        Command::Run { common, only: None } => (common, Stage::ALL.to_vec()),
        Command::Run { common, only: Some(s) } => (common, vec![s.parse()?]),
        Command::Classify(c) => (c, vec![Stage::Classify]),
        Command::Metrics(c) => (c, vec![Stage::Metrics]),
        Command::Stats(c) => (c, vec![Stage::Stats]),
        Command::Report(c) => (c, vec![Stage::Report]),
        Command::Synth(c) => return with_threads(c.threads, || synth(c)),
    };
    with_threads(common.threads, || run_stages(common, &stages))
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// Parses arguments, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("aigpt: {e}");
            exit_code(&e)
        }
    }
}
