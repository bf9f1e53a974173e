//! Batch front end: reads a JSON run configuration, dispatches to
//! `gaussnet-core` and writes a deterministic JSON report (or CSV for sweeps).

// `!(x >= y)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod report;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use config::{parse_config, Command, RunConfig};
pub use error::CliError;
pub use run::{run, Flags, Output};

#[derive(Debug, Parser)]
#[command(name = "gaussnet", version, about = "Genuine Gaussian correlation in networks of Gaussian sources")]
pub struct Args {
    /// ggqc, classify, design, verify-network or sweep (defaults to the config's "command")
    pub command: Option<String>,

    /// JSON run configuration
    #[arg(long)]
    pub config: PathBuf,

    /// Seed for randomized searches
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Random operation sets sampled by verify-network
    #[arg(long, default_value_t = 200)]
    pub samples: usize,

    /// Symplecticity tolerance for matrix inputs
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    /// Write the report here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Include the per-bipartition table in ggqc reports
    #[arg(long)]
    pub full_table: bool,

    /// Log more (repeat for debug output)
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

fn execute(args: &Args) -> Result<Vec<u8>, CliError> {
    let command = args.command.as_deref().map(str::parse).transpose()?;
    if !(args.tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", args.tol)));
    }
    let bytes = std::fs::read(&args.config).map_err(|source| CliError::Io {
        context: format!("reading {}", args.config.display()),
        source,
    })?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Usage(format!("{} is not UTF-8", args.config.display())))?;
    let cfg = parse_config(&text, command, args.tol)?;
    let flags = Flags {
        seed: args.seed,
        samples: args.samples,
        tol: args.tol,
        full_table: args.full_table,
    };
    Ok(match run(&cfg, &flags, &bytes)? {
        Output::Json(v) => report::to_bytes(&v),
        Output::Csv(s) => s.into_bytes(),
    })
}

fn emit(args: &Args, bytes: &[u8]) -> Result<(), CliError> {
    let io = |context: String| move |source| CliError::Io { context, source };
    match &args.output {
        Some(path) => std::fs::write(path, bytes).map_err(io(format!("writing {}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(io("writing stdout".into()))
        }
    }
}

fn report_error(e: &CliError) -> i32 {
    let text = report::to_bytes(&e.to_json());
    let _ = std::io::stderr().write_all(&text);
    e.exit_code()
}

/// Runs the tool and returns the process exit code: 0 on success, 1 for
/// usage and configuration errors, 2 for physically invalid inputs.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            return report_error(&CliError::Usage(e.to_string().trim_end().to_string()));
        }
    };
    let level = match args.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();

    match execute(&args).and_then(|bytes| emit(&args, &bytes)) {
        Ok(()) => 0,
        Err(e) => report_error(&e),
    }
}
