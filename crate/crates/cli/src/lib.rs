//! `gqss`: command-line experiments over the grover-qss simulator.
//!
//! Every subcommand emits tables as CSV (default) or structured text (JSON).
//! Exit codes: 0 success, 2 usage or configuration error, 3 cheating detected.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod error;
pub mod records;
pub mod scenario;

pub use error::{CliError, EXIT_CHEAT, EXIT_OK, EXIT_USAGE};
pub use records::{Format, Table};

use commands::RunOverrides;
use scenario::StrategySpec;

#[derive(Debug, Parser)]
#[command(name = "gqss", version, about = "Grover search and quantum secret sharing experiments")]
pub struct Cli {
    /// Output format: csv or structured-text
    #[arg(long, global = true, default_value = "csv")]
    pub format: Format,
    /// Seed for sampled runs (overrides the scenario file)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write records here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amplitudes and success probability per Grover iteration
    Grover {
        #[arg(long)]
        qubits: usize,
        /// Marked states: integers or bit strings, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        marked: Vec<String>,
        #[arg(long, default_value_t = 1)]
        iterations: usize,
        /// Emit every iteration from 0, not only the last
        #[arg(long)]
        trace: bool,
    },
    /// One-iteration success probability over the marked fraction
    Sweep {
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Decoding the four-qubit register about the tabulated preparations
    Table1 {
        /// Four marked states replacing the default {1,3,5,7}
        #[arg(long, value_delimiter = ',')]
        marked: Option<Vec<String>>,
    },
    /// Single-marked success per iteration for two to five qubits
    Table2,
    /// Run a protocol scenario and write its event log
    Protocol {
        scenario: PathBuf,
        #[arg(long)]
        trials: Option<u64>,
        /// Event log path (default: next to --out, else next to the scenario)
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Exact and Monte Carlo detection statistics for a cheating strategy
    Cheat {
        scenario: PathBuf,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Monte Carlo repetitions (default: the scenario's trials)
        #[arg(long)]
        trials: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct StrategyArgs {
    /// honest, guess-diffusion, intercept-resend or capture-all (default: the scenario's adversary)
    #[arg(long)]
    pub strategy: Option<String>,
    /// "uniform" or comma-separated letters (plus, minus, plus_i, minus_i)
    #[arg(long, value_delimiter = ',')]
    pub guess: Option<Vec<String>>,
    /// "uniform" or comma-separated marked states
    #[arg(long, value_delimiter = ',')]
    pub fake: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub fake_initial: Option<Vec<String>>,
    /// measure-immediately or guess-diffusion-then-measure
    #[arg(long)]
    pub policy: Option<String>,
}

impl StrategyArgs {
    fn spec(&self) -> Result<Option<StrategySpec>, CliError> {
        let Some(kind) = &self.strategy else {
            if self.guess.is_some() || self.fake.is_some() || self.fake_initial.is_some() || self.policy.is_some() {
                return Err(CliError::Usage("strategy options need --strategy".into()));
            }
            return Ok(None);
        };
        Ok(Some(StrategySpec {
            kind: kind.clone(),
            guess: self.guess.clone(),
            fake_marked: self.fake.clone(),
            fake_initial: self.fake_initial.clone(),
            policy: self.policy.clone(),
        }))
    }
}

fn execute(cli: &Cli) -> Result<commands::Output, CliError> {
    match &cli.command {
        Command::Grover { qubits, marked, iterations, trace } => commands::grover(*qubits, marked, *iterations, *trace),
        Command::Sweep { samples } => commands::sweep(*samples),
        Command::Table1 { marked } => commands::table1(marked.as_deref()),
        Command::Table2 => commands::table2(),
        Command::Protocol { scenario, trials, events } => {
            let events = events.clone().unwrap_or_else(|| commands::default_event_log(scenario, cli.out.as_deref()));
            commands::protocol(scenario, &RunOverrides { trials: *trials, seed: cli.seed }, &events)
        }
        Command::Cheat { scenario, strategy, trials } => {
            let spec = strategy.spec()?;
            commands::cheat(scenario, spec.as_ref(), &RunOverrides { trials: *trials, seed: cli.seed })
        }
    }
}

/// Runs one invocation, writing records to `stdout` (or `--out`) and
/// diagnostics to `stderr`; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = execute(&cli).and_then(|out| {
        let bytes = records::serialize(&out.tables, cli.format)?;
        match &cli.out {
            Some(path) => std::fs::write(path, bytes)?,
            None => stdout.write_all(&bytes)?,
        }
        Ok(out.exit)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
