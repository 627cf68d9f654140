use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relbound_cli::error::exit;
use relbound_cli::{parse_task_file, run_task, task_from_flags, CliError, Overrides, TaskKind, TaskSpec};

#[derive(Parser)]
#[command(
    name = "relbound",
    version,
    about = "Relatively bounded perturbations of classical lattice models: audits, expansions and AKLT splits",
    after_help = "Set RAYON_NUM_THREADS to control the number of worker threads.\n\
                  Exit codes: 0 ok, 2 audit failure, 3 cap exceeded/infeasible/non-convergent, 4 input error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// Output directory for summary.json and CSV tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Imaginary-time step, overriding the model and task files.
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a model file and report its diagnostics.
    ModelCheck {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Cluster expansion of ln Z_N with the exact oracle alongside.
    Expand {
        file: PathBuf,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        max_support: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Full AKLT audit for block length l.
    AkltVerify {
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        blocks: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Split of the blocked AKLT chain into H0, phi_r and phi_b.
    AkltSplit {
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        blocks: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Ground-state truncated correlations, e.g. --A1 Z@0 --A2 Z@2.
    Correlate {
        file: PathBuf,
        #[arg(long = "A1")]
        a1: Option<String>,
        #[arg(long = "A2")]
        a2: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a TOML task file; flags supersede values in the file.
    Run {
        taskfile: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        max_support: Option<usize>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long = "A1")]
        a1: Option<String>,
        #[arg(long = "A2")]
        a2: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn with_common(common: Common, o: Overrides) -> Overrides {
    Overrides {
        out: common.out,
        t0: common.t0,
        seed: common.seed,
        ..o
    }
}

fn resolve(command: Command) -> Result<TaskSpec, CliError> {
    match command {
        Command::ModelCheck { file, common } => task_from_flags(
            TaskKind::ModelCheck,
            &with_common(common, Overrides { model: Some(file), ..Default::default() }),
        ),
        Command::Expand { file, n, max_support, common } => task_from_flags(
            TaskKind::Expand,
            &with_common(common, Overrides { model: Some(file), n, max_support, ..Default::default() }),
        ),
        Command::AkltVerify { l, blocks, common } => task_from_flags(
            TaskKind::AkltVerify,
            &with_common(common, Overrides { l, n_blocks: blocks, ..Default::default() }),
        ),
        Command::AkltSplit { l, blocks, common } => task_from_flags(
            TaskKind::AkltSplit,
            &with_common(common, Overrides { l, n_blocks: blocks, ..Default::default() }),
        ),
        Command::Correlate { file, a1, a2, common } => task_from_flags(
            TaskKind::Correlate,
            &with_common(common, Overrides { model: Some(file), a1, a2, ..Default::default() }),
        ),
        Command::Run { taskfile, model, n, max_support, l, blocks, a1, a2, common } => parse_task_file(
            &taskfile,
            &with_common(
                common,
                Overrides { model, n, max_support, l, n_blocks: blocks, a1, a2, ..Default::default() },
            ),
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT_ERROR as u8 } else { 0 });
        }
    };
    let spec = match resolve(cli.command) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run_task(&spec) {
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("failure: {f}");
            }
            eprintln!(
                "{}: {} (exit {}), report in {}",
                spec.task,
                outcome.status.name(),
                outcome.exit_code(),
                spec.out.display()
            );
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
