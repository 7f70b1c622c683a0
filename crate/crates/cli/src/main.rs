use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use rmv::cli::{self, CheckArgs, Exit, GadgetArgs, LitmusArgs, ModelChoice, RunArgs};

/// Checks register machines against the WRA, RA and SRA memory models.
#[derive(Parser)]
#[command(name = "rmv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify every run of a machine.
    Check {
        machine: PathBuf,
        #[arg(long, default_value = "all")]
        model: ModelChoice,
        /// Exploration depth; defaults to a bound derived from the machine.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        json: bool,
        #[arg(long, short)]
        quiet: bool,
        /// Write the counterexample graph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Report states that do not accept every request.
        #[arg(long)]
        lint: bool,
    },
    /// Check a single trace.
    #[command(group(ArgGroup::new("source").required(true).args(["machine", "no_machine"])))]
    Run {
        machine: Option<PathBuf>,
        /// Check the trace without a machine.
        #[arg(long)]
        no_machine: bool,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value = "all")]
        model: ModelChoice,
        #[arg(long)]
        json: bool,
        #[arg(long, short)]
        quiet: bool,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Build the machine for a DNF tautology or CNF satisfiability question.
    #[command(group(ArgGroup::new("formula").required(true).args(["taut", "sat"])))]
    Gadget {
        #[arg(long)]
        taut: Option<String>,
        #[arg(long)]
        sat: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print or check a litmus machine; lists the corpus without a name.
    Litmus {
        name: Option<String>,
        #[arg(short, long, conflicts_with = "check")]
        output: Option<PathBuf>,
        #[arg(long)]
        check: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let depth_cap = match cli::depth_cap_from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Exit::Usage.code() as u8);
        }
    };
    let exit = match cli.command {
        Command::Check { machine, model, depth, json, quiet, dot, lint } => {
            let args = CheckArgs { machine, model, depth, depth_cap, json, quiet, dot, lint };
            cli::cmd_check(&args, &mut out, &mut err)
        }
        Command::Run { machine, trace, model, json, quiet, dot, .. } => {
            cli::cmd_run(&RunArgs { machine, trace, model, json, quiet, dot }, &mut out, &mut err)
        }
        Command::Gadget { taut, sat, output } => cli::cmd_gadget(&GadgetArgs { taut, sat, output }, &mut out, &mut err),
        Command::Litmus { name, output, check } => {
            cli::cmd_litmus(&LitmusArgs { name, output, check, depth_cap }, &mut out, &mut err)
        }
    };
    ExitCode::from(exit.code() as u8)
}
