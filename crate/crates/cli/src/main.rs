use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mimalloc::MiMalloc;

use tcm_cli::{emit_plot_data, execute, exit_code, parse_config, Workflow};

#[global_allocator]
static GLOBAL: MiMalloc = MiMalloc;

#[derive(Parser)]
#[command(name = "tcm", version, about = "Tropical climate model simulations and estimate checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build seeds and initial fields and report their sizes.
    BuildData(Common),
    /// Integrate the perturbation system and record diagnostics.
    Run(Common),
    /// Measure the background time integrals and run the commutator probe.
    Verify(Common),
    /// Repeat the data and estimate reports over a range of ε.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Manifest file; every key has a default.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides run.out_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// `section.key=value`, applied after the file.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let env = env_logger::Env::new().filter_or("TCM_LOG_LEVEL", "warn");
    env_logger::Builder::from_env(env).init();
    let cli = Cli::parse();
    let (workflow, args) = match cli.command {
        Command::BuildData(a) => (Workflow::BuildData, a),
        Command::Run(a) => (Workflow::Run, a),
        Command::Verify(a) => (Workflow::Verify, a),
        Command::Sweep(a) => (Workflow::Sweep, a),
    };
    let result = parse_config(args.config.as_deref(), &args.overrides).and_then(|manifest| {
        if let Some(tag) = manifest.workflow {
            if tag != workflow {
                log::warn!("manifest is tagged `{tag}` but `{workflow}` was requested");
            }
        }
        let out = args.out.or_else(|| manifest.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
        let outcome = execute(&manifest, workflow, &out, args.workers)?;
        if matches!(workflow, Workflow::Run | Workflow::Sweep) {
            emit_plot_data(&out)?;
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
