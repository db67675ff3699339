use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use diracres_cli::config::load_config;
use diracres_cli::pipeline::{error_exit_code, exit_code, run, Command, RunOptions};

#[derive(Parser)]
#[command(name = "diracres", version, about = "Resonances and scattering of compactly supported Dirac perturbations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration.
    #[arg(long, global = true, default_value = "config.json")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Skip the on-disk determinant cache.
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Locate resonances in the configured region.
    Resonances,
    /// Locate eigenvalues in the spectral gap.
    Spectrum,
    /// Scattering determinant and spectral shift on the real axis.
    Scatter,
    /// Compare both sides of the trace formula.
    TraceCheck,
    /// Resonances of the partial-wave model.
    Oracle,
    /// Identity checks with residuals.
    Verify,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    let cfg = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(error_exit_code(&e) as u8);
        }
    };
    let command = match cli.command {
        Cmd::Resonances => Command::Resonances,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Scatter => Command::Scatter,
        Cmd::TraceCheck => Command::TraceCheck,
        Cmd::Oracle => Command::Oracle,
        Cmd::Verify => Command::Verify,
    };
    let result = run(command, &cfg, &RunOptions { out: cli.out, use_cache: !cli.no_cache });
    match &result {
        Ok(o) => {
            for f in &o.files {
                log::info!("wrote {}", f.display());
            }
            if !o.passed {
                log::warn!("checks failed");
            }
        }
        Err(e) => log::error!("{e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
