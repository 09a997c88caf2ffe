use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use qscissors::analysis::{
    detect_windows, scan_variances, squeezing_threshold, DEFAULT_REFINE_TOL_US,
};
use qscissors::cli::{
    amplitudes_csv, emit_text, parse_config, run_figure, run_rwa, rwa_csv, series_csv,
    ComputationPath, FigureId, RunConfig,
};

/// Batch simulator for quadrature squeezing of qubit states produced by
/// nonlinear optical state truncation in pumped Kerr couplers.
#[derive(Parser)]
#[command(name = "qscissors", version, about)]
struct Cli {
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    /// Output directory (overrides `out_dir` from the config).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,

    /// Override the scan step (µs).
    #[arg(long, value_name = "US")]
    dt_us: Option<f64>,

    /// Override the horizon (µs).
    #[arg(long, value_name = "US")]
    t_max_us: Option<f64>,

    /// Override the computation path.
    #[arg(long, value_name = "PATH")]
    path: Option<ComputationPath>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let text = fs::read_to_string(&self.config)
            .with_context(|| format!("reading config {}", self.config.display()))?;
        let mut cfg = parse_config(&text)?;
        if let Some(dt) = self.dt_us {
            anyhow::ensure!(dt > 0.0, "dt_us: must be positive, got {dt}");
            cfg.dt_us = dt;
        }
        if let Some(t_max) = self.t_max_us {
            anyhow::ensure!(
                t_max >= cfg.dt_us,
                "t_max_us: must be at least dt_us ({}), got {t_max}",
                cfg.dt_us
            );
            cfg.t_max_us = t_max;
        }
        if let Some(path) = self.path {
            cfg.path = path;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Export state amplitudes along the time grid.
    Evolve(ConfigArgs),
    /// Export the quadrature-variance series.
    Variances(ConfigArgs),
    /// Export refined squeezing windows.
    Windows(ConfigArgs),
    /// Sweep chi/epsilon ratios and report truncation quality.
    ValidateRwa(ConfigArgs),
    /// Reproduce one pinned figure dataset (series + windows CSVs).
    Figure {
        /// One of fig1a, fig1b, fig2a, fig2b, fig3.
        id: FigureId,
        /// Scan step in µs.
        #[arg(long, value_name = "US", default_value_t = 0.01)]
        dt_us: f64,
    },
}

fn out_dir(cli_out: &Option<PathBuf>, cfg_out: Option<&PathBuf>) -> PathBuf {
    cli_out
        .clone()
        .or_else(|| cfg_out.cloned())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let note = |msg: &str| {
        if !cli.quiet {
            eprintln!("{msg}");
        }
    };
    match &cli.command {
        Command::Evolve(args) => {
            let cfg = args.load()?;
            let dir = out_dir(&cli.out, cfg.out_dir.as_ref());
            let (times, states) = cfg.evolve_states()?;
            let dest = dir.join("amplitudes.csv");
            emit_text(&dest, &amplitudes_csv(&times, &states))?;
            note(&format!("wrote {}", dest.display()));
        }
        Command::Variances(args) | Command::Windows(args) => {
            let cfg = args.load()?;
            let dir = out_dir(&cli.out, cfg.out_dir.as_ref());
            let source = cfg.variance_source()?;
            let series = scan_variances(&source, cfg.t_max_us, cfg.dt_us)?;
            let windows =
                detect_windows(&source, &series, squeezing_threshold(), DEFAULT_REFINE_TOL_US)?;
            match &cli.command {
                Command::Variances(_) => {
                    let dest = dir.join("variances.csv");
                    emit_text(&dest, &series_csv(&series))?;
                    note(&format!("wrote {}", dest.display()));
                }
                _ => {
                    let dest = dir.join("windows.csv");
                    emit_text(&dest, &qscissors::cli::windows_csv(&windows))?;
                    note(&format!("wrote {}", dest.display()));
                }
            }
        }
        Command::ValidateRwa(args) => {
            let cfg = args.load()?;
            let dir = out_dir(&cli.out, cfg.out_dir.as_ref());
            let reports = run_rwa(&cfg)?;
            let dest = dir.join("rwa.csv");
            emit_text(&dest, &rwa_csv(&reports))?;
            note(&format!("wrote {}", dest.display()));
        }
        Command::Figure { id, dt_us } => {
            let dir = out_dir(&cli.out, None);
            let paths = run_figure(*id, &dir, *dt_us)?;
            for p in paths {
                note(&format!("wrote {}", p.display()));
            }
        }
    }
    Ok(())
}
