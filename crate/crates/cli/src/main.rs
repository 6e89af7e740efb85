use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cyclic_dce::presets;
use cyclic_dce::resonance::ScanOptions;
use cyclic_dce_cli::{cmd_evolve, cmd_rates, cmd_scan, cmd_spectrum, CliError, Overrides, RunConfig, Table};

#[derive(Debug, Parser)]
#[command(name = "cyclic-dce", version, about = "Photon generation by a modulated cyclic qutrit in a cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in parameter set: fig1, fig2 or fig3.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    tmax: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dressed energies of the ground-atom branch against perturbation theory.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Analytic against exact J-photon transition rates.
    Rates {
        #[command(flatten)]
        common: Common,
        /// J (1 or 3); defaults to the config value.
        #[arg(long)]
        photons: Option<usize>,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
    },
    /// Time evolution with time-series and distribution output.
    Evolve {
        #[command(flatten)]
        common: Common,
    },
    /// Peak photon number over a grid of modulation frequencies.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        photons: Option<usize>,
        /// Full window width around the predicted frequency.
        #[arg(long, default_value_t = 0.02)]
        span: f64,
        #[arg(long, default_value_t = 21)]
        points: usize,
        /// Defaults to the config's t1.
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, default_value_t = 20)]
        stride: usize,
    },
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => {
                let preset = presets::by_name(name).ok_or_else(|| {
                    CliError::Config(format!("unknown preset `{name}` (expected one of {})", presets::NAMES.join(", ")))
                })?;
                RunConfig::from_preset(&preset)
            }
            (None, None) => return Err(CliError::Config("either --config or --preset is required".into())),
        };
        config.apply(&Overrides { eta: self.eta, n_max: self.nmax, t_max: self.tmax })?;
        Ok(config)
    }
}

fn report(table: &Table, config: &RunConfig, out: Option<&Path>, name: &str) -> Result<(), CliError> {
    print!("{table}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        table.write(&dir.join(name), &config.to_toml_string()?)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { common, kmax } => {
            let config = common.load()?;
            report(&cmd_spectrum(&config, kmax)?, &config, common.out.as_deref(), "spectrum.csv")
        }
        Command::Rates { common, photons, kmax } => {
            let config = common.load()?;
            let photons = photons.unwrap_or(config.photons);
            let table = cmd_rates(&config, photons, kmax)?;
            report(&table, &config, common.out.as_deref(), &format!("rates_J{photons}.csv"))
        }
        Command::Evolve { common } => {
            let config = common.load()?;
            let out = common.out.unwrap_or_else(|| PathBuf::from("."));
            let result = cmd_evolve(&config, &out)?;
            println!("max drift {:.3e}, step {:.6e}", result.series.max_drift, result.series.dt);
            if let Some((t, n)) = result.first_max {
                println!("first maximum n_ph = {n:.6} at t = {t:.6e}");
            }
            for f in &result.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Scan { common, photons, span, points, horizon, stride } => {
            let config = common.load()?;
            let options = ScanOptions {
                photons: photons.unwrap_or(config.photons),
                span,
                points,
                horizon: horizon.unwrap_or(config.grid.t1),
                stride,
            };
            report(&cmd_scan(&config, &options)?, &config, common.out.as_deref(), "scan.csv")
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
