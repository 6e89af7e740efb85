use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use cyclic_dce::dynamics::{default_step, interaction_frame_max_frequency, EffectiveSystem};
use cyclic_dce::observables::first_major_maximum;
use cyclic_dce::perturbation::{effective_spectrum, rate_1photon, rate_3photon, FourthOrderShifts};
use cyclic_dce::resonance::{scan_eta, ScanOptions};
use cyclic_dce::spectrum::{default_k_max, numeric_rate};
use cyclic_dce::{
    bare_hamiltonian, diagonalize, evolve_effective, evolve_lindblad, evolve_schrodinger, zeta_branch,
    zeta_branch_prefix, DensityOperator, DressedSpectrum, EffectiveState, HilbertSpace, PhotonDistribution,
    QuantumState, TimeGrid, TimeSeries,
};
use nalgebra::DVector;
use num_complex::Complex64;

use crate::config::{Initial, Mode, RunConfig};
use crate::table::{Cell, Table};
use crate::CliError;

/// A sample counts as the first major maximum once n_ph falls below this
/// fraction of the running maximum.
pub const DROP_FRACTION: f64 = 0.5;

fn dressed(config: &RunConfig) -> Result<(HilbertSpace, DressedSpectrum), CliError> {
    let space = config.space();
    let spec = diagonalize(&bare_hamiltonian(&config.model, space)?)?;
    Ok((space, spec))
}

/// k, Λ_k numeric, fourth-order Λ_k, ω_ef k + α k² and |<0,k|ζ_k>|² along
/// the ground-atom branch. Analytic columns are NaN where a denominator
/// vanishes.
pub fn cmd_spectrum(config: &RunConfig, k_max: Option<usize>) -> Result<Table, CliError> {
    let (space, spec) = dressed(config)?;
    let k_max = k_max.unwrap_or_else(|| default_k_max(space)).min(space.n_max());
    let branch = zeta_branch_prefix(&spec, space, k_max)?;
    let shifts = FourthOrderShifts::new(&config.model).ok();
    let quad = effective_spectrum(&config.model).ok();

    let mut table = Table::new(&["k", "lambda_num", "lambda_pert", "lambda_quad", "overlap"]);
    for e in branch.entries() {
        let k = e.k as f64;
        let pert = shifts.map_or(f64::NAN, |s| s.lambda(e.k));
        let quad = quad.map_or(f64::NAN, |q| q.omega_ef * k + q.alpha * k * k);
        table.push(vec![Cell::Int(e.k), Cell::Real(e.eigenvalue), Cell::Real(pert), Cell::Real(quad), Cell::Real(e.overlap)]);
    }
    if branch.k_max() < k_max {
        table.note("branch_ends_before_k", (branch.k_max() + 1) as f64);
    }
    Ok(table)
}

/// Analytic against numerically exact |Θ_{k;k+J}| for k = 0..=k_max.
pub fn cmd_rates(config: &RunConfig, photons: usize, k_max: usize) -> Result<Table, CliError> {
    if photons != 1 && photons != 3 {
        return Err(CliError::Config(format!("`photons`: must be 1 or 3, got {photons}")));
    }
    let (space, spec) = dressed(config)?;
    let branch = zeta_branch(&spec, space, k_max + photons)?;
    let mut table = Table::new(&["k", "theta_analytic", "theta_numeric", "relative_deviation"]);
    for k in 0..=k_max {
        let analytic = if photons == 3 {
            rate_3photon(k, &config.model, &config.drive)?
        } else {
            rate_1photon(k, &config.model, &config.drive)?
        }
        .magnitude;
        let numeric = numeric_rate(&spec, &config.drive, branch.index(k), branch.index(k + photons))?.norm();
        let deviation = if numeric > 0.0 { (analytic - numeric).abs() / numeric } else { f64::NAN };
        table.push(vec![Cell::Int(k), Cell::Real(analytic), Cell::Real(numeric), Cell::Real(deviation)]);
    }
    Ok(table)
}

/// η grid and peak photon numbers, with the best η and its offset from the
/// predicted Λ_J - Λ_0.
pub fn cmd_scan(config: &RunConfig, options: &ScanOptions) -> Result<Table, CliError> {
    let result = scan_eta(&config.model, &config.drive, config.space(), options)?;
    let mut table = Table::new(&["eta", "merit"]);
    for (eta, merit) in result.eta_grid.iter().zip(&result.merits) {
        table.push(vec![Cell::Real(*eta), Cell::Real(merit.unwrap_or(f64::NAN))]);
    }
    table.note("best_eta", result.best_eta);
    table.note("best_merit", result.best_merit);
    table.note("predicted_eta", result.predicted_eta);
    table.note("delta_nu", result.shift());
    table.note("failed_points", result.failed.len() as f64);
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct EvolveReport {
    pub series: TimeSeries,
    pub unitary: Option<TimeSeries>,
    /// Time and photon number of the first major maximum.
    pub first_max: Option<(f64, f64)>,
    pub files: Vec<PathBuf>,
}

pub fn timeseries_table(series: &TimeSeries) -> Table {
    let mut table = Table::new(&["t", "n_ph", "Q", "p0", "p1", "p2", "norm_or_trace"]);
    for r in &series.records {
        table.push(vec![
            Cell::Real(r.t),
            Cell::Real(r.n_ph),
            Cell::Real(r.mandel_q.unwrap_or(f64::NAN)),
            Cell::Real(r.p0),
            Cell::Real(r.p1),
            Cell::Real(r.p2),
            Cell::Real(r.norm_or_trace),
        ]);
    }
    table
}

fn distribution_table(dist: &PhotonDistribution, t: f64) -> Table {
    let mut table = Table::new(&["n", "P(n)"]);
    for (n, p) in dist.probabilities().iter().enumerate() {
        table.push(vec![Cell::Int(n), Cell::Real(*p)]);
    }
    table.note("t", t);
    table
}

fn initial_state(config: &RunConfig, space: HilbertSpace) -> Result<QuantumState, CliError> {
    Ok(match config.initial {
        Initial::Bare => QuantumState::basis(space, 0, 0),
        Initial::Ground => {
            let (_, spec) = dressed(config)?;
            let branch = zeta_branch(&spec, space, 0)?;
            let amps = spec.eigenvector(branch.index(0)).map(|x| Complex64::new(x, 0.0));
            QuantumState::from_amplitudes(space, amps)?
        }
    })
}

fn grid(config: &RunConfig, max_frequency: f64) -> Result<TimeGrid, CliError> {
    let g = &config.grid;
    let dt = g.dt.unwrap_or_else(|| default_step(max_frequency));
    Ok(TimeGrid::new(g.t0, g.t1, dt, g.stride)?)
}

fn run_effective(config: &RunConfig) -> Result<TimeSeries, CliError> {
    let (space, spec) = dressed(config)?;
    let b0 = match config.initial {
        Initial::Bare => {
            let row = spec.eigenvectors().row(space.index(0, 0)).transpose();
            EffectiveState::new(DVector::from_iterator(row.len(), row.iter().map(|&x| Complex64::new(x, 0.0))))?
        }
        Initial::Ground => {
            let branch = zeta_branch(&spec, space, 0)?;
            EffectiveState::dressed(spec.dim(), branch.index(0))?
        }
    };
    let system = EffectiveSystem::new(&spec, space, &config.drive, config.rotating_cutoff)?;
    let grid = grid(config, system.max_frequency())?;
    Ok(evolve_effective(&spec, space, &config.drive, &b0, &grid, config.rotating_cutoff)?)
}

/// Runs the configured evolution and writes the time series, the photon
/// distributions at the requested snapshots and at the first major maximum,
/// and the effective config into `out_dir`.
pub fn cmd_evolve(config: &RunConfig, out_dir: &Path) -> Result<EvolveReport, CliError> {
    config.validate()?;
    let space = config.space();
    let (series, unitary) = match config.mode {
        Mode::Effective => (run_effective(config)?, None),
        Mode::Schrodinger | Mode::Lindblad => {
            let psi0 = initial_state(config, space)?;
            let f = interaction_frame_max_frequency(&config.model, &config.drive, space);
            let grid = grid(config, f)?;
            let unitary = || evolve_schrodinger(&config.model, &config.drive, &psi0, &grid);
            if config.mode == Mode::Schrodinger {
                (unitary()?, None)
            } else {
                let rho0 = DensityOperator::from_pure(&psi0);
                let rates = config.rates();
                let lossy = || evolve_lindblad(&config.model, &config.drive, &rates, &rho0, &grid);
                if config.compare_unitary {
                    let (mixed, pure) = thread::scope(|s| {
                        let pure = s.spawn(unitary);
                        (lossy(), pure.join().expect("unitary evolution panicked"))
                    });
                    (mixed?, Some(pure?))
                } else {
                    (lossy()?, None)
                }
            }
        }
    };

    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let echo = config.to_toml_string()?;
    let mut files = Vec::new();
    let mut write = |name: &str, table: &Table| -> Result<(), CliError> {
        let path = out_dir.join(name);
        table.write(&path, &echo)?;
        files.push(path);
        Ok(())
    };

    let outputs = &config.outputs;
    write(&outputs.timeseries, &timeseries_table(&series))?;
    if let Some(u) = &unitary {
        write(&outputs.unitary, &timeseries_table(u))?;
    }
    for (i, &t) in outputs.snapshots.iter().enumerate() {
        if let Some(j) = series.nearest(t) {
            let table = distribution_table(&series.distributions[j], series.records[j].t);
            write(&format!("{}_{i}.csv", outputs.distribution), &table)?;
        }
    }
    let first_max = first_major_maximum(&series.records, DROP_FRACTION);
    if let Some((j, _)) = first_max {
        let table = distribution_table(&series.distributions[j], series.records[j].t);
        write(&format!("{}_first_max.csv", outputs.distribution), &table)?;
    }
    let first_max = first_max.map(|(j, n)| (series.records[j].t, n));
    let config_path = out_dir.join("config.toml");
    fs::write(&config_path, &echo).map_err(|e| CliError::io(&config_path, e))?;
    files.push(config_path);

    Ok(EvolveReport { series, unitary, first_max, files })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cyclic_dce::presets;

    fn small(name: &str) -> RunConfig {
        let mut config = RunConfig::from_preset(&presets::by_name(name).unwrap());
        config.space.n_max = 8;
        config.grid.t1 = 20.0;
        config.grid.stride = 10;
        config
    }

    #[test]
    fn uncoupled_spectrum_is_bare() {
        let mut config = small("fig1");
        config.model.g01 = 0.0;
        config.model.g12 = 0.0;
        config.model.g02 = 0.0;
        let table = cmd_spectrum(&config, Some(4)).unwrap();
        for name in ["lambda_num", "lambda_pert", "lambda_quad"] {
            for (k, v) in table.column(name).unwrap().iter().enumerate() {
                assert!((v - k as f64).abs() < 1e-12, "{name} k={k} {v}");
            }
        }
        assert!(table.column("overlap").unwrap().iter().all(|&o| (o - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rates_vanish_without_g02() {
        let mut config = small("fig1");
        config.model.g02 = 0.0;
        let table = cmd_rates(&config, 3, 2).unwrap();
        assert!(table.column("theta_analytic").unwrap().iter().all(|&x| x == 0.0));
        assert!(cmd_rates(&config, 2, 2).is_err());
    }

    #[test]
    fn effective_and_exact_agree_briefly() {
        let mut config = small("fig1");
        let dir = tempfile::tempdir().unwrap();
        let exact = cmd_evolve(&config, dir.path()).unwrap();
        config.mode = Mode::Effective;
        config.initial = Initial::Ground;
        let eff = cmd_evolve(&config, dir.path()).unwrap();
        assert!(exact.series.max_drift < 1e-6 && eff.series.max_drift < 1e-6);
        let last = eff.series.records.last().unwrap();
        assert!((last.t - 20.0).abs() < 1e-9);
        assert!(last.n_ph < 1e-2);
    }
}
