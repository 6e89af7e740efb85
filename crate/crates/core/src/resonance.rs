//! Locating the modulation frequency that maximizes photon generation.

use rayon::prelude::*;

use crate::dynamics::{QuantumState, SchrodingerPropagator, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{bare_hamiltonian, Drive, HilbertSpace, ModelParams};
use crate::spectrum::{diagonalize, zeta_branch, DressedSpectrum};

/// Scan window, resolution and merit horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Photons created per modulation quantum (1 or 3).
    pub photons: usize,
    /// Full width of the η window, centred on the predicted frequency.
    pub span: f64,
    pub points: usize,
    pub horizon: f64,
    /// Integration steps between merit samples.
    pub stride: usize,
}

impl ScanOptions {
    pub fn new(photons: usize) -> Self {
        ScanOptions { photons, span: 0.02, points: 21, horizon: 1e5, stride: 20 }
    }

    fn validate(&self) -> Result<()> {
        if self.photons != 1 && self.photons != 3 {
            return Err(Error::InvalidParameter { field: "photons", reason: format!("must be 1 or 3, got {}", self.photons) });
        }
        if !(self.span.is_finite() && self.span > 0.0) {
            return Err(Error::InvalidParameter { field: "span", reason: format!("must be positive, got {}", self.span) });
        }
        if self.points < 5 {
            return Err(Error::InvalidParameter { field: "points", reason: format!("need at least 5, got {}", self.points) });
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParameter { field: "horizon", reason: format!("must be positive, got {}", self.horizon) });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub eta_grid: Vec<f64>,
    /// Peak photon number per grid point; `None` where the run failed.
    pub merits: Vec<Option<f64>>,
    pub best_eta: f64,
    pub best_merit: f64,
    /// Λ_J - Λ_0 from exact diagonalization.
    pub predicted_eta: f64,
    pub failed: Vec<(f64, Error)>,
}

impl ScanResult {
    /// Δν = best η minus the bare transition frequency.
    pub fn shift(&self) -> f64 {
        self.best_eta - self.predicted_eta
    }
}

/// Λ_J - Λ_0 along the ground-atom branch.
pub fn predict_eta(spec: &DressedSpectrum, space: HilbertSpace, photons: usize) -> Result<f64> {
    let branch = zeta_branch(spec, space, photons)?;
    Ok(branch.eigenvalue(photons) - branch.eigenvalue(0))
}

/// Peak n_ph over `[0, horizon]` starting from |0,0>.
pub fn peak_photon_number(params: &ModelParams, drive: &Drive, space: HilbertSpace, horizon: f64, stride: usize) -> Result<f64> {
    let prop = SchrodingerPropagator::new(params, drive, space)?;
    let grid = TimeGrid::with_default_step(0.0, horizon, prop.max_frequency(), stride)?;
    let psi0 = QuantumState::basis(space, 0, 0);
    let mut peak: f64 = 0.0;
    prop.run(&psi0, &grid, |s| {
        let n: f64 = s.probabilities().iter().enumerate().map(|(i, p)| space.photons(i) as f64 * p).sum();
        peak = peak.max(n);
    })?;
    Ok(peak)
}

/// Evolves from |0,0> at each η of an evenly spaced window around the
/// predicted frequency and returns the η with the largest peak photon
/// number. Ties go to the smallest η. Failed points are reported and skipped.
pub fn scan_eta(params: &ModelParams, drive: &Drive, space: HilbertSpace, options: &ScanOptions) -> Result<ScanResult> {
    options.validate()?;
    let spec = diagonalize(&bare_hamiltonian(params, space)?)?;
    let predicted_eta = predict_eta(&spec, space, options.photons)?;
    let n = options.points;
    let eta_grid: Vec<f64> = (0..n)
        .map(|i| predicted_eta - 0.5 * options.span + options.span * i as f64 / (n - 1) as f64)
        .collect();
    let outcomes: Vec<Result<f64>> = eta_grid
        .par_iter()
        .map(|&eta| peak_photon_number(params, &Drive { eta, ..*drive }, space, options.horizon, options.stride))
        .collect();

    let mut merits = Vec::with_capacity(n);
    let mut failed = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for (&eta, outcome) in eta_grid.iter().zip(outcomes) {
        match outcome {
            Ok(m) => {
                merits.push(Some(m));
                if best.is_none_or(|(_, b)| m > b) {
                    best = Some((eta, m));
                }
            }
            Err(e) => {
                merits.push(None);
                failed.push((eta, e));
            }
        }
    }
    let Some((best_eta, best_merit)) = best else {
        return Err(failed.swap_remove(0).1);
    };
    Ok(ScanResult { eta_grid, merits, best_eta, best_merit, predicted_eta, failed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(p: &ModelParams, n_max: usize) -> (DressedSpectrum, HilbertSpace) {
        let space = HilbertSpace::new(n_max).unwrap();
        (diagonalize(&bare_hamiltonian(p, space).unwrap()).unwrap(), space)
    }

    #[test]
    fn uncoupled_prediction_is_bare_multiple() {
        let p = ModelParams::from_detunings(1.0, 0.464, 0.106, [0.0; 3], [1, 1, 1]);
        let (spec, space) = spectrum(&p, 8);
        assert!((predict_eta(&spec, space, 3).unwrap() - 3.0).abs() < 1e-12);
        assert!((predict_eta(&spec, space, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_photon_prediction_near_tuned_value() {
        let p = ModelParams::from_detunings(1.0, 0.362, 0.51, [0.05, 0.06, 0.03], [1, 1, 1]);
        let (spec, space) = spectrum(&p, 30);
        let eta = predict_eta(&spec, space, 1).unwrap();
        assert!((eta / 0.9978 - 1.0).abs() < 0.01, "{eta}");
    }

    #[test]
    fn no_photons_without_cyclic_coupling() {
        let p = ModelParams::from_detunings(1.0, 0.464, 0.106, [0.05, 0.06, 0.0], [1, 1, 1]);
        let drive = Drive { eps2: 0.07 * p.e2, eta: 3.0, ..Drive::off() };
        let space = HilbertSpace::new(10).unwrap();
        let options = ScanOptions { span: 0.02, points: 5, horizon: 2e4, ..ScanOptions::new(3) };
        let scan = scan_eta(&p, &drive, space, &options).unwrap();
        assert!(scan.failed.is_empty());
        assert!(scan.merits.iter().all(|m| m.unwrap() < 0.1), "{:?}", scan.merits);
        assert!(scan.eta_grid.contains(&scan.best_eta));
    }

    #[test]
    fn rejects_bad_options() {
        let p = ModelParams::from_detunings(1.0, 0.464, 0.106, [0.05, 0.06, 0.03], [1, 1, 1]);
        let space = HilbertSpace::new(6).unwrap();
        let opts = ScanOptions { points: 3, ..ScanOptions::new(3) };
        assert!(matches!(scan_eta(&p, &Drive::off(), space, &opts), Err(Error::InvalidParameter { field: "points", .. })));
        let opts = ScanOptions::new(2);
        assert!(matches!(scan_eta(&p, &Drive::off(), space, &opts), Err(Error::InvalidParameter { field: "photons", .. })));
    }
}
