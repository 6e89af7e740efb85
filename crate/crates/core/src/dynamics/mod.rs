//! Time evolution: full Schrödinger integration, the dressed-frame
//! slow-amplitude equations and the Lindblad master equation.
//!
//! The full integrators work in the interaction frame of the diagonal part
//! of H(t), D(t) = ω n + Σ_k E_k(t) σ_kk. Its phases θ_a(t) = ∫ D_aa are
//! known in closed form (including the modulation), so only the couplings
//! are integrated numerically. Bare-basis populations are identical in both
//! frames; amplitudes are converted back with e^{-iθ_a(t)}.

mod effective;
mod frame;
mod lindblad;
mod schrodinger;

pub use effective::{evolve_effective, EffectiveCoupling, EffectiveState, EffectiveSystem, DEFAULT_ROTATING_CUTOFF};
pub use lindblad::{evolve_lindblad, DissipationRates, LindbladPropagator, LindbladSample, POSITIVITY_LIMIT, TRACE_DRIFT_LIMIT};
pub use schrodinger::{evolve_schrodinger, FrameSample, SchrodingerPropagator, NORM_DRIFT_LIMIT};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{max_coupled_gap, Drive, HilbertSpace, ModelParams};
use crate::observables::{ObservableRecord, PhotonDistribution};

/// Pure state in the bare basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    space: HilbertSpace,
    amplitudes: DVector<Complex64>,
}

impl QuantumState {
    pub fn from_amplitudes(space: HilbertSpace, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: amplitudes.len() });
        }
        Ok(QuantumState { space, amplitudes })
    }

    /// |atom, photons>.
    pub fn basis(space: HilbertSpace, atom: usize, photons: usize) -> Self {
        let mut amplitudes = DVector::zeros(space.dim());
        amplitudes[space.index(atom, photons)] = Complex64::new(1.0, 0.0);
        QuantumState { space, amplitudes }
    }

    /// Normalized superposition of labelled basis states ((atom, photons), amplitude).
    pub fn superposition(space: HilbertSpace, terms: &[((usize, usize), f64)]) -> Result<Self> {
        let mut amplitudes = DVector::zeros(space.dim());
        for &((atom, photons), a) in terms {
            if photons > space.n_max() {
                return Err(Error::TruncationOverflow { needed: photons, n_max: space.n_max() });
            }
            amplitudes[space.index(atom, photons)] += Complex64::new(a, 0.0);
        }
        let mut s = QuantumState { space, amplitudes };
        s.normalize();
        Ok(s)
    }

    /// Atom in `atom`, field in the coherent state |α>, truncated and
    /// renormalized.
    pub fn coherent(space: HilbertSpace, atom: usize, alpha: Complex64) -> Self {
        let mut amplitudes = DVector::zeros(space.dim());
        let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..=space.n_max() {
            amplitudes[space.index(atom, n)] = c;
            c *= alpha / ((n + 1) as f64).sqrt();
        }
        let mut s = QuantumState { space, amplitudes };
        s.normalize();
        s
    }

    /// Atom in `atom`, field in the squeezed vacuum S(r)|0>, truncated and
    /// renormalized.
    pub fn squeezed_vacuum(space: HilbertSpace, atom: usize, r: f64) -> Self {
        let mut amplitudes = DVector::zeros(space.dim());
        let t = r.tanh();
        let mut c = 1.0 / r.cosh().sqrt();
        let mut m = 0;
        while 2 * m <= space.n_max() {
            amplitudes[space.index(atom, 2 * m)] = Complex64::new(c, 0.0);
            let mf = m as f64;
            c *= -t * ((2.0 * mf + 1.0) / (2.0 * mf + 2.0)).sqrt();
            m += 1;
        }
        let mut s = QuantumState { space, amplitudes };
        s.normalize();
        s
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        self.amplitudes.unscale_mut(n);
    }

    /// <self|other>.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// |<self|other>|².
    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.inner(other).norm_sqr()
    }
}

/// Density operator in the bare basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    space: HilbertSpace,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    pub fn from_matrix(space: HilbertSpace, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: matrix.nrows() });
        }
        Ok(DensityOperator { space, matrix })
    }

    pub fn from_pure(psi: &QuantumState) -> Self {
        let a = psi.amplitudes();
        DensityOperator { space: psi.space(), matrix: a * a.adjoint() }
    }

    pub fn basis(space: HilbertSpace, atom: usize, photons: usize) -> Self {
        Self::from_pure(&QuantumState::basis(space, atom, photons))
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// max |ρ - ρ†|.
    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for c in 0..m.ncols() {
            for r in 0..=c {
                worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Checks Hermiticity, unit trace and positivity at the tolerances of a
    /// valid input state.
    pub fn validate(&self) -> Result<()> {
        if self.hermiticity_error() > 1e-10 {
            return Err(Error::InvalidParameter { field: "rho0", reason: "not Hermitian".into() });
        }
        if (self.trace() - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter { field: "rho0", reason: format!("trace {}", self.trace()) });
        }
        let min = self.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::InvalidParameter { field: "rho0", reason: format!("min eigenvalue {min:e}") });
        }
        Ok(())
    }
}

/// Fixed-step time grid. The step actually used divides the interval evenly
/// and never exceeds the requested `dt`; observables are recorded every
/// `stride` steps and at the final time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub stride: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, dt: f64, stride: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(Error::InvalidGrid(format!("need t1 > t0, got [{t0}, {t1}]")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if stride == 0 {
            return Err(Error::InvalidGrid("stride must be at least 1".into()));
        }
        Ok(TimeGrid { t0, t1, dt, stride })
    }

    /// dt = 2π / (80 f_max).
    pub fn with_default_step(t0: f64, t1: f64, max_frequency: f64, stride: usize) -> Result<Self> {
        Self::new(t0, t1, default_step(max_frequency), stride)
    }

    pub fn steps(&self) -> usize {
        (((self.t1 - self.t0) / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / self.steps() as f64
    }

    pub fn time(&self, step: usize) -> f64 {
        self.t0 + step as f64 * self.step()
    }

    pub fn is_sample(&self, step: usize) -> bool {
        step % self.stride == 0 || step == self.steps()
    }

    /// Requires at least 20 steps per period of the fastest frequency.
    pub fn check_resolution(&self, max_frequency: f64) -> Result<()> {
        let limit = 2.0 * std::f64::consts::PI / (20.0 * max_frequency);
        if self.step() > limit {
            return Err(Error::InvalidGrid(format!(
                "dt = {} does not resolve frequency {max_frequency} (limit {limit})",
                self.step()
            )));
        }
        Ok(())
    }

    pub fn with_halved_step(&self) -> Self {
        TimeGrid { dt: self.step() / 2.0, stride: self.stride * 2, ..*self }
    }
}

pub fn default_step(max_frequency: f64) -> f64 {
    2.0 * std::f64::consts::PI / (80.0 * max_frequency)
}

/// Fastest frequency the interaction-frame integrators must resolve: the
/// modulation frequency or the largest detuning between coupled bare states
/// (widened by the modulation amplitudes).
pub fn interaction_frame_max_frequency(params: &ModelParams, drive: &Drive, space: HilbertSpace) -> f64 {
    let gap = max_coupled_gap(params, space) + drive.eps1 + drive.eps2;
    gap.max(drive.eta).max(1e-3 * params.omega)
}

/// Sampled trajectory.
#[derive(Debug, Clone, Default)]
pub struct TimeSeries {
    pub records: Vec<ObservableRecord>,
    pub distributions: Vec<PhotonDistribution>,
    /// Largest |‖ψ‖ - 1| or |Tr ρ - 1| seen at any sample.
    pub max_drift: f64,
    pub dt: f64,
}

impl TimeSeries {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn photon_numbers(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.n_ph).collect()
    }

    /// Index of the sample closest to `t`.
    pub fn nearest(&self, t: f64) -> Option<usize> {
        self.records
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.t - t).abs().total_cmp(&(b.1.t - t).abs()))
            .map(|(i, _)| i)
    }

    fn push(&mut self, record: ObservableRecord, dist: PhotonDistribution) {
        self.max_drift = self.max_drift.max((record.norm_or_trace - 1.0).abs());
        self.records.push(record);
        self.distributions.push(dist);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_divides_interval_evenly() {
        let g = TimeGrid::new(0.0, 1.0, 0.3, 2).unwrap();
        assert_eq!(g.steps(), 4);
        assert!((g.step() - 0.25).abs() < 1e-15);
        let samples: Vec<usize> = (0..=g.steps()).filter(|&s| g.is_sample(s)).collect();
        assert_eq!(samples, vec![0, 2, 4]);
        let g = TimeGrid::new(0.0, 1.0, 0.25, 3).unwrap();
        assert_eq!(g.steps(), 4);
        assert!(g.is_sample(4));
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(TimeGrid::new(1.0, 0.0, 0.1, 1).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.0, 1).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.1, 0).is_err());
        let g = TimeGrid::new(0.0, 10.0, 0.1, 1).unwrap();
        assert!(g.check_resolution(3.0).is_ok());
        assert!(g.check_resolution(4.0).is_err());
    }

    #[test]
    fn density_operator_checks() {
        let space = HilbertSpace::new(3).unwrap();
        let rho = DensityOperator::basis(space, 0, 1);
        assert_eq!(rho.trace(), 1.0);
        assert_eq!(rho.purity(), 1.0);
        assert!(rho.min_eigenvalue().abs() < 1e-14);
        assert!(rho.validate().is_ok());
        let bad = DensityOperator::from_matrix(space, rho.matrix() * Complex64::new(2.0, 0.0)).unwrap();
        assert!(bad.validate().is_err());
    }
}
