use nalgebra::DVector;
use num_complex::Complex64;

use super::{QuantumState, TimeGrid, TimeSeries};
use crate::error::{Error, Result};
use crate::model::{Drive, HilbertSpace, LEVELS};
use crate::observables::{ObservableRecord, PhotonDistribution};
use crate::spectrum::{rate_element, DressedSpectrum};

/// Terms rotating faster than this (units of ω) are dropped.
pub const DEFAULT_ROTATING_CUTOFF: f64 = 0.1;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Dressed-state amplitudes b_n.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveState {
    b: DVector<Complex64>,
}

impl EffectiveState {
    pub fn new(b: DVector<Complex64>) -> Result<Self> {
        let norm = b.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter { field: "b0", reason: format!("norm {norm}") });
        }
        Ok(EffectiveState { b })
    }

    /// All weight on dressed state `n`.
    pub fn dressed(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::IndexOutOfRange { index: n, dim });
        }
        let mut b = DVector::zeros(dim);
        b[n] = Complex64::new(1.0, 0.0);
        Ok(EffectiveState { b })
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// |b_n|².
    pub fn population(&self, n: usize) -> f64 {
        self.b[n].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.b.norm()
    }
}

/// One retained term of ḃ_n: `coefficient · e^{i frequency t} · b_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCoupling {
    pub n: usize,
    pub m: usize,
    pub coefficient: Complex64,
    pub frequency: f64,
}

/// Slow-amplitude equations between dressed states,
///
/// ```text
/// ḃ_n = Σ_{m≠n} b_m [Θ*_{m;n} e^{it(λ_n-λ_m-η)} - Θ_{n;m} e^{-it(λ_m-λ_n-η)}],
/// ```
///
/// keeping only terms whose frequency is within the rotating cutoff.
/// Bare-basis output uses
/// |ψ(t)> = Σ_n e^{-iλ_n t} b_n(t) F_n(t) |φ_n>, where
/// F_n(t) = exp(i Σ_k (ε_k/η) <φ_n|σ_kk|φ_n> (cos(ηt+φ_k) - cos φ_k)).
#[derive(Debug, Clone)]
pub struct EffectiveSystem {
    spectrum: DressedSpectrum,
    space: HilbertSpace,
    drive: Drive,
    couplings: Vec<EffectiveCoupling>,
    /// <φ_n|σ_kk|φ_n> indexed [n][k].
    diagonal: Vec<[f64; LEVELS]>,
}

impl EffectiveSystem {
    /// Couples every pair of dressed states.
    pub fn new(spectrum: &DressedSpectrum, space: HilbertSpace, drive: &Drive, cutoff: f64) -> Result<Self> {
        let all: Vec<usize> = (0..spectrum.dim()).collect();
        Self::restricted(spectrum, space, drive, &all, cutoff)
    }

    /// Couples only the dressed states listed in `states`.
    pub fn restricted(
        spectrum: &DressedSpectrum,
        space: HilbertSpace,
        drive: &Drive,
        states: &[usize],
        cutoff: f64,
    ) -> Result<Self> {
        drive.validate()?;
        if spectrum.dim() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: spectrum.dim() });
        }
        if !(cutoff.is_finite() && cutoff >= 0.0) {
            return Err(Error::InvalidParameter { field: "rotating_cutoff", reason: format!("got {cutoff}") });
        }
        if let Some(&bad) = states.iter().find(|&&n| n >= spectrum.dim()) {
            return Err(Error::IndexOutOfRange { index: bad, dim: spectrum.dim() });
        }
        let lambda = spectrum.eigenvalues();
        let mut couplings = Vec::new();
        for &n in states {
            for &m in states {
                if n == m {
                    continue;
                }
                let gap = lambda[n] - lambda[m];
                let absorb = gap - drive.eta;
                let emit = gap + drive.eta;
                if absorb.abs() > cutoff && emit.abs() > cutoff {
                    continue;
                }
                let theta_nm = rate_element(spectrum, drive, n, m);
                let theta_mn = rate_element(spectrum, drive, m, n);
                if absorb.abs() <= cutoff && theta_mn != ZERO {
                    couplings.push(EffectiveCoupling { n, m, coefficient: theta_mn.conj(), frequency: absorb });
                }
                if emit.abs() <= cutoff && theta_nm != ZERO {
                    couplings.push(EffectiveCoupling { n, m, coefficient: -theta_nm, frequency: emit });
                }
            }
        }
        let diagonal = (0..spectrum.dim())
            .map(|n| std::array::from_fn(|k| spectrum.level_projection(k, n, n)))
            .collect();
        Ok(EffectiveSystem { spectrum: spectrum.clone(), space, drive: *drive, couplings, diagonal })
    }

    pub fn couplings(&self) -> &[EffectiveCoupling] {
        &self.couplings
    }

    pub fn spectrum(&self) -> &DressedSpectrum {
        &self.spectrum
    }

    /// Fastest rate in the retained equations.
    pub fn max_frequency(&self) -> f64 {
        let mut row = vec![0.0; self.spectrum.dim()];
        let mut fastest: f64 = 0.0;
        for c in &self.couplings {
            row[c.n] += c.coefficient.norm();
            fastest = fastest.max(c.frequency.abs());
        }
        let strongest = row.iter().copied().fold(0.0, f64::max);
        (fastest + strongest).max(1e-9)
    }

    /// F_n(t).
    pub fn phase_factor(&self, n: usize, t: f64) -> Complex64 {
        let d = &self.drive;
        if d.eta == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let arg: f64 = (1..LEVELS)
            .map(|k| {
                let eps = d.amplitude(k);
                let phi = d.phase(k);
                eps / d.eta * self.diagonal[n][k] * ((d.eta * t + phi).cos() - phi.cos())
            })
            .sum();
        Complex64::from_polar(1.0, arg)
    }

    /// Bare-basis state at time `t`.
    pub fn reconstruct(&self, t: f64, state: &EffectiveState) -> QuantumState {
        let dim = self.spectrum.dim();
        let vecs = self.spectrum.eigenvectors();
        let mut amps = DVector::from_element(dim, ZERO);
        for n in 0..dim {
            let b = state.b[n];
            if b == ZERO {
                continue;
            }
            let w = b * Complex64::from_polar(1.0, -self.spectrum.eigenvalue(n) * t) * self.phase_factor(n, t);
            for (a, v) in amps.iter_mut().zip(vecs.column(n).iter()) {
                *a += w * *v;
            }
        }
        QuantumState::from_amplitudes(self.space, amps).expect("dimension checked at construction")
    }

    fn derivative(&self, t: f64, b: &[Complex64], out: &mut [Complex64]) {
        out.fill(ZERO);
        for c in &self.couplings {
            out[c.n] += c.coefficient * Complex64::from_polar(1.0, c.frequency * t) * b[c.m];
        }
    }

    /// RK4 over `grid`, calling `observe` at every sample point.
    pub fn run<F>(&self, b0: &EffectiveState, grid: &TimeGrid, mut observe: F) -> Result<()>
    where
        F: FnMut(f64, &EffectiveState),
    {
        if b0.dim() != self.spectrum.dim() {
            return Err(Error::DimensionMismatch { expected: self.spectrum.dim(), found: b0.dim() });
        }
        let dim = b0.dim();
        let mut state = b0.clone();
        observe(grid.t0, &state);
        let mut k = [vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim]];
        let mut tmp = vec![ZERO; dim];
        for s in 0..grid.steps() {
            let (ta, tb) = (grid.time(s), grid.time(s + 1));
            let h = tb - ta;
            let b = state.b.as_mut_slice();
            let [k1, k2, k3, k4] = &mut k;
            self.derivative(ta, b, k1);
            for i in 0..dim {
                tmp[i] = b[i] + k1[i] * (0.5 * h);
            }
            self.derivative(ta + 0.5 * h, &tmp, k2);
            for i in 0..dim {
                tmp[i] = b[i] + k2[i] * (0.5 * h);
            }
            self.derivative(ta + 0.5 * h, &tmp, k3);
            for i in 0..dim {
                tmp[i] = b[i] + k3[i] * h;
            }
            self.derivative(tb, &tmp, k4);
            for i in 0..dim {
                b[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
            if grid.is_sample(s + 1) {
                let drift = (state.norm() - 1.0).abs();
                if drift > super::NORM_DRIFT_LIMIT {
                    return Err(Error::NormDrift { t: tb, drift, limit: super::NORM_DRIFT_LIMIT });
                }
                observe(tb, &state);
            }
        }
        Ok(())
    }
}

/// Integrates the slow-amplitude equations and records bare-basis
/// observables at every sample point.
pub fn evolve_effective(
    spectrum: &DressedSpectrum,
    space: HilbertSpace,
    drive: &Drive,
    b0: &EffectiveState,
    grid: &TimeGrid,
    rotating_cutoff: f64,
) -> Result<TimeSeries> {
    let system = EffectiveSystem::new(spectrum, space, drive, rotating_cutoff)?;
    grid.check_resolution(system.max_frequency())?;
    let mut series = TimeSeries { dt: grid.step(), ..TimeSeries::default() };
    system.run(b0, grid, |t, state| {
        let psi = system.reconstruct(t, state);
        let probs: Vec<f64> = psi.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        series.push(
            ObservableRecord::from_probabilities(t, space, &probs, state.norm()),
            PhotonDistribution::from_probabilities(space, &probs),
        );
    })?;
    Ok(series)
}
