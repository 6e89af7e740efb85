use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::frame::Frame;
use super::{interaction_frame_max_frequency, DensityOperator, TimeGrid, TimeSeries};
use crate::error::{Error, Result};
use crate::model::{Couplings, Drive, HilbertSpace, ModelParams, LEVELS};
use crate::observables::{ObservableRecord, PhotonDistribution};

pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Smallest eigenvalue tolerated at a sample point.
pub const POSITIVITY_LIMIT: f64 = -1e-6;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Cavity loss, atomic relaxation and pure dephasing rates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationRates {
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub gamma01: f64,
    #[serde(default)]
    pub gamma02: f64,
    #[serde(default)]
    pub gamma12: f64,
    #[serde(default)]
    pub gphi1: f64,
    #[serde(default)]
    pub gphi2: f64,
}

impl DissipationRates {
    pub fn none() -> Self {
        Self::default()
    }

    /// Equal atomic relaxation and dephasing rates `gamma`, cavity rate `kappa`.
    pub fn uniform(kappa: f64, gamma: f64) -> Self {
        DissipationRates { kappa, gamma01: gamma, gamma02: gamma, gamma12: gamma, gphi1: gamma, gphi2: gamma }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("kappa", self.kappa),
            ("gamma01", self.gamma01),
            ("gamma02", self.gamma02),
            ("gamma12", self.gamma12),
            ("gphi1", self.gphi1),
            ("gphi2", self.gphi2),
        ];
        for (field, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter { field, reason: format!("must be nonnegative, got {v}") });
            }
        }
        Ok(())
    }

    /// Relaxation rate γ_{lo,hi} for the decay hi -> lo.
    fn relaxation(&self, lo: usize, hi: usize) -> f64 {
        match (lo, hi) {
            (0, 1) => self.gamma01,
            (0, 2) => self.gamma02,
            (1, 2) => self.gamma12,
            _ => 0.0,
        }
    }

    fn dephasing(&self, level: usize) -> f64 {
        match level {
            1 => self.gphi1,
            2 => self.gphi2,
            _ => 0.0,
        }
    }
}

/// Fixed-step RK4 integrator for
///
/// ```text
/// dρ/dt = -i[H(t), ρ] + κ L[a] + Σ_{k<l} γ_kl L[σ_kl] + Σ_k γ_k^φ L[σ_kk],
/// L[O] = O ρ O† - O†O ρ / 2 - ρ O†O / 2.
/// ```
///
/// The state is carried in the same interaction frame as
/// [`super::SchrodingerPropagator`]. Every jump operator only acquires a
/// scalar phase in that frame, so the dissipator keeps its form.
#[derive(Debug, Clone)]
pub struct LindbladPropagator {
    space: HilbertSpace,
    couplings: Couplings,
    frame: Frame,
    rates: DissipationRates,
    /// Element-wise part of the dissipator (column-major).
    decay: Vec<f64>,
    /// √(n+1) for states that can absorb a photon from above, else 0.
    ladder: Vec<f64>,
    max_frequency: f64,
}

/// Interaction-frame density matrix handed to observers at sample points.
pub struct LindbladSample<'a> {
    pub t: f64,
    rho: &'a [Complex64],
    propagator: &'a LindbladPropagator,
}

impl LindbladSample<'_> {
    pub fn probabilities(&self) -> Vec<f64> {
        let d = self.propagator.space.dim();
        (0..d).map(|i| self.rho[i + i * d].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.probabilities().iter().sum()
    }

    /// Schrödinger-picture density operator.
    pub fn state(&self) -> DensityOperator {
        self.propagator.to_lab(self.t, self.rho)
    }
}

struct Workspace {
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
    column: Vec<Complex64>,
    u: Vec<Complex64>,
    /// Couplings rotated into the frame at t, t + h/2 and t + h, stored on
    /// the sparsity pattern of G.
    g0: Vec<Complex64>,
    gm: Vec<Complex64>,
    g1: Vec<Complex64>,
}

impl Workspace {
    fn new(dim: usize, nnz: usize) -> Self {
        let m = || vec![ZERO; dim * dim];
        let g = || vec![ZERO; nnz];
        Workspace { k: [m(), m(), m(), m()], tmp: m(), column: vec![ZERO; dim], u: vec![ZERO; dim], g0: g(), gm: g(), g1: g() }
    }
}

impl LindbladPropagator {
    pub fn new(params: &ModelParams, drive: &Drive, rates: &DissipationRates, space: HilbertSpace) -> Result<Self> {
        params.validate()?;
        drive.validate()?;
        rates.validate()?;
        let d = space.dim();
        let mut decay = vec![0.0; d * d];
        for b in 0..d {
            for a in 0..d {
                let (ja, na) = space.label(a);
                let (jb, nb) = space.label(b);
                let mut rate = rates.kappa * (na + nb) as f64;
                for lo in 0..LEVELS {
                    for hi in lo + 1..LEVELS {
                        let g = rates.relaxation(lo, hi);
                        rate += g * (f64::from(u8::from(ja == hi)) + f64::from(u8::from(jb == hi)));
                    }
                }
                for level in 1..LEVELS {
                    let (x, y) = (f64::from(u8::from(ja == level)), f64::from(u8::from(jb == level)));
                    rate += rates.dephasing(level) * (x + y - 2.0 * x * y);
                }
                decay[a + b * d] = -0.5 * rate;
            }
        }
        let ladder = (0..d)
            .map(|i| {
                let n = space.photons(i);
                if n < space.n_max() {
                    ((n + 1) as f64).sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        Ok(LindbladPropagator {
            space,
            couplings: Couplings::new(params, space),
            frame: Frame::new(params, drive, space),
            rates: *rates,
            decay,
            ladder,
            max_frequency: interaction_frame_max_frequency(params, drive, space),
        })
    }

    pub fn max_frequency(&self) -> f64 {
        self.max_frequency
    }

    fn to_frame(&self, t: f64, rho: &DensityOperator) -> Vec<Complex64> {
        let d = self.space.dim();
        let mut u = vec![ZERO; d];
        self.frame.phases(t, &mut u);
        let m = rho.matrix();
        let mut out = vec![ZERO; d * d];
        for b in 0..d {
            for a in 0..d {
                out[a + b * d] = m[(a, b)] * u[a] * u[b].conj();
            }
        }
        out
    }

    fn to_lab(&self, t: f64, rho: &[Complex64]) -> DensityOperator {
        let d = self.space.dim();
        let mut u = vec![ZERO; d];
        self.frame.phases(t, &mut u);
        let m = DMatrix::from_fn(d, d, |a, b| rho[a + b * d] * u[a].conj() * u[b]);
        DensityOperator::from_matrix(self.space, m).expect("dimension fixed by propagator")
    }

    /// G_I(t) = u G ū on the sparsity pattern of G.
    fn rotate_couplings(&self, t: f64, u: &mut [Complex64], out: &mut [Complex64]) {
        self.frame.phases(t, u);
        let cols = self.couplings.columns();
        let vals = self.couplings.values();
        for (a, &ua) in u.iter().enumerate() {
            for i in self.couplings.row_range(a) {
                out[i] = ua * u[cols[i]].conj() * vals[i];
            }
        }
    }

    /// out = -i[G_I, ρ] + D(ρ), one column at a time.
    fn derivative(&self, g: &[Complex64], rho: &[Complex64], x: &mut [Complex64], out: &mut [Complex64]) {
        let d = self.space.dim();
        let cols = self.couplings.columns();
        for b in 0..d {
            let col = &rho[b * d..(b + 1) * d];
            // (G_I ρ)_{:,b}
            for (a, xa) in x.iter_mut().enumerate() {
                let mut acc = ZERO;
                for i in self.couplings.row_range(a) {
                    acc += g[i] * col[cols[i]];
                }
                *xa = acc;
            }
            // (ρ G_I)_{:,b} = Σ_c ρ_{:,c} G_I[c, b], with G_I[c, b] = conj(G_I[b, c])
            for i in self.couplings.row_range(b) {
                let c = cols[i];
                let w = g[i].conj();
                for (xa, r) in x.iter_mut().zip(&rho[c * d..(c + 1) * d]) {
                    *xa -= r * w;
                }
            }
            let o = &mut out[b * d..(b + 1) * d];
            let decay = &self.decay[b * d..(b + 1) * d];
            for (((oa, xa), r), k) in o.iter_mut().zip(x.iter()).zip(col).zip(decay) {
                *oa = Complex64::new(xa.im, -xa.re) + r * k;
            }
        }
        // κ a ρ a†
        let kappa = self.rates.kappa;
        if kappa != 0.0 {
            let inner = d - LEVELS;
            for b in 0..inner {
                let w = kappa * self.ladder[b];
                let src = &rho[(b + LEVELS) * d + LEVELS..(b + LEVELS + 1) * d];
                let o = &mut out[b * d..b * d + inner];
                for ((oa, ra), la) in o.iter_mut().zip(src).zip(&self.ladder[..inner]) {
                    *oa += ra * (w * la);
                }
            }
        }
        // γ_kl σ_kl ρ σ_lk
        for lo in 0..LEVELS {
            for hi in lo + 1..LEVELS {
                let rate = self.rates.relaxation(lo, hi);
                if rate == 0.0 {
                    continue;
                }
                let shift = hi - lo;
                for b in (lo..d).step_by(LEVELS) {
                    for a in (lo..d).step_by(LEVELS) {
                        out[a + b * d] += rho[(a + shift) + (b + shift) * d] * rate;
                    }
                }
            }
        }
    }

    fn step(&self, rho: &mut [Complex64], t: f64, h: f64, ws: &mut Workspace) {
        let Workspace { k, tmp, column, u, g0, gm, g1 } = ws;
        std::mem::swap(g0, g1);
        self.rotate_couplings(t + 0.5 * h, u, gm);
        self.rotate_couplings(t + h, u, g1);
        let [k1, k2, k3, k4] = k;
        self.derivative(g0, rho, column, k1);
        for ((t, r), ki) in tmp.iter_mut().zip(rho.iter()).zip(k1.iter()) {
            *t = r + ki * (0.5 * h);
        }
        self.derivative(gm, tmp, column, k2);
        for ((t, r), ki) in tmp.iter_mut().zip(rho.iter()).zip(k2.iter()) {
            *t = r + ki * (0.5 * h);
        }
        self.derivative(gm, tmp, column, k3);
        for ((t, r), ki) in tmp.iter_mut().zip(rho.iter()).zip(k3.iter()) {
            *t = r + ki * h;
        }
        self.derivative(g1, tmp, column, k4);
        let w = h / 6.0;
        for i in 0..rho.len() {
            rho[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
        symmetrize(rho, self.space.dim());
    }

    /// Integrates over `grid`, calling `observe` at every sample point.
    /// Trace drift and positivity are checked at each sample.
    pub fn run<F>(&self, rho0: &DensityOperator, grid: &TimeGrid, mut observe: F) -> Result<()>
    where
        F: FnMut(&LindbladSample<'_>),
    {
        if rho0.space() != self.space {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), found: rho0.space().dim() });
        }
        let mut rho = self.to_frame(grid.t0, rho0);
        let mut emit = |t: f64, rho: &[Complex64]| -> Result<()> {
            let sample = LindbladSample { t, rho, propagator: self };
            let drift = (sample.trace() - 1.0).abs();
            if drift > TRACE_DRIFT_LIMIT {
                return Err(Error::TraceDrift { t, drift, limit: TRACE_DRIFT_LIMIT });
            }
            let min_eigenvalue = min_eigenvalue(rho, self.space.dim());
            if min_eigenvalue < POSITIVITY_LIMIT {
                return Err(Error::PositivityLoss { t, min_eigenvalue });
            }
            observe(&sample);
            Ok(())
        };
        emit(grid.t0, &rho)?;

        let steps = grid.steps();
        let mut ws = Workspace::new(self.space.dim(), self.couplings.nnz());
        self.rotate_couplings(grid.t0, &mut ws.u, &mut ws.g1);
        for s in 0..steps {
            let (ta, tb) = (grid.time(s), grid.time(s + 1));
            self.step(&mut rho, ta, tb - ta, &mut ws);
            if grid.is_sample(s + 1) {
                emit(tb, &rho)?;
            }
        }
        Ok(())
    }
}

fn symmetrize(rho: &mut [Complex64], d: usize) {
    for b in 0..d {
        for a in 0..b {
            let avg = (rho[a + b * d] + rho[b + a * d].conj()) * 0.5;
            rho[a + b * d] = avg;
            rho[b + a * d] = avg.conj();
        }
        let diag = &mut rho[b + b * d];
        diag.im = 0.0;
    }
}

/// The spectrum is frame independent (unitary conjugation).
fn min_eigenvalue(rho: &[Complex64], d: usize) -> f64 {
    DMatrix::from_column_slice(d, d, rho)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Integrates the master equation over `grid` and records the standard
/// observables at every sample point.
pub fn evolve_lindblad(
    params: &ModelParams,
    drive: &Drive,
    rates: &DissipationRates,
    rho0: &DensityOperator,
    grid: &TimeGrid,
) -> Result<TimeSeries> {
    rho0.validate()?;
    let space = rho0.space();
    let prop = LindbladPropagator::new(params, drive, rates, space)?;
    grid.check_resolution(prop.max_frequency())?;
    let mut series = TimeSeries { dt: grid.step(), ..TimeSeries::default() };
    prop.run(rho0, grid, |s| {
        let probs = s.probabilities();
        series.push(
            ObservableRecord::from_probabilities(s.t, space, &probs, s.trace()),
            PhotonDistribution::from_probabilities(space, &probs),
        );
    })?;
    Ok(series)
}
