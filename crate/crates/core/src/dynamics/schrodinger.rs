use nalgebra::DVector;
use num_complex::Complex64;

use super::frame::Frame;
use super::{interaction_frame_max_frequency, QuantumState, TimeGrid, TimeSeries};
use crate::error::{Error, Result};
use crate::model::{Couplings, Drive, HilbertSpace, ModelParams};
use crate::observables::{ObservableRecord, PhotonDistribution};

/// A run is rejected once |‖ψ‖ - 1| exceeds this at a sample point.
pub const NORM_DRIFT_LIMIT: f64 = 1e-4;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Fixed-step RK4 integrator for i dψ/dt = H(t) ψ.
///
/// Amplitudes are carried in the interaction frame of the diagonal part of
/// H(t), where the generator is u_a G_ab ū_b with G the (static, sparse)
/// couplings and u_a = e^{iθ_a(t)}.
#[derive(Debug, Clone)]
pub struct SchrodingerPropagator {
    space: HilbertSpace,
    couplings: Couplings,
    frame: Frame,
    max_frequency: f64,
}

/// Interaction-frame amplitudes handed to observers at sample points.
pub struct FrameSample<'a> {
    pub t: f64,
    amplitudes: &'a [Complex64],
    propagator: &'a SchrodingerPropagator,
}

impl FrameSample<'_> {
    /// Bare-basis probabilities (frame independent).
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Schrödinger-picture state.
    pub fn state(&self) -> QuantumState {
        self.propagator.to_lab(self.t, self.amplitudes)
    }
}

struct Workspace {
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
    rotated: Vec<Complex64>,
    u0: Vec<Complex64>,
    um: Vec<Complex64>,
    u1: Vec<Complex64>,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        let v = || vec![ZERO; dim];
        Workspace { k: [v(), v(), v(), v()], tmp: v(), rotated: v(), u0: v(), um: v(), u1: v() }
    }
}

impl SchrodingerPropagator {
    pub fn new(params: &ModelParams, drive: &Drive, space: HilbertSpace) -> Result<Self> {
        params.validate()?;
        drive.validate()?;
        Ok(SchrodingerPropagator {
            space,
            couplings: Couplings::new(params, space),
            frame: Frame::new(params, drive, space),
            max_frequency: interaction_frame_max_frequency(params, drive, space),
        })
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    /// Fastest frequency the step size has to resolve.
    pub fn max_frequency(&self) -> f64 {
        self.max_frequency
    }

    fn to_frame(&self, t: f64, psi: &QuantumState) -> Vec<Complex64> {
        let mut u = vec![ZERO; self.space.dim()];
        self.frame.phases(t, &mut u);
        psi.amplitudes().iter().zip(&u).map(|(a, ui)| a * ui).collect()
    }

    fn to_lab(&self, t: f64, c: &[Complex64]) -> QuantumState {
        let mut u = vec![ZERO; self.space.dim()];
        self.frame.phases(t, &mut u);
        let amps = DVector::from_iterator(c.len(), c.iter().zip(&u).map(|(a, ui)| a * ui.conj()));
        QuantumState::from_amplitudes(self.space, amps).expect("dimension fixed by propagator")
    }

    /// out = -i u ∘ G (ū ∘ c)
    #[inline]
    fn derivative(&self, u: &[Complex64], c: &[Complex64], rotated: &mut [Complex64], out: &mut [Complex64]) {
        for ((r, ci), ui) in rotated.iter_mut().zip(c).zip(u) {
            *r = ci * ui.conj();
        }
        for (a, o) in out.iter_mut().enumerate() {
            let (cols, vals) = self.couplings.row_slices(a);
            let mut acc = ZERO;
            for (&b, &g) in cols.iter().zip(vals) {
                acc += rotated[b] * g;
            }
            let v = u[a] * acc;
            *o = Complex64::new(v.im, -v.re);
        }
    }

    /// One RK4 step of size `h` from `t`; phases for t, t + h/2 and t + h
    /// must already be in `ws.u0`, `ws.um`, `ws.u1`.
    fn step(&self, c: &mut [Complex64], h: f64, ws: &mut Workspace) {
        let Workspace { k, tmp, rotated, u0, um, u1 } = ws;
        let [k1, k2, k3, k4] = k;
        self.derivative(u0, c, rotated, k1);
        for ((t, ci), ki) in tmp.iter_mut().zip(c.iter()).zip(k1.iter()) {
            *t = ci + ki * (0.5 * h);
        }
        self.derivative(um, tmp, rotated, k2);
        for ((t, ci), ki) in tmp.iter_mut().zip(c.iter()).zip(k2.iter()) {
            *t = ci + ki * (0.5 * h);
        }
        self.derivative(um, tmp, rotated, k3);
        for ((t, ci), ki) in tmp.iter_mut().zip(c.iter()).zip(k3.iter()) {
            *t = ci + ki * h;
        }
        self.derivative(u1, tmp, rotated, k4);
        let w = h / 6.0;
        for i in 0..c.len() {
            c[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }

    fn advance<F>(&self, c: &mut [Complex64], t_from: f64, t_to: f64, steps: usize, mut on_step: F) -> Result<()>
    where
        F: FnMut(usize, f64, &[Complex64]) -> Result<()>,
    {
        let h = (t_to - t_from) / steps as f64;
        let time = |s: usize| t_from + s as f64 * h;
        let mut ws = Workspace::new(self.space.dim());
        self.frame.phases(t_from, &mut ws.u1);
        for s in 0..steps {
            std::mem::swap(&mut ws.u0, &mut ws.u1);
            let (ta, tb) = (time(s), time(s + 1));
            self.frame.phases(0.5 * (ta + tb), &mut ws.um);
            self.frame.phases(tb, &mut ws.u1);
            self.step(c, tb - ta, &mut ws);
            on_step(s + 1, tb, c)?;
        }
        Ok(())
    }

    /// Evolves `psi` from `t_from` to `t_to` in `steps` equal steps.
    /// `t_to < t_from` integrates backwards.
    pub fn propagate(&self, psi: &QuantumState, t_from: f64, t_to: f64, steps: usize) -> Result<QuantumState> {
        check_space(self.space, psi)?;
        let mut c = self.to_frame(t_from, psi);
        self.advance(&mut c, t_from, t_to, steps.max(1), |_, _, _| Ok(()))?;
        Ok(self.to_lab(t_to, &c))
    }

    /// Integrates over `grid`, calling `observe` at every sample point
    /// (including t0). Fails with [`Error::NormDrift`] when the norm drifts
    /// beyond [`NORM_DRIFT_LIMIT`].
    pub fn run<F>(&self, psi0: &QuantumState, grid: &TimeGrid, mut observe: F) -> Result<()>
    where
        F: FnMut(&FrameSample<'_>),
    {
        check_space(self.space, psi0)?;
        let mut c = self.to_frame(grid.t0, psi0);
        let mut emit = |t: f64, c: &[Complex64]| -> Result<()> {
            let sample = FrameSample { t, amplitudes: c, propagator: self };
            let drift = (sample.norm() - 1.0).abs();
            if drift > NORM_DRIFT_LIMIT {
                return Err(Error::NormDrift { t, drift, limit: NORM_DRIFT_LIMIT });
            }
            observe(&sample);
            Ok(())
        };
        emit(grid.t0, &c)?;
        self.advance(&mut c, grid.t0, grid.t1, grid.steps(), |s, t, c| {
            if grid.is_sample(s) {
                emit(t, c)?;
            }
            Ok(())
        })
    }
}

fn check_space(space: HilbertSpace, psi: &QuantumState) -> Result<()> {
    if psi.space() != space {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: psi.space().dim() });
    }
    Ok(())
}

/// Integrates the Schrödinger equation for H(t) over `grid` and records the
/// standard observables at every sample point. No renormalization is
/// applied; the largest norm drift is reported in the series.
pub fn evolve_schrodinger(
    params: &ModelParams,
    drive: &Drive,
    psi0: &QuantumState,
    grid: &TimeGrid,
) -> Result<TimeSeries> {
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter { field: "psi0", reason: format!("norm {}", psi0.norm()) });
    }
    let space = psi0.space();
    let prop = SchrodingerPropagator::new(params, drive, space)?;
    grid.check_resolution(prop.max_frequency())?;
    let mut series = TimeSeries { dt: grid.step(), ..TimeSeries::default() };
    prop.run(psi0, grid, |s| {
        let probs = s.probabilities();
        series.push(
            ObservableRecord::from_probabilities(s.t, space, &probs, s.norm()),
            PhotonDistribution::from_probabilities(space, &probs),
        );
    })?;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::default_step;
    use crate::model::bare_hamiltonian;
    use crate::spectrum::diagonalize;

    fn fig1() -> (ModelParams, Drive) {
        let p = ModelParams::from_detunings(1.0, 0.464, 0.106, [0.05, 0.06, 0.03], [1, 1, 1]);
        let d = Drive { eps2: 0.07 * p.e2, eta: 3.0037, ..Drive::off() };
        (p, d)
    }

    /// Bare-frame RK4 on the dense H(t), independent of the interaction
    /// frame and the sparse coupling storage.
    fn dense_reference(p: &ModelParams, d: &Drive, psi: &QuantumState, t1: f64, steps: usize) -> DVector<Complex64> {
        let space = psi.space();
        let h0 = bare_hamiltonian(p, space).unwrap().into_inner().map(|x| Complex64::new(x, 0.0));
        let ham = |t: f64| {
            let mut h = h0.clone();
            for i in 0..space.dim() {
                h[(i, i)] += d.shift(space.atom(i), t);
            }
            h
        };
        let f = |t: f64, y: &DVector<Complex64>| -> DVector<Complex64> { ham(t) * y * Complex64::new(0.0, -1.0) };
        let h = t1 / steps as f64;
        let mut y = psi.amplitudes().clone();
        for s in 0..steps {
            let t = s as f64 * h;
            let k1 = f(t, &y);
            let c = |x: f64| Complex64::new(x, 0.0);
            let k2 = f(t + h / 2.0, &(&y + &k1 * c(h / 2.0)));
            let k3 = f(t + h / 2.0, &(&y + &k2 * c(h / 2.0)));
            let k4 = f(t + h, &(&y + &k3 * c(h)));
            y += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
        }
        y
    }

    #[test]
    fn agrees_with_bare_frame_reference() {
        let (p, d) = fig1();
        let space = HilbertSpace::new(6).unwrap();
        let psi0 = QuantumState::superposition(space, &[((0, 0), 0.8), ((1, 2), 0.6)]).unwrap();
        let t1 = 40.0;
        let reference = dense_reference(&p, &d, &psi0, t1, 40_000);
        let prop = SchrodingerPropagator::new(&p, &d, space).unwrap();
        let out = prop.propagate(&psi0, 0.0, t1, 4_000).unwrap();
        let err = (out.amplitudes() - reference).camax();
        assert!(err < 1e-8, "max amplitude error {err}");
    }

    #[test]
    fn stationary_eigenstate_stays_put() {
        let (p, _) = fig1();
        let space = HilbertSpace::new(12).unwrap();
        let spec = diagonalize(&bare_hamiltonian(&p, space).unwrap()).unwrap();
        let v = spec.eigenvector(7).map(|x| Complex64::new(x, 0.0));
        let psi0 = QuantumState::from_amplitudes(space, v).unwrap();
        let p0 = psi0.amplitudes().map(|a| a.norm_sqr());
        let prop = SchrodingerPropagator::new(&p, &Drive::off(), space).unwrap();
        let grid = TimeGrid::with_default_step(0.0, 1000.0, prop.max_frequency(), 500).unwrap();
        let mut worst: f64 = 0.0;
        prop.run(&psi0, &grid, |s| {
            for (a, b) in s.probabilities().iter().zip(p0.iter()) {
                worst = worst.max((a - b).abs());
            }
        })
        .unwrap();
        assert!(worst < 1e-8, "population drift {worst}");
    }

    #[test]
    fn uncoupled_vacuum_never_gains_photons() {
        let (p, d) = fig1();
        let p = p.with_scaled_couplings(0.0);
        let space = HilbertSpace::new(5).unwrap();
        let grid = TimeGrid::new(0.0, 200.0, default_step(3.0037), 100).unwrap();
        let series = evolve_schrodinger(&p, &d, &QuantumState::basis(space, 0, 0), &grid).unwrap();
        assert!(series.records.iter().all(|r| r.n_ph == 0.0));
    }

    #[test]
    fn forward_then_backward_returns() {
        let (p, d) = fig1();
        let space = HilbertSpace::new(10).unwrap();
        let psi0 = QuantumState::basis(space, 0, 0);
        let prop = SchrodingerPropagator::new(&p, &d, space).unwrap();
        let steps = (1000.0 / default_step(prop.max_frequency())).ceil() as usize;
        let fwd = prop.propagate(&psi0, 0.0, 1000.0, steps).unwrap();
        let back = prop.propagate(&fwd, 1000.0, 0.0, steps).unwrap();
        let err = (back.amplitudes() - psi0.amplitudes()).camax();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn rejects_unresolved_grid_and_unnormalized_state() {
        let (p, d) = fig1();
        let space = HilbertSpace::new(4).unwrap();
        let coarse = TimeGrid::new(0.0, 10.0, 0.5, 1).unwrap();
        let psi = QuantumState::basis(space, 0, 0);
        assert!(matches!(evolve_schrodinger(&p, &d, &psi, &coarse), Err(Error::InvalidGrid(_))));
        let fine = TimeGrid::new(0.0, 10.0, 0.01, 1).unwrap();
        let unnormalized =
            QuantumState::from_amplitudes(space, psi.amplitudes() * Complex64::new(2.0, 0.0)).unwrap();
        assert!(evolve_schrodinger(&p, &d, &unnormalized, &fine).is_err());
    }

    #[test]
    fn frame_round_trip() {
        let (p, d) = fig1();
        let space = HilbertSpace::new(4).unwrap();
        let prop = SchrodingerPropagator::new(&p, &d, space).unwrap();
        let psi = QuantumState::coherent(space, 1, Complex64::new(0.3, 0.4));
        let c = prop.to_frame(123.4, &psi);
        let back = prop.to_lab(123.4, &c);
        assert!((back.amplitudes() - psi.amplitudes()).camax() < 1e-14);
    }
}
