use num_complex::Complex64;

use crate::model::{Drive, HilbertSpace, ModelParams, LEVELS};

/// Phases of the diagonal part D(t) = ω n + Σ_k E_k(t) σ_kk of the
/// Hamiltonian: θ_a(t) = ∫_0^t D_aa(s) ds.
#[derive(Debug, Clone)]
pub(crate) struct Frame {
    space: HilbertSpace,
    omega: f64,
    levels: [f64; LEVELS],
    drive: Drive,
}

impl Frame {
    pub fn new(params: &ModelParams, drive: &Drive, space: HilbertSpace) -> Self {
        Frame {
            space,
            omega: params.omega,
            levels: [0.0, params.e1, params.e2],
            drive: *drive,
        }
    }

    /// Writes u_a = e^{iθ_a(t)} for every basis index.
    pub fn phases(&self, t: f64, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.space.dim());
        let mut atom = [Complex64::new(1.0, 0.0); LEVELS];
        for (j, a) in atom.iter_mut().enumerate() {
            *a = Complex64::from_polar(1.0, self.levels[j] * t + self.drive.shift_integral(j, t));
        }
        let step = Complex64::from_polar(1.0, self.omega * t);
        let mut photon = Complex64::new(1.0, 0.0);
        for block in out.chunks_exact_mut(LEVELS) {
            for (u, a) in block.iter_mut().zip(&atom) {
                *u = photon * a;
            }
            photon *= step;
        }
    }
}
