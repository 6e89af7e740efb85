//! Photon-number statistics and atomic populations.
//!
//! Every observable here is diagonal in the bare basis, so pure and mixed
//! states are handled through the probabilities of the bare basis states.

use serde::Serialize;

use crate::dynamics::{DensityOperator, QuantumState};
use crate::model::{HilbertSpace, LEVELS};

/// Below this mean photon number the Mandel factor is reported as absent.
pub const VACUUM_PHOTON_THRESHOLD: f64 = 1e-12;

/// A state whose bare-basis occupation probabilities can be read off.
pub trait BareProbabilities {
    fn space(&self) -> HilbertSpace;
    fn bare_probabilities(&self) -> Vec<f64>;
}

impl BareProbabilities for QuantumState {
    fn space(&self) -> HilbertSpace {
        QuantumState::space(self)
    }

    fn bare_probabilities(&self) -> Vec<f64> {
        self.amplitudes().iter().map(|a| a.norm_sqr()).collect()
    }
}

impl BareProbabilities for DensityOperator {
    fn space(&self) -> HilbertSpace {
        DensityOperator::space(self)
    }

    fn bare_probabilities(&self) -> Vec<f64> {
        let m = self.matrix();
        (0..m.nrows()).map(|i| m[(i, i)].re).collect()
    }
}

/// P(n) = Tr(ρ |n><n|), n = 0..=n_max.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonDistribution(pub Vec<f64>);

impl PhotonDistribution {
    pub fn from_probabilities(space: HilbertSpace, probs: &[f64]) -> Self {
        let mut p = vec![0.0; space.n_max() + 1];
        for (i, x) in probs.iter().enumerate() {
            p[space.photons(i)] += x;
        }
        PhotonDistribution(p)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// <n²> - <n>².
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let second: f64 = self.0.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum();
        second - mean * mean
    }

    /// Q = (Var n - <n>) / <n>; `None` at vacuum.
    pub fn mandel_q(&self) -> Option<f64> {
        let mean = self.mean();
        if mean < VACUUM_PHOTON_THRESHOLD {
            return None;
        }
        Some((self.variance() - mean) / mean)
    }

    /// Whether P(n) peaks locally at n = `center`, i.e. exceeds both
    /// neighbours.
    pub fn has_local_peak_at(&self, center: usize) -> bool {
        if center == 0 || center + 1 >= self.0.len() {
            return false;
        }
        self.0[center] > self.0[center - 1] && self.0[center] > self.0[center + 1]
    }
}

/// Observables sampled at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub n_ph: f64,
    pub mandel_q: Option<f64>,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    /// ‖ψ‖ for pure states, Tr ρ for mixed ones.
    pub norm_or_trace: f64,
}

impl ObservableRecord {
    pub fn from_probabilities(t: f64, space: HilbertSpace, probs: &[f64], norm_or_trace: f64) -> Self {
        let dist = PhotonDistribution::from_probabilities(space, probs);
        let [p0, p1, p2] = level_populations(probs);
        ObservableRecord { t, n_ph: dist.mean(), mandel_q: dist.mandel_q(), p0, p1, p2, norm_or_trace }
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.p0, self.p1, self.p2]
    }
}

fn level_populations(probs: &[f64]) -> [f64; 3] {
    let mut pops = [0.0; LEVELS];
    for (i, p) in probs.iter().enumerate() {
        pops[i % LEVELS] += p;
    }
    pops
}

pub fn photon_distribution<S: BareProbabilities>(state: &S) -> PhotonDistribution {
    PhotonDistribution::from_probabilities(state.space(), &state.bare_probabilities())
}

/// n_ph = <a†a>.
pub fn photon_number<S: BareProbabilities>(state: &S) -> f64 {
    photon_distribution(state).mean()
}

pub fn mandel_q<S: BareProbabilities>(state: &S) -> Option<f64> {
    photon_distribution(state).mandel_q()
}

/// (P_0, P_1, P_2) with P_k = <σ_kk>.
pub fn populations<S: BareProbabilities>(state: &S) -> [f64; 3] {
    level_populations(&state.bare_probabilities())
}

/// Index and value of the first major maximum of n_ph. Only values above
/// `drop_fraction` of the global maximum count; the result is the running
/// maximum at the first later point where n_ph falls below `drop_fraction` of
/// it, or the global maximum when no such drop occurs.
pub fn first_major_maximum(records: &[ObservableRecord], drop_fraction: f64) -> Option<(usize, f64)> {
    let global = records.iter().map(|r| r.n_ph).fold(f64::NEG_INFINITY, f64::max);
    let floor = drop_fraction * global;
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in records.iter().enumerate() {
        match best {
            Some((_, v)) if r.n_ph <= v => {
                if r.n_ph < drop_fraction * v {
                    return best;
                }
            }
            _ if r.n_ph >= floor => best = Some((i, r.n_ph)),
            _ => {}
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn space(n_max: usize) -> HilbertSpace {
        HilbertSpace::new(n_max).unwrap()
    }

    #[test]
    fn fock_states() {
        let s = space(10);
        for n in 1..=10 {
            let psi = QuantumState::basis(s, 0, n);
            assert_eq!(photon_number(&psi), n as f64);
            assert_eq!(mandel_q(&psi), Some(-1.0));
        }
        let psi = QuantumState::basis(s, 2, 4);
        let dist = photon_distribution(&psi);
        for (n, p) in dist.probabilities().iter().enumerate() {
            assert_eq!(*p, if n == 4 { 1.0 } else { 0.0 });
        }
        assert_eq!(populations(&QuantumState::basis(s, 1, 5)), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn vacuum_has_no_mandel_factor() {
        assert_eq!(mandel_q(&QuantumState::basis(space(4), 1, 0)), None);
    }

    #[test]
    fn superpositions() {
        let s = space(6);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = QuantumState::superposition(s, &[((0, 0), h), ((0, 3), h)]).unwrap();
        assert!((photon_number(&psi) - 1.5).abs() < 1e-15);
        let psi = QuantumState::superposition(s, &[((0, 0), h), ((2, 1), h)]).unwrap();
        let pops = populations(&psi);
        assert!((pops[0] - 0.5).abs() < 1e-15 && pops[1] == 0.0 && (pops[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coherent_state_is_poissonian() {
        let psi = QuantumState::coherent(space(30), 0, Complex64::new(1.0, 0.0));
        assert!((photon_number(&psi) - 1.0).abs() < 1e-12);
        assert!(mandel_q(&psi).unwrap().abs() < 1e-6);
    }

    #[test]
    fn squeezed_vacuum_mandel_factor() {
        let psi = QuantumState::squeezed_vacuum(space(30), 0, 0.5);
        let n = photon_number(&psi);
        assert!((n - 0.5_f64.sinh().powi(2)).abs() < 1e-6);
        let q = mandel_q(&psi).unwrap();
        assert!((q / (1.0 + 2.0 * n) - 1.0).abs() < 0.01);
        // odd photon numbers are absent
        let dist = photon_distribution(&psi);
        assert!(dist.probabilities().iter().skip(1).step_by(2).all(|p| *p == 0.0));
    }

    #[test]
    fn pure_and_mixed_agree() {
        let s = space(12);
        let psi = QuantumState::coherent(s, 1, Complex64::new(0.8, -0.6));
        let rho = DensityOperator::from_pure(&psi);
        assert!((photon_number(&psi) - photon_number(&rho)).abs() < 1e-12);
        assert!((mandel_q(&psi).unwrap() - mandel_q(&rho).unwrap()).abs() < 1e-12);
        for (a, b) in populations(&psi).iter().zip(populations(&rho)) {
            assert!((a - b).abs() < 1e-12);
        }
        let (a, b) = (photon_distribution(&psi), photon_distribution(&rho));
        for (x, y) in a.probabilities().iter().zip(b.probabilities()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn marginals_are_consistent() {
        let s = space(12);
        let psi = QuantumState::squeezed_vacuum(s, 0, 0.3);
        let dist = photon_distribution(&psi);
        assert!((dist.total() - 1.0).abs() < 1e-10);
        let direct: f64 = psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| s.photons(i) as f64 * a.norm_sqr())
            .sum();
        assert!((dist.mean() - direct).abs() < 1e-10);
    }

    #[test]
    fn peak_detection() {
        let d = PhotonDistribution(vec![0.5, 0.1, 0.05, 0.2, 0.05, 0.1]);
        assert!(d.has_local_peak_at(3));
        assert!(!d.has_local_peak_at(2));
        assert!(!d.has_local_peak_at(0));
        assert!(!d.has_local_peak_at(5));
    }

    #[test]
    fn first_major_maximum_skips_ripples() {
        let rec = |t: f64, n_ph: f64| ObservableRecord {
            t,
            n_ph,
            mandel_q: None,
            p0: 1.0,
            p1: 0.0,
            p2: 0.0,
            norm_or_trace: 1.0,
        };
        let series: Vec<_> = [0.0, 0.4, 0.1, 1.0, 0.9, 2.0, 1.5, 0.5, 3.0]
            .iter()
            .enumerate()
            .map(|(i, &n)| rec(i as f64, n))
            .collect();
        // the early bump at 0.4 stays below half the global maximum
        assert_eq!(first_major_maximum(&series, 0.5), Some((5, 2.0)));
        assert_eq!(first_major_maximum(&series[..7], 0.5), Some((5, 2.0)));
        assert_eq!(first_major_maximum(&[], 0.5), None);
    }
}
