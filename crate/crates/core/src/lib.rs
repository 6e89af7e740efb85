//! Dynamical Casimir effect in a cyclic three-level atom coupled to a single
//! cavity mode, with the atomic level energies modulated in time.
//!
//! Energies and frequencies are in units of the cavity frequency (ħ = 1).
//! The Hilbert space is truncated at `n_max` photons; basis states are
//! indexed as `3 * photons + atom`.

pub mod dynamics;
pub mod error;
pub mod model;
pub mod observables;
pub mod perturbation;
pub mod presets;
pub mod resonance;
pub mod spectrum;

pub use dynamics::{
    evolve_effective, evolve_lindblad, evolve_schrodinger, DensityOperator, DissipationRates, EffectiveState,
    QuantumState, TimeGrid, TimeSeries,
};
pub use error::{Error, Result};
pub use model::{bare_hamiltonian, detunings, Drive, HilbertSpace, ModelParams};
pub use observables::{ObservableRecord, PhotonDistribution};
pub use spectrum::{diagonalize, zeta_branch, zeta_branch_prefix, DressedSpectrum, ZetaBranch};
