//! Parameter sets for the three reference configurations.

use crate::dynamics::DissipationRates;
use crate::model::{Drive, ModelParams};

/// Couplings shared by every preset: (g01, g12, g02).
pub const COUPLINGS: [f64; 3] = [0.05, 0.06, 0.03];
/// Modulation depth of level 2 relative to its bare energy.
pub const RELATIVE_DEPTH: f64 = 0.07;
pub const N_MAX: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub params: ModelParams,
    pub drive: Drive,
    pub dissipation: Option<DissipationRates>,
    pub n_max: usize,
    /// Number of photons created per modulation quantum.
    pub photons: usize,
    pub horizon: f64,
    /// Time of the first photon-number maximum.
    pub t_star: f64,
}

fn build(d1: f64, d2: f64, eta: f64) -> (ModelParams, Drive) {
    let params = ModelParams::from_detunings(1.0, d1, d2, COUPLINGS, [1, 1, 1]);
    let drive = Drive { eps2: RELATIVE_DEPTH * params.e2, eta, ..Drive::off() };
    (params, drive)
}

/// Three-photon generation, Δ = (0.464, 0.106).
pub fn fig1() -> Preset {
    let (params, drive) = build(0.464, 0.106, 3.0037);
    Preset { name: "fig1", params, drive, dissipation: None, n_max: N_MAX, photons: 3, horizon: 1.2e5, t_star: 0.91e5 }
}

/// One-photon generation, Δ = (0.362, 0.51).
pub fn fig2() -> Preset {
    let (params, drive) = build(0.362, 0.51, 0.9978);
    Preset { name: "fig2", params, drive, dissipation: None, n_max: N_MAX, photons: 1, horizon: 1.8e5, t_star: 1.61e5 }
}

/// Three-photon generation with losses, Δ = (0.24, -0.132).
pub fn fig3() -> Preset {
    let (params, drive) = build(0.24, -0.132, 3.0269);
    let g = 1e-3 * COUPLINGS[0];
    let rates = DissipationRates { kappa: 1e-4 * COUPLINGS[0], ..DissipationRates::uniform(0.0, g) };
    Preset { name: "fig3", params, drive, dissipation: Some(rates), n_max: N_MAX, photons: 3, horizon: 3e4, t_star: f64::NAN }
}

pub fn by_name(name: &str) -> Option<Preset> {
    match name {
        "fig1" => Some(fig1()),
        "fig2" => Some(fig2()),
        "fig3" => Some(fig3()),
        _ => None,
    }
}

pub const NAMES: [&str; 3] = ["fig1", "fig2", "fig3"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::detunings;

    #[test]
    fn presets_carry_reference_parameters() {
        let p = fig1();
        let d = detunings(&p.params);
        assert!((d.d1 - 0.464).abs() < 1e-12 && (d.d2 - 0.106).abs() < 1e-12);
        assert_eq!(p.drive.eta, 3.0037);
        assert!((p.drive.eps2 - 0.07 * p.params.e2).abs() < 1e-15);
        assert_eq!(p.drive.eps1, 0.0);

        let p = fig2();
        let d = detunings(&p.params);
        assert!((d.d1 - 0.362).abs() < 1e-12 && (d.d2 - 0.51).abs() < 1e-12);

        let p = fig3();
        let r = p.dissipation.unwrap();
        assert_eq!(r.gamma01, 5e-5);
        assert_eq!(r.gphi2, 5e-5);
        assert!((r.kappa - 5e-6).abs() < 1e-18);
        for name in NAMES {
            assert_eq!(by_name(name).unwrap().name, name);
        }
        assert!(by_name("fig4").is_none());
    }
}
