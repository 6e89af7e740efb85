//! Closed-form dispersive-regime results: the ground-atom dressed states
//! |ζ_k>, their energies Λ_k, and the lowest-order 1- and 3-photon
//! transition rates between them.
//!
//! Every expression is a rational function of the detunings; denominators
//! closer to zero than [`SINGULAR_THRESHOLD`]·ω are reported instead of
//! evaluated.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::dynamics::QuantumState;
use crate::error::{Error, Result};
use crate::model::{detunings, Drive, HilbertSpace, ModelParams};

pub const SINGULAR_THRESHOLD: f64 = 1e-6;

/// Denominators shared by all closed forms, checked once on construction.
#[derive(Debug, Clone, Copy)]
struct Denominators {
    omega: f64,
    d1: f64,
    d3: f64,
    w_m_d3: f64,
    w2_m_d1: f64,
    w3_m_d3: f64,
    w2: f64,
    w_m_d1: f64,
    w2_m_d3: f64,
    w_p_d1: f64,
    w4_m_d3: f64,
    w3_m_d1: f64,
}

impl Denominators {
    fn new(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let d = detunings(p);
        let w = p.omega;
        let den = Denominators {
            omega: w,
            d1: d.d1,
            d3: d.d3,
            w_m_d3: w - d.d3,
            w2_m_d1: 2.0 * w - d.d1,
            w3_m_d3: 3.0 * w - d.d3,
            w2: 2.0 * w,
            w_m_d1: w - d.d1,
            w2_m_d3: 2.0 * w - d.d3,
            w_p_d1: w + d.d1,
            w4_m_d3: 4.0 * w - d.d3,
            w3_m_d1: 3.0 * w - d.d1,
        };
        let named = [
            ("Δ1", den.d1),
            ("Δ3", den.d3),
            ("ω-Δ3", den.w_m_d3),
            ("2ω-Δ1", den.w2_m_d1),
            ("3ω-Δ3", den.w3_m_d3),
            ("2ω", den.w2),
            ("ω-Δ1", den.w_m_d1),
            ("2ω-Δ3", den.w2_m_d3),
            ("ω+Δ1", den.w_p_d1),
            ("4ω-Δ3", den.w4_m_d3),
            ("3ω-Δ1", den.w3_m_d1),
        ];
        for (name, value) in named {
            if !(value.abs() > SINGULAR_THRESHOLD * w) {
                return Err(Error::NearSingularDenominator { name, value });
            }
        }
        Ok(den)
    }
}

/// Λ_k ≈ ω_ef k + α k².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSpectrumParams {
    pub omega_ef: f64,
    pub alpha: f64,
}

pub fn effective_spectrum(params: &ModelParams) -> Result<EffectiveSpectrumParams> {
    let den = Denominators::new(params)?;
    let p = params;
    let (c01, c12, c02) = flags(p);
    let (g01s, g12s, g02s) = (p.g01 * p.g01, p.g12 * p.g12, p.g02 * p.g02);

    let omega_ef = p.omega + g01s / den.d1 * (1.0 - g12s / (den.d1 * den.d3))
        - g02s / den.w_m_d3
        - c01 * g01s / den.w2_m_d1
        - c02 * g02s / den.w3_m_d3;

    let bracket = g12s / den.d3 - g01s / den.d1 + c01 * g01s / den.w2 - c12 * g12s / den.w2_m_d3
        + g02s / den.w_m_d3
        + c01 * g01s / den.w2_m_d1
        + c02 * g02s / den.w3_m_d3;
    let alpha = g01s / (den.d1 * den.d1) * bracket;

    Ok(EffectiveSpectrumParams { omega_ef, alpha })
}

/// Λ_{k+J} - Λ_k = (ω_ef + Jα) J + 2αJ k.
pub fn resonance_mismatch(k: usize, j: usize, eff: &EffectiveSpectrumParams) -> f64 {
    let (k, j) = (k as f64, j as f64);
    (eff.omega_ef + j * eff.alpha) * j + 2.0 * eff.alpha * j * k
}

/// Shift parameters δ_1..δ_6 of the fourth-order energies, with the
/// k-dependent pieces L_1, L_2 and β_1..β_4 evaluated on demand.
#[derive(Debug, Clone, Copy)]
pub struct FourthOrderShifts {
    pub delta: [f64; 6],
    den: Denominators,
    g12: f64,
    c: (f64, f64, f64),
}

impl FourthOrderShifts {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let den = Denominators::new(params)?;
        let p = params;
        let delta = [
            p.g01 * p.g01 / den.d1,
            p.g02 * p.g02 / den.w_m_d3,
            p.g01 * p.g01 / den.w2_m_d1,
            p.g02 * p.g02 / den.w3_m_d3,
            p.g12 * p.g12 / den.w2_m_d3,
            p.g12 * p.g12 / den.w_m_d1,
        ];
        Ok(FourthOrderShifts { delta, den, g12: p.g12, c: flags(p) })
    }

    pub fn l1(&self, k: f64) -> f64 {
        let [d1, d2, d3, d4, _, _] = self.delta;
        let (c01, _, c02) = self.c;
        (d1 - d2 - c01 * d3 - c02 * d4) * k - (c01 * d3 + c02 * d4)
    }

    pub fn beta1(&self, k: f64) -> f64 {
        let [d1, d2, _, _, d5, _] = self.delta;
        let (c01, c12, c02) = self.c;
        let n = &self.den;
        (d1 - c02 * d2) * c01 * (k - 1.0) / n.w2
            + self.g12 * self.g12 * (k - 1.0) / (n.d1 * n.d3)
            + c12 * d5 * (c01 * (k + 1.0) / n.w2_m_d1 - k / n.d1)
            - self.l1(k) / n.d1
    }

    pub fn beta2(&self, k: f64) -> f64 {
        let [d1, d2, _, _, _, d6] = self.delta;
        let (c01, c12, c02) = self.c;
        let n = &self.den;
        (c01 * d1 - d2) * c02 * (k - 1.0) / n.w2
            - c12 * self.g12 * self.g12 * (k - 1.0) / (n.w_m_d3 * n.w_p_d1)
            + d6 * (c12 * c02 * (k + 1.0) / n.w3_m_d3 + k / n.w_m_d3)
            + self.l1(k) / n.w_m_d3
    }

    pub fn beta3(&self, k: f64) -> f64 {
        let [_, _, d3, d4, d5, _] = self.delta;
        let (_, c12, c02) = self.c;
        let n = &self.den;
        (d3 + c02 * d4) * (k + 2.0) / n.w2
            + d5 * ((k + 1.0) / n.w2_m_d1 - c12 * k / n.d1)
            + c12 * self.g12 * self.g12 * (k + 2.0) / (n.w2_m_d1 * n.w4_m_d3)
            + self.l1(k) / n.w2_m_d1
    }

    pub fn beta4(&self, k: f64) -> f64 {
        let [_, _, d3, d4, _, d6] = self.delta;
        let (c01, c12, _) = self.c;
        let n = &self.den;
        (c01 * d3 + d4) * (k + 2.0) / n.w2
            + c12 * d6 * (c12 * (k + 1.0) / n.w3_m_d3 + k / n.w_m_d3)
            + self.g12 * self.g12 * (k + 2.0) / (n.w3_m_d3 * n.w3_m_d1)
            + self.l1(k) / n.w3_m_d3
    }

    pub fn l2(&self, k: f64) -> f64 {
        let [d1, d2, d3, d4, _, _] = self.delta;
        let (c01, _, c02) = self.c;
        (d1 * self.beta1(k) - d2 * self.beta2(k)) * k
            - (c01 * d3 * self.beta3(k) + c02 * d4 * self.beta4(k)) * (k + 1.0)
    }

    /// Λ_k = ωk + L_1(k) + L_2(k).
    pub fn lambda(&self, k: usize) -> f64 {
        let kf = k as f64;
        self.den.omega * kf + self.l1(kf) + self.l2(kf)
    }
}

/// Fourth-order energy of |ζ_k>, including the constant vacuum shift.
pub fn lambda_fourth_order(k: usize, params: &ModelParams) -> Result<f64> {
    Ok(FourthOrderShifts::new(params)?.lambda(k))
}

/// Second-order |ζ_k> in the bare basis, normalized numerically.
pub fn zeta_state_pert(k: usize, params: &ModelParams, space: HilbertSpace) -> Result<QuantumState> {
    if k + 2 > space.n_max() {
        return Err(Error::TruncationOverflow { needed: k + 2, n_max: space.n_max() });
    }
    let n = Denominators::new(params)?;
    let p = params;
    let (c01, c12, c02) = flags(p);
    let (g01, g12, g02) = (p.g01, p.g12, p.g02);
    let kf = k as f64;
    let sk = kf.sqrt();
    let sk1 = (kf + 1.0).sqrt();
    let up2 = ((kf + 1.0) * (kf + 2.0)).sqrt();
    let down2 = (kf * (kf - 1.0)).max(0.0).sqrt();

    // (atom, photon offset, coefficient)
    let terms: [(usize, isize, f64); 13] = [
        (0, 0, 1.0),
        (1, -1, g01 * sk / n.d1),
        (1, 1, -c01 * g01 * sk1 / n.w2_m_d1),
        (2, -1, -g02 * sk / n.w_m_d3),
        (2, 1, -c02 * g02 * sk1 / n.w3_m_d3),
        (0, 2, (c01 * g01 * g01 / n.w2_m_d1 + c02 * g02 * g02 / n.w3_m_d3) * up2 / n.w2),
        (0, -2, (c01 * g01 * g01 / n.d1 - c02 * g02 * g02 / n.w_m_d3) * down2 / n.w2),
        (1, 0, (c12 * c02 * (kf + 1.0) / n.w3_m_d3 + kf / n.w_m_d3) * g12 * g02 / n.w_m_d1),
        (2, 0, (c01 * (kf + 1.0) / n.w2_m_d1 - c12 * kf / n.d1) * g01 * g12 / n.w2_m_d3),
        (1, 2, c02 * g12 * g02 * up2 / (n.w3_m_d3 * n.w3_m_d1)),
        (1, -2, -c12 * g12 * g02 * down2 / (n.w_m_d3 * n.w_p_d1)),
        (2, 2, c01 * c12 * g01 * g12 * up2 / (n.w2_m_d1 * n.w4_m_d3)),
        (2, -2, g01 * g12 * down2 / (n.d1 * n.d3)),
    ];

    let mut amps = DVector::<Complex64>::zeros(space.dim());
    for (atom, offset, coeff) in terms {
        let photons = k as isize + offset;
        if photons < 0 || coeff == 0.0 {
            continue;
        }
        amps[space.index(atom, photons as usize)] += Complex64::new(coeff, 0.0);
    }
    let norm = amps.norm();
    amps /= Complex64::new(norm, 0.0);
    QuantumState::from_amplitudes(space, amps)
}

/// Lowest-order ζ-branch transition rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub k: usize,
    /// Photon number change J (1 or 3).
    pub photons: usize,
    pub value: Complex64,
    pub magnitude: f64,
}

impl RateResult {
    fn new(k: usize, photons: usize, value: Complex64) -> Self {
        RateResult { k, photons, value, magnitude: value.norm() }
    }
}

/// G³ = g01 g12 g02 / 2.
pub fn g_cubed(params: &ModelParams) -> f64 {
    params.g01 * params.g12 * params.g02 / 2.0
}

/// k-independent coefficients (q_1, q_2) of the 3-photon rate.
pub fn three_photon_coefficients(params: &ModelParams) -> Result<(f64, f64)> {
    let n = Denominators::new(params)?;
    let (c01, c12, c02) = flags(params);
    let q1 = c02 / (n.d1 * n.w3_m_d3 * n.w3_m_d1) + c01 * c12 / (n.w2_m_d1 * n.w_m_d3 * n.w_p_d1);
    let q2 = c02 / (n.d1 * n.d3 * n.w3_m_d3) + c01 * c12 / (n.w2_m_d1 * n.w_m_d3 * n.w4_m_d3);
    Ok((q1, q2))
}

/// Θ_{k;k+3} = G³ √((k+3)!/k!) [ε_1 q_1 e^{iφ_1} - ε_2 q_2 e^{iφ_2}].
pub fn rate_3photon(k: usize, params: &ModelParams, drive: &Drive) -> Result<RateResult> {
    let (q1, q2) = three_photon_coefficients(params)?;
    let kf = k as f64;
    let ladder = ((kf + 1.0) * (kf + 2.0) * (kf + 3.0)).sqrt();
    let value = g_cubed(params) * ladder * modulation_mix(drive, q1, q2);
    Ok(RateResult::new(k, 3, value))
}

/// k-dependent coefficients (Q_1(k), Q_2(k)) of the 1-photon rate.
pub fn one_photon_coefficients(k: usize, params: &ModelParams) -> Result<(f64, f64)> {
    let n = Denominators::new(params)?;
    let (c01, c12, c02) = flags(params);
    let k = k as f64;

    let q1 = (c12 * c02 * (k + 1.0) / n.w3_m_d3 + k / n.w_m_d3) / (n.d1 * n.w_m_d1)
        - c01 * c02 * (k + 2.0) / (n.w2_m_d1 * n.w3_m_d3 * n.w3_m_d1)
        - c12 * k / (n.d1 * n.w_m_d3 * n.w_p_d1)
        - c01 / (n.w_m_d1 * n.w2_m_d1) * (c12 * c02 * (k + 2.0) / n.w3_m_d3 + (k + 1.0) / n.w_m_d3);

    let q2 = (c01 * (k + 1.0) / n.w2_m_d1 - c12 * k / n.d1) / (n.w2_m_d3 * n.w_m_d3)
        + c01 * c12 * c02 * (k + 2.0) / (n.w2_m_d1 * n.w4_m_d3 * n.w3_m_d3)
        + k / (n.d1 * n.d3 * n.w_m_d3)
        + c02 / (n.w2_m_d3 * n.w3_m_d3) * (c01 * (k + 2.0) / n.w2_m_d1 - c12 * (k + 1.0) / n.d1);

    Ok((q1, q2))
}

/// Θ_{k;k+1} = G³ √(k+1) [ε_1 Q_1(k) e^{iφ_1} - ε_2 Q_2(k) e^{iφ_2}].
pub fn rate_1photon(k: usize, params: &ModelParams, drive: &Drive) -> Result<RateResult> {
    let (q1, q2) = one_photon_coefficients(k, params)?;
    let value = g_cubed(params) * ((k + 1) as f64).sqrt() * modulation_mix(drive, q1, q2);
    Ok(RateResult::new(k, 1, value))
}

fn modulation_mix(drive: &Drive, q1: f64, q2: f64) -> Complex64 {
    drive.eps1 * q1 * Complex64::from_polar(1.0, drive.phi1)
        - drive.eps2 * q2 * Complex64::from_polar(1.0, drive.phi2)
}

fn flags(p: &ModelParams) -> (f64, f64, f64) {
    (f64::from(p.c01), f64::from(p.c12), f64::from(p.c02))
}
