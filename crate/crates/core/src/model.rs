//! Physical parameters, the truncated atom-cavity space and Hamiltonian
//! matrices.
//!
//! The Hamiltonian (with ħ = 1) is
//!
//! ```text
//! H(t) = ω n + Σ_{k=1,2} E_k(t) σ_kk
//!      + Σ_{k<l} g_kl (a σ_lk + c_kl a σ_kl + h.c.),
//! E_k(t) = E_k + ε_k sin(η t + φ_k)
//! ```
//!
//! Basis states |j, n> (atom level `j`, photon number `n`) are stored at
//! index `3 n + j`: the atom index runs fastest, so every photon block is a
//! contiguous run of three entries.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of atomic levels.
pub const LEVELS: usize = 3;

/// Static parameters of the qutrit-cavity system, in units of the cavity
/// frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub omega: f64,
    pub e1: f64,
    pub e2: f64,
    pub g01: f64,
    pub g12: f64,
    pub g02: f64,
    pub c01: u8,
    pub c12: u8,
    pub c02: u8,
}

impl ModelParams {
    /// Builds parameters from the detunings Δ1 = ω - E1 and Δ2 = ω - (E2 - E1).
    pub fn from_detunings(omega: f64, d1: f64, d2: f64, g: [f64; 3], c: [u8; 3]) -> Self {
        let e1 = omega - d1;
        let e2 = e1 + omega - d2;
        ModelParams {
            omega,
            e1,
            e2,
            g01: g[0],
            g12: g[1],
            g02: g[2],
            c01: c[0],
            c12: c[1],
            c02: c[2],
        }
    }

    /// Same system with every coupling multiplied by `s`.
    pub fn with_scaled_couplings(mut self, s: f64) -> Self {
        self.g01 *= s;
        self.g12 *= s;
        self.g02 *= s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(invalid("omega", format!("must be positive and finite, got {}", self.omega)));
        }
        for (field, v) in [("e1", self.e1), ("e2", self.e2)] {
            if !v.is_finite() {
                return Err(invalid(field, format!("must be finite, got {v}")));
            }
        }
        for (field, g) in [("g01", self.g01), ("g12", self.g12), ("g02", self.g02)] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(invalid(field, format!("must be nonnegative and finite, got {g}")));
            }
        }
        for (field, c) in [("c01", self.c01), ("c12", self.c12), ("c02", self.c02)] {
            if c > 1 {
                return Err(invalid(field, format!("must be 0 or 1, got {c}")));
            }
        }
        Ok(())
    }

    /// Bare energy of atomic level `j` (E_0 = 0).
    pub fn level_energy(&self, j: usize) -> f64 {
        match j {
            0 => 0.0,
            1 => self.e1,
            2 => self.e2,
            _ => panic!("atomic level {j} out of range"),
        }
    }

    pub fn max_coupling(&self) -> f64 {
        self.g01.max(self.g12).max(self.g02)
    }

    /// The three couplings as (lower level, upper level, g, CRT flag).
    pub fn transitions(&self) -> [(usize, usize, f64, f64); 3] {
        [
            (0, 1, self.g01, f64::from(self.c01)),
            (1, 2, self.g12, f64::from(self.c12)),
            (0, 2, self.g02, f64::from(self.c02)),
        ]
    }

    /// Checks |Δ1|, |Δ2|, |Δ1 + Δ2| > √n_max · max(g).
    pub fn dispersive_check(&self, n_max: usize) -> DispersiveCheck {
        let d = detunings(self);
        let threshold = (n_max as f64).sqrt() * self.max_coupling();
        let smallest = d.d1.abs().min(d.d2.abs()).min(d.d3.abs());
        DispersiveCheck { threshold, smallest_detuning: smallest, holds: smallest > threshold }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveCheck {
    pub threshold: f64,
    pub smallest_detuning: f64,
    pub holds: bool,
}

/// Harmonic modulation of the excited levels:
/// E_k(t) = E_k + ε_k sin(η t + φ_k).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drive {
    pub eps1: f64,
    #[serde(default)]
    pub phi1: f64,
    pub eps2: f64,
    #[serde(default)]
    pub phi2: f64,
    pub eta: f64,
}

impl Drive {
    pub fn off() -> Self {
        Drive::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(field, format!("must be nonnegative and finite, got {v}")));
            }
        }
        for (field, v) in [("phi1", self.phi1), ("phi2", self.phi2)] {
            if !v.is_finite() {
                return Err(invalid(field, format!("must be finite, got {v}")));
            }
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(invalid("eta", format!("must be nonnegative and finite, got {}", self.eta)));
        }
        Ok(())
    }

    /// Levels whose modulation amplitude exceeds 20% of the bare energy.
    pub fn strong_modulation_levels(&self, params: &ModelParams) -> Vec<usize> {
        [(1, self.eps1, params.e1), (2, self.eps2, params.e2)]
            .into_iter()
            .filter(|&(_, eps, e)| eps > 0.2 * e.abs())
            .map(|(j, _, _)| j)
            .collect()
    }

    pub fn amplitude(&self, j: usize) -> f64 {
        match j {
            1 => self.eps1,
            2 => self.eps2,
            _ => 0.0,
        }
    }

    pub fn phase(&self, j: usize) -> f64 {
        match j {
            1 => self.phi1,
            2 => self.phi2,
            _ => 0.0,
        }
    }

    /// Instantaneous shift ε_j sin(η t + φ_j) of level `j`.
    pub fn shift(&self, j: usize, t: f64) -> f64 {
        let eps = self.amplitude(j);
        if eps == 0.0 {
            return 0.0;
        }
        eps * (self.eta * t + self.phase(j)).sin()
    }

    /// ∫_0^t ε_j sin(η s + φ_j) ds.
    pub fn shift_integral(&self, j: usize, t: f64) -> f64 {
        let eps = self.amplitude(j);
        if eps == 0.0 {
            return 0.0;
        }
        let phi = self.phase(j);
        if self.eta == 0.0 {
            eps * phi.sin() * t
        } else {
            eps / self.eta * (phi.cos() - (self.eta * t + phi).cos())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detunings {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

pub fn detunings(params: &ModelParams) -> Detunings {
    let d1 = params.omega - params.e1;
    let d2 = params.omega - (params.e2 - params.e1);
    Detunings { d1, d2, d3: d1 + d2 }
}

/// Truncated composite space: three atomic levels times photon numbers
/// `0..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    n_max: usize,
}

impl HilbertSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(invalid("n_max", "must be at least 1".into()));
        }
        Ok(HilbertSpace { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        LEVELS * (self.n_max + 1)
    }

    /// Basis index of |atom, photons>.
    #[inline]
    pub fn index(&self, atom: usize, photons: usize) -> usize {
        debug_assert!(atom < LEVELS && photons <= self.n_max);
        LEVELS * photons + atom
    }

    #[inline]
    pub fn atom(&self, index: usize) -> usize {
        index % LEVELS
    }

    #[inline]
    pub fn photons(&self, index: usize) -> usize {
        index / LEVELS
    }

    /// (atom, photons) for a basis index.
    pub fn label(&self, index: usize) -> (usize, usize) {
        (self.atom(index), self.photons(index))
    }
}

/// Real symmetric matrix. Every Hamiltonian of this model has real matrix
/// elements in the bare basis, so Hermitian here means symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<f64>);

impl HermitianMatrix {
    /// Mirrors the lower triangle of `m` into the upper one.
    pub fn from_lower(mut m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "matrix must be square");
        for col in 0..n {
            for row in col + 1..n {
                m[(col, row)] = m[(row, col)];
            }
        }
        HermitianMatrix(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// Off-diagonal part of the bare Hamiltonian as a sparse symmetric matrix
/// in compressed-row form (both triangles stored).
#[derive(Debug, Clone)]
pub struct Couplings {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl Couplings {
    pub fn new(params: &ModelParams, space: HilbertSpace) -> Self {
        let dim = space.dim();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for (row, col, v) in lower_coupling_entries(params, space) {
            rows[row].push((col, v));
            rows[col].push((row, v));
        }
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_start.push(0);
        for mut r in rows {
            r.sort_by_key(|&(c, _)| c);
            for (c, v) in r {
                cols.push(c);
                values.push(v);
            }
            row_start.push(cols.len());
        }
        Couplings { row_start, cols, values }
    }

    pub fn dim(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzero entries of row `row` as (column, value).
    #[inline]
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_start[row]..self.row_start[row + 1];
        self.cols[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    #[inline]
    pub(crate) fn row_range(&self, row: usize) -> std::ops::Range<usize> {
        self.row_start[row]..self.row_start[row + 1]
    }

    pub(crate) fn columns(&self) -> &[usize] {
        &self.cols
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub(crate) fn row_slices(&self, row: usize) -> (&[usize], &[f64]) {
        let range = self.row_start[row]..self.row_start[row + 1];
        (&self.cols[range.clone()], &self.values[range])
    }
}

/// Strictly-lower-triangular coupling entries (row > col) of the bare
/// Hamiltonian, with ladder elements √n.
fn lower_coupling_entries(params: &ModelParams, space: HilbertSpace) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for (lo, hi, g, c) in params.transitions() {
        if g == 0.0 {
            continue;
        }
        for n in 1..=space.n_max() {
            let amp = g * (n as f64).sqrt();
            // a σ_{hi,lo}: |lo, n> -> |hi, n-1>
            push_sym(&mut out, space.index(hi, n - 1), space.index(lo, n), amp);
            // c a σ_{lo,hi}: |hi, n> -> |lo, n-1>
            if c != 0.0 {
                push_sym(&mut out, space.index(lo, n - 1), space.index(hi, n), c * amp);
            }
        }
    }
    out
}

fn push_sym(out: &mut Vec<(usize, usize, f64)>, a: usize, b: usize, v: f64) {
    let (row, col) = if a > b { (a, b) } else { (b, a) };
    out.push((row, col, v));
}

/// H_0 = H(t) at ε_1 = ε_2 = 0.
pub fn bare_hamiltonian(params: &ModelParams, space: HilbertSpace) -> Result<HermitianMatrix> {
    params.validate()?;
    let dim = space.dim();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        let (j, n) = space.label(i);
        m[(i, i)] = params.omega * n as f64 + params.level_energy(j);
    }
    for (row, col, v) in lower_coupling_entries(params, space) {
        m[(row, col)] += v;
    }
    Ok(HermitianMatrix::from_lower(m))
}

/// H(t): H_0 plus the instantaneous level shifts ε_k sin(η t + φ_k) σ_kk.
pub fn hamiltonian_at(
    params: &ModelParams,
    drive: &Drive,
    space: HilbertSpace,
    t: f64,
) -> Result<HermitianMatrix> {
    drive.validate()?;
    let mut m = bare_hamiltonian(params, space)?.into_inner();
    let shifts = [0.0, drive.shift(1, t), drive.shift(2, t)];
    for i in 0..space.dim() {
        m[(i, i)] += shifts[space.atom(i)];
    }
    Ok(HermitianMatrix(m))
}

/// Largest |E_a - E_b| over pairs of basis states connected by a coupling,
/// using bare (undriven) diagonal energies.
pub fn max_coupled_gap(params: &ModelParams, space: HilbertSpace) -> f64 {
    let energy = |i: usize| {
        let (j, n) = space.label(i);
        params.omega * n as f64 + params.level_energy(j)
    };
    lower_coupling_entries(params, space)
        .into_iter()
        .map(|(r, c, _)| (energy(r) - energy(c)).abs())
        .fold(0.0, f64::max)
}

fn invalid(field: &'static str, reason: String) -> Error {
    Error::InvalidParameter { field, reason }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig1() -> ModelParams {
        ModelParams::from_detunings(1.0, 0.464, 0.106, [0.05, 0.06, 0.03], [1, 1, 1])
    }

    #[test]
    fn detunings_of_zero_levels() {
        let p = ModelParams::from_detunings(1.0, 1.0, 1.0, [0.0; 3], [0; 3]);
        assert_eq!((p.e1, p.e2), (0.0, 0.0));
        let d = detunings(&p);
        assert_eq!((d.d1, d.d2, d.d3), (1.0, 1.0, 2.0));
    }

    #[test]
    fn detunings_of_figure_parameters() {
        let cases = [
            (0.536, 1.430, (0.464, 0.106, 0.570)),
            (0.760, 1.892, (0.240, -0.132, 0.108)),
        ];
        for (e1, e2, (d1, d2, d3)) in cases {
            let p = ModelParams { e1, e2, ..fig1() };
            let d = detunings(&p);
            assert!((d.d1 - d1).abs() < 1e-12);
            assert!((d.d2 - d2).abs() < 1e-12);
            assert!((d.d3 - d3).abs() < 1e-12);
        }
    }

    #[test]
    fn uncoupled_hamiltonian_is_diagonal() {
        let p = ModelParams { g01: 0.0, g12: 0.0, g02: 0.0, ..fig1() };
        let space = HilbertSpace::new(4).unwrap();
        let h = bare_hamiltonian(&p, space).unwrap();
        let m = h.matrix();
        for r in 0..space.dim() {
            for c in 0..space.dim() {
                let (j, n) = space.label(r);
                let expect = if r == c { n as f64 + p.level_energy(j) } else { 0.0 };
                assert_eq!(m[(r, c)], expect);
            }
        }
    }

    #[test]
    fn single_coupling_hand_enumerated() {
        let p = ModelParams { g01: 0.05, g12: 0.0, g02: 0.0, c01: 1, c12: 0, c02: 0, ..fig1() };
        let space = HilbertSpace::new(1).unwrap();
        let m = bare_hamiltonian(&p, space).unwrap().into_inner();
        let i = |j, n| space.index(j, n);
        let mut expected = vec![(i(0, 1), i(1, 0)), (i(1, 1), i(0, 0))];
        expected.extend(expected.clone().into_iter().map(|(a, b)| (b, a)));
        for r in 0..6 {
            for c in 0..6 {
                if r == c {
                    continue;
                }
                let want = if expected.contains(&(r, c)) { 0.05 } else { 0.0 };
                assert_eq!(m[(r, c)], want, "entry ({r},{c})");
            }
        }
    }

    #[test]
    fn undriven_hamiltonian_equals_bare() {
        let space = HilbertSpace::new(5).unwrap();
        let h0 = bare_hamiltonian(&fig1(), space).unwrap();
        let ht = hamiltonian_at(&fig1(), &Drive::off(), space, 12.3).unwrap();
        assert_eq!(h0, ht);
    }

    #[test]
    fn drive_shift_lands_on_level_two() {
        let p = fig1();
        let space = HilbertSpace::new(3).unwrap();
        let eps = 0.07 * p.e2;
        let drive = Drive { eps2: eps, phi2: 0.3, eta: 3.0037, ..Drive::off() };
        let t = (std::f64::consts::FRAC_PI_2 - 0.3) / 3.0037;
        let diff = hamiltonian_at(&p, &drive, space, t).unwrap().into_inner()
            - bare_hamiltonian(&p, space).unwrap().into_inner();
        for r in 0..space.dim() {
            for c in 0..space.dim() {
                let want = if r == c && space.atom(r) == 2 { eps } else { 0.0 };
                assert!((diff[(r, c)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn figure_drive_at_time_zero_is_bare() {
        let p = fig1();
        let space = HilbertSpace::new(30).unwrap();
        let drive = Drive { eps2: 0.07 * p.e2, eta: 3.0037, ..Drive::off() };
        assert_eq!(
            hamiltonian_at(&p, &drive, space, 0.0).unwrap(),
            bare_hamiltonian(&p, space).unwrap()
        );
    }

    #[test]
    fn validation_names_the_field() {
        let p = ModelParams { g12: -0.1, ..fig1() };
        match p.validate() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "g12"),
            other => panic!("unexpected {other:?}"),
        }
        let p = ModelParams { c02: 2, ..fig1() };
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { field: "c02", .. })));
        assert!(HilbertSpace::new(0).is_err());
    }

    #[test]
    fn dispersive_and_weak_drive_flags() {
        // smallest detuning is Δ2 = 0.106 against g12 = 0.06
        assert!(fig1().dispersive_check(3).holds);
        assert!(!fig1().dispersive_check(4).holds);
        let c = fig1().dispersive_check(30);
        assert!((c.smallest_detuning - 0.106).abs() < 1e-12 && (c.threshold - 30f64.sqrt() * 0.06).abs() < 1e-12);
        let p = fig1();
        let drive = Drive { eps1: 0.5 * p.e1, eps2: 0.07 * p.e2, eta: 3.0, ..Drive::off() };
        assert_eq!(drive.strong_modulation_levels(&p), vec![1]);
    }

    #[test]
    fn basis_index_is_bijective() {
        let space = HilbertSpace::new(7).unwrap();
        for i in 0..space.dim() {
            let (j, n) = space.label(i);
            assert_eq!(space.index(j, n), i);
        }
    }

    #[test]
    fn shift_integral_matches_quadrature() {
        let drive = Drive { eps1: 0.03, phi1: 0.7, eps2: 0.1, phi2: -1.1, eta: 2.9 };
        let t = 3.7;
        let steps = 20_000;
        for j in 1..=2 {
            let h = t / steps as f64;
            let simpson: f64 = (0..=steps)
                .map(|i| {
                    let w = if i == 0 || i == steps { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                    w * drive.shift(j, i as f64 * h)
                })
                .sum::<f64>()
                * h
                / 3.0;
            assert!((simpson - drive.shift_integral(j, t)).abs() < 1e-12);
        }
    }

    fn arb_params() -> impl Strategy<Value = ModelParams> {
        (
            0.2f64..0.9,
            -0.5f64..0.5,
            (0.0f64..0.1, 0.0f64..0.1, 0.0f64..0.1),
            (0u8..2, 0u8..2, 0u8..2),
        )
            .prop_map(|(d1, d2, (a, b, c), (x, y, z))| {
                ModelParams::from_detunings(1.0, d1, d2, [a, b, c], [x, y, z])
            })
    }

    proptest! {
        #[test]
        fn hamiltonian_is_exactly_symmetric_and_single_photon(p in arb_params(), n_max in 1usize..8) {
            let space = HilbertSpace::new(n_max).unwrap();
            let m = bare_hamiltonian(&p, space).unwrap().into_inner();
            prop_assert_eq!(&m, &m.transpose());
            for r in 0..space.dim() {
                for c in 0..space.dim() {
                    if space.photons(r).abs_diff(space.photons(c)) > 1 {
                        prop_assert_eq!(m[(r, c)], 0.0);
                    }
                }
            }
        }

        #[test]
        fn ladder_rwa_conserves_excitations(mut p in arb_params(), n_max in 1usize..8) {
            p.c01 = 0;
            p.c12 = 0;
            p.c02 = 0;
            p.g02 = 0.0;
            let space = HilbertSpace::new(n_max).unwrap();
            let m = bare_hamiltonian(&p, space).unwrap().into_inner();
            let exc = |i: usize| space.atom(i) + space.photons(i);
            for r in 0..space.dim() {
                for c in 0..space.dim() {
                    if exc(r) != exc(c) {
                        prop_assert_eq!(m[(r, c)], 0.0);
                    }
                }
            }
        }

        #[test]
        fn detunings_are_linear_and_consistent(e1 in -2.0f64..2.0, e2 in -2.0f64..2.0, s in -3.0f64..3.0) {
            let base = ModelParams { e1, e2, ..fig1() };
            let d = detunings(&base);
            prop_assert_eq!(d.d3, d.d1 + d.d2);
            let scaled = detunings(&ModelParams { e1: s * e1, e2: s * e2, omega: 0.0, ..fig1() });
            let unit = detunings(&ModelParams { omega: 0.0, ..base });
            prop_assert!((scaled.d1 - s * unit.d1).abs() < 1e-12);
            prop_assert!((scaled.d2 - s * unit.d2).abs() < 1e-12);
        }
    }
}
