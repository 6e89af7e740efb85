//! Exact diagonalization of the bare Hamiltonian and the dressed-state
//! quantities built from it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Drive, HermitianMatrix, HilbertSpace, LEVELS};

/// Eigenpairs of H_0, sorted by ascending eigenvalue.
///
/// Each eigenvector is normalized and its largest-magnitude component is
/// positive, which makes signs reproducible across runs.
#[derive(Debug, Clone)]
pub struct DressedSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    labels: Vec<usize>,
}

impl DressedSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.eigenvalues[n]
    }

    /// Columns are the dressed states |φ_n> in the bare basis.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, n: usize) -> nalgebra::DVectorView<'_, f64> {
        self.eigenvectors.column(n)
    }

    /// Bare basis index carrying the largest weight of |φ_n>.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// <φ_n| σ_jj |φ_m>.
    pub fn level_projection(&self, level: usize, n: usize, m: usize) -> f64 {
        let a = self.eigenvectors.column(n);
        let b = self.eigenvectors.column(m);
        (level..self.dim()).step_by(LEVELS).map(|i| a[i] * b[i]).sum()
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.dim() {
            return Err(Error::IndexOutOfRange { index: n, dim: self.dim() });
        }
        Ok(())
    }
}

pub fn diagonalize(h0: &HermitianMatrix) -> Result<DressedSpectrum> {
    let eig = h0
        .matrix()
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(Error::EigenNonConvergence)?;
    let dim = h0.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvectors = DMatrix::<f64>::zeros(dim, dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut labels = Vec::with_capacity(dim);
    for (n, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        v /= v.norm();
        let (label, _) = v
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, x)| if x.abs() > best.1 { (i, x.abs()) } else { best });
        if v[label] < 0.0 {
            v.neg_mut();
        }
        eigenvectors.set_column(n, &v);
        eigenvalues.push(eig.eigenvalues[src]);
        labels.push(label);
    }
    Ok(DressedSpectrum { eigenvalues, eigenvectors, labels })
}

#[derive(Debug, Clone)]
pub struct ZetaEntry {
    pub k: usize,
    /// Position of this state in the dressed spectrum.
    pub index: usize,
    pub eigenvalue: f64,
    /// |<0,k|ζ_k>|².
    pub overlap: f64,
    pub vector: DVector<f64>,
}

/// Dressed states |ζ_k> in which the atom stays predominantly in level 0.
#[derive(Debug, Clone)]
pub struct ZetaBranch {
    entries: Vec<ZetaEntry>,
}

impl ZetaBranch {
    pub fn entries(&self) -> &[ZetaEntry] {
        &self.entries
    }

    pub fn get(&self, k: usize) -> Option<&ZetaEntry> {
        self.entries.get(k)
    }

    pub fn k_max(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.entries[k].eigenvalue
    }

    pub fn index(&self, k: usize) -> usize {
        self.entries[k].index
    }
}

/// Default branch length: keeps the (k+2)-photon admixtures inside the
/// truncated space.
pub fn default_k_max(space: HilbertSpace) -> usize {
    space.n_max().saturating_sub(4)
}

/// Matches each |0,k>, k = 0..=k_max, to the dressed state with the largest
/// overlap; the overlap must exceed 1/2. Matching is greedy in order of
/// decreasing overlap and uses each dressed state at most once.
pub fn zeta_branch(spec: &DressedSpectrum, space: HilbertSpace, k_max: usize) -> Result<ZetaBranch> {
    let entries = match_branch(spec, space, k_max)?.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ZetaBranch { entries })
}

/// Like [`zeta_branch`], but stops before the first |0,k> that cannot be
/// matched instead of failing. Only an unmatched |0,0> is an error.
pub fn zeta_branch_prefix(spec: &DressedSpectrum, space: HilbertSpace, k_max: usize) -> Result<ZetaBranch> {
    let mut entries = Vec::new();
    for entry in match_branch(spec, space, k_max)? {
        match entry {
            Ok(e) => entries.push(e),
            Err(e) if entries.is_empty() => return Err(e),
            Err(_) => break,
        }
    }
    Ok(ZetaBranch { entries })
}

fn match_branch(spec: &DressedSpectrum, space: HilbertSpace, k_max: usize) -> Result<Vec<Result<ZetaEntry>>> {
    if spec.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: spec.dim() });
    }
    if k_max > space.n_max() {
        return Err(Error::TruncationOverflow { needed: k_max, n_max: space.n_max() });
    }
    let v = spec.eigenvectors();
    let overlaps: Vec<Vec<f64>> = (0..=k_max)
        .map(|k| {
            let row = space.index(0, k);
            (0..spec.dim()).map(|n| v[(row, n)].powi(2)).collect()
        })
        .collect();

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (k, row) in overlaps.iter().enumerate() {
        for (n, &o) in row.iter().enumerate() {
            if o > 0.5 {
                candidates.push((o, k, n));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut assigned: Vec<Option<usize>> = vec![None; k_max + 1];
    let mut used = vec![false; spec.dim()];
    for (_, k, n) in candidates {
        if assigned[k].is_none() && !used[n] {
            assigned[k] = Some(n);
            used[n] = true;
        }
    }

    let entries = assigned
        .into_iter()
        .enumerate()
        .map(|(k, slot)| match slot {
            Some(n) => Ok(ZetaEntry {
                k,
                index: n,
                eigenvalue: spec.eigenvalue(n),
                overlap: overlaps[k][n],
                vector: spec.eigenvector(n).into_owned(),
            }),
            None => Err(Error::AmbiguousBranch {
                k,
                best_overlap: overlaps[k].iter().copied().fold(0.0, f64::max),
            }),
        })
        .collect();
    Ok(entries)
}

/// Θ_{n;m} = ½ Σ_k ε_k e^{iφ_k} <φ_n|σ_kk|φ_m>.
pub fn numeric_rate(spec: &DressedSpectrum, drive: &Drive, n: usize, m: usize) -> Result<Complex64> {
    spec.check_index(n)?;
    spec.check_index(m)?;
    if n == m {
        return Err(Error::SameIndex(n));
    }
    Ok(rate_element(spec, drive, n, m))
}

pub(crate) fn rate_element(spec: &DressedSpectrum, drive: &Drive, n: usize, m: usize) -> Complex64 {
    (1..LEVELS)
        .filter(|&j| drive.amplitude(j) != 0.0)
        .map(|j| {
            0.5 * drive.amplitude(j)
                * Complex64::from_polar(1.0, drive.phase(j))
                * spec.level_projection(j, n, m)
        })
        .sum()
}

/// |λ_m - λ_n|.
pub fn transition_frequency(spec: &DressedSpectrum, n: usize, m: usize) -> f64 {
    (spec.eigenvalue(m) - spec.eigenvalue(n)).abs()
}
