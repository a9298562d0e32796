//! Open-chain Majorana tight-binding matrix, its zero modes and the signed
//! Majorana charge.
//!
//! Basis indices are 1-based in the public API: odd index `2l - 1` is the
//! a-type Majorana operator on site `l`, even index `2l` the b-type one.

use serde::Serialize;

use crate::eigen::{symmetric_eigen, symmetric_eigen_near_zero, symmetric_eigenvalues, Spectrum};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::model::CouplingSet;

/// Eigenvalues with magnitude below this count as zero modes.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-10;

/// Dense real symmetric `2N x 2N` single-particle matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MajoranaMatrix {
    n_sites: usize,
    entries: Vec<f64>,
}

impl MajoranaMatrix {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        2 * self.n_sites
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Entry at 1-based basis indices `(l, m)`.
    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.entries[(l - 1) * self.dim() + (m - 1)]
    }

    fn add_symmetric(&mut self, l: usize, m: usize, value: f64) {
        let dim = self.dim();
        self.entries[(l - 1) * dim + (m - 1)] += value;
        self.entries[(m - 1) * dim + (l - 1)] += value;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[i * self.dim() + i]).sum()
    }

    /// Number of nonzero entries.
    pub fn nonzero_count(&self) -> usize {
        self.entries.iter().filter(|x| **x != 0.0).count()
    }

    /// Whether `S h S == -h` for `S = diag(+1 on a-type, -1 on b-type)`,
    /// i.e. every same-type entry vanishes.
    pub fn is_chiral(&self) -> bool {
        let dim = self.dim();
        (0..dim).all(|i| (0..dim).all(|j| (i + j) % 2 == 1 || self.entries[i * dim + j] == 0.0))
    }

    /// 1-based indices whose row (and column) is identically zero.
    pub fn zero_rows(&self) -> Vec<usize> {
        let dim = self.dim();
        (0..dim)
            .filter(|&i| self.entries[i * dim..(i + 1) * dim].iter().all(|x| *x == 0.0))
            .map(|i| i + 1)
            .collect()
    }
}

/// Build the open-chain matrix for `n_sites` spins.
pub fn build_majorana(c: &CouplingSet, n_sites: usize) -> Result<MajoranaMatrix> {
    if n_sites <= c.range() {
        return Err(Error::ChainTooShort { n_sites, range: c.range() });
    }
    let dim = 2 * n_sites;
    let mut h = MajoranaMatrix {
        n_sites,
        entries: vec![0.0; dim * dim],
    };
    for (n, jx, jy) in c.channels() {
        for l in 1..=n_sites - n {
            if jx != 0.0 {
                // b_l -- a_{l+n}
                h.add_symmetric(2 * l, 2 * (l + n) - 1, 0.5 * jx);
            }
            if jy != 0.0 {
                // a_l -- b_{l+n}
                h.add_symmetric(2 * l - 1, 2 * (l + n), 0.5 * jy);
            }
        }
    }
    if c.g() != 0.0 {
        for l in 1..=n_sites {
            h.add_symmetric(2 * l - 1, 2 * l, -0.5 * c.g());
        }
    }
    Ok(h)
}

pub fn eigensolve(h: &MajoranaMatrix) -> Result<Spectrum> {
    symmetric_eigen(h.dim(), h.entries())
}

pub fn eigenvalues(h: &MajoranaMatrix) -> Result<Vec<f64>> {
    symmetric_eigenvalues(h.dim(), h.entries())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroMode {
    pub eigenvalue: f64,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroModeSet {
    pub n_zero: usize,
    pub modes: Vec<ZeroMode>,
    pub threshold: f64,
    pub charge: Option<f64>,
}

impl ZeroModeSet {
    /// Summed probability `sum_alpha |v_alpha(i)|^2` per basis index.
    pub fn profile(&self) -> Vec<f64> {
        let dim = self.modes.first().map_or(0, |m| m.vector.len());
        let mut p = vec![0.0; dim];
        for m in &self.modes {
            for (pi, v) in p.iter_mut().zip(&m.vector) {
                *pi += v * v;
            }
        }
        p
    }

    /// CSV `basis_index,|amplitude|^2` of the summed zero-mode probability.
    pub fn profile_csv(&self) -> String {
        let mut out = String::from("basis_index,|amplitude|^2\n");
        for (i, p) in self.profile().iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, fmt_f64(*p)));
        }
        out
    }
}

/// Eigenpairs with `|lambda| < threshold`, re-orthonormalized in order.
pub fn zero_modes(spectrum: &Spectrum, threshold: f64) -> Result<ZeroModeSet> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {threshold}")));
    }
    let mut modes: Vec<ZeroMode> = Vec::new();
    for (lambda, v) in spectrum.pairs() {
        if lambda.abs() >= threshold {
            continue;
        }
        let mut w = v.to_vec();
        for m in &modes {
            let dot: f64 = m.vector.iter().zip(&w).map(|(a, b)| a * b).sum();
            for (wi, mi) in w.iter_mut().zip(&m.vector) {
                *wi -= dot * mi;
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        for wi in &mut w {
            *wi /= norm;
        }
        modes.push(ZeroMode { eigenvalue: lambda, vector: w });
    }
    Ok(ZeroModeSet {
        n_zero: modes.len(),
        modes,
        threshold,
        charge: None,
    })
}

/// Projector depths `(N+, N-)` for a chain of `n_sites`.
pub fn projector_depths(n_sites: usize, edge_depth: Option<usize>) -> Result<(usize, usize)> {
    match edge_depth {
        Some(d) if 2 * d > n_sites => Err(Error::ProjectorsOverlap { edge_depth: d, n_sites }),
        Some(d) => Ok((d, d)),
        // N/2 +- (1 + (-1)^(N+1)) / 4
        None if n_sites % 2 == 0 => Ok((n_sites / 2, n_sites / 2)),
        None => Ok(((n_sites + 1) / 2, (n_sites - 1) / 2)),
    }
}

/// Diagonal of `M+ - M-` over the 2N basis indices (0-based storage).
pub fn charge_weights(n_sites: usize, edge_depth: Option<usize>) -> Result<Vec<f64>> {
    let (n_plus, n_minus) = projector_depths(n_sites, edge_depth)?;
    let n = n_sites;
    let mut w = vec![0.0; 2 * n];
    for l in 1..=n_plus {
        w[2 * l - 2] += 1.0; // a_l
        w[2 * n + 2 - 2 * l - 1] += 1.0; // b_{N+1-l}
    }
    for l in 1..=n_minus {
        w[2 * l - 1] -= 1.0; // b_l
        w[2 * n + 1 - 2 * l - 1] -= 1.0; // a_{N+1-l}
    }
    Ok(w)
}

/// Expectation of `M+ - M-` in one state.
pub fn charge_expectation(weights: &[f64], v: &[f64]) -> f64 {
    weights.iter().zip(v).map(|(w, x)| w * x * x).sum()
}

/// Majorana charge `Q = sum_alpha <alpha| M+ - M- |alpha>` over the zero modes.
pub fn majorana_charge(zms: &ZeroModeSet, n_sites: usize, edge_depth: Option<usize>) -> Result<f64> {
    let weights = charge_weights(n_sites, edge_depth)?;
    if let Some(m) = zms.modes.first() {
        if m.vector.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "zero modes have dimension {} but N = {n_sites}",
                m.vector.len()
            )));
        }
    }
    Ok(zms.modes.iter().map(|m| charge_expectation(&weights, &m.vector)).sum())
}

/// Build, diagonalize and return the zero modes with their charge set.
pub fn analyze(c: &CouplingSet, n_sites: usize, threshold: f64, edge_depth: Option<usize>) -> Result<(Spectrum, ZeroModeSet)> {
    let h = build_majorana(c, n_sites)?;
    let spectrum = eigensolve(&h)?;
    let mut zms = zero_modes(&spectrum, threshold)?;
    zms.charge = Some(majorana_charge(&zms, n_sites, edge_depth)?);
    Ok((spectrum, zms))
}

/// Zero modes without a full decomposition: eigenvectors are computed only
/// for the eigenvalues below `threshold`.
pub fn near_zero_modes(h: &MajoranaMatrix, threshold: f64) -> Result<ZeroModeSet> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {threshold}")));
    }
    let (_, pairs) = symmetric_eigen_near_zero(h.dim(), h.entries(), threshold)?;
    let modes: Vec<ZeroMode> = pairs
        .into_iter()
        .map(|(eigenvalue, vector)| ZeroMode { eigenvalue, vector })
        .collect();
    Ok(ZeroModeSet {
        n_zero: modes.len(),
        modes,
        threshold,
        charge: None,
    })
}

/// Zero-mode count and charge without keeping the spectrum.
pub fn zero_mode_summary(c: &CouplingSet, n_sites: usize, threshold: f64) -> Result<(usize, f64)> {
    let h = build_majorana(c, n_sites)?;
    let zms = near_zero_modes(&h, threshold)?;
    let q = majorana_charge(&zms, n_sites, None)?;
    Ok((zms.n_zero, q))
}

/// Zero rows of the matrix for a pure single-channel coupling with `g = 0`.
pub fn isolated_site_check(c: &CouplingSet, n_sites: usize) -> Result<Vec<usize>> {
    let nonzero = c.jx().iter().chain(c.jy()).filter(|v| **v != 0.0).count();
    if nonzero != 1 || c.g() != 0.0 {
        return Err(Error::NotPure);
    }
    Ok(build_majorana(c, n_sites)?.zero_rows())
}

/// CSV `index,eigenvalue`, 1-based in ascending order.
pub fn eigenvalues_csv(values: &[f64]) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, fmt_f64(*v)));
    }
    out
}
