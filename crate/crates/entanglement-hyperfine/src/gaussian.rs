//! Entropies, contours and entanglement Hamiltonians of a restricted
//! correlation matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CorrelationMatrix, SiteIndex};
use crate::linalg::{self, CMatrix, C64};

/// Eigenvalue excursion outside [0, 1] that is still treated as round-off.
pub const CLAMP_WINDOW: f64 = 1e-8;

/// Eigen-decomposition of a restricted correlation matrix.
#[derive(Clone, Debug)]
pub struct SpectralData {
    /// Occupations, ascending, clamped to [0, 1].
    pub xi: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: CMatrix,
    pub sites: Vec<SiteIndex>,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// `|psi_l(j)|^2` as a (site, mode) matrix.
    pub fn weights(&self) -> DMatrix<f64> {
        self.vectors.map(|z| z.norm_sqr())
    }

    /// Site field `sum_l f(xi_l) |psi_l(j)|^2`.
    pub fn mode_sum(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let fx: Vec<f64> = self.xi.iter().map(|&x| f(x)).collect();
        (0..self.len())
            .map(|j| (0..self.len()).map(|l| fx[l] * self.vectors[(j, l)].norm_sqr()).sum())
            .collect()
    }

    /// `O diag(f(xi)) O^dagger`.
    pub fn reassemble_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d: Vec<f64> = self.xi.iter().map(|&x| f(x)).collect();
        linalg::reassemble(&d, &self.vectors)
    }
}

/// Diagonalize a (restricted) correlation matrix.
pub fn spectral_decompose(m: &CorrelationMatrix) -> Result<SpectralData> {
    let dense = m.to_dense();
    let herm = linalg::hermiticity_error(&dense);
    if herm > 1e-10 {
        return Err(Error::InvalidCorrelation(format!(
            "not Hermitian (deviation {herm:.2e})"
        )));
    }
    let (mut xi, vectors) = linalg::eigh(&dense);
    for (l, x) in xi.iter_mut().enumerate() {
        if *x < -CLAMP_WINDOW || *x > 1.0 + CLAMP_WINDOW {
            return Err(Error::InvalidCorrelation(format!(
                "eigenvalue {l} = {x:.3e} lies outside [0, 1]"
            )));
        }
        *x = x.clamp(0.0, 1.0);
    }
    Ok(SpectralData {
        xi,
        vectors,
        sites: m.sites().to_vec(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub n: f64,
    pub value: f64,
    pub refined: bool,
    /// `tr rho_A^n = exp((1 - n) S_n)`; absent for n = 1.
    pub trace: Option<f64>,
}

#[inline]
fn xlnx(x: f64) -> f64 {
    if x < 1e-300 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Binary entropy of one mode.
pub fn mode_entropy(xi: f64) -> f64 {
    -xlnx(xi) - xlnx(1.0 - xi)
}

/// Per-mode Renyi entropy; `n = 1` is the von Neumann value.
pub fn mode_renyi(xi: f64, n: f64) -> f64 {
    if n == 1.0 {
        mode_entropy(xi)
    } else {
        (xi.powf(n) + (1.0 - xi).powf(n)).ln() / (1.0 - n)
    }
}

/// Occupation of a mode in the replica state `rho^n / tr rho^n`.
pub fn replica_occupation(xi: f64, n: f64) -> f64 {
    let a = xi.powf(n);
    let b = (1.0 - xi).powf(n);
    a / (a + b)
}

fn check_order(n: f64) -> Result<()> {
    if n > 0.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Renyi order must be positive, got {n}")))
    }
}

/// Per-mode entropy function for the requested kind.
fn mode_function(n: f64, refined: bool) -> impl Fn(f64) -> f64 {
    move |x| {
        if refined {
            mode_entropy(replica_occupation(x, n))
        } else {
            mode_renyi(x, n)
        }
    }
}

pub fn entropy(sd: &SpectralData, n: f64, refined: bool) -> Result<EntropyReport> {
    check_order(n)?;
    let f = mode_function(n, refined);
    let value: f64 = sd.xi.iter().map(|&x| f(x)).sum();
    let trace = (!refined && n != 1.0).then(|| ((1.0 - n) * value).exp());
    Ok(EntropyReport {
        n,
        value,
        refined,
        trace,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    VonNeumann,
    Renyi,
    Refined,
    Hyperfine(usize),
    Cumulant(usize),
}

impl FieldKind {
    pub fn label(&self) -> &'static str {
        match self {
            FieldKind::VonNeumann => "vonNeumann",
            FieldKind::Renyi => "renyi",
            FieldKind::Refined => "refined",
            FieldKind::Hyperfine(_) => "hyperfine",
            FieldKind::Cumulant(_) => "cumulant",
        }
    }

    pub fn k(&self) -> Option<usize> {
        match self {
            FieldKind::Hyperfine(k) | FieldKind::Cumulant(k) => Some(*k),
            _ => None,
        }
    }
}

/// Real field over the sites of a region.
#[derive(Clone, Debug)]
pub struct ContourField {
    pub sites: Vec<SiteIndex>,
    pub values: Vec<f64>,
    pub n: Option<f64>,
    pub kind: FieldKind,
}

impl ContourField {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Sum over a subset of positions.
    pub fn sum_over(&self, positions: &[usize]) -> f64 {
        positions.iter().map(|&i| self.values[i]).sum()
    }

    /// Per-cell values with orbitals summed, in (y, x) order.
    pub fn orbital_summed(&self) -> Vec<((usize, usize), f64)> {
        let mut acc: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        for (s, v) in self.sites.iter().zip(&self.values) {
            *acc.entry((s.y.unwrap_or(0), s.x)).or_insert(0.0) += v;
        }
        acc.into_iter().collect()
    }
}

pub fn contour(sd: &SpectralData, n: f64, refined: bool) -> Result<ContourField> {
    check_order(n)?;
    let values = sd.mode_sum(mode_function(n, refined));
    let kind = if refined {
        FieldKind::Refined
    } else if n == 1.0 {
        FieldKind::VonNeumann
    } else {
        FieldKind::Renyi
    };
    Ok(ContourField {
        sites: sd.sites.clone(),
        values,
        n: Some(n),
        kind,
    })
}

/// Refined entropy from `n^2 d/dn ((n - 1) S_n / n)` by central differences.
/// Cross-check only; [`entropy`] with `refined = true` is exact.
pub fn refined_entropy_fd(sd: &SpectralData, n: f64, step: f64) -> Result<f64> {
    check_order(n - step)?;
    let g = |m: f64| -> f64 {
        let s: f64 = sd.xi.iter().map(|&x| mode_renyi(x, m)).sum();
        (m - 1.0) * s / m
    };
    Ok(n * n * (g(n + step) - g(n - step)) / (2.0 * step))
}

/// Entanglement (modular) Hamiltonian.
#[derive(Clone, Debug)]
pub struct EntanglementHamiltonian {
    pub matrix: CMatrix,
    /// Set for the analytic tridiagonal model.
    pub analytic: Option<String>,
}

/// `H = O diag(ln((1 - xi) / xi)) O^dagger`.
pub fn peschel_hamiltonian(sd: &SpectralData, delta: f64) -> Result<EntanglementHamiltonian> {
    for (mode, &xi) in sd.xi.iter().enumerate() {
        if xi <= delta || xi >= 1.0 - delta {
            return Err(Error::SingularSpectrum { mode, xi, delta });
        }
    }
    Ok(EntanglementHamiltonian {
        matrix: sd.reassemble_with(|x| ((1.0 - x) / x).ln()),
        analytic: None,
    })
}

impl EntanglementHamiltonian {
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::eigh(&self.matrix).0
    }

    /// Fermi-Dirac correlation matrix `(1 + e^{H / T})^{-1}`.
    pub fn gibbs_correlation(&self, temperature: f64) -> CMatrix {
        let (eps, vecs) = linalg::eigh(&self.matrix);
        let occ: Vec<f64> = eps.iter().map(|&e| fermi(e / temperature)).collect();
        linalg::reassemble(&occ, &vecs)
    }

    pub fn scaled(&self, factor: f64) -> EntanglementHamiltonian {
        EntanglementHamiltonian {
            matrix: self.matrix.map(|z| z * factor),
            analytic: self.analytic.clone(),
        }
    }
}

fn fermi(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Tridiagonal model Hamiltonian with hoppings `t_i = (i/N)(1 - i/N)` and
/// diagonal `d_i = -2 cos(q_F) s_i (1 - s_i)`, `s_i = (2i - 1) / 2N`.
pub fn analytic_tridiagonal_k(size: usize, q_f: f64) -> Result<EntanglementHamiltonian> {
    if size < 2 {
        return Err(Error::Domain("the tridiagonal model needs at least 2 sites".into()));
    }
    let nf = size as f64;
    let mut m = CMatrix::zeros(size, size);
    for i in 1..=size {
        let s = (2.0 * i as f64 - 1.0) / (2.0 * nf);
        m[(i - 1, i - 1)] = C64::new(-2.0 * q_f.cos() * s * (1.0 - s), 0.0);
        if i < size {
            let t = (i as f64 / nf) * (1.0 - i as f64 / nf);
            m[(i - 1, i)] = C64::new(t, 0.0);
            m[(i, i - 1)] = C64::new(t, 0.0);
        }
    }
    Ok(EntanglementHamiltonian {
        matrix: m,
        analytic: Some(format!("tridiagonal N={size} q_F={q_f}")),
    })
}

/// Tridiagonal hopping `t_i`, 1-based.
pub fn tridiagonal_hopping(i: usize, size: usize) -> f64 {
    let r = i as f64 / size as f64;
    r * (1.0 - r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn sd_from(m: CMatrix) -> SpectralData {
        spectral_decompose(&CorrelationMatrix::chain_dense(m, "test").unwrap()).unwrap()
    }

    fn real(rows: usize, v: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(rows, rows, &v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn half_filled_mode_has_ln2_for_all_orders() {
        let sd = sd_from(real(1, &[0.5]));
        for n in [0.5, 1.0, 2.0, 3.0, 7.5] {
            assert!((entropy(&sd, n, false).unwrap().value - LN_2).abs() < 1e-15);
            assert!((entropy(&sd, n, true).unwrap().value - LN_2).abs() < 1e-15);
        }
    }

    #[test]
    fn rank_one_projector() {
        let sd = sd_from(real(2, &[0.5, 0.5, 0.5, 0.5]));
        assert!(sd.xi[0].abs() < 1e-15 && (sd.xi[1] - 1.0).abs() < 1e-15);
        for n in [1.0, 2.0] {
            assert!(entropy(&sd, n, false).unwrap().value.abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_invalid_inputs() {
        let m = CorrelationMatrix::chain_dense(real(1, &[1.1]), "bad").unwrap();
        assert!(spectral_decompose(&m).is_err());
        let sd = sd_from(real(1, &[0.5]));
        assert!(entropy(&sd, 0.0, false).is_err());
        assert!(entropy(&sd, -1.0, true).is_err());
    }

    #[test]
    fn single_site_contour_is_entropy() {
        let sd = sd_from(real(1, &[0.3]));
        let c = contour(&sd, 2.0, false).unwrap();
        assert!((c.values[0] - entropy(&sd, 2.0, false).unwrap().value).abs() < 1e-15);
    }

    #[test]
    fn peschel_round_trip() {
        let sd = sd_from(real(1, &[0.5]));
        let h = peschel_hamiltonian(&sd, 1e-12).unwrap();
        assert!(h.matrix[(0, 0)].norm() < 1e-15);
        let sd = sd_from(real(2, &[0.5, 0.5, 0.5, 0.5]));
        assert!(matches!(
            peschel_hamiltonian(&sd, 1e-12),
            Err(Error::SingularSpectrum { mode: 0, .. })
        ));
    }

    #[test]
    fn tridiagonal_model_shape() {
        let k = analytic_tridiagonal_k(2, PI / 2.0).unwrap();
        assert!((k.matrix[(0, 1)].re - 0.25).abs() < 1e-15);
        let k = analytic_tridiagonal_k(9, PI / 2.0).unwrap();
        assert!((0..9).all(|i| k.matrix[(i, i)].norm() < 1e-15));
        let e = k.spectrum();
        for i in 0..9 {
            assert!((e[i] + e[8 - i]).abs() < 1e-12);
        }
    }
}
