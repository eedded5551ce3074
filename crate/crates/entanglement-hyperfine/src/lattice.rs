//! Lattice geometry, ground-state correlation matrices, and regions.
//!
//! Site ordering is row-major with `x` fastest and the orbital innermost:
//! `index = (y * lx + x) * orbitals + orbital`. Field CSVs rely on it.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

/// Energy window treated as "at the Fermi level"; such modes stay empty.
pub const FERMI_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteIndex {
    pub x: usize,
    pub y: Option<usize>,
    pub orbital: usize,
}

impl SiteIndex {
    pub fn chain(x: usize) -> Self {
        SiteIndex { x, y: None, orbital: 0 }
    }

    pub fn cell(x: usize, y: usize, orbital: usize) -> Self {
        SiteIndex { x, y: Some(y), orbital }
    }

    /// Sort key used by every tabular output: (y, x, orbital).
    pub fn sort_key(&self) -> (usize, usize, usize) {
        (self.y.unwrap_or(0), self.x, self.orbital)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occupation {
    /// Occupy the `floor(f * modes)` lowest single-particle modes.
    Filling(f64),
    /// Occupy every mode with energy below `mu`.
    ChemicalPotential(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dimension: usize,
    pub lx: usize,
    pub ly: usize,
    pub boundary: [Boundary; 2],
    pub orbitals: usize,
    pub occupation: Occupation,
}

impl LatticeSpec {
    pub fn chain(len: usize, boundary: Boundary, occupation: Occupation) -> Self {
        LatticeSpec {
            dimension: 1,
            lx: len,
            ly: 1,
            boundary: [boundary, Boundary::Open],
            orbitals: 1,
            occupation,
        }
    }

    /// Two-orbital square lattice, periodic in both directions. Occupation is
    /// set by the chemical potential in [`ChernParams`].
    pub fn torus(lx: usize, ly: usize) -> Self {
        LatticeSpec {
            dimension: 2,
            lx,
            ly,
            boundary: [Boundary::Periodic, Boundary::Periodic],
            orbitals: 2,
            occupation: Occupation::ChemicalPotential(0.0),
        }
    }

    /// Strip that is open along `y`; `x` is handled by a momentum `k_x`.
    pub fn cylinder(ly: usize) -> Self {
        LatticeSpec {
            dimension: 2,
            lx: 1,
            ly,
            boundary: [Boundary::Periodic, Boundary::Open],
            orbitals: 2,
            occupation: Occupation::ChemicalPotential(0.0),
        }
    }

    pub fn num_sites(&self) -> usize {
        self.lx * self.ly * self.orbitals
    }

    pub fn site(&self, index: usize) -> SiteIndex {
        let orbital = index % self.orbitals;
        let cell = index / self.orbitals;
        if self.dimension == 1 {
            SiteIndex {
                x: cell,
                y: None,
                orbital,
            }
        } else {
            SiteIndex {
                x: cell % self.lx,
                y: Some(cell / self.lx),
                orbital,
            }
        }
    }

    pub fn sites(&self) -> Vec<SiteIndex> {
        (0..self.num_sites()).map(|i| self.site(i)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidLattice(m.to_string()));
        match self.dimension {
            1 => {
                if self.lx < 2 {
                    return bad("chain length must be at least 2");
                }
            }
            2 => {
                if self.ly < 2 || (self.lx < 2 && self.boundary[0] == Boundary::Open) {
                    return bad("extents must be at least 2");
                }
            }
            _ => return bad("dimension must be 1 or 2"),
        }
        if self.orbitals == 0 {
            return bad("orbital count must be positive");
        }
        match self.occupation {
            Occupation::Filling(f) if !(0.0..=1.0).contains(&f) => bad("filling must lie in [0, 1]"),
            Occupation::ChemicalPotential(mu) if !mu.is_finite() => bad("chemical potential must be finite"),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernParams {
    pub m: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl ChernParams {
    pub fn new(m: f64, lambda: f64, mu: f64) -> Self {
        ChernParams { m, lambda, mu }
    }

    /// Bloch vector `(d_x, d_y, d_z)` of `H(k) = d . sigma - mu`.
    pub fn bloch_vector(&self, kx: f64, ky: f64) -> [f64; 3] {
        [
            self.lambda * kx.sin(),
            self.lambda * ky.sin(),
            self.m + kx.cos() + ky.cos(),
        ]
    }

    /// Band energies (lower, upper) at `k`, including the `-mu` shift.
    pub fn bands(&self, kx: f64, ky: f64) -> (f64, f64) {
        let d = self.bloch_vector(kx, ky);
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        (-r - self.mu, r - self.mu)
    }
}

/// Pauli-matrix combination `a0 + a . sigma` as a 2x2 complex matrix.
fn pauli(a0: C64, ax: C64, ay: C64, az: C64) -> [[C64; 2]; 2] {
    let i = C64::i();
    [[a0 + az, ax - i * ay], [ax + i * ay, a0 - az]]
}

#[derive(Clone, Debug)]
struct TorusKernel {
    lx: usize,
    ly: usize,
    norb: usize,
    /// `blocks[dy * lx + dx][(a, b)] = M_{(R, a), (R + d, b)}`.
    blocks: Vec<CMatrix>,
}

#[derive(Clone, Debug)]
enum Storage {
    Dense(CMatrix),
    Torus(TorusKernel),
}

/// Two-point function `M_ij = <c_i^dagger c_j>` with its site map.
///
/// Translation-invariant torus states are stored as displacement blocks and
/// only densified on restriction.
#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    storage: Storage,
    sites: Vec<SiteIndex>,
    pub tag: String,
}

impl CorrelationMatrix {
    pub fn from_dense(m: CMatrix, sites: Vec<SiteIndex>, tag: impl Into<String>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() != sites.len() {
            return Err(Error::InvalidCorrelation(format!(
                "matrix is {}x{} but {} sites were given",
                m.nrows(),
                m.ncols(),
                sites.len()
            )));
        }
        Ok(CorrelationMatrix {
            storage: Storage::Dense(m),
            sites,
            tag: tag.into(),
        })
    }

    /// Dense matrix over consecutive chain sites `0..n`.
    pub fn chain_dense(m: CMatrix, tag: impl Into<String>) -> Result<Self> {
        let sites = (0..m.nrows()).map(SiteIndex::chain).collect();
        Self::from_dense(m, sites, tag)
    }

    pub fn dim(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[SiteIndex] {
        &self.sites
    }

    pub fn is_translation_invariant(&self) -> bool {
        matches!(self.storage, Storage::Torus(_))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Torus(k) => {
                let (si, sj) = (self.sites[i], self.sites[j]);
                let (yi, yj) = (si.y.unwrap_or(0), sj.y.unwrap_or(0));
                let dx = (sj.x + k.lx - si.x) % k.lx;
                let dy = (yj + k.ly - yi) % k.ly;
                k.blocks[dy * k.lx + dx][(si.orbital, sj.orbital)]
            }
        }
    }

    pub fn dense(&self) -> Option<&CMatrix> {
        match &self.storage {
            Storage::Dense(m) => Some(m),
            Storage::Torus(_) => None,
        }
    }

    /// Materialize the full matrix. Torus states of realistic size are large;
    /// prefer [`CorrelationMatrix::restrict`].
    pub fn to_dense(&self) -> CMatrix {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Torus(_) => {
                let n = self.dim();
                CMatrix::from_fn(n, n, |i, j| self.get(i, j))
            }
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.diagonal().iter().map(|z| z.re).sum(),
            Storage::Torus(k) => {
                let b = &k.blocks[0];
                (k.lx * k.ly) as f64 * (0..k.norb).map(|a| b[(a, a)].re).sum::<f64>()
            }
        }
    }

    pub fn position(&self, site: &SiteIndex) -> Option<usize> {
        self.sites.iter().position(|s| s == site)
    }

    /// Principal submatrix on `region`, in region order.
    pub fn restrict(&self, region: &Region) -> Result<CorrelationMatrix> {
        if region.is_empty() {
            return Err(Error::InvalidRegion("empty region".into()));
        }
        let lookup: HashMap<SiteIndex, usize> = self.sites.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let idx = region
            .sites()
            .iter()
            .map(|s| {
                lookup
                    .get(s)
                    .copied()
                    .ok_or_else(|| Error::InvalidRegion(format!("site {s:?} is not on the lattice")))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = idx.len();
        let m = CMatrix::from_fn(n, n, |a, b| self.get(idx[a], idx[b]));
        CorrelationMatrix::from_dense(m, region.sites().to_vec(), self.tag.clone())
    }

    /// Largest deviation from Hermiticity (dense or block storage).
    pub fn hermiticity_error(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => linalg::hermiticity_error(m),
            Storage::Torus(k) => {
                let mut worst: f64 = 0.0;
                for dy in 0..k.ly {
                    for dx in 0..k.lx {
                        let b = &k.blocks[dy * k.lx + dx];
                        let back = &k.blocks[((k.ly - dy) % k.ly) * k.lx + (k.lx - dx) % k.lx];
                        for a in 0..k.norb {
                            for c in 0..k.norb {
                                worst = worst.max((b[(a, c)] - back[(c, a)].conj()).norm());
                            }
                        }
                    }
                }
                worst
            }
        }
    }
}

/// Ordered set of lattice sites forming the subsystem A.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    sites: Vec<SiteIndex>,
}

impl Region {
    pub fn new(sites: Vec<SiteIndex>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &sites {
            if !seen.insert(*s) {
                return Err(Error::InvalidRegion(format!("duplicate site {s:?}")));
            }
        }
        Ok(Region { sites })
    }

    /// Chain sites `start..start + len`.
    pub fn interval(start: usize, len: usize) -> Self {
        Region {
            sites: (start..start + len).map(SiteIndex::chain).collect(),
        }
    }

    /// All orbitals of the cells in `[x0, x0 + w) x [y0, y0 + h)`, row-major.
    pub fn rectangle(x0: usize, y0: usize, w: usize, h: usize, orbitals: usize) -> Self {
        let mut sites = Vec::with_capacity(w * h * orbitals);
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                for o in 0..orbitals {
                    sites.push(SiteIndex::cell(x, y, o));
                }
            }
        }
        Region { sites }
    }

    pub fn sites(&self) -> &[SiteIndex] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, s: &SiteIndex) -> bool {
        self.sites.contains(s)
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        let set: HashSet<_> = self.sites.iter().collect();
        !other.sites.iter().any(|s| set.contains(s))
    }

    pub fn union(&self, other: &Region) -> Result<Region> {
        let mut sites = self.sites.clone();
        sites.extend_from_slice(&other.sites);
        Region::new(sites)
    }

    pub fn without(&self, s: &SiteIndex) -> Region {
        Region {
            sites: self.sites.iter().filter(|t| *t != s).copied().collect(),
        }
    }
}

/// Single-particle hopping matrix of the chain (amplitude -1/2).
pub fn chain_hamiltonian(len: usize, boundary: Boundary) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(len, len);
    for i in 0..len.saturating_sub(1) {
        h[(i, i + 1)] = -0.5;
        h[(i + 1, i)] = -0.5;
    }
    if boundary == Boundary::Periodic && len > 2 {
        h[(0, len - 1)] = -0.5;
        h[(len - 1, 0)] = -0.5;
    }
    h
}

/// Pick occupied modes from ascending energies.
pub(crate) fn occupied_modes(energies: &[f64], occupation: Occupation) -> Result<Vec<usize>> {
    match occupation {
        Occupation::Filling(f) => {
            let n = (f * energies.len() as f64 + 1e-9).floor() as usize;
            let n = n.min(energies.len());
            if n > 0 && n < energies.len() && (energies[n] - energies[n - 1]).abs() < 1e-10 {
                return Err(Error::DegenerateFermiLevel {
                    below: n - 1,
                    above: n,
                    energy: energies[n],
                });
            }
            Ok((0..n).collect())
        }
        Occupation::ChemicalPotential(mu) => Ok(energies
            .iter()
            .enumerate()
            .filter(|(_, &e)| e < mu - FERMI_TOL)
            .map(|(i, _)| i)
            .collect()),
    }
}

/// Ground-state correlation matrix of the nearest-neighbour chain.
pub fn build_chain_correlation(spec: &LatticeSpec) -> Result<CorrelationMatrix> {
    spec.validate()?;
    if spec.dimension != 1 || spec.orbitals != 1 {
        return Err(Error::InvalidLattice(
            "chain builder needs a one-orbital 1D lattice".into(),
        ));
    }
    let h = chain_hamiltonian(spec.lx, spec.boundary[0]);
    let (energies, vectors) = linalg::eigh_real(&h);
    let occ = occupied_modes(&energies, spec.occupation)?;
    let mut m = DMatrix::<f64>::zeros(spec.lx, spec.lx);
    for &o in &occ {
        let v = vectors.column(o);
        m += v * v.transpose();
    }
    let tag = format!("chain L={} {:?} {:?}", spec.lx, spec.boundary[0], spec.occupation);
    CorrelationMatrix::chain_dense(m.map(|x| C64::new(x, 0.0)), tag)
}

/// Block of `len` consecutive sites of the infinite chain with Fermi momentum
/// `k_f`: `M_ij = sin(k_f (i - j)) / (pi (i - j))`, `M_ii = k_f / pi`.
pub fn sine_kernel_correlation(len: usize, k_f: f64) -> Result<CorrelationMatrix> {
    if len == 0 {
        return Err(Error::InvalidLattice("block length must be positive".into()));
    }
    let m = CMatrix::from_fn(len, len, |i, j| {
        let d = i as f64 - j as f64;
        let v = if i == j { k_f / PI } else { (k_f * d).sin() / (PI * d) };
        C64::new(v, 0.0)
    });
    CorrelationMatrix::chain_dense(m, format!("infinite chain k_F={k_f}"))
}

/// Ground state of the two-band Chern insulator on a periodic torus, built from
/// the momentum-space band projector.
pub fn build_chern_torus_correlation(spec: &LatticeSpec, params: &ChernParams) -> Result<CorrelationMatrix> {
    spec.validate()?;
    if spec.dimension != 2 || spec.orbitals != 2 || spec.boundary != [Boundary::Periodic; 2] {
        return Err(Error::InvalidLattice(
            "torus builder needs a periodic two-orbital 2D lattice".into(),
        ));
    }
    let (lx, ly) = (spec.lx, spec.ly);
    let ncell = (lx * ly) as f64;
    // Occupied projector P(k) for every k on the grid.
    let mut projectors = Vec::with_capacity(lx * ly);
    for jy in 0..ly {
        for jx in 0..lx {
            let kx = 2.0 * PI * jx as f64 / lx as f64;
            let ky = 2.0 * PI * jy as f64 / ly as f64;
            projectors.push(band_projector(params, kx, ky));
        }
    }
    // blocks[d][(a, b)] = (1/N) sum_k e^{i k.d} P(k)_{ba}
    let mut blocks = Vec::with_capacity(lx * ly);
    for dy in 0..ly {
        for dx in 0..lx {
            let mut b = CMatrix::zeros(2, 2);
            for jy in 0..ly {
                for jx in 0..lx {
                    let phase = 2.0 * PI * ((jx * dx) as f64 / lx as f64 + (jy * dy) as f64 / ly as f64);
                    let e = C64::from_polar(1.0, phase);
                    let p = &projectors[jy * lx + jx];
                    for a in 0..2 {
                        for c in 0..2 {
                            b[(a, c)] += e * p[c][a];
                        }
                    }
                }
            }
            b.scale_mut(1.0 / ncell);
            blocks.push(b);
        }
    }
    let tag = format!(
        "chern torus {lx}x{ly} m={} lambda={} mu={}",
        params.m, params.lambda, params.mu
    );
    Ok(CorrelationMatrix {
        storage: Storage::Torus(TorusKernel {
            lx,
            ly,
            norb: 2,
            blocks,
        }),
        sites: spec.sites(),
        tag,
    })
}

/// Projector onto the bands of `H(k)` lying below the chemical potential.
fn band_projector(params: &ChernParams, kx: f64, ky: f64) -> [[C64; 2]; 2] {
    let d = params.bloch_vector(kx, ky);
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let zero = C64::new(0.0, 0.0);
    let lower = -r - params.mu < -FERMI_TOL;
    let upper = r - params.mu < -FERMI_TOL;
    match (lower, upper) {
        (true, true) => pauli(C64::new(1.0, 0.0), zero, zero, zero),
        (false, false) => [[zero; 2]; 2],
        _ => {
            // (1 -+ d.sigma/|d|)/2; r > 0 here because the bands differ in sign.
            let s = if lower { -0.5 / r } else { 0.5 / r };
            pauli(
                C64::new(0.5, 0.0),
                C64::new(s * d[0], 0.0),
                C64::new(s * d[1], 0.0),
                C64::new(s * d[2], 0.0),
            )
        }
    }
}

/// Hamiltonian of the strip that is open along `y` at fixed momentum `k_x`.
pub fn cylinder_hamiltonian(ly: usize, params: &ChernParams, kx: f64) -> CMatrix {
    let zero = C64::new(0.0, 0.0);
    let onsite = pauli(
        C64::new(-params.mu, 0.0),
        C64::new(params.lambda * kx.sin(), 0.0),
        zero,
        C64::new(params.m + kx.cos(), 0.0),
    );
    // T = sigma_z / 2 + (lambda / 2i) sigma_y couples row y to row y + 1.
    let hop = pauli(zero, zero, C64::new(0.0, -params.lambda / 2.0), C64::new(0.5, 0.0));
    let mut h = CMatrix::zeros(2 * ly, 2 * ly);
    for y in 0..ly {
        for a in 0..2 {
            for b in 0..2 {
                h[(2 * y + a, 2 * y + b)] = onsite[a][b];
                if y + 1 < ly {
                    h[(2 * y + a, 2 * (y + 1) + b)] = hop[a][b];
                    h[(2 * (y + 1) + b, 2 * y + a)] = hop[a][b].conj();
                }
            }
        }
    }
    h
}

/// Single-particle energies of the strip, ascending.
pub fn cylinder_spectrum(ly: usize, params: &ChernParams, kx: f64) -> Vec<f64> {
    linalg::eigh(&cylinder_hamiltonian(ly, params, kx)).0
}

/// Ground state of the strip at momentum `k_x`, filling all negative-energy
/// modes of `H - mu`.
pub fn build_chern_cylinder_correlation(
    spec: &LatticeSpec,
    params: &ChernParams,
    kx: f64,
) -> Result<CorrelationMatrix> {
    spec.validate()?;
    if !(0.0..2.0 * PI).contains(&kx) {
        return Err(Error::Domain(format!("k_x = {kx} outside [0, 2 pi)")));
    }
    if spec.orbitals != 2 || spec.boundary[1] != Boundary::Open {
        return Err(Error::InvalidLattice(
            "cylinder builder needs two orbitals and an open y axis".into(),
        ));
    }
    let ly = spec.ly;
    let (energies, vectors) = linalg::eigh(&cylinder_hamiltonian(ly, params, kx));
    let occ = occupied_modes(&energies, Occupation::ChemicalPotential(0.0))?;
    let m = linalg::slater_correlation(&vectors, &occ);
    let sites = (0..ly)
        .flat_map(|y| (0..2).map(move |o| SiteIndex::cell(0, y, o)))
        .collect();
    let tag = format!(
        "chern cylinder Ly={ly} kx={kx} m={} lambda={} mu={}",
        params.m, params.lambda, params.mu
    );
    CorrelationMatrix::from_dense(m, sites, tag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn two_site_chain() {
        let spec = LatticeSpec::chain(2, Boundary::Open, Occupation::Filling(0.5));
        let m = build_chain_correlation(&spec).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.get(i, j) - C64::new(0.5, 0.0)).norm() < 1e-14);
            }
        }
        let r = m.restrict(&Region::interval(1, 1)).unwrap();
        assert!(close(r.get(0, 0).re, 0.5, 1e-14));
    }

    #[test]
    fn empty_filling_is_zero() {
        let spec = LatticeSpec::chain(7, Boundary::Open, Occupation::Filling(0.0));
        let m = build_chain_correlation(&spec).unwrap();
        assert!(m.to_dense().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn periodic_half_filling_is_degenerate() {
        let spec = LatticeSpec::chain(400, Boundary::Periodic, Occupation::Filling(0.5));
        assert!(matches!(
            build_chain_correlation(&spec),
            Err(Error::DegenerateFermiLevel { .. })
        ));
    }

    #[test]
    fn sine_kernel_values() {
        let m = sine_kernel_correlation(400, PI / 2.0).unwrap();
        assert!(close(m.get(10, 10).re, 0.5, 1e-15));
        assert!(close(m.get(10, 11).re, 1.0 / PI, 1e-10));
    }

    #[test]
    fn restrict_rejects_empty_and_foreign() {
        let m = sine_kernel_correlation(4, PI / 2.0).unwrap();
        assert!(m.restrict(&Region::new(vec![]).unwrap()).is_err());
        assert!(m.restrict(&Region::interval(3, 2)).is_err());
        assert!(Region::new(vec![SiteIndex::chain(1), SiteIndex::chain(1)]).is_err());
    }

    #[test]
    fn trivial_torus_is_half_filled() {
        let spec = LatticeSpec::torus(8, 8);
        let m = build_chern_torus_correlation(&spec, &ChernParams::new(3.0, 1.0, 0.0)).unwrap();
        assert!(close(m.trace() / 64.0, 1.0, 1e-12));
        assert!(m.hermiticity_error() < 1e-12);
    }

    #[test]
    fn decoupled_orbitals() {
        let spec = LatticeSpec::torus(6, 6);
        let m = build_chern_torus_correlation(&spec, &ChernParams::new(3.0, 0.0, 0.0)).unwrap();
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                if m.sites()[i].orbital != m.sites()[j].orbital {
                    assert!(m.get(i, j).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn dirac_points_at_zero_mass() {
        let p = ChernParams::new(0.0, 1.0, 0.0);
        let (lo, hi) = p.bands(0.0, PI);
        assert!(lo.abs() < 1e-15 && hi.abs() < 1e-15);
        let (lo, _) = p.bands(PI, 0.0);
        assert!(lo.abs() < 1e-15);
        let (lo, _) = p.bands(0.3, 1.1);
        assert!(lo < -0.1);
    }

    #[test]
    fn cylinder_edge_pair_and_gap() {
        let e = cylinder_spectrum(40, &ChernParams::new(1.0, 1.0, 0.0), PI);
        assert_eq!(e.iter().filter(|x| x.abs() < 1e-3).count(), 2);
        for kx in [0.0, 1.0, PI, 4.0] {
            let e = cylinder_spectrum(40, &ChernParams::new(3.0, 1.0, 0.0), kx);
            assert!(e.iter().all(|x| x.abs() > 0.5));
        }
    }

    #[test]
    fn cylinder_onsite_block_at_zero_momentum() {
        let h = cylinder_hamiltonian(3, &ChernParams::new(0.7, 2.0, 0.1), 0.0);
        assert!((h[(0, 0)] - C64::new(1.7 - 0.1, 0.0)).norm() < 1e-15);
        assert!((h[(1, 1)] - C64::new(-1.7 - 0.1, 0.0)).norm() < 1e-15);
        assert!(h[(0, 1)].norm() < 1e-15);
    }
}
