//! Brute-force many-body oracle for tiny lattices.
//!
//! Builds the second-quantized Hamiltonian in the full Fock space, finds its
//! ground state, traces out the complement exactly and diagonalizes rho_A.
//! It shares no code path with the correlation-matrix route.

use crate::error::{Error, Result};
use crate::lattice::{self, LatticeSpec, Occupation, Region};
use crate::linalg::{self, CMatrix, C64};

pub const MAX_FOCK_SITES: usize = 8;

#[derive(Clone, Debug)]
pub struct FockReport {
    /// Von Neumann entropy.
    pub s1: f64,
    /// Renyi entropies for n = 2, 3, 4.
    pub renyi: [f64; 3],
    /// Eigenvalues of rho_A, descending.
    pub spectrum: Vec<f64>,
}

impl FockReport {
    pub fn renyi(&self, n: usize) -> f64 {
        match n {
            1 => self.s1,
            2..=4 => self.renyi[n - 2],
            _ => panic!("the oracle reports n = 1..4"),
        }
    }
}

/// Oracle for a chain lattice spec.
pub fn fock_oracle(spec: &LatticeSpec, region: &Region) -> Result<FockReport> {
    spec.validate()?;
    if spec.dimension != 1 || spec.orbitals != 1 {
        return Err(Error::InvalidLattice(
            "the Fock oracle builds chains only; use fock_oracle_hamiltonian".into(),
        ));
    }
    let h = lattice::chain_hamiltonian(spec.lx, spec.boundary[0]).map(|x| C64::new(x, 0.0));
    let idx = region
        .sites()
        .iter()
        .map(|s| {
            if s.y.is_none() && s.orbital == 0 && s.x < spec.lx {
                Ok(s.x)
            } else {
                Err(Error::InvalidRegion(format!("site {s:?} is not on the chain")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    fock_oracle_hamiltonian(&h, spec.occupation, &idx)
}

/// Oracle for an arbitrary quadratic Hamiltonian `sum_ij h_ij c_i^dagger c_j`.
///
/// A filling fixes the particle number; a chemical potential minimizes
/// `H - mu N` over all sectors. A degenerate many-body ground state is an error.
pub fn fock_oracle_hamiltonian(h: &CMatrix, occupation: Occupation, region: &[usize]) -> Result<FockReport> {
    let l = h.nrows();
    if l > MAX_FOCK_SITES {
        return Err(Error::SizeCap(format!(
            "{l} sites exceed the Fock oracle cap of {MAX_FOCK_SITES}"
        )));
    }
    if region.is_empty() || region.iter().any(|&i| i >= l) {
        return Err(Error::InvalidRegion(
            "region must be a non-empty subset of the sites".into(),
        ));
    }
    let dim = 1usize << l;
    let basis: Vec<usize> = match occupation {
        Occupation::Filling(f) => {
            let n = (f * l as f64 + 1e-9).floor() as u32;
            (0..dim).filter(|s| s.count_ones() == n).collect()
        }
        Occupation::ChemicalPotential(_) => (0..dim).collect(),
    };
    let mu = match occupation {
        Occupation::ChemicalPotential(mu) => mu,
        Occupation::Filling(_) => 0.0,
    };
    let pos: std::collections::HashMap<usize, usize> = basis.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let nb = basis.len();
    let mut hm = CMatrix::zeros(nb, nb);
    for (col, &s) in basis.iter().enumerate() {
        for j in 0..l {
            if s & (1 << j) == 0 {
                continue;
            }
            let sign_j = parity(s & ((1 << j) - 1));
            let s1 = s & !(1 << j);
            for i in 0..l {
                if s1 & (1 << i) != 0 || h[(i, j)] == C64::new(0.0, 0.0) {
                    continue;
                }
                let sign_i = parity(s1 & ((1 << i) - 1));
                let t = s1 | (1 << i);
                let row = pos[&t];
                hm[(row, col)] += h[(i, j)] * (sign_i * sign_j);
            }
            // -mu N, one term per occupied mode
            hm[(col, col)] -= C64::new(mu, 0.0);
        }
    }
    let (energies, vectors) = linalg::eigh(&hm);
    if nb > 1 && (energies[1] - energies[0]).abs() < 1e-9 {
        return Err(Error::DegenerateFermiLevel {
            below: 0,
            above: 1,
            energy: energies[0],
        });
    }
    let ground: Vec<C64> = vectors.column(0).iter().copied().collect();

    // Reorder modes so that A comes first; fermionic sign from the permutation.
    let in_a: Vec<bool> = (0..l).map(|i| region.contains(&i)).collect();
    let rest: Vec<usize> = (0..l).filter(|i| !in_a[*i]).collect();
    let na = region.len();
    let nrest = rest.len();
    let mut psi = CMatrix::zeros(1 << na, 1 << nrest);
    for (k, &s) in basis.iter().enumerate() {
        let amp = ground[k];
        if amp.norm() == 0.0 {
            continue;
        }
        let mut a_bits = 0usize;
        for (p, &site) in region.iter().enumerate() {
            if s & (1 << site) != 0 {
                a_bits |= 1 << p;
            }
        }
        let mut b_bits = 0usize;
        for (p, &site) in rest.iter().enumerate() {
            if s & (1 << site) != 0 {
                b_bits |= 1 << p;
            }
        }
        psi[(a_bits, b_bits)] += amp * reorder_sign(s, region, &rest);
    }
    // Amplitudes below 1e-150 would only feed subnormal products into the
    // eigensolver; they cannot affect the entropies.
    psi.iter_mut()
        .filter(|z| z.norm() < 1e-150)
        .for_each(|z| *z = C64::new(0.0, 0.0));
    // rho_A = psi psi^dagger shares its nonzero spectrum with psi^dagger psi;
    // diagonalize whichever is smaller and pad with zeros.
    let gram = if na <= nrest {
        &psi * psi.adjoint()
    } else {
        psi.adjoint() * &psi
    };
    let (mut p, _) = linalg::eigh(&gram);
    p.reverse();
    p.resize(1 << na, 0.0);
    let clamped: Vec<f64> = p.iter().map(|&x| x.max(0.0)).collect();
    let s1 = -clamped.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>();
    let renyi = [2.0, 3.0, 4.0].map(|n: f64| clamped.iter().map(|x| x.powf(n)).sum::<f64>().ln() / (1.0 - n));
    Ok(FockReport { s1, renyi, spectrum: p })
}

fn parity(bits: usize) -> f64 {
    if bits.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sign of reordering the occupied creation operators of `state` from site
/// order into (A in region order, then the rest in site order).
fn reorder_sign(state: usize, region: &[usize], rest: &[usize]) -> f64 {
    let order: Vec<usize> = region
        .iter()
        .chain(rest.iter())
        .filter(|&&s| state & (1 << s) != 0)
        .copied()
        .collect();
    let mut inversions = 0usize;
    for a in 0..order.len() {
        for b in a + 1..order.len() {
            if order[a] > order[b] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Many-body spectrum implied by single-particle occupations: all products of
/// `xi` or `1 - xi`, descending.
pub fn product_spectrum(xi: &[f64]) -> Vec<f64> {
    let mut out = vec![1.0];
    for &x in xi {
        out = out.iter().flat_map(|&p| [p * x, p * (1.0 - x)]).collect();
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    #[test]
    fn bell_pair() {
        let spec = LatticeSpec::chain(2, Boundary::Open, Occupation::Filling(0.5));
        let r = fock_oracle(&spec, &Region::interval(1, 1)).unwrap();
        assert!((r.s1 - 2f64.ln()).abs() < 1e-12);
        for n in 2..=4 {
            assert!((r.renyi(n) - 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_has_no_entropy() {
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            [-1.0, 1.0, -2.0, 0.5].iter().map(|&x| C64::new(x, 0.0)).collect(),
        ));
        let r = fock_oracle_hamiltonian(&h, Occupation::ChemicalPotential(0.0), &[0, 3]).unwrap();
        assert!(r.s1.abs() < 1e-12 && r.renyi.iter().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn refuses_large_systems() {
        let spec = LatticeSpec::chain(9, Boundary::Open, Occupation::Filling(0.5));
        assert!(matches!(
            fock_oracle(&spec, &Region::interval(0, 2)),
            Err(Error::SizeCap(_))
        ));
    }

    #[test]
    fn product_spectrum_sums_to_one() {
        let p = product_spectrum(&[0.2, 0.7, 0.5]);
        assert_eq!(p.len(), 8);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
