//! Seeded random Gaussian states for property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::lattice::{CorrelationMatrix, Region};
use crate::linalg::{reassemble, slater_correlation, CMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-random unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `U diag(xi) U^dagger` with `xi` drawn uniformly from `[lo, hi]`.
pub fn random_correlation_in(dim: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Result<CorrelationMatrix> {
    let xi: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..=hi)).collect();
    let u = random_unitary(dim, rng);
    CorrelationMatrix::chain_dense(reassemble(&xi, &u), "random")
}

pub fn random_correlation(dim: usize, rng: &mut impl Rng) -> Result<CorrelationMatrix> {
    random_correlation_in(dim, 0.0, 1.0, rng)
}

/// A random Slater determinant on `total` sites restricted to its first `dim`
/// sites, so the spectrum includes values pinned at 0 and 1 when
/// `dim` is large compared with the complement.
pub fn random_slater_restriction(dim: usize, total: usize, rng: &mut impl Rng) -> Result<CorrelationMatrix> {
    let total = total.max(dim);
    let filled = rng.random_range(0..=total);
    let u = random_unitary(total, rng);
    let occ: Vec<usize> = (0..filled).collect();
    let full = CorrelationMatrix::chain_dense(slater_correlation(&u, &occ), "random-slater")?;
    full.restrict(&Region::interval(0, dim))
}

/// Either kind of random state, chosen with equal probability.
pub fn random_state(dim: usize, rng: &mut impl Rng) -> Result<CorrelationMatrix> {
    if rng.random_bool(0.5) {
        random_correlation(dim, rng)
    } else {
        let extra = rng.random_range(1..=dim);
        random_slater_restriction(dim, dim + extra, rng)
    }
}

/// Average of `M` and its mirror image `J M J`, which is again a valid
/// correlation matrix.
pub fn mirror_symmetrize(m: &CorrelationMatrix) -> Result<CorrelationMatrix> {
    let d = m.to_dense();
    let n = d.nrows();
    let sym = CMatrix::from_fn(n, n, |i, j| 0.5 * (d[(i, j)] + d[(n - 1 - i, n - 1 - j)]));
    CorrelationMatrix::chain_dense(sym, "mirror-symmetric")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::spectral_decompose;

    #[test]
    fn unitary_and_valid() {
        let mut r = rng(7);
        let u = random_unitary(5, &mut r);
        let err = crate::linalg::max_abs_diff(&(u.adjoint() * &u), &CMatrix::identity(5, 5));
        assert!(err < 1e-12);
        for _ in 0..10 {
            let m = random_state(6, &mut r).unwrap();
            let sd = spectral_decompose(&m).unwrap();
            assert!(sd.xi.iter().all(|x| (0.0..=1.0).contains(x)));
        }
        assert_eq!(random_slater_restriction(3, 3, &mut r).unwrap().dim(), 3);
    }

    #[test]
    fn seeded_streams_repeat() {
        let a = random_correlation(4, &mut rng(3)).unwrap().to_dense();
        let b = random_correlation(4, &mut rng(3)).unwrap().to_dense();
        assert_eq!(a, b);
    }
}
