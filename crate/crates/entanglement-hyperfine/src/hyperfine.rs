//! Cumulant ("hyperfine") decomposition of Renyi contours.
//!
//! `s_n(j) = sum_k beta_k(n) C_k(j)` over even `k`, where `C_k(j)` are the
//! site-resolved particle-number cumulants of the region. The series converges
//! for integer `n >= 2`; for `n = 1` and non-integer `n` it is only asymptotic.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{self, spectral_decompose, ContourField, FieldKind, SpectralData};
use crate::lattice::{self, ChernParams, CorrelationMatrix, LatticeSpec, Region, SiteIndex};
use crate::linalg::{self, C64};
use crate::poly::{binomial, factorial, rat, rat_from_f64, rat_to_f64, RationalPoly};

/// Bernoulli numbers `B_0..=B_m` with `B_1 = -1/2`.
pub fn bernoulli_numbers(m: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(m + 1);
    b.push(BigRational::one());
    for n in 1..=m {
        // sum_{k=0}^{n} C(n+1, k) B_k = 0
        let mut acc = BigRational::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += BigRational::from_integer(binomial(n + 1, k)) * bk;
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(n + 1)));
    }
    b
}

/// Bernoulli polynomial `B_m(x) = sum_k C(m, k) B_k x^{m-k}`.
pub fn bernoulli_poly(m: usize) -> RationalPoly {
    let b = bernoulli_numbers(m);
    let mut coeffs = vec![BigRational::zero(); m + 1];
    for (k, bk) in b.iter().enumerate() {
        coeffs[m - k] = BigRational::from_integer(binomial(m, k)) * bk;
    }
    RationalPoly::new(coeffs)
}

/// `zeta(-k, a) = -B_{k+1}(a) / (k + 1)`, exact for rational `a`.
pub fn hurwitz_zeta_negint_exact(k: usize, a: &BigRational) -> BigRational {
    -bernoulli_poly(k + 1).eval(a) / BigRational::from_integer(BigInt::from(k + 1))
}

pub fn hurwitz_zeta_negint(k: usize, a: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    Ok(rat_to_f64(&hurwitz_zeta_negint_exact(k, &rat_from_f64(a))))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CumulantCoefficient {
    pub k: usize,
    pub n: f64,
    pub value: f64,
    /// True when `k` is odd and the coefficient vanishes identically.
    pub odd_vanishing: bool,
}

/// `beta_k(n) = (2 / (n - 1)) (1 / k!) (2 pi i / n)^k zeta(-k, (n + 1) / 2)`,
/// with the closed-form limit `-(2 pi i)^k B_k / k!` at `n = 1`.
pub fn beta_coefficient(k: usize, n: f64) -> Result<CumulantCoefficient> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Domain(format!("Renyi order must be positive, got {n}")));
    }
    if k == 0 {
        return Err(Error::Domain("cumulant order starts at 1".into()));
    }
    if k % 2 == 1 {
        return Ok(CumulantCoefficient {
            k,
            n,
            value: 0.0,
            odd_vanishing: true,
        });
    }
    // i^k = (-1)^{k/2} for even k
    let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let kfact = rat_to_f64(&BigRational::from_integer(factorial(k)));
    let value = if n == 1.0 {
        let bk = rat_to_f64(&bernoulli_numbers(k)[k]);
        -sign * (2.0 * PI).powi(k as i32) * bk / kfact
    } else {
        // Keep the rational factors exact and apply pi^k once at the end.
        let nr = rat_from_f64(n);
        let a = (&nr + BigRational::one()) / rat(2, 1);
        let zeta = hurwitz_zeta_negint_exact(k, &a);
        let pow = (0..k).fold(BigRational::one(), |acc, _| acc * (rat(2, 1) / &nr));
        let r = rat(2, 1) / (&nr - BigRational::one()) * pow * zeta / BigRational::from_integer(factorial(k));
        sign * rat_to_f64(&r) * PI.powi(k as i32)
    };
    Ok(CumulantCoefficient {
        k,
        n,
        value,
        odd_vanishing: false,
    })
}

pub fn beta(k: usize, n: f64) -> f64 {
    beta_coefficient(k, n).map(|c| c.value).unwrap_or(f64::NAN)
}

/// Per-mode cumulant polynomial: `kappa_1 = x`, `kappa_{k+1} = x (1 - x) kappa_k'`.
pub fn kappa_polynomial(k: usize) -> Result<RationalPoly> {
    if k == 0 {
        return Err(Error::Domain("cumulant order starts at 1".into()));
    }
    Ok(kappa_table(k)[k - 1].clone())
}

const KAPPA_CACHE: usize = 40;

fn kappa_table(k: usize) -> Vec<RationalPoly> {
    static CACHE: OnceLock<Vec<RationalPoly>> = OnceLock::new();
    let build = |upto: usize| {
        let x_one_minus_x = RationalPoly::new(vec![rat(0, 1), rat(1, 1), rat(-1, 1)]);
        let mut polys = vec![RationalPoly::new(vec![rat(0, 1), rat(1, 1)])];
        for _ in 1..upto {
            let next = x_one_minus_x.mul(&polys.last().unwrap().derivative());
            polys.push(next);
        }
        polys
    };
    if k <= KAPPA_CACHE {
        CACHE.get_or_init(|| build(KAPPA_CACHE)).clone()
    } else {
        build(k)
    }
}

fn kappa_coeffs_f64(k: usize) -> std::borrow::Cow<'static, [f64]> {
    static CACHE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    if k <= KAPPA_CACHE {
        std::borrow::Cow::Borrowed(
            &CACHE.get_or_init(|| kappa_table(KAPPA_CACHE).iter().map(|p| p.to_f64()).collect())[k - 1],
        )
    } else {
        std::borrow::Cow::Owned(kappa_table(k)[k - 1].to_f64())
    }
}

/// `kappa_k(xi)` in floating point, using `kappa_k(1 - x) = (-1)^k kappa_k(x)`
/// for `k >= 2` to evaluate on the better-conditioned half.
pub fn kappa(k: usize, xi: f64) -> f64 {
    let c = kappa_coeffs_f64(k);
    let horner = |x: f64| c.iter().rev().fold(0.0, |acc, &a| acc * x + a);
    if k >= 2 && xi > 0.5 {
        let s = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        s * horner(1.0 - xi)
    } else {
        horner(xi)
    }
}

/// Site-resolved cumulant `C_k(j)` with its region total.
#[derive(Clone, Debug)]
pub struct CumulantField {
    pub sites: Vec<SiteIndex>,
    pub values: Vec<f64>,
    pub k: usize,
    pub total: f64,
}

impl CumulantField {
    pub fn as_contour(&self) -> ContourField {
        ContourField {
            sites: self.sites.clone(),
            values: self.values.clone(),
            n: None,
            kind: FieldKind::Cumulant(self.k),
        }
    }
}

/// `C_k(j) = sum_l |psi_l(j)|^2 kappa_k(xi_l)`.
pub fn cumulant_density_field(sd: &SpectralData, k: usize) -> Result<CumulantField> {
    if k == 0 {
        return Err(Error::Domain("cumulant order starts at 1".into()));
    }
    let values = sd.mode_sum(|x| kappa(k, x));
    let total = sd.xi.iter().map(|&x| kappa(k, x)).sum();
    Ok(CumulantField {
        sites: sd.sites.clone(),
        values,
        k,
        total,
    })
}

/// `C_2(j) = sum_i <n_i n_j>_c = M_jj - sum_i |M_ij|^2` from Wick's theorem.
pub fn c2_double_sum(m: &CorrelationMatrix) -> Vec<f64> {
    let n = m.dim();
    (0..n)
        .map(|j| m.get(j, j).re - (0..n).map(|i| m.get(i, j).norm_sqr()).sum::<f64>())
        .collect()
}

/// `h_{n;k}(j) = beta_k(n) C_k(j)`.
pub fn hyperfine_field(sd: &SpectralData, n: f64, k: usize) -> Result<ContourField> {
    if k == 0 || k % 2 == 1 {
        return Err(Error::Domain(format!("hyperfine order must be even, got {k}")));
    }
    let b = beta_coefficient(k, n)?.value;
    let c = cumulant_density_field(sd, k)?;
    Ok(ContourField {
        sites: c.sites,
        values: c.values.iter().map(|v| b * v).collect(),
        n: Some(n),
        kind: FieldKind::Hyperfine(k),
    })
}

/// Partial sum `sum_{k = 2, 4, ..., kmax} h_{n;k}(j)`.
pub fn truncated_contour(sd: &SpectralData, n: f64, kmax: usize) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; sd.len()];
    for k in (2..=kmax).step_by(2) {
        let h = hyperfine_field(sd, n, k)?;
        for (a, v) in acc.iter_mut().zip(&h.values) {
            *a += v;
        }
    }
    Ok(acc)
}

/// Least-squares inversion of `s_n(j) = sum_k beta_k(n) C_k(j)` for one site.
#[derive(Clone, Debug, Serialize)]
pub struct ReconstructionSystem {
    /// Rows n = 1..N, columns k = 2, 4, ..., 2N.
    pub b: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub solution: Vec<f64>,
    pub residual: f64,
    pub condition: f64,
    pub ill_conditioned: bool,
}

pub const RECON_CONDITION_LIMIT: f64 = 1e12;

pub fn cumulant_matrix(size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |r, c| beta(2 * (c + 1), (r + 1) as f64))
}

/// Solve for `C_2(j), ..., C_{2N}(j)` from `s_1(j), ..., s_N(j)`.
pub fn reconstruct_cumulants(contour_values: &[f64]) -> Result<ReconstructionSystem> {
    let size = contour_values.len();
    if size == 0 {
        return Err(Error::Domain("need at least one contour value".into()));
    }
    let b = cumulant_matrix(size);
    let rhs = DVector::from_column_slice(contour_values);
    let svd = b.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let x = svd.solve(&rhs, 0.0).map_err(|e| Error::Conditioning(e.to_string()))?;
    let residual = (&b * &x - &rhs).norm();
    Ok(ReconstructionSystem {
        b: (0..size).map(|r| b.row(r).iter().copied().collect()).collect(),
        rhs: contour_values.to_vec(),
        solution: x.iter().copied().collect(),
        residual,
        condition,
        ill_conditioned: condition > RECON_CONDITION_LIMIT,
    })
}

/// Reconstruct at position `j` from contour fields for n = 1..N.
pub fn reconstruct_from_fields(contours: &[ContourField], j: usize) -> Result<ReconstructionSystem> {
    for (i, c) in contours.iter().enumerate() {
        if c.n != Some((i + 1) as f64) {
            return Err(Error::Domain("contours must be ordered n = 1, 2, ..., N".into()));
        }
        if c.sites != contours[0].sites {
            return Err(Error::Domain("contours must share one site set".into()));
        }
    }
    reconstruct_cumulants(&contours.iter().map(|c| c.values[j]).collect::<Vec<_>>())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MutualInformation {
    pub exact: f64,
    pub hyperfine: f64,
    pub deviation: f64,
}

/// Exact mutual information against `2 (S(A1) - sum_{i in A1} h_{1;2}(i))`,
/// with the field taken over `A1 u A2`.
pub fn mutual_information_pair(m: &CorrelationMatrix, a1: &Region, a2: &Region) -> Result<MutualInformation> {
    if !a1.is_disjoint(a2) {
        return Err(Error::InvalidRegion("regions must be disjoint".into()));
    }
    let union = a1.union(a2)?;
    let s =
        |r: &Region| -> Result<f64> { Ok(gaussian::entropy(&spectral_decompose(&m.restrict(r)?)?, 1.0, false)?.value) };
    let s1 = s(a1)?;
    let exact = s1 + s(a2)? - s(&union)?;
    let h = hyperfine_field(&spectral_decompose(&m.restrict(&union)?)?, 1.0, 2)?;
    let h_a1: f64 = h.values[..a1.len()].iter().sum();
    let hyperfine = 2.0 * (s1 - h_a1);
    Ok(MutualInformation {
        exact,
        hyperfine,
        deviation: hyperfine - exact,
    })
}

/// Lattice Chern number of the occupied band from plaquette Berry fluxes.
pub fn chern_number(params: &ChernParams, grid: usize) -> Result<i64> {
    if grid < 20 {
        return Err(Error::Domain("grid must be at least 20".into()));
    }
    let gap_tol = 1e-8;
    let mut states = Vec::with_capacity(grid * grid);
    for jy in 0..grid {
        for jx in 0..grid {
            let kx = 2.0 * PI * jx as f64 / grid as f64;
            let ky = 2.0 * PI * jy as f64 / grid as f64;
            let (lo, hi) = params.bands(kx, ky);
            if lo > -gap_tol || hi < gap_tol {
                return Err(Error::Gapless(format!(
                    "chemical potential not inside the gap at k = ({kx:.4}, {ky:.4}); bands {lo:.3e}, {hi:.3e}"
                )));
            }
            let d = params.bloch_vector(kx, ky);
            let i = C64::i();
            let h = linalg::CMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(d[2], 0.0),
                    d[0] - i * d[1],
                    d[0] + i * d[1],
                    C64::new(-d[2], 0.0),
                ],
            );
            let (_, v) = linalg::eigh(&h);
            states.push([v[(0, 0)], v[(1, 0)]]);
        }
    }
    let at = |x: usize, y: usize| states[(y % grid) * grid + (x % grid)];
    let link = |a: [C64; 2], b: [C64; 2]| {
        let z = a[0].conj() * b[0] + a[1].conj() * b[1];
        z / z.norm()
    };
    let mut flux = 0.0;
    for y in 0..grid {
        for x in 0..grid {
            let u1 = link(at(x, y), at(x + 1, y));
            let u2 = link(at(x + 1, y), at(x + 1, y + 1));
            let u3 = link(at(x, y + 1), at(x + 1, y + 1));
            let u4 = link(at(x, y), at(x, y + 1));
            flux += (u1 * u2 * u3.conj() * u4.conj()).arg();
        }
    }
    let c = flux / (2.0 * PI);
    let rounded = c.round();
    if (c - rounded).abs() > 1e-6 {
        return Err(Error::Inconsistent(format!("plaquette sum {c} is not an integer")));
    }
    Ok(rounded as i64)
}

/// Boundary hyperfine values on the strip across a sweep of masses.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeProfile {
    pub kx: f64,
    pub n: f64,
    pub ks: Vec<usize>,
    pub masses: Vec<f64>,
    /// `raw[k_index][m_index]`.
    pub raw: Vec<Vec<f64>>,
    /// Each row divided by its largest-magnitude entry over the mass sweep.
    pub normalized: Vec<Vec<f64>>,
}

/// Number of rows next to the cut summed into the boundary value by default:
/// the row of cells touching the cut.
pub const EDGE_DEPTH: usize = 1;

/// Sum of `h_{n;k}` over the `depth` rows of the lower half-strip that touch
/// the cut, with both orbitals, for each mass in `masses`.
pub fn edge_scaling_profile(
    ly: usize,
    lambda: f64,
    masses: &[f64],
    kx: f64,
    n: f64,
    ks: &[usize],
    depth: usize,
) -> Result<EdgeProfile> {
    let half = ly / 2;
    if depth == 0 || depth > half {
        return Err(Error::Domain(format!("boundary depth must be in 1..={half}")));
    }
    let region = Region::rectangle(0, 0, 1, half, 2);
    let boundary: Vec<usize> = (2 * (half - depth)..2 * half).collect();
    let spec = LatticeSpec::cylinder(ly);
    let columns = masses
        .par_iter()
        .map(|&m| -> Result<Vec<f64>> {
            let params = ChernParams::new(m, lambda, 0.0);
            let full = lattice::build_chern_cylinder_correlation(&spec, &params, kx)?;
            let sd = spectral_decompose(&full.restrict(&region)?)?;
            ks.iter()
                .map(|&k| Ok(hyperfine_field(&sd, n, k)?.sum_over(&boundary)))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<Vec<f64>> = (0..ks.len())
        .map(|ki| columns.iter().map(|c| c[ki]).collect())
        .collect();
    let normalized = raw
        .iter()
        .map(|row| {
            // Divide by the entry of largest magnitude so the peak is +1
            // whatever its sign.
            let peak = row
                .iter()
                .copied()
                .fold(0.0, |p: f64, v| if v.abs() > p.abs() { v } else { p });
            row.iter().map(|v| v / peak).collect()
        })
        .collect();
    Ok(EdgeProfile {
        kx,
        n,
        ks: ks.to_vec(),
        masses: masses.to_vec(),
        raw,
        normalized,
    })
}

impl EdgeProfile {
    /// Largest pairwise difference of normalized curves over masses in the
    /// open window `(lo, hi)`, and the smallest normalized value there.
    pub fn collapse_stats(&self, lo: f64, hi: f64) -> (f64, f64) {
        let sel: Vec<usize> = self
            .masses
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > lo + 1e-9 && m < hi - 1e-9)
            .map(|(i, _)| i)
            .collect();
        let mut spread: f64 = 0.0;
        let mut min = f64::INFINITY;
        for a in 0..self.ks.len() {
            for &i in &sel {
                min = min.min(self.normalized[a][i]);
            }
            for b in a + 1..self.ks.len() {
                for &i in &sel {
                    spread = spread.max((self.normalized[a][i] - self.normalized[b][i]).abs());
                }
            }
        }
        (spread, min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn bernoulli_values() {
        let b3 = bernoulli_poly(3);
        assert_eq!(b3, RationalPoly::new(vec![rat(0, 1), rat(1, 2), rat(-3, 2), rat(1, 1)]));
        assert_eq!(b3.eval(&rat(3, 2)), rat(3, 4));
        assert_eq!(bernoulli_poly(5).eval(&rat(3, 2)), rat(5, 16));
        assert_eq!(bernoulli_poly(0), RationalPoly::new(vec![rat(1, 1)]));
        for m in 2..12 {
            let p = bernoulli_poly(m);
            assert_eq!(p.eval(&rat(1, 1)), p.eval(&rat(0, 1)));
        }
    }

    #[test]
    fn zeta_values() {
        assert_eq!(hurwitz_zeta_negint_exact(2, &rat(3, 2)), rat(-1, 4));
        assert_eq!(hurwitz_zeta_negint_exact(4, &rat(3, 2)), rat(-1, 16));
        assert_eq!(hurwitz_zeta_negint_exact(1, &rat(1, 1)), rat(-1, 12));
    }

    #[test]
    fn beta_values() {
        assert!((beta(2, 2.0) - PI * PI / 4.0).abs() < 1e-14);
        assert!((beta(4, 2.0) + PI.powi(4) / 192.0).abs() < 1e-14);
        assert!((beta(2, 1.0) - PI * PI / 3.0).abs() < 1e-14);
        let c = beta_coefficient(3, 2.0).unwrap();
        assert!(c.odd_vanishing && c.value == 0.0);
    }

    #[test]
    fn kappa_values() {
        let k2 = kappa_polynomial(2).unwrap();
        assert_eq!(k2, RationalPoly::new(vec![rat(0, 1), rat(1, 1), rat(-1, 1)]));
        let k3 = kappa_polynomial(3).unwrap();
        // x(1-x)(1-2x) = x - 3x^2 + 2x^3
        assert_eq!(k3, RationalPoly::new(vec![rat(0, 1), rat(1, 1), rat(-3, 1), rat(2, 1)]));
        for k in (3..15).step_by(2) {
            assert!(kappa(k, 0.5).abs() < 1e-13);
        }
        assert!((kappa(4, 0.5) + 0.125).abs() < 1e-15);
    }

    #[test]
    fn hyperfine_needs_even_order() {
        let m = CorrelationMatrix::chain_dense(linalg::CMatrix::from_element(1, 1, C64::new(0.5, 0.0)), "t").unwrap();
        let sd = spectral_decompose(&m).unwrap();
        assert!(hyperfine_field(&sd, 2.0, 3).is_err());
        assert!((hyperfine_field(&sd, 2.0, 2).unwrap().values[0] - PI * PI / 16.0).abs() < 1e-14);
    }

    #[test]
    fn single_site_reconstruction() {
        let r = reconstruct_cumulants(&[0.4]).unwrap();
        assert!((r.solution[0] - 0.4 / beta(2, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn chern_numbers() {
        assert_eq!(chern_number(&ChernParams::new(3.0, 1.0, 0.0), 24).unwrap(), 0);
        let c1 = chern_number(&ChernParams::new(1.0, 1.0, 0.0), 24).unwrap();
        let cm1 = chern_number(&ChernParams::new(-1.0, 1.0, 0.0), 24).unwrap();
        assert_eq!(c1.abs(), 1);
        assert_eq!(c1, -cm1);
        assert!(matches!(
            chern_number(&ChernParams::new(0.0, 1.0, 0.0), 24),
            Err(Error::Gapless(_))
        ));
    }
}
