//! Many-body entanglement spectrum from the traces `T_n = tr rho_A^n`.
//!
//! Newton's identities turn the traces into the characteristic polynomial of
//! rho_A, whose roots are the spectrum. Everything up to the polynomial
//! coefficients is done in exact rational arithmetic, because the cancellations
//! in the elementary symmetric functions would otherwise wipe out the small
//! eigenvalues.

use nalgebra::DMatrix;
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::SpectralData;
use crate::poly::factorial;

pub const MAX_MODES: usize = 12;
pub const MAX_DIMENSION: usize = 16;
pub const CLUSTER_TOL: f64 = 1e-5;
pub const ROOT_TOL: f64 = 1e-6;

/// Exact `m / 2^e`. Every `f64` is one, and sums and products stay dyadic, so
/// the trace and determinant arithmetic needs no gcd reductions.
#[derive(Clone, Debug, PartialEq)]
struct Dyadic {
    m: BigInt,
    e: u64,
}

impl Dyadic {
    fn from_int(m: BigInt) -> Dyadic {
        Dyadic { m, e: 0 }
    }

    fn from_f64(x: f64) -> Dyadic {
        let (mant, exp, sign) = Float::integer_decode(x);
        let m = BigInt::from(mant) * BigInt::from(sign);
        if exp >= 0 {
            Dyadic {
                m: m << exp as usize,
                e: 0,
            }
            .normalized()
        } else {
            Dyadic { m, e: (-exp) as u64 }.normalized()
        }
    }

    fn normalized(mut self) -> Dyadic {
        let tz = self.m.trailing_zeros().unwrap_or(0).min(self.e);
        if tz > 0 {
            self.m >>= tz as usize;
            self.e -= tz;
        }
        self
    }

    fn mul(&self, o: &Dyadic) -> Dyadic {
        Dyadic {
            m: &self.m * &o.m,
            e: self.e + o.e,
        }
    }

    fn add(&self, o: &Dyadic) -> Dyadic {
        let e = self.e.max(o.e);
        Dyadic {
            m: (&self.m << (e - self.e) as usize) + (&o.m << (e - o.e) as usize),
            e,
        }
        .normalized()
    }

    fn neg(&self) -> Dyadic {
        Dyadic { m: -&self.m, e: self.e }
    }

    /// Numerator over the common denominator `2^e`, `e >= self.e`.
    fn numerator_at(&self, e: u64) -> BigInt {
        &self.m << (e - self.e) as usize
    }

    fn to_f64(&self) -> f64 {
        // Keep the top 64 bits and apply the binary exponent in two steps so
        // that neither factor overflows.
        let drop = self.m.bits().saturating_sub(64);
        let top = (&self.m >> drop as usize).to_f64().unwrap_or(0.0);
        let k = drop as i64 - self.e as i64;
        let half = (k / 2) as i32;
        top * 2f64.powi(half) * 2f64.powi(k as i32 - half)
    }
}

/// `T_1 = 1, T_2, ..., T_D`.
#[derive(Clone, Debug)]
pub struct TraceSequence {
    pub values: Vec<f64>,
    exact: Vec<Dyadic>,
}

impl TraceSequence {
    /// Traces given as floating-point numbers (taken as exact dyadics).
    pub fn from_values(values: &[f64]) -> Result<TraceSequence> {
        if values.is_empty() {
            return Err(Error::Domain("need at least T_1".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("traces must be finite".into()));
        }
        let mut exact: Vec<Dyadic> = values.iter().map(|&v| Dyadic::from_f64(v)).collect();
        exact[0] = Dyadic::from_int(BigInt::one());
        let t = TraceSequence {
            values: exact.iter().map(Dyadic::to_f64).collect(),
            exact,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.values[0] != 1.0 {
            return Err(Error::Domain("T_1 must equal 1".into()));
        }
        for w in self.values.windows(2) {
            if !(w[1] > 0.0 && w[1] <= w[0] * (1.0 + 1e-12)) {
                return Err(Error::Domain(format!(
                    "traces must satisfy 0 < T_(n+1) <= T_n, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

/// `T_n = prod_l (xi_l^n + (1 - xi_l)^n)` for `n = 1..D`, with
/// `D = min(2^N_A, d_max)`.
pub fn traces_from_spectrum(sd: &SpectralData, d_max: usize) -> Result<TraceSequence> {
    if sd.len() > MAX_MODES {
        return Err(Error::SizeCap(format!(
            "{} modes exceed the cap of {MAX_MODES}",
            sd.len()
        )));
    }
    let d = (1usize << sd.len()).min(d_max.max(1));
    let one = Dyadic::from_int(BigInt::one());
    let xs: Vec<(Dyadic, Dyadic)> = sd
        .xi
        .iter()
        .map(|&x| {
            let r = Dyadic::from_f64(x);
            let c = one.add(&r.neg());
            (r, c)
        })
        .collect();
    let mut exact = Vec::with_capacity(d);
    let mut powers: Vec<(Dyadic, Dyadic)> = xs.iter().map(|_| (one.clone(), one.clone())).collect();
    for _ in 1..=d {
        let mut t = one.clone();
        for (p, x) in powers.iter_mut().zip(&xs) {
            p.0 = p.0.mul(&x.0);
            p.1 = p.1.mul(&x.1);
            t = t.mul(&p.0.add(&p.1));
        }
        exact.push(t);
    }
    Ok(TraceSequence {
        values: exact.iter().map(Dyadic::to_f64).collect(),
        exact,
    })
}

#[derive(Clone, Debug)]
pub struct NewtonMatrix {
    /// The `D x D` matrix with rows `[T_n, T_(n-1), ..., T_1, n]`.
    pub u: DMatrix<f64>,
    /// `det U_0 = 1, det U_1, ..., det U_D`.
    pub dets: Vec<f64>,
    exact_dets: Vec<Dyadic>,
}

impl NewtonMatrix {
    /// `D! 2^E P(x)` as integers, highest power first, where
    /// `a_n = (-1)^n det U_n / n!` and `2^E` clears every denominator.
    fn integer_coefficients(&self) -> Vec<BigInt> {
        let d = self.exact_dets.len() - 1;
        let e = self.exact_dets.iter().map(|x| x.e).max().unwrap_or(0);
        let d_fact = factorial(d);
        self.exact_dets
            .iter()
            .enumerate()
            .map(|(n, det)| {
                let c = det.numerator_at(e) * (&d_fact / factorial(n));
                if n % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .collect()
    }

    /// Characteristic-polynomial coefficients `a_n`, highest power first.
    pub fn coefficients(&self) -> Vec<f64> {
        self.exact_dets
            .iter()
            .enumerate()
            .map(|(n, det)| {
                let c = det.to_f64() / factorial(n).to_f64().unwrap_or(f64::INFINITY);
                if n % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .collect()
    }
}

pub fn newton_matrix(t: &TraceSequence) -> NewtonMatrix {
    let d = t.dimension();
    let u = DMatrix::from_fn(d, d, |r, c| {
        if c <= r {
            t.values[r - c]
        } else if c == r + 1 {
            (r + 1) as f64
        } else {
            0.0
        }
    });
    // Leading minors of a lower Hessenberg matrix (1-based):
    // det U_n = sum_i (-1)^(n-i) U_(n,i) prod_(j=i)^(n-1) U_(j,j+1) det U_(i-1)
    let mut dets: Vec<Dyadic> = vec![Dyadic::from_int(BigInt::one())];
    for n in 1..=d {
        let mut acc = Dyadic::from_int(BigInt::zero());
        let mut superdiag = BigInt::one();
        for i in (1..=n).rev() {
            if i < n {
                superdiag *= BigInt::from(i);
            }
            let term = t.exact[n - i]
                .mul(&dets[i - 1])
                .mul(&Dyadic::from_int(superdiag.clone()));
            acc = if (n - i) % 2 == 0 {
                acc.add(&term)
            } else {
                acc.add(&term.neg())
            };
        }
        dets.push(acc);
    }
    NewtonMatrix {
        u,
        dets: dets.iter().map(Dyadic::to_f64).collect(),
        exact_dets: dets,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReconstruction {
    /// Eigenvalues of rho_A, descending, with multiplicity.
    pub roots: Vec<f64>,
    /// Groups of roots closer than the clustering tolerance: (mean, count).
    pub clusters: Vec<(f64, usize)>,
    /// Largest `|P(root)|` relative to the coefficient scale.
    pub residual: f64,
}

/// Roots of `P(x) = sum_n (-1)^n / n! det U_n x^(D-n)`.
///
/// All roots of a valid `P` are real, so they are isolated exactly: the
/// rational coefficients are scaled to integers and `[-2^-20, 2 - 2^-20]` is
/// bisected with Descartes' rule of signs. For a real-rooted polynomial the
/// sign-variation count on a subinterval equals the number of roots in it,
/// so clusters of any multiplicity are resolved down to `2^-ROOT_DEPTH`.
/// Fewer than `D` real roots in the window means complex roots.
pub fn reconstruct_spectrum(t: &TraceSequence) -> Result<SpectrumReconstruction> {
    t.validate()?;
    let d = t.dimension();
    if d > MAX_DIMENSION {
        return Err(Error::SizeCap(format!("dimension {d} exceeds {MAX_DIMENSION}")));
    }
    let nm = newton_matrix(t);
    let coeffs = nm.coefficients();
    let found = isolate_roots(&window_polynomial(&nm.integer_coefficients()));
    let count: usize = found.iter().map(|r| r.1).sum();
    if count < d {
        return Err(Error::Conditioning(format!(
            "only {count} of {d} roots are real and inside [{WINDOW_LO:e}, {}]; the traces are not those of a density matrix",
            WINDOW_LO + WINDOW_WIDTH
        )));
    }
    let mut real: Vec<f64> = found.iter().flat_map(|&(x, m)| std::iter::repeat_n(x, m)).collect();
    real.sort_by(|a, b| b.total_cmp(a));
    let scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
    let mut residual: f64 = 0.0;
    for &x in &real {
        if !(-ROOT_TOL..=1.0 + ROOT_TOL).contains(&x) {
            return Err(Error::Conditioning(format!("root {x} outside [0, 1]")));
        }
        residual = residual.max(horner(&coeffs, x).abs() / scale);
    }
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    let mut i = 0;
    while i < real.len() {
        let mut j = i + 1;
        while j < real.len() && real[j - 1] - real[j] <= CLUSTER_TOL {
            j += 1;
        }
        clusters.push((real[i..j].iter().sum::<f64>() / (j - i) as f64, j - i));
        i = j;
    }
    Ok(SpectrumReconstruction {
        roots: real,
        clusters,
        residual,
    })
}

/// The window is `[WINDOW_LO, WINDOW_LO + WINDOW_WIDTH]` with
/// `WINDOW_LO = -2^-WINDOW_SHIFT` and width 2.
const WINDOW_SHIFT: usize = 20;
const WINDOW_LO: f64 = -1.0 / (1u64 << WINDOW_SHIFT) as f64;
const WINDOW_WIDTH: f64 = 2.0;
/// Bisection depth; the window width is 2, so roots are located to 2^-56.
const ROOT_DEPTH: u32 = 57;

/// `P(WINDOW_LO + 2 y)` as primitive integer coefficients in `y`, lowest
/// power first, from integer coefficients of `P` (highest first).
fn window_polynomial(highest_first: &[BigInt]) -> Vec<BigInt> {
    // With x = u / 2^s and u = -1 + 2^(s+1) y:
    // 2^(s D) P(u / 2^s) = sum_j c_j 2^(s (D - j)) u^j.
    let s = WINDOW_SHIFT;
    let d = highest_first.len() - 1;
    let mut q: Vec<BigInt> = highest_first
        .iter()
        .rev()
        .enumerate()
        .map(|(j, c)| c << (s * (d - j)))
        .collect();
    shift_by_unit(&mut q, -1);
    for (i, c) in q.iter_mut().enumerate() {
        *c <<= (s + 1) * i;
    }
    primitive(q)
}

fn primitive(mut q: Vec<BigInt>) -> Vec<BigInt> {
    let g = q.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && !g.is_one() {
        for c in q.iter_mut() {
            *c /= &g;
        }
    }
    q
}

/// `q(y + step)` in place for `step = +-1`, lowest power first.
fn shift_by_unit(q: &mut [BigInt], step: i8) {
    let n = q.len() - 1;
    for i in 0..n {
        for j in (i..n).rev() {
            let next = q[j + 1].clone();
            if step > 0 {
                q[j] += next;
            } else {
                q[j] -= next;
            }
        }
    }
}

fn shift_by_one(q: &mut [BigInt]) {
    shift_by_unit(q, 1);
}

/// Sign changes of `(1 + y)^n q(1 / (1 + y))`: the number of roots of `q` in
/// `(0, 1)` when all roots are real.
fn variations(q: &[BigInt]) -> usize {
    let mut m: Vec<BigInt> = q.iter().rev().cloned().collect();
    shift_by_one(&mut m);
    let signs: Vec<bool> = m.iter().filter(|c| !c.is_zero()).map(|c| c.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Strip `m` roots at `y = 0`, returning `m`.
fn strip_zero_roots(q: &mut Vec<BigInt>) -> usize {
    let m = q.iter().take_while(|c| c.is_zero()).count().min(q.len() - 1);
    q.drain(..m);
    m
}

/// `(position in the window, multiplicity)` of every root in `[0, 1)` of the
/// window polynomial, mapped back to `x`.
fn isolate_roots(q0: &[BigInt]) -> Vec<(f64, usize)> {
    let to_x = |a: u128, k: u32| WINDOW_LO + WINDOW_WIDTH * (a as f64) / 2f64.powi(k as i32);
    let mut out = Vec::new();
    let mut top = q0.to_vec();
    let m0 = strip_zero_roots(&mut top);
    if m0 > 0 {
        out.push((WINDOW_LO, m0));
    }
    // Each node is the polynomial rescaled to its own unit interval
    // [a / 2^k, (a + 1) / 2^k].
    let mut stack = vec![(top, 0u128, 0u32)];
    while let Some((q, a, k)) = stack.pop() {
        if q.len() == 1 {
            continue;
        }
        let v = variations(&q);
        if v == 0 {
            continue;
        }
        if v == 1 {
            out.push((refine_simple_root(&q, a, k), 1));
            continue;
        }
        if k >= ROOT_DEPTH {
            out.push((to_x(2 * a + 1, k + 1), v));
            continue;
        }
        let n = q.len() - 1;
        let left: Vec<BigInt> = q.iter().enumerate().map(|(i, c)| c << (n - i)).collect();
        let mut right = left.clone();
        shift_by_one(&mut right);
        let m = strip_zero_roots(&mut right);
        if m > 0 {
            out.push((to_x(2 * a + 1, k + 1), m));
        }
        stack.push((left, 2 * a, k + 1));
        stack.push((right, 2 * a + 1, k + 1));
    }
    out
}

/// Bisect a node holding exactly one simple root in `(0, 1)` by the sign of
/// `q` at dyadic points, which costs one Horner pass per step.
fn refine_simple_root(q: &[BigInt], a: u128, k: u32) -> f64 {
    let s0 = q[0].sign();
    // The root lies in [lo, lo + 1] / 2^m in local coordinates.
    let (mut lo, mut m) = (BigInt::zero(), 0u32);
    while k + m < ROOT_DEPTH {
        let mid = (&lo << 1u32) + 1;
        m += 1;
        match horner_dyadic(q, &mid, m).sign() {
            Sign::NoSign => return local_to_x(a, k, &mid, m),
            s if s == s0 => lo = mid,
            _ => lo <<= 1u32,
        }
    }
    local_to_x(a, k, &((&lo << 1u32) + 1), m + 1)
}

/// `2^(m n) q(p / 2^m)` exactly.
fn horner_dyadic(q: &[BigInt], p: &BigInt, m: u32) -> BigInt {
    let n = q.len() - 1;
    let mut acc = q[n].clone();
    for i in (0..n).rev() {
        acc = acc * p + (&q[i] << (m as usize * (n - i)));
    }
    acc
}

/// Window coordinate of local point `num / 2^m` in node `(a, k)`.
fn local_to_x(a: u128, k: u32, num: &BigInt, m: u32) -> f64 {
    let local = num.to_f64().unwrap_or(f64::NAN) / 2f64.powi(m as i32);
    WINDOW_LO + WINDOW_WIDTH * (a as f64 + local) / 2f64.powi(k as i32)
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_newton_matrix() {
        let t = TraceSequence::from_values(&[1.0, 0.5]).unwrap();
        let nm = newton_matrix(&t);
        assert_eq!(nm.u, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.5, 1.0]));
        assert_eq!(nm.dets, vec![1.0, 1.0, 0.5]);
        // x^2 - x + 1/4
        assert_eq!(nm.coefficients(), vec![1.0, -1.0, 0.25]);
        let r = reconstruct_spectrum(&t).unwrap();
        assert!(r.roots.iter().all(|x| (x - 0.5).abs() < 1e-12));
        assert_eq!(r.clusters.len(), 1);
    }

    #[test]
    fn trivial_dimension() {
        let t = TraceSequence::from_values(&[1.0]).unwrap();
        assert_eq!(newton_matrix(&t).dets, vec![1.0, 1.0]);
    }

    #[test]
    fn planted_spectrum() {
        let p = [0.7, 0.2, 0.1];
        let t: Vec<f64> = (1..=3).map(|n| p.iter().map(|x: &f64| x.powi(n)).sum()).collect();
        let r = reconstruct_spectrum(&TraceSequence::from_values(&t).unwrap()).unwrap();
        for (a, b) in r.roots.iter().zip(p.iter()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_bad_traces() {
        assert!(TraceSequence::from_values(&[1.0, 0.5, 0.7]).is_err());
        assert!(TraceSequence::from_values(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn chain_bipartitions_match_product_spectrum() {
        use crate::fock::product_spectrum;
        use crate::gaussian::spectral_decompose;
        use crate::lattice::{build_chain_correlation, Boundary, LatticeSpec, Occupation, Region};
        let spec = LatticeSpec::chain(8, Boundary::Open, Occupation::Filling(0.5));
        let m = build_chain_correlation(&spec).unwrap();
        for len in 1..=4 {
            for start in 0..=8 - len {
                let sd = spectral_decompose(&m.restrict(&Region::interval(start, len)).unwrap()).unwrap();
                let t = traces_from_spectrum(&sd, MAX_DIMENSION).unwrap();
                let r = reconstruct_spectrum(&t).unwrap();
                let mut want = product_spectrum(&sd.xi);
                want.sort_by(|a, b| b.total_cmp(a));
                let err = r
                    .roots
                    .iter()
                    .zip(&want)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-6, "start {start} len {len}: {err:.2e}");
                assert!((r.roots.iter().sum::<f64>() - 1.0).abs() < 1e-8);
            }
        }
    }
}
