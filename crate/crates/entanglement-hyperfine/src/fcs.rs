//! Full counting statistics with truncated Taylor jets in the counting field.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::gaussian::{spectral_decompose, SpectralData};
use crate::lattice::{CorrelationMatrix, Region, SiteIndex};
use crate::linalg::{CMatrix, C64};

pub const DEFAULT_ORDER: usize = 12;

/// Taylor coefficients `a_0..=a_K` of a function of `lambda` about 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub c: Vec<C64>,
}

impl Jet {
    pub fn constant(a: C64, order: usize) -> Jet {
        let mut c = vec![C64::new(0.0, 0.0); order + 1];
        c[0] = a;
        Jet { c }
    }

    pub fn one(order: usize) -> Jet {
        Jet::constant(C64::new(1.0, 0.0), order)
    }

    /// `e^{i lambda}`.
    pub fn exp_i(order: usize) -> Jet {
        let mut c = Vec::with_capacity(order + 1);
        let mut term = C64::new(1.0, 0.0);
        for k in 0..=order {
            if k > 0 {
                term = term * C64::i() / k as f64;
            }
            c.push(term);
        }
        Jet { c }
    }

    /// `f(-lambda)`: flip the sign of odd coefficients.
    pub fn conj_argument(&self) -> Jet {
        Jet {
            c: self
                .c
                .iter()
                .enumerate()
                .map(|(k, a)| if k % 2 == 0 { *a } else { -a })
                .collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn scale(&self, s: C64) -> Jet {
        Jet {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn derivative(&self) -> Jet {
        let mut c: Vec<C64> = (1..self.c.len()).map(|k| self.c[k] * k as f64).collect();
        c.push(C64::new(0.0, 0.0));
        Jet { c }
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        let b0 = other.c[0];
        if b0.norm() == 0.0 {
            return Err(Error::Domain(
                "jet division by a series with vanishing constant term".into(),
            ));
        }
        let n = self.c.len().min(other.c.len());
        let mut q: Vec<C64> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= other.c[j] * q[k - j];
            }
            q.push(acc / b0);
        }
        Ok(Jet { c: q })
    }

    /// `ln f`, requiring `f(0) != 0`.
    pub fn ln(&self) -> Result<Jet> {
        let a0 = self.c[0];
        if a0.norm() == 0.0 {
            return Err(Error::Domain("log of a jet with vanishing constant term".into()));
        }
        // (ln f)' = f' / f
        let q = self.derivative().div(self)?;
        let mut c = vec![a0.ln()];
        for k in 1..self.c.len() {
            c.push(q.c[k - 1] / k as f64);
        }
        Ok(Jet { c })
    }

    pub fn exp(&self) -> Jet {
        // g = e^f, g' = f' g
        let n = self.c.len();
        let mut g = vec![self.c[0].exp()];
        for k in 1..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.c[j] * j as f64 * g[k - j];
            }
            g.push(acc / k as f64);
        }
        Jet { c: g }
    }

    /// Divide by `lambda`: drop a vanishing constant term and shift down.
    /// The result has one order less.
    pub fn shift_down(&self, tol: f64) -> Result<Jet> {
        if self.c[0].norm() > tol {
            return Err(Error::Inconsistent(format!(
                "constant term {:.3e} should vanish before dividing by lambda",
                self.c[0].norm()
            )));
        }
        Ok(Jet {
            c: self.c[1..].to_vec(),
        })
    }

    /// `(-i d/dlambda)^k` at 0, i.e. `(-i)^k k! a_k`.
    pub fn moment(&self, k: usize) -> C64 {
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        C64::new(0.0, -1.0).powu(k as u32) * f * self.c[k]
    }
}

fn zip(a: &Jet, b: &Jet, f: impl Fn(C64, C64) -> C64) -> Jet {
    let n = a.c.len().min(b.c.len());
    Jet {
        c: (0..n).map(|k| f(a.c[k], b.c[k])).collect(),
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        zip(self, o, |x, y| x + y)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        zip(self, o, |x, y| x - y)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let n = self.c.len().min(o.c.len());
        Jet {
            c: (0..n).map(|k| (0..=k).map(|j| self.c[j] * o.c[k - j]).sum()).collect(),
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Jet of `1 + xi (e^{i lambda} - 1)`.
fn mode_factor(xi: f64, order: usize) -> Jet {
    let e = Jet::exp_i(order);
    let mut j = e.scale(C64::new(xi, 0.0));
    j.c[0] = C64::new(1.0, 0.0);
    j
}

/// `ln chi(lambda) = sum_l ln(1 + xi_l (e^{i lambda} - 1))`.
pub fn log_chi_jet(sd: &SpectralData, order: usize) -> Result<Jet> {
    let mut acc = Jet::constant(C64::new(0.0, 0.0), order);
    for &x in &sd.xi {
        acc = &acc + &mode_factor(x, order).ln()?;
    }
    Ok(acc)
}

/// Generating function `chi(lambda) = <e^{i lambda N_A}>`.
pub fn chi_jet(sd: &SpectralData, order: usize) -> Result<Jet> {
    if order < 2 {
        return Err(Error::Domain("jet order must be at least 2".into()));
    }
    Ok(log_chi_jet(sd, order)?.exp())
}

/// Region cumulants `C_1..=C_K` from `C_k = (-i)^k k! [lambda^k] ln chi`.
pub fn cumulants_from_chi(sd: &SpectralData, order: usize) -> Result<Vec<f64>> {
    let l = log_chi_jet(sd, order)?;
    Ok((1..=order).map(|k| l.moment(k).re).collect())
}

/// `G_j / chi = sum_l |psi_l(j)|^2 xi_l e^{i lambda} / (1 + xi_l (e^{i lambda} - 1))`.
fn g_over_chi(sd: &SpectralData, j: usize, order: usize) -> Result<Jet> {
    let e = Jet::exp_i(order);
    let mut acc = Jet::constant(C64::new(0.0, 0.0), order);
    for (l, &x) in sd.xi.iter().enumerate() {
        let w = sd.vectors[(j, l)].norm_sqr();
        if w == 0.0 || x == 0.0 {
            continue;
        }
        let term = e.scale(C64::new(w * x, 0.0)).div(&mode_factor(x, order))?;
        acc = &acc + &term;
    }
    Ok(acc)
}

/// `G(lambda, j) = <e^{i lambda N_A} n_j>`.
pub fn g_jet(sd: &SpectralData, j: usize, order: usize) -> Result<Jet> {
    if j >= sd.len() {
        return Err(Error::Domain(format!("site position {j} is outside the region")));
    }
    Ok(&chi_jet(sd, order)? * &g_over_chi(sd, j, order)?)
}

/// `C_k(j) = (-i)^{k-1} (k-1)! [lambda^{k-1}] (G_j / chi)`.
pub fn cumulant_density_from_g(sd: &SpectralData, j: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("cumulant order starts at 1".into()));
    }
    Ok(g_over_chi(sd, j, k.max(2))?.moment(k - 1).re)
}

/// Site density `C_k(l)` from two counting experiments: one on `A`, one on `A`
/// with the site `l` removed.
pub fn qpc_protocol(m: &CorrelationMatrix, region: &Region, l: &SiteIndex, k: usize) -> Result<f64> {
    if !region.contains(l) {
        return Err(Error::Domain(format!("site {l:?} is not in the region")));
    }
    if k == 0 {
        return Err(Error::Domain("cumulant order starts at 1".into()));
    }
    // One extra order is consumed by the pole cancellation.
    let order = k.max(2) + 1;
    let ln_a = log_chi_jet(&spectral_decompose(&m.restrict(region)?)?, order)?;
    let reduced = region.without(l);
    let ln_rest = if reduced.is_empty() {
        Jet::constant(C64::new(0.0, 0.0), order)
    } else {
        log_chi_jet(&spectral_decompose(&m.restrict(&reduced)?)?, order)?
    };
    // [chi_A - chi_{A\l}] / chi_A = 1 - exp(ln chi_{A\l} - ln chi_A). Both
    // logs vanish at lambda = 0, so the constant term is removed exactly
    // instead of by cancellation.
    let mut numerator = (&ln_rest - &ln_a).exp().scale(C64::new(-1.0, 0.0));
    numerator.c[0] = C64::new(0.0, 0.0);
    // e^{i lambda} / (e^{i lambda} - 1) = 1 / (1 - e^{-i lambda})
    let denom = &Jet::one(order) - &Jet::exp_i(order).conj_argument();
    let f = numerator.shift_down(1e-12)?.div(&denom.shift_down(1e-15)?)?;
    Ok(f.moment(k - 1).re)
}

/// Keep only the diagonal entry `M_ii` (density after measuring `n_i`).
pub fn project_measure(m: &CorrelationMatrix, i: &SiteIndex) -> Result<CorrelationMatrix> {
    let p = m
        .position(i)
        .ok_or_else(|| Error::Domain(format!("site {i:?} not in the matrix")))?;
    let n = m.dim();
    let mut out = CMatrix::zeros(n, n);
    out[(p, p)] = m.get(p, p);
    CorrelationMatrix::from_dense(out, m.sites().to_vec(), format!("{} measured at {i:?}", m.tag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::CorrelationMatrix;

    fn sd(xi: &[f64]) -> SpectralData {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            xi.iter().map(|&x| C64::new(x, 0.0)).collect(),
        ));
        spectral_decompose(&CorrelationMatrix::chain_dense(m, "diag").unwrap()).unwrap()
    }

    #[test]
    fn deterministic_count() {
        let c = cumulants_from_chi(&sd(&[1.0]), 6).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15);
        assert!(c[1..].iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn half_filled_mode_cumulants() {
        let c = cumulants_from_chi(&sd(&[0.5]), 6).unwrap();
        assert!((c[1] - 0.25).abs() < 1e-15);
        assert!(c[2].abs() < 1e-15);
        assert!((c[3] + 0.125).abs() < 1e-14);
    }

    #[test]
    fn jet_algebra() {
        let a = Jet {
            c: (0..8).map(|k| C64::new(1.0 + k as f64, 0.5 * k as f64)).collect(),
        };
        let b = Jet {
            c: (0..8).map(|k| C64::new(2.0 - 0.3 * k as f64, -0.1)).collect(),
        };
        let back = (&a * &b).div(&b).unwrap();
        for k in 0..8 {
            assert!((back.c[k] - a.c[k]).norm() < 1e-12);
        }
        let round = a.ln().unwrap().exp();
        for k in 0..8 {
            assert!((round.c[k] - a.c[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn g_jet_starts_at_density() {
        let s = sd(&[0.2, 0.7]);
        let g = g_jet(&s, 1, 6).unwrap();
        assert!((g.c[0].re - 0.7).abs() < 1e-15);
    }

    #[test]
    fn qpc_single_site() {
        let m = CorrelationMatrix::chain_dense(CMatrix::from_element(1, 1, C64::new(0.3, 0.0)), "one").unwrap();
        let r = Region::interval(0, 1);
        let c1 = qpc_protocol(&m, &r, &SiteIndex::chain(0), 1).unwrap();
        assert!((c1 - 0.3).abs() < 1e-14);
        assert!(qpc_protocol(&m, &r, &SiteIndex::chain(1), 1).is_err());
    }

    #[test]
    fn measured_entropy_is_the_site_entropy() {
        use crate::gaussian::{contour, entropy, mode_entropy};
        use crate::sampling;
        let mut rng = sampling::rng(11);
        let mut below = 0;
        for _ in 0..200 {
            let m = sampling::random_state(6, &mut rng).unwrap();
            let sd_full = spectral_decompose(&m).unwrap();
            let field = contour(&sd_full, 1.0, false).unwrap();
            for j in 0..6 {
                let site = SiteIndex::chain(j);
                let p = project_measure(&m, &site).unwrap();
                let after = entropy(&spectral_decompose(&p).unwrap(), 1.0, false).unwrap().value;
                let single = mode_entropy(m.get(j, j).re);
                assert!((after - single).abs() < 1e-12);
                // The contour never exceeds the entropy of its own site.
                assert!(field.values[j] <= single + 1e-12);
                if field.values[j] < single - 1e-6 {
                    below += 1;
                }
            }
        }
        assert!(below > 0);
    }
}
