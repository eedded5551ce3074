//! Continuum (1+1)D comparators for a single interval `(-R, R)` and the
//! lattice-to-continuum fit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuumParams {
    /// Central charge.
    pub c: f64,
    /// Charge-fluctuation prefactor (1 for free fermions).
    pub g: f64,
    /// Half-length of the interval.
    pub r: f64,
    /// UV cutoff.
    pub epsilon: f64,
    /// Renyi order.
    pub n: f64,
}

impl ContinuumParams {
    pub fn free_fermion(r: f64, n: f64) -> Self {
        ContinuumParams {
            c: 1.0,
            g: 1.0,
            r,
            epsilon: 1.0,
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > self.epsilon && self.epsilon > 0.0) {
            return Err(Error::Domain(format!(
                "need R > epsilon > 0, got R = {}, epsilon = {}",
                self.r, self.epsilon
            )));
        }
        if !(self.c > 0.0 && self.g > 0.0 && self.n > 0.0) {
            return Err(Error::Domain("c, g and n must be positive".into()));
        }
        Ok(())
    }

    fn pole_pair(&self, x: f64) -> Result<f64> {
        if x.abs() >= self.r {
            return Err(Error::Domain(format!(
                "|x| = {} is not inside the interval of half-length {}",
                x.abs(),
                self.r
            )));
        }
        Ok(1.0 / (self.r - x) + 1.0 / (self.r + x))
    }
}

/// Leading hyperfine density `((1 + 1/n) c / 12) (1/(R-x) + 1/(R+x))`.
/// Independent of the cutoff.
pub fn h_n2_closed(x: f64, p: &ContinuumParams) -> Result<f64> {
    Ok((1.0 + 1.0 / p.n) * p.c / 12.0 * p.pole_pair(x)?)
}

/// `C_2(x) = (g / 2 pi^2) (1/(R-x) + 1/(R+x))`.
pub fn c2_density_closed(x: f64, p: &ContinuumParams) -> Result<f64> {
    Ok(p.g / (2.0 * PI * PI) * p.pole_pair(x)?)
}

/// The constant `h_{n;2}(x) / C_2(x) = pi^2 c (1 + 1/n) / (6 g)`.
pub fn density_ratio(p: &ContinuumParams) -> f64 {
    PI * PI * p.c * (1.0 + 1.0 / p.n) / (6.0 * p.g)
}

/// `S_n = ((1 + 1/n) c / 6) ln(2R / epsilon)`.
pub fn sn_interval(p: &ContinuumParams) -> Result<f64> {
    p.validate()?;
    Ok((1.0 + 1.0 / p.n) * p.c / 6.0 * (2.0 * p.r / p.epsilon).ln())
}

/// Refined entropy `(c / 3n) ln(2R / epsilon)`.
pub fn refined_sn_interval(p: &ContinuumParams) -> Result<f64> {
    p.validate()?;
    Ok(p.c / (3.0 * p.n) * (2.0 * p.r / p.epsilon).ln())
}

/// Exact integral of `h_n2_closed` over `(-R + epsilon, R - epsilon)`.
pub fn h_n2_integral(p: &ContinuumParams) -> Result<f64> {
    p.validate()?;
    Ok((1.0 + 1.0 / p.n) * p.c / 6.0 * ((2.0 * p.r - p.epsilon) / p.epsilon).ln())
}

/// `C_2(x)` from the free-fermion density kernel: by particle-number
/// conservation it equals the integral of `1 / (2 pi^2 (x - y)^2)` over `y`
/// outside the interval. Evaluated by quadrature on `y = R + s / (1 - s)`.
pub fn c2_from_kernel(x: f64, r: f64, samples: usize) -> Result<f64> {
    if x.abs() >= r {
        return Err(Error::Domain("point outside the interval".into()));
    }
    // integral_0^inf dt / (d + t)^2 with t = s / (1 - s) becomes
    // integral_0^1 ds / (d (1 - s) + s)^2.
    let tail = |d: f64| simpson(|s| (d * (1.0 - s) + s).powi(-2), 0.0, 1.0, samples);
    Ok((tail(r - x) + tail(r + x)) / (2.0 * PI * PI))
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> f64 {
    let n = samples.max(2) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Lattice site `j` of an `A`-site interval sits at `x = j - (A - 1)/2`, with
/// `R = A / 2`.
pub fn lattice_position(j: usize, len: usize) -> f64 {
    j as f64 - (len as f64 - 1.0) / 2.0
}

/// Sites with `|x| <= fraction * R`, i.e. the middle `2 * fraction` of the
/// interval.
pub fn middle_sites(len: usize, fraction: f64) -> Vec<usize> {
    let r = len as f64 / 2.0;
    (0..len)
        .filter(|&j| lattice_position(j, len).abs() <= fraction * r)
        .collect()
}

pub const MIDDLE_FRACTION: f64 = 0.3;

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub sites: usize,
    pub mean_relative_deviation: f64,
    pub max_relative_deviation: f64,
}

/// Compare a 1D lattice field with a closed form over the middle 60% of the
/// interval.
pub fn lattice_vs_cft(values: &[f64], closed: impl Fn(f64) -> Result<f64>) -> Result<FitReport> {
    let len = values.len();
    let mid = middle_sites(len, MIDDLE_FRACTION);
    if mid.is_empty() {
        return Err(Error::Domain("interval too short for a fit".into()));
    }
    let mut devs = Vec::with_capacity(mid.len());
    for &j in &mid {
        let want = closed(lattice_position(j, len))?;
        devs.push((values[j] - want).abs() / want.abs());
    }
    Ok(FitReport {
        sites: mid.len(),
        mean_relative_deviation: devs.iter().sum::<f64>() / devs.len() as f64,
        max_relative_deviation: devs.iter().copied().fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub mean: f64,
    /// `(max - min) / mean` of the pointwise ratio.
    pub spread: f64,
    pub expected: f64,
}

/// Pointwise `a(j) / b(j)` over the middle 60% of the interval.
pub fn ratio_spread(a: &[f64], b: &[f64], expected: f64) -> Result<RatioReport> {
    if a.len() != b.len() {
        return Err(Error::Domain("fields have different lengths".into()));
    }
    let ratios: Vec<f64> = middle_sites(a.len(), MIDDLE_FRACTION)
        .iter()
        .map(|&j| a[j] / b[j])
        .collect();
    if ratios.is_empty() {
        return Err(Error::Domain("interval too short for a ratio".into()));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RatioReport {
        mean,
        spread: (hi - lo) / mean,
        expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let p = ContinuumParams {
            c: 1.0,
            g: 1.0,
            r: 1.0,
            epsilon: 0.1,
            n: 2.0,
        };
        assert!((h_n2_closed(0.0, &p).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(h_n2_closed(0.3, &p).unwrap(), h_n2_closed(-0.3, &p).unwrap());
        assert!(h_n2_closed(1.0, &p).is_err());
        let inf = ContinuumParams { n: 1e12, ..p };
        let one = ContinuumParams { n: 1.0, ..p };
        let r = h_n2_closed(0.4, &inf).unwrap() / h_n2_closed(0.4, &one).unwrap();
        assert!((r - 0.5).abs() < 1e-9);
        for x in [-0.9, 0.0, 0.5] {
            let ratio = h_n2_closed(x, &p).unwrap() / c2_density_closed(x, &p).unwrap();
            assert!((ratio - density_ratio(&p)).abs() < 1e-12);
        }
    }

    #[test]
    fn interval_entropy() {
        let r = 0.5 * 6f64.exp();
        let p = ContinuumParams {
            c: 1.0,
            g: 1.0,
            r,
            epsilon: 1.0,
            n: 1.0,
        };
        assert!((sn_interval(&p).unwrap() - 2.0).abs() < 1e-12);
        assert!((refined_sn_interval(&p).unwrap() - 2.0).abs() < 1e-12);
        let q = ContinuumParams { n: 2.0, r: 1e4, ..p };
        let gap = (h_n2_integral(&q).unwrap() - sn_interval(&q).unwrap()).abs();
        assert!(gap < 2.0 * q.epsilon / q.r);
    }

    #[test]
    fn kernel_integral_gives_unit_charge_prefactor() {
        let p = ContinuumParams::free_fermion(5.0, 1.0);
        for x in [0.0, 2.0, -4.5] {
            let k = c2_from_kernel(x, p.r, 20_000).unwrap();
            let c = c2_density_closed(x, &p).unwrap();
            assert!((k / c - 1.0).abs() < 1e-6, "{k} vs {c}");
        }
    }

    #[test]
    fn middle_window() {
        let mid = middle_sites(100, MIDDLE_FRACTION);
        assert_eq!(mid.len(), 30);
        assert_eq!(mid[0], 35);
    }
}
