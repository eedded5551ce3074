//! Refined-Renyi geometry in Poincare AdS3.
//!
//! Boundary light-cone coordinates `u = (x + t)/2`, `v = (x - t)/2` and the
//! bulk radial coordinate `r = 2 / z^2`. The boundary interval is `|x| < R`
//! at `t = 0` with causal diamond `|u| <= l_u/2`, `|v| <= l_v/2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Outcome, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoloChart {
    pub l_u: f64,
    pub l_v: f64,
    pub n: f64,
}

impl HoloChart {
    pub fn new(l_u: f64, l_v: f64, n: f64) -> Result<Self> {
        if !(l_u > 0.0 && l_v > 0.0 && l_u.is_finite() && l_v.is_finite()) {
            return Err(Error::Geometry("interval widths must be positive".into()));
        }
        if !(n >= 1.0 && n.is_finite()) {
            return Err(Error::Geometry(format!("Renyi order must be >= 1, got {n}")));
        }
        Ok(HoloChart { l_u, l_v, n })
    }

    /// Interval `(-r, r)` at `t = 0`.
    pub fn symmetric(r: f64, n: f64) -> Result<Self> {
        HoloChart::new(r, r, n)
    }

    pub fn half_length(&self) -> f64 {
        0.5 * (self.l_u + self.l_v)
    }

    pub fn horizon(&self) -> f64 {
        1.0 / self.n
    }

    fn require_symmetric(&self) -> Result<f64> {
        if (self.l_u - self.l_v).abs() > 1e-12 * self.l_u {
            return Err(Error::Geometry("null surfaces are only available for l_u = l_v".into()));
        }
        Ok(self.l_u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// Square-root argument `l^2 (1 - n^2) - 4 n^2 u v + n^4 (u + v)^2`.
fn null_discriminant(u: f64, v: f64, l: f64, n: f64) -> f64 {
    let n2 = n * n;
    l * l * (1.0 - n2) - 4.0 * n2 * u * v + n2 * n2 * (u + v) * (u + v)
}

/// `r` on the null hypersurface `N_(+/-)` above the boundary point `(u, v)`,
/// or `None` when the square root is imaginary or `r` is not positive.
pub fn null_surface_r(u: f64, v: f64, chart: &HoloChart, branch: Branch) -> Result<Option<f64>> {
    let l = chart.require_symmetric()?;
    let n2 = chart.n * chart.n;
    let mut disc = null_discriminant(u, v, l, chart.n);
    // On the intersection curve the discriminant vanishes, and its rounding
    // noise would enter through the square root at the 1e-8 level. Snap it.
    if disc.abs() < 1e-13 * l * l * n2 * n2 {
        disc = 0.0;
    }
    if disc < 0.0 {
        return Ok(None);
    }
    let root = 2.0 * l * disc.sqrt();
    let base = l * l * (n2 - 2.0) + 4.0 * n2 * u * v;
    let denom = match branch {
        Branch::Plus => base + root,
        Branch::Minus => base - root,
    };
    let r = -2.0 * n2 / denom;
    Ok((r.is_finite() && r > 0.0).then_some(r))
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremalCurve {
    pub n: f64,
    /// Curve parameter `sigma` of each sample.
    pub params: Vec<f64>,
    /// `(x, t, z)`.
    pub points: Vec<[f64; 3]>,
    /// Cumulative proper length from the first sample.
    pub cumlen: Vec<f64>,
}

impl ExtremalCurve {
    pub fn length(&self) -> f64 {
        *self.cumlen.last().unwrap_or(&0.0)
    }

    /// Largest `sqrt(x^2 + z^2) + |t| - R`; positive means the curve leaves the
    /// causal wedge of the interval.
    pub fn wedge_excess(&self, r: f64) -> f64 {
        self.points
            .iter()
            .map(|p| (p[0] * p[0] + p[2] * p[2]).sqrt() + p[1].abs() - r)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Point at cumulative length `s`, interpolated linearly between samples.
    fn at_length(&self, s: f64) -> (f64, [f64; 3]) {
        let i = self.cumlen.partition_point(|&c| c < s).clamp(1, self.cumlen.len() - 1);
        let (a, b) = (self.cumlen[i - 1], self.cumlen[i]);
        let w = if b > a { (s - a) / (b - a) } else { 0.0 };
        let lerp = |p: f64, q: f64| p + w * (q - p);
        let (p, q) = (self.points[i - 1], self.points[i]);
        (
            lerp(self.params[i - 1], self.params[i]),
            [lerp(p[0], q[0]), lerp(p[1], q[1]), lerp(p[2], q[2])],
        )
    }
}

/// The intersection `C^(n)` of the two null hypersurfaces, cut off where
/// `z = epsilon`.
///
/// On the intersection the square root vanishes; writing
/// `theta = 2 atan(exp(sigma))` it is
/// `x = -(l/n^2) cos(theta)`, `z = (l/n) sin(theta)`,
/// `t = (l/n^2) sqrt((n^2 - 1)(n^2 - cos^2(theta)))`.
/// Proper length per unit `sigma` is
/// `sqrt(sin^4 / (n^2 - cos^2) + cos^2)`, equal to 1 for `n = 1`.
pub fn extremal_curve(chart: &HoloChart, epsilon: f64, samples: usize) -> Result<ExtremalCurve> {
    let l = chart.require_symmetric()?;
    let n = chart.n;
    let n2 = n * n;
    if samples < 2 {
        return Err(Error::Geometry("need at least two samples".into()));
    }
    let sin_cut = n * epsilon / l;
    if !(sin_cut > 0.0 && sin_cut < 1.0) {
        return Err(Error::Geometry(format!(
            "cutoff {epsilon} leaves no curve for width {l} and n = {n}"
        )));
    }
    let theta_cut = sin_cut.asin();
    let sigma_max = -(theta_cut / 2.0).tan().ln();
    let mut params = Vec::with_capacity(samples);
    let mut points = Vec::with_capacity(samples);
    let mut speed = Vec::with_capacity(samples);
    for i in 0..samples {
        let sigma = -sigma_max + 2.0 * sigma_max * i as f64 / (samples - 1) as f64;
        // sin(theta) = sech(sigma) and cos(theta) = -tanh(sigma) for theta = 2 atan(e^sigma).
        let (s, c) = (1.0 / sigma.cosh(), -sigma.tanh());
        let x = -(l / n2) * c;
        let z = (l / n) * s;
        let t = (l / n2) * ((n2 - 1.0) * (n2 - c * c)).max(0.0).sqrt();
        params.push(sigma);
        points.push([x, t, z]);
        speed.push((s.powi(4) / (n2 - c * c) + c * c).sqrt());
    }
    let mut cumlen = vec![0.0; samples];
    for i in 1..samples {
        cumlen[i] = cumlen[i - 1] + 0.5 * (speed[i] + speed[i - 1]) * (params[i] - params[i - 1]);
    }
    Ok(ExtremalCurve {
        n,
        params,
        points,
        cumlen,
    })
}

/// Bulk modular-flow vector field in `(u, v, r)`.
pub fn bulk_velocity(state: &[f64; 3], chart: &HoloChart) -> [f64; 3] {
    let [u, v, r] = *state;
    let (lu, lv, n) = (chart.l_u, chart.l_v, chart.n);
    [
        n * (2.0 * PI * u * u / lu - PI * lu / 2.0 + PI / (lv * r)),
        n / 2.0 * PI * (-2.0 / (lu * r) - 4.0 * v * v / lv + lv),
        4.0 * n * PI * r * (v / lv - u / lu),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub s: Vec<f64>,
    pub states: Vec<[f64; 3]>,
    /// Set when `r` left `(0, inf)` before the end of the span.
    pub truncated: bool,
}

/// Integrate the bulk flow from `start = (u, v, r)` and sample it at `outputs`
/// evenly spaced flow times in `[0, s_end]`.
pub fn modular_flow_bulk(
    start: [f64; 3],
    chart: &HoloChart,
    s_end: f64,
    outputs: usize,
    tol: Tolerance,
) -> Result<Trajectory> {
    if start[2].is_nan() || start[2] <= 0.0 {
        return Err(Error::Geometry("bulk flow needs r > 0".into()));
    }
    let outputs = outputs.max(2);
    let mut traj = Trajectory {
        s: vec![0.0],
        states: vec![start],
        truncated: false,
    };
    let mut y = start;
    for i in 1..outputs {
        let (a, b) = (
            s_end * (i - 1) as f64 / (outputs - 1) as f64,
            s_end * i as f64 / (outputs - 1) as f64,
        );
        match ode::integrate(|_, y| bulk_velocity(y, chart), &mut y, a, b, tol, |y| y[2] > 0.0) {
            Outcome::Reached => {
                traj.s.push(b);
                traj.states.push(y);
            }
            _ => {
                traj.truncated = true;
                break;
            }
        }
    }
    Ok(traj)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryFlow {
    pub u: f64,
    pub v: f64,
    pub k_u: f64,
    pub k_v: f64,
    /// The start lies on the edge of the causal diamond, where it does not move.
    pub fixed_point: bool,
}

/// Closed-form boundary flow
/// `u = -(l_u/2) tanh(n pi s - 2 l_u k_u)`, `v = (l_v/2) tanh(n pi s + 2 l_v k_v)`.
pub fn modular_flow_boundary(u0: f64, v0: f64, chart: &HoloChart, s: f64) -> Result<BoundaryFlow> {
    let (a, b) = (2.0 * u0 / chart.l_u, 2.0 * v0 / chart.l_v);
    if a.abs() > 1.0 || b.abs() > 1.0 {
        return Err(Error::Geometry(format!("({u0}, {v0}) lies outside the causal diamond")));
    }
    if a.abs() == 1.0 || b.abs() == 1.0 {
        // Only the saturated coordinate is pinned; the other still flows.
        let u = if a.abs() == 1.0 {
            u0
        } else {
            -(chart.l_u / 2.0) * (chart.n * PI * s - a.atanh()).tanh()
        };
        let v = if b.abs() == 1.0 {
            v0
        } else {
            (chart.l_v / 2.0) * (chart.n * PI * s + b.atanh()).tanh()
        };
        return Ok(BoundaryFlow {
            u,
            v,
            k_u: f64::NAN,
            k_v: f64::NAN,
            fixed_point: true,
        });
    }
    let k_u = a.atanh() / (2.0 * chart.l_u);
    let k_v = b.atanh() / (2.0 * chart.l_v);
    let ns = chart.n * PI * s;
    Ok(BoundaryFlow {
        u: -(chart.l_u / 2.0) * (ns - 2.0 * chart.l_u * k_u).tanh(),
        v: (chart.l_v / 2.0) * (ns + 2.0 * chart.l_v * k_v).tanh(),
        k_u,
        k_v,
        fixed_point: false,
    })
}

/// The boundary flow integrated numerically (the `r -> inf` limit of the bulk
/// field).
pub fn modular_flow_boundary_rk(u0: f64, v0: f64, chart: &HoloChart, s: f64, tol: Tolerance) -> Result<(f64, f64)> {
    let (lu, lv, n) = (chart.l_u, chart.l_v, chart.n);
    let mut y = [u0, v0];
    let f = |_: f64, y: &[f64; 2]| {
        [
            n * PI * (2.0 * y[0] * y[0] / lu - lu / 2.0),
            n / 2.0 * PI * (lv - 4.0 * y[1] * y[1] / lv),
        ]
    };
    match ode::integrate(f, &mut y, 0.0, s, tol, |_| true) {
        Outcome::Reached => Ok((y[0], y[1])),
        other => Err(Error::Geometry(format!("boundary flow integration failed: {other:?}"))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceBoundary {
    /// Cumulative contour fraction (= cumulative length fraction).
    pub fraction: f64,
    pub param: f64,
    pub point: [f64; 3],
    pub length: f64,
}

/// Cut the curve so that segment `i` carries the same share of proper length
/// as site `i` carries of the contour. Returns the interior cut points.
pub fn slice_by_contour(curve: &ExtremalCurve, contour: &[f64]) -> Result<Vec<SliceBoundary>> {
    let total: f64 = contour.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::Geometry("contour must have a positive total".into()));
    }
    if contour.iter().any(|&c| c < -1e-12 * total) {
        return Err(Error::Geometry("contour has negative entries".into()));
    }
    let len = curve.length();
    let mut acc = 0.0;
    let mut cuts = Vec::with_capacity(contour.len().saturating_sub(1));
    for &c in &contour[..contour.len().saturating_sub(1)] {
        acc += c;
        let fraction = acc / total;
        let (param, point) = curve.at_length(fraction * len);
        cuts.push(SliceBoundary {
            fraction,
            param,
            point,
            length: fraction * len,
        });
    }
    Ok(cuts)
}

/// Segment lengths between consecutive cuts, including both curve ends.
pub fn segment_lengths(curve: &ExtremalCurve, cuts: &[SliceBoundary]) -> Vec<f64> {
    let mut marks = vec![0.0];
    marks.extend(cuts.iter().map(|c| c.length));
    marks.push(curve.length());
    marks.windows(2).map(|w| w[1] - w[0]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_surface_at_n1() {
        let chart = HoloChart::symmetric(2.0, 1.0).unwrap();
        let x = 0.7;
        let r = null_surface_r(x / 2.0, x / 2.0, &chart, Branch::Plus).unwrap().unwrap();
        assert!((2.0 / r - (4.0 - x * x)).abs() < 1e-12);
        // Light-cone pair off the t = 0 slice.
        let (x, t) = (0.3, 0.5);
        let (u, v) = ((x + t) / 2.0, (x - t) / 2.0);
        for (branch, sign) in [(Branch::Plus, -1.0), (Branch::Minus, 1.0)] {
            let r = null_surface_r(u, v, &chart, branch).unwrap();
            let z2 = (2.0f64 + sign * t).powi(2) - x * x;
            assert!((2.0 / r.unwrap() - z2).abs() < 1e-12);
        }
        let wide = HoloChart::symmetric(1.0, 3.0).unwrap();
        assert_eq!(null_surface_r(0.0, 0.0, &wide, Branch::Plus).unwrap(), None);
        assert!(null_surface_r(0.0, 0.0, &HoloChart::new(1.0, 2.0, 1.0).unwrap(), Branch::Plus).is_err());
    }

    #[test]
    fn rt_semicircle_and_length() {
        let chart = HoloChart::symmetric(2.0, 1.0).unwrap();
        let eps = 1e-3;
        let c = extremal_curve(&chart, eps, 400).unwrap();
        for p in &c.points {
            assert!((p[0] * p[0] + p[2] * p[2] - 4.0).abs() < 1e-8);
            assert!(p[1].abs() < 1e-10);
        }
        assert!((c.length() - 2.0 * (4.0 / eps).ln()).abs() < 10.0 * eps);
    }

    #[test]
    fn curve_lies_on_both_null_surfaces() {
        let chart = HoloChart::symmetric(2.0, 2.0).unwrap();
        let c = extremal_curve(&chart, 1e-3, 300).unwrap();
        for p in &c.points[1..c.points.len() - 1] {
            let (u, v) = ((p[0] + p[1]) / 2.0, (p[0] - p[1]) / 2.0);
            let r = 2.0 / (p[2] * p[2]);
            for b in [Branch::Plus, Branch::Minus] {
                let rn = null_surface_r(u, v, &chart, b).unwrap().unwrap();
                assert!((rn / r - 1.0).abs() < 1e-8, "{rn} vs {r}");
            }
        }
        assert!(c.wedge_excess(2.0) > 0.0);
    }

    #[test]
    fn speed_matches_finite_differences() {
        let chart = HoloChart::symmetric(1.5, 2.5).unwrap();
        let c = extremal_curve(&chart, 1e-2, 4001).unwrap();
        // Chord lengths in the metric (dx^2 + dz^2 - dt^2) / z^2.
        let mut chord = 0.0;
        for w in c.points.windows(2) {
            let (dx, dt, dz) = (w[1][0] - w[0][0], w[1][1] - w[0][1], w[1][2] - w[0][2]);
            let z = 0.5 * (w[0][2] + w[1][2]);
            chord += ((dx * dx + dz * dz - dt * dt) / (z * z)).sqrt();
        }
        assert!((chord / c.length() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn boundary_flow() {
        let chart = HoloChart::symmetric(1.0, 2.0).unwrap();
        let f = modular_flow_boundary(0.0, 0.1, &chart, 0.0).unwrap();
        assert_eq!(f.k_u, 0.0);
        assert!((f.v - 0.1).abs() < 1e-15);
        let far = modular_flow_boundary(0.2, -0.1, &chart, 50.0).unwrap();
        assert!((far.u + 0.5).abs() < 1e-12 && (far.v - 0.5).abs() < 1e-12);
        let edge = modular_flow_boundary(0.5, 0.1, &chart, 1.0).unwrap();
        assert!(edge.fixed_point && edge.u == 0.5);
        assert!(modular_flow_boundary(0.6, 0.0, &chart, 1.0).is_err());
    }

    #[test]
    fn rt_surface_is_fixed_by_the_flow() {
        let chart = HoloChart::symmetric(1.0, 1.0).unwrap();
        let x: f64 = 0.4;
        let start = [x / 2.0, x / 2.0, 2.0 / (1.0 - x * x)];
        let traj = modular_flow_bulk(start, &chart, 1.0, 5, Tolerance::default()).unwrap();
        assert!(!traj.truncated);
        for s in &traj.states {
            assert!((s[0] - start[0]).abs() < 1e-12 && (s[2] - start[2]).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_slicing() {
        let chart = HoloChart::symmetric(1.0, 2.0).unwrap();
        let c = extremal_curve(&chart, 1e-2, 500).unwrap();
        let cuts = slice_by_contour(&c, &[1.0; 4]).unwrap();
        let fr: Vec<f64> = cuts.iter().map(|c| c.fraction).collect();
        assert_eq!(fr, vec![0.25, 0.5, 0.75]);
        let segs = segment_lengths(&c, &cuts);
        assert!((segs.iter().sum::<f64>() - c.length()).abs() < 1e-10);
        assert!(slice_by_contour(&c, &[0.0, 0.0]).is_err());
    }
}
