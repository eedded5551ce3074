//! Bulk curves dual to refined Renyi entropies in AdS3.

use ehf::holo::{self, Branch, HoloChart};
use ehf::ode::Tolerance;

fn main() -> ehf::Result<()> {
    let (r, eps) = (1.0, 1e-3);
    for n in [1.0, 2.0, 3.0] {
        let chart = HoloChart::symmetric(r, n)?;
        let c = holo::extremal_curve(&chart, eps, 2000)?;
        let top = c.points.iter().map(|p| p[1]).fold(0.0, f64::max);
        println!(
            "n = {n}: length {:.6}, largest t {:.4}, wedge excess {:+.4}",
            c.length(),
            top,
            c.wedge_excess(r)
        );
    }
    println!("2 ln(2R/eps) = {:.6}", 2.0 * (2.0 * r / eps).ln());

    let chart = HoloChart::symmetric(r, 2.0)?;
    // The n = 2 curve is where the two null surfaces meet.
    let c = holo::extremal_curve(&chart, eps, 11)?;
    println!("\n# x  t  2/z^2  r+  r-");
    for &[x, t, z] in &c.points[1..10] {
        let (u, v) = ((x + t) / 2.0, (x - t) / 2.0);
        let rp = holo::null_surface_r(u, v, &chart, Branch::Plus)?.unwrap_or(f64::NAN);
        let rm = holo::null_surface_r(u, v, &chart, Branch::Minus)?.unwrap_or(f64::NAN);
        println!("{x:+.4}  {t:.4}  {:.6}  {rp:.6}  {rm:.6}", 2.0 / (z * z));
    }

    let tol = Tolerance::default();
    println!("\n# s  u  v  (boundary flow, n = 2)");
    for i in 0..=5 {
        let s = 0.2 * i as f64;
        let f = holo::modular_flow_boundary(0.1, -0.2, &chart, s)?;
        println!("{s:.1}  {:+.8}  {:+.8}", f.u, f.v);
    }
    let bulk = holo::modular_flow_bulk([0.1, -0.05, 3.0], &chart, 0.5, 6, tol)?;
    println!("\n# s  u  v  r  (bulk flow)");
    for (s, y) in bulk.s.iter().zip(&bulk.states) {
        println!("{s:.2}  {:+.6}  {:+.6}  {:.6}", y[0], y[1], y[2]);
    }
    Ok(())
}
