//! Edge hyperfine fields across the mass sweep on a cylinder.

use std::f64::consts::PI;

use ehf::hyperfine::{self, EDGE_DEPTH};
use ehf::io::mass_grid;

fn main() -> ehf::Result<()> {
    let masses = mass_grid(-3.0, 3.0, 0.25);
    let ks = [2, 4, 6];
    // Each edge momentum with its topological mass window; pi/3 has none.
    for (kx, lo, hi) in [(0.0, -2.0, 0.0), (PI, 0.0, 2.0), (PI / 3.0, -3.0, 3.0)] {
        let p = hyperfine::edge_scaling_profile(40, 1.0, &masses, kx, 2.0, &ks, EDGE_DEPTH)?;
        let (spread, min) = p.collapse_stats(lo, hi);
        println!("kx = {kx:.4}, m in ({lo}, {hi}): spread of normalized curves {spread:.3}, smallest value {min:.3}");
        println!("#   m     k=2     k=4     k=6");
        for (i, m) in masses.iter().enumerate() {
            println!(
                "{m:5.2}  {:+.3}  {:+.3}  {:+.3}",
                p.normalized[0][i], p.normalized[1][i], p.normalized[2][i]
            );
        }
        println!();
    }
    Ok(())
}
