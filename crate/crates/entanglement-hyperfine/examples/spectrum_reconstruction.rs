//! Recover every eigenvalue of rho_A, with multiplicity, from tr rho_A^n.

use ehf::gaussian::spectral_decompose;
use ehf::lattice::{self, Boundary, LatticeSpec, Occupation, Region};
use ehf::{fock, recon};

fn main() -> ehf::Result<()> {
    let m = lattice::build_chain_correlation(&LatticeSpec::chain(16, Boundary::Open, Occupation::Filling(0.5)))?;
    let sd = spectral_decompose(&m.restrict(&Region::interval(6, 4))?)?;
    let traces = recon::traces_from_spectrum(&sd, recon::MAX_DIMENSION)?;
    println!("tr rho^n for n = 1..{}:", traces.dimension());
    for (n, t) in traces.values.iter().enumerate() {
        println!("  {:2}  {t:.15e}", n + 1);
    }

    let rec = recon::reconstruct_spectrum(&traces)?;
    let mut want = fock::product_spectrum(&sd.xi);
    want.sort_by(|a, b| b.total_cmp(a));
    println!("\n# eigenvalue  product formula  |diff|");
    for (a, b) in rec.roots.iter().zip(&want) {
        println!("{a:.15e}  {b:.15e}  {:.1e}", (a - b).abs());
    }
    println!("\nclusters (value, multiplicity): {:?}", rec.clusters);
    println!("polynomial residual: {:.2e}", rec.residual);
    Ok(())
}
