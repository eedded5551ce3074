//! Cumulant densities from two counting measurements: on A and on A minus
//! one site.

use ehf::fcs;
use ehf::gaussian::spectral_decompose;
use ehf::hyperfine;
use ehf::lattice::{self, Boundary, LatticeSpec, Occupation, Region};

fn main() -> ehf::Result<()> {
    let m = lattice::build_chain_correlation(&LatticeSpec::chain(
        40,
        Boundary::Open,
        Occupation::ChemicalPotential(0.3),
    ))?;
    let region = Region::interval(12, 10);
    let sd = spectral_decompose(&m.restrict(&region)?)?;
    for k in [2, 4, 6] {
        let direct = hyperfine::cumulant_density_field(&sd, k)?;
        let mut worst: f64 = 0.0;
        println!("# k = {k}: site  protocol  direct");
        for (j, site) in region.sites().iter().enumerate() {
            let v = fcs::qpc_protocol(&m, &region, site, k)?;
            worst = worst.max((v - direct.values[j]).abs());
            println!("{:3}  {v:+.10e}  {:+.10e}", site.x, direct.values[j]);
        }
        println!("largest difference {worst:.2e}\n");
    }
    Ok(())
}
