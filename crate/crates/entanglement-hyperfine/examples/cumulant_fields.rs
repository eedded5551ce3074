//! Site-resolved cumulants, the coefficients that weigh them and the
//! hyperfine fields they build.

use ehf::fcs;
use ehf::gaussian::{self, spectral_decompose};
use ehf::hyperfine;
use ehf::lattice::{self, Boundary, LatticeSpec, Occupation, Region};

fn main() -> ehf::Result<()> {
    println!("# beta_k(n)");
    for n in [1.0, 2.0, 3.0, 0.5] {
        let row: Vec<String> = [2, 4, 6, 8]
            .iter()
            .map(|&k| format!("{:+.6e}", hyperfine::beta(k, n)))
            .collect();
        println!("n = {n:<4} {}", row.join("  "));
    }

    let m = lattice::build_chain_correlation(&LatticeSpec::chain(
        60,
        Boundary::Open,
        Occupation::ChemicalPotential(0.2),
    ))?;
    let region = Region::interval(20, 16);
    let sd = spectral_decompose(&m.restrict(&region)?)?;
    let chi = fcs::cumulants_from_chi(&sd, 8)?;
    println!("\n# k  sum_j C_k(j)  from chi_A");
    for k in 1..=8 {
        let field: f64 = hyperfine::cumulant_density_field(&sd, k)?.values.iter().sum();
        println!("{k}  {field:+.12e}  {:+.12e}", chi[k - 1]);
    }

    // The truncated series converges to the contour as more cumulants enter.
    let s2 = gaussian::contour(&sd, 2.0, false)?;
    println!("\n# kmax  max_j |truncated - s_2|");
    for kmax in [2, 4, 8, 12, 16] {
        let t = hyperfine::truncated_contour(&sd, 2.0, kmax)?;
        let err = t.iter().zip(&s2.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("{kmax:3}  {err:.3e}");
    }

    let h = hyperfine::hyperfine_field(&sd, 2.0, 4)?;
    println!(
        "\nh_(2;4) at the block edge and centre: {:+.4e} {:+.4e}",
        h.values[0], h.values[8]
    );
    Ok(())
}
