//! Entanglement contour of a block in an open half-filled chain.
//!
//! cargo run --example chain_contour [length] [block]

use ehf::gaussian::{self, spectral_decompose};
use ehf::lattice::{self, Boundary, LatticeSpec, Occupation, Region};

fn main() -> ehf::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let len = args.next().unwrap_or(80);
    let block = args.next().unwrap_or(20);
    let m = lattice::build_chain_correlation(&LatticeSpec::chain(len, Boundary::Open, Occupation::Filling(0.5)))?;
    let region = Region::interval((len - block) / 2, block);
    let sd = spectral_decompose(&m.restrict(&region)?)?;

    for n in [1.0, 2.0, 3.0] {
        let s = gaussian::entropy(&sd, n, false)?;
        let refined = gaussian::entropy(&sd, n, true)?;
        println!("n = {n}: S = {:.10}  refined = {:.10}", s.value, refined.value);
    }

    let s1 = gaussian::contour(&sd, 1.0, false)?;
    let s2 = gaussian::contour(&sd, 2.0, false)?;
    println!("\n# site  s_1(j)  s_2(j)");
    for (j, site) in region.sites().iter().enumerate() {
        println!("{:4}  {:.6e}  {:.6e}", site.x, s1.values[j], s2.values[j]);
    }
    println!("\nsum of s_1 = {:.12}", s1.total());
    Ok(())
}
