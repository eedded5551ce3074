//! Hyperfine fields of a square block in the two-band Chern insulator.
//!
//! cargo run --release --example chern_torus [mass]

use ehf::gaussian::spectral_decompose;
use ehf::hyperfine;
use ehf::io;
use ehf::lattice::{self, ChernParams, LatticeSpec, Region};

fn main() -> ehf::Result<()> {
    let m: f64 = std::env::args().nth(1).map(|a| a.parse().expect("mass")).unwrap_or(1.0);
    let params = ChernParams::new(m, 1.0, 0.0);
    println!("m = {m}: Chern number {}", hyperfine::chern_number(&params, 60)?);

    let full = lattice::build_chern_torus_correlation(&LatticeSpec::torus(24, 24), &params)?;
    let region = Region::rectangle(6, 6, 12, 12, 2);
    let sd = spectral_decompose(&full.restrict(&region)?)?;
    for k in [2, 4] {
        let h = hyperfine::hyperfine_field(&sd, 2.0, k)?;
        let rows = io::field_rows(&h);
        let section: Vec<f64> = io::cross_section(&rows, 12).iter().map(|p| p.1).collect();
        println!("\nk = {k}, sign pattern {:?}", io::sign_pattern(&rows));
        if let Ok(fit) = io::fit_decay(&section) {
            println!(
                "decay: {:?} (exp R^2 {:.4}, power R^2 {:.4}, exponent {:.2})",
                fit.law, fit.exp_r2, fit.power_r2, fit.power_exponent
            );
        }
    }
    Ok(())
}
