//! Lattice densities of a sine-kernel block against the continuum forms.

use std::f64::consts::PI;

use ehf::cft::{self, ContinuumParams};
use ehf::gaussian::{self, spectral_decompose};
use ehf::hyperfine;
use ehf::lattice;

fn main() -> ehf::Result<()> {
    for len in [20, 50, 100, 200] {
        let sd = spectral_decompose(&lattice::sine_kernel_correlation(len, PI / 2.0)?)?;
        let c2 = hyperfine::cumulant_density_field(&sd, 2)?;
        let p = ContinuumParams::free_fermion(len as f64 / 2.0, 2.0);
        let fit = cft::lattice_vs_cft(&c2.values, |x| cft::c2_density_closed(x, &p))?;
        let s2 = gaussian::contour(&sd, 2.0, false)?;
        let ratio = cft::ratio_spread(&s2.values, &c2.values, cft::density_ratio(&p))?;
        println!(
            "A = {len:3}: C_2 mean deviation {:.3}%, s_2/C_2 = {:.5} (continuum {:.5}, spread {:.2}%)",
            100.0 * fit.mean_relative_deviation,
            ratio.mean,
            ratio.expected,
            100.0 * ratio.spread
        );
    }
    let p = ContinuumParams {
        c: 1.0,
        g: 1.0,
        r: 50.0,
        epsilon: 1.0,
        n: 2.0,
    };
    println!(
        "\ncontinuum S_2 = {:.6}, integral of h_(2;2) = {:.6}",
        cft::sn_interval(&p)?,
        cft::h_n2_integral(&p)?
    );
    Ok(())
}
