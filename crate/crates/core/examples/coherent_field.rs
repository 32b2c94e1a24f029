//! Mean output field of a coherent pulse against the classical Kerr
//! prediction.

use num_complex::Complex64;
use rydberg_kerr::phase::{kerr_summary, KernelOptions, PhaseKernel};
use rydberg_kerr::scattering::{coherent_out, kerr_field, CoherentInput, ScatteringOptions};

fn main() -> rydberg_kerr::Result<()> {
    let kernel = PhaseKernel::universal(0.05, 2.0, &KernelOptions::default())?;
    let sigma = kerr_summary(&kernel, kernel.xi_out()).sigma;
    let input = CoherentInput::gaussian(Complex64::new(1.5, 0.0), 0.0, 40.0)?;
    let opts = ScatteringOptions::default();
    println!("sigma = {sigma:.6}");
    println!("{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}", "tau", "|E_in|", "|E_out|", "arg out", "|E_kerr|", "arg kerr");
    for k in -8..=8 {
        let tau = 10.0 * k as f64;
        let out = coherent_out(&input, &kernel, tau, &opts)?.value;
        let kerr = kerr_field(&input, sigma, tau);
        println!(
            "{tau:8.1} {:10.6} {:10.6} {:10.6} {:10.6} {:10.6}",
            input.amplitude(tau).norm(),
            out.norm(),
            out.arg(),
            kerr.norm(),
            kerr.arg()
        );
    }
    Ok(())
}
