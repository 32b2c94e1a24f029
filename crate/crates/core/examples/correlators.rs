//! Normally ordered correlators of the scattered field. Intensities and
//! density correlations are untouched by the interaction; the two-photon
//! coherence `G_{0,2}` carries the pair phase.

use rydberg_kerr::phase::{KernelOptions, PhaseKernel};
use rydberg_kerr::scattering::{correlator, correlator_batch, CoherentInput, CorrelatorRequest, ScatteringOptions};

fn main() -> rydberg_kerr::Result<()> {
    let kernel = PhaseKernel::universal(1.0, 2.0, &KernelOptions::default())?;
    let input = CoherentInput::gaussian_with_photons(2.0, 0.0, 20.0)?;
    let opts = ScatteringOptions::default();

    let g11 = correlator(&input, &kernel, &CorrelatorRequest::new(1, 1, vec![0.0, 0.0])?, &opts)?;
    println!("G11(0,0) = {:.12} (input intensity {:.12})", g11.value.re, input.intensity(0.0));

    let g22 = correlator(&input, &kernel, &CorrelatorRequest::new(2, 2, vec![0.0, 1.0, 0.0, 1.0])?, &opts)?;
    println!("g2(0,1) = {:.12}", g22.value.re / (input.intensity(0.0) * input.intensity(1.0)));

    let seps: Vec<f64> = (0..=12).map(|k| 0.5 * k as f64).collect();
    let requests = seps
        .iter()
        .map(|&s| CorrelatorRequest::new(0, 2, vec![0.0, s]))
        .collect::<rydberg_kerr::Result<Vec<_>>>()?;
    let values = correlator_batch(&input, &kernel, &requests, &opts)?;
    println!("{:>6} {:>12} {:>12} {:>12}", "tau", "|G02|/|EE|", "arg G02", "-phi(tau)");
    for (s, v) in seps.iter().zip(&values) {
        let ee = input.amplitude(0.0) * input.amplitude(*s);
        let r = v.value / ee;
        println!("{s:6.2} {:12.6} {:12.6} {:12.6}", r.norm(), r.arg(), -kernel.evaluate(*s));
    }
    Ok(())
}
