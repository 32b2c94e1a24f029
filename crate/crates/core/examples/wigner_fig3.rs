//! Wigner functions of a narrow probe mode for a weak and a strong peak
//! phase, with purity and quadrature variances.

use std::f64::consts::PI;

use num_complex::Complex64;
use rydberg_kerr::homodyne::{mode_moments, purity, wigner, GridSpec, MomentMethod, MomentOptions, ProbeMode, WignerOptions};
use rydberg_kerr::phase::{KernelOptions, PhaseKernel};
use rydberg_kerr::scattering::CoherentInput;

fn main() -> rydberg_kerr::Result<()> {
    let probe = ProbeMode::gaussian(0.0, 0.1)?;
    let unit = CoherentInput::gaussian(Complex64::new(1.0, 0.0), 0.0, 10.0)?;
    // one photon in the probe mode on average
    let amp = 1.0 / probe.overlap(&unit)?.norm();
    let input = CoherentInput::gaussian(Complex64::new(amp, 0.0), 0.0, 10.0)?;
    let base = PhaseKernel::universal(1.0, 2.0, &KernelOptions::default())?;

    for phi0 in [PI / 64.0, PI] {
        let kernel = base.rescaled(phi0)?;
        let moments = mode_moments(&input, &kernel, &probe, 20, MomentMethod::NarrowProbe, &MomentOptions::default())?;
        let grid = wigner(&moments, &GridSpec::square(4.0, 81), &WignerOptions::default())?;
        let (minor, major) = grid.principal_variances();
        println!(
            "phi(0) = {:.4}: integral {:.6}, purity {:.4}, variances {:.4} / {:.4}, min W {:.2e}",
            phi0,
            grid.integral(),
            purity(&grid),
            minor,
            major,
            grid.min_value()
        );
        if phi0 == PI {
            let path = std::env::temp_dir().join("wigner_pi.csv");
            grid.write_csv(&mut std::fs::File::create(&path)?)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
