//! Two-body phase kernels of homogeneous slabs and a Gaussian cloud,
//! compared with the universal long-cloud shape.

use rydberg_kerr::interaction::TwoBodyPotential;
use rydberg_kerr::medium::{derive, CoordinateMap, MediumProfile, PolaritonParams};
use rydberg_kerr::phase::{build_phase_kernel, peak_phase, KernelOptions};

fn main() -> rydberg_kerr::Result<()> {
    let params = PolaritonParams {
        omega: 1.0,
        delta: -50.0,
        gamma: 0.5,
        g0: 1.0,
        c6: 0.0,
        c: 1.0,
    }
    .with_blockade_radius(1.0);
    let pot = TwoBodyPotential::from_params(&params)?;
    let opts = KernelOptions::default();

    let media = [
        ("slab L = 2", MediumProfile::slab(1.0, 2.0)?),
        ("slab L = 10", MediumProfile::slab(1.0, 10.0)?),
        ("slab L = 50", MediumProfile::slab(1.0, 50.0)?),
        ("gaussian w = 20", MediumProfile::gaussian(1.0, 20.0, 0.0)?),
    ];
    for (label, medium) in &media {
        let map = CoordinateMap::build(&params, medium)?;
        let kernel = build_phase_kernel(&params, medium, &pot, &map, &opts)?;
        let xo = kernel.xi_out();
        let d = derive(&params, medium)?;
        print!("{label:16} phi(0) = {:8.5}  kappa = {:7.2}  ", kernel.phi0(), d.kappa);
        if let Ok(p) = peak_phase(&params, medium) {
            print!("closed form {:8.5}  ", p.from_potential);
        }
        let shape: Vec<String> = [0.0, 0.5, 1.0, 1.5, 2.0]
            .iter()
            .map(|s| format!("{:.4}", kernel.evaluate(s * xo) / kernel.phi0()))
            .collect();
        println!("phi/phi(0) at u/xi_out = 0, .5, 1, 1.5, 2: {}", shape.join(" "));
    }
    let universal: Vec<String> = [0.0f64, 0.5, 1.0, 1.5, 2.0]
        .iter()
        .map(|s| format!("{:.4}", 1.0 / (1.0 + s.powi(6))))
        .collect();
    println!("{:>96} {}", "universal:", universal.join(" "));
    Ok(())
}
