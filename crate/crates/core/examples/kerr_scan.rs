//! Classical Kerr phase shift Phi and field suppression eta versus the
//! peak phase, with the small-phase power laws.

use rydberg_kerr::interaction::TwoBodyPotential;
use rydberg_kerr::medium::{CoordinateMap, MediumProfile, PolaritonParams};
use rydberg_kerr::phase::{build_phase_kernel, kerr_scan, sigma_long_slab, KernelOptions};
use rydberg_kerr::pipeline::power_law_exponent;

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
    let medium = MediumProfile::slab(1.0, 50.0)?;
    let map = CoordinateMap::build(&params, &medium)?;
    let pot = TwoBodyPotential::from_params(&params)?;
    let kernel = build_phase_kernel(&params, &medium, &pot, &map, &KernelOptions::default())?;

    let small: Vec<f64> = (0..11).map(|k| 1e-3 * 10f64.powf(k as f64 / 10.0)).collect();
    let rows = kerr_scan(&kernel, &small)?;
    let phi: Vec<f64> = rows.iter().map(|r| r.1.phi).collect();
    let eta: Vec<f64> = rows.iter().map(|r| r.1.eta).collect();
    println!("small phi(0): Phi ~ phi(0)^{:.4}, eta ~ phi(0)^{:.4}", power_law_exponent(&small, &phi), power_law_exponent(&small, &eta));

    let phases: Vec<f64> = (1..=12).map(|k| k as f64 * std::f64::consts::PI / 4.0).collect();
    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "phi(0)/pi", "sigma", "(2pi/3)phi0xo", "Phi", "eta");
    for (p, s) in kerr_scan(&kernel, &phases)? {
        println!(
            "{:10.2} {:12.5} {:12.5} {:12.5} {:12.5}",
            p / std::f64::consts::PI,
            s.sigma,
            sigma_long_slab(p, kernel.xi_out()),
            s.phi,
            s.eta
        );
    }
    Ok(())
}
