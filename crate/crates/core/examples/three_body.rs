//! Three-body phase of a constant box potential in a slab, and its effect
//! on a three-photon wavefunction.

use rydberg_kerr::interaction::make_constant_u3;
use rydberg_kerr::medium::{CoordinateMap, MediumProfile, PolaritonParams};
use rydberg_kerr::phase::{build_phi3, PhaseKernel, ThreeBodyOptions};
use rydberg_kerr::scattering::{n_photon_out, FewPhotonState};

fn main() -> rydberg_kerr::Result<()> {
    let params = PolaritonParams {
        omega: 1.0,
        delta: -4.0,
        gamma: 0.5,
        g0: 1.0,
        c6: 0.0,
        c: 1.0,
    }
    .with_blockade_radius(1.0);
    let medium = MediumProfile::slab(1.0, 4.0)?;
    let map = CoordinateMap::build(&params, &medium)?;
    let amplitude = 0.3;
    let u3 = make_constant_u3(amplitude, 100.0)?;
    let phi3 = build_phi3(&params, &medium, &u3, &map, &ThreeBodyOptions::default())?;

    // Rydberg fraction cubed times A times the transformed length
    let frac = map.rydberg_fraction(0.0);
    let (z0, z1) = map.transformed_support();
    println!("phi3(0,0) = {:.10}, slab value {:.10}", phi3.evaluate(0.0, 0.0), frac.powi(3) * amplitude * (z1 - z0));
    for (u, v) in [(1.0, 2.0), (2.0, 1.0), (-3.0, 0.5)] {
        println!("phi3({u}, {v}) = {:.8}", phi3.evaluate(u, v));
    }

    let state = FewPhotonState::product(3, |t| num_complex::Complex64::new((-t * t / 50.0).exp(), 0.0));
    let kernel2 = PhaseKernel::zero(2.0, 20.0);
    let out = n_photon_out(&state, &kernel2, Some(&phi3))?;
    let taus = [0.0, 0.5, 1.0];
    println!("psi_out / psi_in at {taus:?} = {:.8}", out.evaluate(&taus) / state.evaluate(&taus));
    Ok(())
}
