//! Closed-form correlators against the truncated-Fock oracle, over three
//! grid refinements.

use std::time::Instant;

use rydberg_kerr::interaction::TwoBodyPotential;
use rydberg_kerr::medium::{CoordinateMap, MediumProfile, PolaritonParams};
use rydberg_kerr::oracle::{apply_phase_map, prepare_coherent, ModeGrid, OracleOptions};
use rydberg_kerr::phase::{build_phase_kernel, KernelOptions};
use rydberg_kerr::scattering::{correlator, CoherentInput, CorrelatorRequest, ScatteringOptions};

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
    let pot = TwoBodyPotential::from_params(&params)?;
    let kernel = build_phase_kernel(&params, &medium, &pot, &map, &KernelOptions::default())?;
    println!("phi(0) = {:.6}, xi_out = {}", kernel.phi0(), kernel.xi_out());

    let input = CoherentInput::gaussian_with_photons(0.1, 0.0, 2.0)?;
    let cases = [(0, 1, vec![0.0]), (0, 2, vec![0.0, 1.5])];
    for (n, m, points) in cases {
        let req = CorrelatorRequest::new(n, m, points.clone())?;
        let closed = correlator(&input, &kernel, &req, &ScatteringOptions::default())?.value;
        println!("G_{n}{m}{points:?} closed form {closed:.12}");
        for cells in [32, 64, 128] {
            let grid = ModeGrid::new(-12.0, 24.0 / cells as f64, cells)?;
            let start = Instant::now();
            let state = apply_phase_map(&prepare_coherent(&input, &grid, 6)?, &kernel, None);
            let r = state.measure_correlator_with(n, m, &points, &OracleOptions::default())?;
            println!(
                "  M = {cells:4}  rel err {:.3e}  pruned {:.1e}  configs {}  {:.2?}",
                (r.value - closed).norm() / closed.norm(),
                r.pruned_bound / closed.norm(),
                r.configurations,
                start.elapsed()
            );
        }
    }
    Ok(())
}
