//! Where the massless-polariton approximation holds.

use rydberg_kerr::massterm::{mass_correction, mass_phase_quadrature, validity_scan, DEFAULT_THRESHOLD};
use rydberg_kerr::medium::{MediumProfile, PolaritonParams};

fn main() -> rydberg_kerr::Result<()> {
    for g0 in [0.1, 1.0] {
        let params = PolaritonParams {
            omega: 1.0,
            delta: -50.0,
            gamma: 0.5,
            g0,
            c6: 0.0,
            c: 1.0,
        }
        .with_blockade_radius(1.0);
        let medium = MediumProfile::slab(1.0, 50.0)?;
        let m = mass_correction(&params, &medium, DEFAULT_THRESHOLD)?;
        let q = mass_phase_quadrature(&params, &medium, 1.0)?;
        println!(
            "g/Omega = {g0}: theta_m = {:.4e}, quadrature = {:.4e}, |theta_m/phi0| = {:.3e}, valid = {}",
            m.theta_m, q, m.ratio, m.valid
        );
    }
    println!("(at this detuning phi(0) is small for g/Omega = 0.1, so the ratio condition fails)");
    let gs = [0.03, 0.1, 0.3, 1.0];
    let ls = [10.0, 50.0, 200.0, 1000.0];
    println!("validity at phi(0) = 1 (rows g/Omega, columns L/xi = {ls:?})");
    for row in validity_scan(&gs, &ls, 1.0, DEFAULT_THRESHOLD).chunks(ls.len()) {
        let marks: String = row.iter().map(|p| if p.correction.valid { " ok " } else { " -- " }).collect();
        println!("{:6}{marks}", row[0].g_over_omega);
    }
    Ok(())
}
