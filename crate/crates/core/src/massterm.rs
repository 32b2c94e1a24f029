//! Validity of the massless-polariton approximation.
//!
//! The dispersion curvature (polariton mass `m`) adds, to first order, the
//! phase
//!
//! ```text
//! ϑ_m(L, r) = −(1/v_g) ∫₀ᴸ dR (1/m) ∂_r² ψ / ψ,   ψ = exp(−i φ(0) (R/L) f(r)),
//! ```
//!
//! with `f(r) = [1 + (r/ξ)⁶]⁻¹`. Since `∂_r² ψ/ψ = −i a f'' − a² f'²` for
//! `a = φ(0) R/L`, the R-integral is elementary. At `r = ξ` the result is
//! the negative of the closed form `3(φ(0) + i)(L/ξ)² g⁶/(g² + Ω²)³`;
//! [`mass_phase_quadrature`] returns the displayed integral as is and
//! [`mass_phase_closed`] the closed form, so the two differ by a sign.
//! The validity conditions only use magnitudes.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{derive, MediumProfile, PolaritonParams};
use crate::phase::peak_phase;
use crate::quadrature::{integrate, Tolerance};

pub const DEFAULT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassCorrection {
    pub theta_m: Complex64,
    pub phi_m_abs: f64,
    /// `|ϑ_m / φ(0)|`, infinite when `φ(0) = 0`.
    pub ratio: f64,
    pub threshold: f64,
    pub valid: bool,
}

impl MassCorrection {
    pub fn new(theta_m: Complex64, phi0: f64, threshold: f64) -> Self {
        let phi_m_abs = theta_m.norm();
        let ratio = if phi0 == 0.0 {
            f64::INFINITY
        } else {
            phi_m_abs / phi0.abs()
        };
        MassCorrection {
            theta_m,
            phi_m_abs,
            ratio,
            threshold,
            valid: phi_m_abs < threshold && ratio < threshold,
        }
    }
}

/// `3(φ(0) + i)(L/ξ)² (g²/(g² + Ω²))³` in terms of `g/Ω` and `L/ξ`.
pub fn mass_phase_dimensionless(phi0: f64, g_over_omega: f64, l_over_xi: f64) -> Complex64 {
    let x2 = g_over_omega * g_over_omega;
    let frac = x2 / (1.0 + x2);
    Complex64::new(phi0, 1.0) * (3.0 * l_over_xi * l_over_xi * frac * frac * frac)
}

/// `3(φ(0) + i)(L²/ξ²) g⁶/(g² + Ω²)³` for a slab.
pub fn mass_phase_closed(params: &PolaritonParams, medium: &MediumProfile) -> Result<Complex64> {
    let (_, length) = slab(medium)?;
    let phi0 = peak_phase(params, medium)?.from_potential;
    let d = derive(params, medium)?;
    Ok(mass_phase_dimensionless(phi0, d.g / params.omega, length / d.xi))
}

fn slab(medium: &MediumProfile) -> Result<(f64, f64)> {
    medium
        .as_slab()
        .ok_or_else(|| Error::Precondition("mass-term analysis needs a homogeneous slab".into()))
}

/// The perturbative mass phase at separation `r`, by quadrature over the
/// propagation distance `R`. Opposite in sign to [`mass_phase_closed`] at
/// `r = ξ`.
pub fn mass_phase_quadrature(params: &PolaritonParams, medium: &MediumProfile, r: f64) -> Result<Complex64> {
    let (_, length) = slab(medium)?;
    if !r.is_finite() {
        return Err(Error::invalid("r", "must be finite"));
    }
    let phi0 = peak_phase(params, medium)?.from_potential;
    let d = derive(params, medium)?;
    let xi = d.xi;
    let s = r / xi;
    let s5 = s.powi(5);
    let s6 = s5 * s;
    let den = 1.0 + s6;
    // f = 1/(1 + s⁶)
    let f1 = -6.0 * s5 / (xi * den * den);
    let f2 = (72.0 * s5 * s5 / (den * den * den) - 30.0 * s.powi(4) / (den * den)) / (xi * xi);
    let prefactor = 1.0 / (d.v_g * d.mass);
    let integrand = |big_r: f64| {
        let a = phi0 * big_r / length;
        Complex64::new(-a * a * f1 * f1, -a * f2)
    };
    let est = integrate(integrand, &[0.0, length], &Tolerance::new(0.0, 1e-14))?;
    Ok(-prefactor * est.value)
}

/// Closed-form mass phase and validity predicate for a slab.
pub fn mass_correction(params: &PolaritonParams, medium: &MediumProfile, threshold: f64) -> Result<MassCorrection> {
    let theta = mass_phase_closed(params, medium)?;
    let phi0 = peak_phase(params, medium)?.from_potential;
    Ok(MassCorrection::new(theta, phi0, threshold))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub g_over_omega: f64,
    pub l_over_xi: f64,
    pub correction: MassCorrection,
}

/// Validity over a `(g/Ω, L/ξ)` grid at fixed `φ(0)`.
pub fn validity_scan(g_over_omega: &[f64], l_over_xi: &[f64], phi0: f64, threshold: f64) -> Vec<ScanPoint> {
    let mut out = Vec::with_capacity(g_over_omega.len() * l_over_xi.len());
    for &g in g_over_omega {
        for &l in l_over_xi {
            let theta = mass_phase_dimensionless(phi0, g, l);
            out.push(ScanPoint {
                g_over_omega: g,
                l_over_xi: l,
                correction: MassCorrection::new(theta, phi0, threshold),
            });
        }
    }
    out
}

/// CSV `g_over_omega,l_over_xi,re_theta,im_theta,abs_theta,ratio,valid`.
pub fn write_scan_csv<W: Write>(out: &mut W, points: &[ScanPoint]) -> io::Result<()> {
    writeln!(out, "g_over_omega,l_over_xi,re_theta,im_theta,abs_theta,ratio,valid")?;
    for p in points {
        let c = &p.correction;
        writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            p.g_over_omega,
            p.l_over_xi,
            c.theta_m.re,
            c.theta_m.im,
            c.phi_m_abs,
            c.ratio,
            u8::from(c.valid)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(g0: f64, l_over_xi: f64) -> (PolaritonParams, MediumProfile) {
        let p = PolaritonParams {
            omega: 1.0,
            delta: 100.0,
            gamma: 0.5,
            g0,
            c6: 0.0,
            c: 1.0,
        }
        .with_blockade_radius(1.0);
        (p, MediumProfile::slab(1.0, l_over_xi).unwrap())
    }

    #[test]
    fn closed_form_examples() {
        let (p, m) = setup(0.1, 50.0);
        let phi0 = peak_phase(&p, &m).unwrap().from_potential;
        let theta = mass_phase_closed(&p, &m).unwrap();
        let expected = 3.0 * 2500.0 * 1e-6 / 1.030301;
        assert!((theta.norm() / Complex64::new(phi0, 1.0).norm() - expected).abs() < 1e-12);
        let (p1, m1) = setup(1.0, 50.0);
        let theta1 = mass_phase_closed(&p1, &m1).unwrap();
        let phi1 = peak_phase(&p1, &m1).unwrap().from_potential;
        assert!((theta1.norm() / Complex64::new(phi1, 1.0).norm() - 937.5).abs() < 1e-9);
        assert!(!mass_correction(&p1, &m1, DEFAULT_THRESHOLD).unwrap().valid);
        let limit = mass_phase_dimensionless(0.0, 1.0, 10.0);
        assert_eq!(limit.re, 0.0);
        assert!((limit.im - 37.5).abs() < 1e-12);
    }

    #[test]
    fn quadrature_is_negated_closed_form_at_blockade_radius() {
        for (g0, l) in [(0.1, 50.0), (1.0, 50.0), (0.7, 13.0)] {
            let (p, m) = setup(g0, l);
            let closed = mass_phase_closed(&p, &m).unwrap();
            let quad = mass_phase_quadrature(&p, &m, 1.0).unwrap();
            assert!((quad + closed).norm() < 1e-10 * closed.norm(), "g0 = {g0}");
        }
    }

    #[test]
    fn quadrature_limits() {
        let (p, m) = setup(0.5, 20.0);
        assert!(mass_phase_quadrature(&p, &m, 1e4).unwrap().norm() < 1e-15);
        let gauss = MediumProfile::gaussian(1.0, 3.0, 0.0).unwrap();
        assert!(mass_phase_quadrature(&p, &gauss, 1.0).is_err());
    }

    #[test]
    fn quadratic_length_scaling_at_fixed_peak() {
        let (p, m) = setup(0.5, 20.0);
        let p2 = p.with_detuning(200.0);
        let m2 = MediumProfile::slab(1.0, 40.0).unwrap();
        let a = peak_phase(&p, &m).unwrap().from_potential;
        let b = peak_phase(&p2, &m2).unwrap().from_potential;
        assert!((a - b).abs() < 1e-14);
        let ta = mass_phase_quadrature(&p, &m, 1.0).unwrap();
        let tb = mass_phase_quadrature(&p2, &m2, 1.0).unwrap();
        assert!((tb / ta - 4.0).norm() < 1e-10);
    }

    #[test]
    fn scan_marks_expected_region() {
        let pts = validity_scan(&[0.1, 1.0], &[50.0], 1.0, DEFAULT_THRESHOLD);
        assert!(pts[0].correction.valid);
        assert!(!pts[1].correction.valid);
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, &pts).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}

#[cfg(test)]
mod properties {
    use num_complex::Complex64;
    use proptest::prelude::*;

    use crate::massterm::{mass_phase_closed, mass_phase_quadrature};
    use crate::medium::{MediumProfile, PolaritonParams};
    use crate::phase::peak_phase;

    fn params(omega: f64, delta_factor: f64, g0: f64, xi: f64) -> PolaritonParams {
        PolaritonParams { omega, delta: -delta_factor * omega, gamma: 0.5 * omega, g0, c6: 0.0, c: 1.0 }
            .with_blockade_radius(xi)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn mass_phase_scales_with_length_squared(g0 in 0.1f64..1.5, l in 5.0f64..50.0) {
            // doubling L and δ keeps φ(0) and ξ fixed
            let p = params(1.0, 10.0, g0, 1.0);
            let q = p.with_detuning(2.0 * p.delta);
            let (m1, m2) = (MediumProfile::slab(1.0, l).unwrap(), MediumProfile::slab(1.0, 2.0 * l).unwrap());
            let a = peak_phase(&p, &m1).unwrap().from_potential;
            let b = peak_phase(&q, &m2).unwrap().from_potential;
            prop_assert!((a - b).abs() < 1e-12 * a.abs());
            let ratio = mass_phase_quadrature(&q, &m2, 1.0).unwrap() / mass_phase_quadrature(&p, &m1, 1.0).unwrap();
            prop_assert!((ratio - 4.0).norm() < 1e-9);
            // the main-text estimate is a third of the closed form
            let g2 = g0 * g0;
            let estimate = Complex64::new(a, 1.0).norm() * g2.powi(3) / (g2 + 1.0).powi(3) * l * l;
            prop_assert!((mass_phase_closed(&p, &m1).unwrap().norm() / estimate - 3.0).abs() < 1e-12);
        }
    }
}
