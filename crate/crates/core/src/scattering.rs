//! Input-output maps for Fock and coherent inputs.
//!
//! Everything is evaluated in reduced coordinates `τ = x − c(t − Δt)`,
//! which absorb the medium delay; [`to_reduced`] and [`to_lab`] convert.
//! The outgoing N-photon wavefunction is the incoming one times
//! `exp[−i Σ_{i<j} φ(τ_i − τ_j)]`, and the normally ordered correlators of
//! a coherent input follow in closed form up to one 1-D quadrature.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{PhaseKernel, ThreeBodyKernel};
use crate::quadrature::{integrate, Estimate, Tolerance};

pub fn to_reduced(x: f64, t: f64, delta_t: f64, c: f64) -> f64 {
    x - c * (t - delta_t)
}

pub fn to_lab(tau: f64, t: f64, delta_t: f64, c: f64) -> f64 {
    tau + c * (t - delta_t)
}

type EnvelopeFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// Incoming field expectation value `𝓔(τ)`; `|𝓔|²` is a photon density.
#[derive(Clone)]
pub enum Envelope {
    /// `A exp(−(τ − center)² / (2 width²))`
    Gaussian {
        amplitude: Complex64,
        center: f64,
        width: f64,
    },
    /// `√density` on `[center − half_width, center + half_width]`.
    Flat {
        density: f64,
        center: f64,
        half_width: f64,
    },
    Custom {
        f: Arc<EnvelopeFn>,
        window: (f64, f64),
        l_coh: f64,
    },
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Envelope::Gaussian {
                amplitude,
                center,
                width,
            } => f
                .debug_struct("Gaussian")
                .field("amplitude", amplitude)
                .field("center", center)
                .field("width", width)
                .finish(),
            Envelope::Flat {
                density,
                center,
                half_width,
            } => f
                .debug_struct("Flat")
                .field("density", density)
                .field("center", center)
                .field("half_width", half_width)
                .finish(),
            Envelope::Custom { window, l_coh, .. } => f
                .debug_struct("Custom")
                .field("window", window)
                .field("l_coh", l_coh)
                .finish_non_exhaustive(),
        }
    }
}

/// Gaussian envelopes are cut at this many widths; the dropped intensity
/// fraction is erfc(8) ≈ 1e-29.
const GAUSSIAN_WINDOW: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct CoherentInput {
    envelope: Envelope,
}

impl CoherentInput {
    pub fn gaussian(amplitude: Complex64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) || !(amplitude.norm().is_finite() && center.is_finite()) {
            return Err(Error::invalid("input.width", "need a positive width and finite amplitude"));
        }
        Ok(CoherentInput {
            envelope: Envelope::Gaussian {
                amplitude,
                center,
                width,
            },
        })
    }

    /// Real Gaussian envelope carrying `nbar` photons on average.
    pub fn gaussian_with_photons(nbar: f64, center: f64, width: f64) -> Result<Self> {
        if !(nbar >= 0.0) {
            return Err(Error::invalid("input.nbar", "must be nonnegative"));
        }
        let amplitude = (nbar / (width * std::f64::consts::PI.sqrt())).sqrt();
        Self::gaussian(Complex64::new(amplitude, 0.0), center, width)
    }

    pub fn flat(density: f64, center: f64, half_width: f64) -> Result<Self> {
        if !(density >= 0.0 && density.is_finite()) || !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::invalid("input", "flat envelope needs density >= 0 and half_width > 0"));
        }
        Ok(CoherentInput {
            envelope: Envelope::Flat {
                density,
                center,
                half_width,
            },
        })
    }

    /// Arbitrary envelope, assumed negligible outside `window`.
    pub fn custom(
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        window: (f64, f64),
        l_coh: f64,
    ) -> Result<Self> {
        if !(window.1 > window.0) {
            return Err(Error::invalid("input.window", "must be a nonempty interval"));
        }
        Ok(CoherentInput {
            envelope: Envelope::Custom {
                f: Arc::new(f),
                window,
                l_coh,
            },
        })
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn amplitude(&self, tau: f64) -> Complex64 {
        match &self.envelope {
            Envelope::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let s = (tau - center) / width;
                if s.abs() > GAUSSIAN_WINDOW {
                    Complex64::new(0.0, 0.0)
                } else {
                    amplitude * (-0.5 * s * s).exp()
                }
            }
            Envelope::Flat {
                density,
                center,
                half_width,
            } => {
                if (tau - center).abs() <= *half_width {
                    Complex64::new(density.sqrt(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Envelope::Custom { f, window, .. } => {
                if tau < window.0 || tau > window.1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    f(tau)
                }
            }
        }
    }

    pub fn intensity(&self, tau: f64) -> f64 {
        self.amplitude(tau).norm_sqr()
    }

    /// Interval outside of which the envelope is zero.
    pub fn window(&self) -> (f64, f64) {
        match &self.envelope {
            Envelope::Gaussian { center, width, .. } => {
                (center - GAUSSIAN_WINDOW * width, center + GAUSSIAN_WINDOW * width)
            }
            Envelope::Flat {
                center, half_width, ..
            } => (center - half_width, center + half_width),
            Envelope::Custom { window, .. } => *window,
        }
    }

    /// Characteristic envelope width.
    pub fn l_coh(&self) -> f64 {
        match &self.envelope {
            Envelope::Gaussian { width, .. } => *width,
            Envelope::Flat { half_width, .. } => 2.0 * half_width,
            Envelope::Custom { l_coh, .. } => *l_coh,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.envelope {
            Envelope::Gaussian { center, .. } => {
                let (lo, hi) = self.window();
                vec![lo, *center, hi]
            }
            _ => {
                let (lo, hi) = self.window();
                vec![lo, hi]
            }
        }
    }

    /// Mean photon number `∫|𝓔|²`.
    pub fn mean_photon_number(&self) -> Result<f64> {
        Ok(match &self.envelope {
            Envelope::Gaussian { amplitude, width, .. } => amplitude.norm_sqr() * width * std::f64::consts::PI.sqrt(),
            Envelope::Flat {
                density, half_width, ..
            } => 2.0 * density * half_width,
            Envelope::Custom { .. } => integrate(|t| self.intensity(t), &self.breakpoints(), &Tolerance::default())?.value,
        })
    }
}

type Amplitude = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// Symmetric N-photon wavefunction in reduced coordinates.
#[derive(Clone)]
pub struct FewPhotonState {
    n_photons: usize,
    amplitude: Arc<Amplitude>,
}

impl fmt::Debug for FewPhotonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FewPhotonState")
            .field("n_photons", &self.n_photons)
            .finish_non_exhaustive()
    }
}

impl FewPhotonState {
    /// The callable must be symmetric under permutations of its arguments.
    pub fn new(n_photons: usize, amplitude: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        FewPhotonState {
            n_photons,
            amplitude: Arc::new(amplitude),
        }
    }

    /// Symmetric product `Π f(τ_i)` of a single-photon wavefunction.
    pub fn product(n_photons: usize, f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self::new(n_photons, move |taus| taus.iter().map(|&t| f(t)).product())
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn evaluate(&self, taus: &[f64]) -> Complex64 {
        debug_assert_eq!(taus.len(), self.n_photons);
        (self.amplitude)(taus)
    }
}

/// `Σ_{i<j} φ(τ_i − τ_j) + Σ_{i<j<k} φ₃(τ_i − τ_k, τ_j − τ_k)`.
pub fn interaction_phase(kernel: &PhaseKernel, kernel3: Option<&ThreeBodyKernel>, taus: &[f64]) -> f64 {
    let n = taus.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += kernel.evaluate(taus[i] - taus[j]);
        }
    }
    if let Some(k3) = kernel3 {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    total += k3.evaluate(taus[i] - taus[k], taus[j] - taus[k]);
                }
            }
        }
    }
    total
}

/// Two-photon scattering: multiplication by `e^{−iφ(τ₁−τ₂)}`.
pub fn two_photon_out(state: &FewPhotonState, kernel: &PhaseKernel) -> Result<FewPhotonState> {
    if state.n_photons != 2 {
        return Err(Error::invalid("state", format!("expected 2 photons, got {}", state.n_photons)));
    }
    n_photon_out(state, kernel, None)
}

/// N-photon scattering with pair and, optionally, triple phases.
pub fn n_photon_out(
    state: &FewPhotonState,
    kernel: &PhaseKernel,
    kernel3: Option<&ThreeBodyKernel>,
) -> Result<FewPhotonState> {
    if kernel3.is_some() && state.n_photons < 3 {
        return Err(Error::invalid(
            "kernel3",
            format!("three-body phase needs at least 3 photons, got {}", state.n_photons),
        ));
    }
    let inner = state.amplitude.clone();
    let kernel = kernel.clone();
    let kernel3 = kernel3.cloned();
    Ok(FewPhotonState {
        n_photons: state.n_photons,
        amplitude: Arc::new(move |taus: &[f64]| {
            let phase = interaction_phase(&kernel, kernel3.as_ref(), taus);
            inner(taus) * Complex64::from_polar(1.0, -phase)
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScatteringOptions {
    pub quadrature: Tolerance,
}

impl Default for ScatteringOptions {
    fn default() -> Self {
        ScatteringOptions {
            // the exponent's absolute error is the correlator's relative error
            quadrature: Tolerance {
                abs: 1e-12,
                rel: 1e-10,
                max_intervals: 20_000,
            },
        }
    }
}

/// `∫ du |𝓔(u)|² [exp(i Σ_c φ(u − c) − i Σ_a φ(u − a)) − 1]` over creation
/// points `c` and annihilation points `a`.
pub fn fluctuation_exponent(
    input: &CoherentInput,
    kernel: &PhaseKernel,
    creators: &[f64],
    annihilators: &[f64],
    opts: &ScatteringOptions,
) -> Result<Estimate<Complex64>> {
    let (wlo, whi) = input.window();
    let all = creators.iter().chain(annihilators);
    let (tmin, tmax) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    let zero = Estimate {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
        evaluations: 0,
        intervals: 0,
    };
    if !tmin.is_finite() {
        return Ok(zero);
    }
    let ext = kernel.extent();
    let lo = wlo.max(tmin - ext);
    let hi = whi.min(tmax + ext);
    if hi <= lo {
        return Ok(zero);
    }
    let mut points = vec![lo, hi];
    points.extend(input.breakpoints());
    let xi_out = kernel.xi_out();
    for &t in creators.iter().chain(annihilators) {
        points.extend([t, t - xi_out, t + xi_out]);
        for &k in kernel.kinks() {
            points.extend([t - k, t + k]);
        }
    }
    points.retain(|&p| p >= lo && p <= hi);
    let integrand = |u: f64| {
        let rho = input.intensity(u);
        if rho == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut phase = 0.0;
        for &c in creators {
            phase += kernel.evaluate(u - c);
        }
        for &a in annihilators {
            phase -= kernel.evaluate(u - a);
        }
        if phase == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        // e^{iθ} − 1 = 2i sin(θ/2) e^{iθ/2}, accurate for small θ
        let half = 0.5 * phase;
        Complex64::new(0.0, 2.0 * half.sin()) * Complex64::from_polar(1.0, half) * rho
    };
    Ok(integrate(integrand, &points, &opts.quadrature)?)
}

/// A complex value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluated {
    pub value: Complex64,
    pub error: f64,
}

/// Outgoing mean field `E^out(τ)`.
pub fn coherent_out(input: &CoherentInput, kernel: &PhaseKernel, tau: f64, opts: &ScatteringOptions) -> Result<Evaluated> {
    let x = fluctuation_exponent(input, kernel, &[], &[tau], opts)?;
    let value = input.amplitude(tau) * x.value.exp();
    Ok(Evaluated {
        value,
        error: value.norm() * x.error,
    })
}

/// Classical Kerr field `𝓔(τ) exp(−iσ|𝓔(τ)|²)`.
pub fn kerr_field(input: &CoherentInput, sigma: f64, tau: f64) -> Complex64 {
    let e = input.amplitude(tau);
    e * Complex64::from_polar(1.0, -sigma * e.norm_sqr())
}

/// `G_{n,m}(τ₁ … τ_{n+m})`: `n` creation fields at the first `n` points,
/// `m` annihilation fields at the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorRequest {
    pub n: usize,
    pub m: usize,
    pub points: Vec<f64>,
}

impl CorrelatorRequest {
    pub fn new(n: usize, m: usize, points: Vec<f64>) -> Result<Self> {
        let req = CorrelatorRequest { n, m, points };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n + self.m == 0 {
            return Err(Error::invalid("correlator", "n + m must be at least 1"));
        }
        if self.points.len() != self.n + self.m {
            return Err(Error::invalid(
                "correlator.points",
                format!("expected {} points, got {}", self.n + self.m, self.points.len()),
            ));
        }
        if self.points.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("correlator.points", "non-finite point"));
        }
        Ok(())
    }

    pub fn creators(&self) -> &[f64] {
        &self.points[..self.n]
    }

    pub fn annihilators(&self) -> &[f64] {
        &self.points[self.n..]
    }
}

fn pair_sum(kernel: &PhaseKernel, taus: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..taus.len() {
        for l in 0..k {
            s += kernel.evaluate(taus[k] - taus[l]);
        }
    }
    s
}

/// Closed-form normally ordered correlator of the outgoing field.
pub fn correlator(
    input: &CoherentInput,
    kernel: &PhaseKernel,
    req: &CorrelatorRequest,
    opts: &ScatteringOptions,
) -> Result<Evaluated> {
    req.validate()?;
    let mut pre = Complex64::new(1.0, 0.0);
    for &t in req.creators() {
        pre *= input.amplitude(t).conj();
    }
    for &t in req.annihilators() {
        pre *= input.amplitude(t);
    }
    let phase = pair_sum(kernel, req.creators()) - pair_sum(kernel, req.annihilators());
    let x = fluctuation_exponent(input, kernel, req.creators(), req.annihilators(), opts)?;
    let value = pre * Complex64::from_polar(1.0, phase) * x.value.exp();
    Ok(Evaluated {
        value,
        error: value.norm() * x.error,
    })
}

/// Evaluates independent requests concurrently; results keep request order.
pub fn correlator_batch(
    input: &CoherentInput,
    kernel: &PhaseKernel,
    requests: &[CorrelatorRequest],
    opts: &ScatteringOptions,
) -> Result<Vec<Evaluated>> {
    requests.par_iter().map(|r| correlator(input, kernel, r, opts)).collect()
}

/// CSV with columns `n,m,tau1..tauK,re,im,err`; short point lists leave
/// trailing tau cells empty.
pub fn write_correlator_csv<W: Write>(out: &mut W, requests: &[CorrelatorRequest], values: &[Evaluated]) -> io::Result<()> {
    let k = requests.iter().map(|r| r.points.len()).max().unwrap_or(0);
    let mut header = vec!["n".to_string(), "m".to_string()];
    header.extend((1..=k).map(|i| format!("tau{i}")));
    header.extend(["re".to_string(), "im".to_string(), "err".to_string()]);
    writeln!(out, "{}", header.join(","))?;
    for (r, v) in requests.iter().zip(values) {
        let mut row = vec![r.n.to_string(), r.m.to_string()];
        for i in 0..k {
            row.push(r.points.get(i).map(|t| format!("{t:.17e}")).unwrap_or_default());
        }
        row.push(format!("{:.17e}", v.value.re));
        row.push(format!("{:.17e}", v.value.im));
        row.push(format!("{:.3e}", v.error));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{kerr_summary, KernelOptions};

    fn kernel(phi0: f64) -> PhaseKernel {
        PhaseKernel::universal(phi0, 2.0, &KernelOptions::default()).unwrap()
    }

    #[test]
    fn fock_maps() {
        let k = kernel(-0.5);
        let psi = FewPhotonState::product(2, |t| Complex64::new((-t * t / 8.0).exp(), 0.1 * t));
        let out = two_photon_out(&psi, &k).unwrap();
        let z = out.evaluate(&[0.7, 0.7]) / psi.evaluate(&[0.7, 0.7]);
        assert!((z.arg() - 0.5).abs() < 1e-12);
        for (a, b) in [(0.3, -1.1), (2.0, 5.0)] {
            assert!((out.evaluate(&[a, b]).norm() - psi.evaluate(&[a, b]).norm()).abs() < 1e-14);
            assert_eq!(out.evaluate(&[a, b]), out.evaluate(&[b, a]));
        }
        let id = two_photon_out(&psi, &PhaseKernel::zero(2.0, 10.0)).unwrap();
        assert_eq!(id.evaluate(&[0.1, 0.2]), psi.evaluate(&[0.1, 0.2]));
        let one = FewPhotonState::product(1, |t| Complex64::new(t, 0.0));
        assert_eq!(n_photon_out(&one, &k, None).unwrap().evaluate(&[0.4]), Complex64::new(0.4, 0.0));
        let k3 = ThreeBodyKernel::zero(1.0);
        assert!(n_photon_out(&psi, &k, Some(&k3)).is_err());
        assert!(two_photon_out(&one, &k).is_err());
    }

    #[test]
    fn coherent_out_trivial_and_bounded() {
        let input = CoherentInput::gaussian_with_photons(2.0, 0.0, 10.0).unwrap();
        let opts = ScatteringOptions::default();
        let zero = PhaseKernel::zero(2.0, 10.0);
        let e = coherent_out(&input, &zero, 1.3, &opts).unwrap();
        assert_eq!(e.value, input.amplitude(1.3));
        let k = kernel(1.7);
        for t in [-12.0, 0.0, 3.0, 25.0] {
            let e = coherent_out(&input, &k, t, &opts).unwrap();
            assert!(e.value.norm() <= input.amplitude(t).norm() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn flat_input_deep_inside() {
        let k = kernel(0.9);
        let rho = 0.3;
        let input = CoherentInput::flat(rho, 0.0, 200.0).unwrap();
        let s = kerr_summary(&k, 2.0);
        let e = coherent_out(&input, &k, 5.0, &ScatteringOptions::default()).unwrap();
        let expected = Complex64::new(rho.sqrt(), 0.0) * (-rho * 2.0 * Complex64::new(s.eta, s.phi)).exp();
        assert!((e.value - expected).norm() < 1e-9 * expected.norm());
    }

    #[test]
    fn weak_kerr_limit() {
        let k = kernel(1e-3);
        let s = kerr_summary(&k, 2.0);
        let input = CoherentInput::gaussian_with_photons(40.0, 0.0, 200.0).unwrap();
        let t = 30.0;
        let e = coherent_out(&input, &k, t, &ScatteringOptions::default()).unwrap();
        let kerr = kerr_field(&input, s.sigma, t);
        let phase_scale = s.sigma * input.intensity(t);
        assert!((e.value - kerr).norm() / kerr.norm() < 0.05 * phase_scale.abs());
    }

    #[test]
    fn correlator_identities() {
        let k = kernel(2.3);
        let input = CoherentInput::gaussian(Complex64::new(0.8, -0.3), 1.0, 5.0).unwrap();
        let opts = ScatteringOptions::default();
        for t in [-3.0, 0.0, 1.7, 6.0] {
            let g11 = correlator(&input, &k, &CorrelatorRequest::new(1, 1, vec![t, t]).unwrap(), &opts).unwrap();
            assert_eq!(g11.value.re, input.intensity(t));
            assert_eq!(g11.value.im, 0.0);
            let g01 = correlator(&input, &k, &CorrelatorRequest::new(0, 1, vec![t]).unwrap(), &opts).unwrap();
            let e = coherent_out(&input, &k, t, &opts).unwrap();
            assert!((g01.value - e.value).norm() <= 1e-12 * e.value.norm());
        }
        let pts = vec![0.3, -1.2, 2.2];
        let g12 = correlator(&input, &k, &CorrelatorRequest::new(1, 2, pts.clone()).unwrap(), &opts).unwrap();
        let swapped = vec![pts[1], pts[2], pts[0]];
        let g21 = correlator(&input, &k, &CorrelatorRequest::new(2, 1, swapped).unwrap(), &opts).unwrap();
        assert!((g21.value - g12.value.conj()).norm() < 1e-12 * g12.value.norm());
    }

    #[test]
    fn cluster_decomposition() {
        let k = kernel(1.1);
        let input = CoherentInput::flat(0.2, 0.0, 500.0).unwrap();
        let opts = ScatteringOptions::default();
        let (a, b) = (-200.0, 200.0);
        let g02 = correlator(&input, &k, &CorrelatorRequest::new(0, 2, vec![a, b]).unwrap(), &opts).unwrap();
        let ea = coherent_out(&input, &k, a, &opts).unwrap();
        let eb = coherent_out(&input, &k, b, &opts).unwrap();
        assert!((g02.value - ea.value * eb.value).norm() < 1e-10 * g02.value.norm());
    }

    #[test]
    fn batch_csv_layout() {
        let k = kernel(0.4);
        let input = CoherentInput::gaussian_with_photons(1.0, 0.0, 3.0).unwrap();
        let reqs = vec![
            CorrelatorRequest::new(0, 1, vec![0.0]).unwrap(),
            CorrelatorRequest::new(1, 2, vec![0.0, 0.5, 1.0]).unwrap(),
        ];
        let vals = correlator_batch(&input, &k, &reqs, &ScatteringOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_correlator_csv(&mut buf, &reqs, &vals).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,m,tau1,tau2,tau3,re,im,err");
        assert_eq!(lines[1].split(',').count(), 8);
        assert!(CorrelatorRequest::new(0, 0, vec![]).is_err());
        assert!(CorrelatorRequest::new(1, 1, vec![0.0]).is_err());
    }
}

#[cfg(test)]
mod properties {
    use num_complex::Complex64;
    use proptest::prelude::*;

    use crate::phase::{KernelOptions, PhaseKernel};
    use crate::scattering::{
        coherent_out, correlator, n_photon_out, CoherentInput, CorrelatorRequest, FewPhotonState, ScatteringOptions,
    };

    fn universal(phi0: f64) -> PhaseKernel {
        PhaseKernel::universal(phi0, 2.0, &KernelOptions::default()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn correlators_are_hermitian(phi0 in 0.0f64..4.0, a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
            let input = CoherentInput::gaussian(Complex64::new(0.8, 0.3), 0.0, 4.0).unwrap();
            let k = universal(phi0);
            let opts = ScatteringOptions::default();
            let g12 = correlator(&input, &k, &CorrelatorRequest::new(1, 2, vec![a, b, c]).unwrap(), &opts).unwrap().value;
            let g21 = correlator(&input, &k, &CorrelatorRequest::new(2, 1, vec![b, c, a]).unwrap(), &opts).unwrap().value;
            prop_assert!((g12 - g21.conj()).norm() <= 1e-12 * g12.norm().max(1e-300));
        }

        #[test]
        fn output_field_never_exceeds_input(phi0 in -4.0f64..4.0, tau in -10.0f64..10.0) {
            let input = CoherentInput::gaussian(Complex64::new(1.2, 0.0), 0.0, 4.0).unwrap();
            let out = coherent_out(&input, &universal(phi0), tau, &ScatteringOptions::default()).unwrap();
            prop_assert!(out.value.norm() <= input.amplitude(tau).norm() * (1.0 + 1e-12));
        }

        #[test]
        fn photon_map_preserves_norm(phi0 in -4.0f64..4.0, t in prop::array::uniform3(-5.0f64..5.0)) {
            let state = FewPhotonState::product(3, |x| Complex64::new((-x * x / 8.0).exp(), 0.2 * x));
            let out = n_photon_out(&state, &universal(phi0), None).unwrap();
            prop_assert!((out.evaluate(&t).norm() - state.evaluate(&t).norm()).abs() <= 1e-14);
        }
    }
}
