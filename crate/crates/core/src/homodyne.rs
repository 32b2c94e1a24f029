//! Probe-mode moments and Wigner-function reconstruction.
//!
//! A homodyne detector with a localized mode `u` measures the single-mode
//! operator `â_u = ∫ u(x) ψ(x) dx` (the mode function is not conjugated).
//! Its normally ordered moments `𝒢_{nm} = ⟨â_u†ⁿ â_u^m⟩` determine the
//! Wigner function through
//!
//! ```text
//! W(α) = (2/π) Σ_{nm} (−1)^{n+m}/(n! m!) 𝒢_{nm} ∂_{α*}ⁿ ∂_α^m e^{−2|α|²},
//! ```
//!
//! with `α = q + i p`, so a coherent state `|α₀⟩` has
//! `W = (2/π) exp(−2|α − α₀|²)` and `∫∫ W dq dp = 1`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::PhaseKernel;
use crate::quadrature::{gauss_legendre, integrate, CompensatedSum, Tolerance};
use crate::scattering::{correlator, fluctuation_exponent, CoherentInput, CorrelatorRequest, ScatteringOptions};

/// Hard cap on the series order; `40!` and `2^80` stay well inside f64.
pub const MAX_ORDER: usize = 40;

type ModeFn = dyn Fn(f64) -> Complex64 + Send + Sync;

#[derive(Clone)]
enum Shape {
    Gaussian { width: f64 },
    Custom { f: Arc<ModeFn>, half_window: f64, l_probe: f64 },
}

/// Square-normalized probe mode `u(x)` centred at `τ₀`.
#[derive(Clone)]
pub struct ProbeMode {
    center: f64,
    shape: Shape,
}

impl fmt::Debug for ProbeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProbeMode")
            .field("center", &self.center)
            .field("l_probe", &self.l_probe())
            .finish_non_exhaustive()
    }
}

const PROBE_WINDOW: f64 = 8.0;

impl ProbeMode {
    /// `u(x) = (π s²)^{−1/4} exp(−(x − τ₀)²/(2 s²))`
    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) || !center.is_finite() {
            return Err(Error::invalid("probe.width", "must be positive and finite"));
        }
        Ok(ProbeMode {
            center,
            shape: Shape::Gaussian { width },
        })
    }

    /// User mode, zero outside `center ± half_window`; normalization is
    /// checked to 1e-9.
    pub fn custom(
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        center: f64,
        half_window: f64,
        l_probe: f64,
    ) -> Result<Self> {
        if !(half_window > 0.0 && l_probe > 0.0) {
            return Err(Error::invalid("probe", "half_window and l_probe must be positive"));
        }
        let mode = ProbeMode {
            center,
            shape: Shape::Custom {
                f: Arc::new(f),
                half_window,
                l_probe,
            },
        };
        let (lo, hi) = mode.window();
        let norm = integrate(|x| mode.evaluate(x).norm_sqr(), &[lo, center, hi], &Tolerance::new(1e-13, 1e-12))?.value;
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("probe", format!("mode is not normalized: ∫|u|² = {norm}")));
        }
        Ok(mode)
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        let (lo, hi) = self.window();
        if x < lo || x > hi {
            return Complex64::new(0.0, 0.0);
        }
        match &self.shape {
            Shape::Gaussian { width } => {
                let s = (x - self.center) / width;
                Complex64::new((PI * width * width).powf(-0.25) * (-0.5 * s * s).exp(), 0.0)
            }
            Shape::Custom { f, .. } => f(x),
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn l_probe(&self) -> f64 {
        match &self.shape {
            Shape::Gaussian { width } => *width,
            Shape::Custom { l_probe, .. } => *l_probe,
        }
    }

    pub fn window(&self) -> (f64, f64) {
        let h = match &self.shape {
            Shape::Gaussian { width } => PROBE_WINDOW * width,
            Shape::Custom { half_window, .. } => *half_window,
        };
        (self.center - h, self.center + h)
    }

    /// `∫ u(x) 𝓔(x) dx`, the coherent amplitude seen by the mode.
    pub fn overlap(&self, input: &CoherentInput) -> Result<Complex64> {
        let (lo, hi) = self.window();
        let est = integrate(
            |x| self.evaluate(x) * input.amplitude(x),
            &[lo, self.center, hi],
            &Tolerance::new(1e-15, 1e-13),
        )?;
        Ok(est.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    /// Nested quadrature of the closed-form correlators; `n + m ≤ 4`.
    ExactQuadrature,
    /// φ frozen across the probe support; needs `l_probe ≤ ξ_out/10` and
    /// `l_probe ≤ l_coh/10`.
    NarrowProbe,
}

/// `𝒢_{nm}` for `0 ≤ n, m ≤ n_max`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeMoments {
    pub n_max: usize,
    pub method: Option<MomentMethod>,
    /// Row-major, `gnm[n * (n_max + 1) + m]`.
    pub gnm: Vec<Complex64>,
    /// Bound on the Wigner-series terms dropped beyond `n_max`.
    pub tail_estimate: f64,
    /// Largest quadrature error estimate over the entries.
    pub quadrature_error: f64,
}

impl ModeMoments {
    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.gnm[n * (self.n_max + 1) + m]
    }

    /// Moments of the coherent state `|α₀⟩`.
    pub fn coherent(alpha: Complex64, n_max: usize) -> Self {
        let size = n_max + 1;
        let mut gnm = vec![Complex64::new(0.0, 0.0); size * size];
        for n in 0..size {
            for m in 0..size {
                gnm[n * size + m] = alpha.conj().powu(n as u32) * alpha.powu(m as u32);
            }
        }
        ModeMoments {
            n_max,
            method: None,
            gnm,
            tail_estimate: tail_bound(alpha.norm(), n_max, 0.0),
            quadrature_error: 0.0,
        }
    }

    pub fn vacuum(n_max: usize) -> Self {
        Self::coherent(Complex64::new(0.0, 0.0), n_max)
    }

    /// Largest `|𝒢_{mn} − conj 𝒢_{nm}|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..=self.n_max {
            for m in 0..=self.n_max {
                worst = worst.max((self.get(m, n) - self.get(n, m).conj()).norm());
            }
        }
        worst
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn tail_bound(c_abs: f64, n_max: usize, max_re_f: f64) -> f64 {
    let k = n_max + 1;
    (2.0 * c_abs).powi(k as i32) / factorial(k) * max_re_f.exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MomentOptions {
    pub scattering: ScatteringOptions,
    /// Gauss-Legendre order per dimension for the exact method; the error
    /// estimate compares against twice this order.
    pub exact_order: usize,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions {
            scattering: ScatteringOptions::default(),
            exact_order: 20,
        }
    }
}

pub fn mode_moments(
    input: &CoherentInput,
    kernel: &PhaseKernel,
    probe: &ProbeMode,
    n_max: usize,
    method: MomentMethod,
    opts: &MomentOptions,
) -> Result<ModeMoments> {
    if n_max > MAX_ORDER {
        return Err(Error::invalid("n_max", format!("at most {MAX_ORDER}")));
    }
    match method {
        MomentMethod::ExactQuadrature => exact_moments(input, kernel, probe, n_max, opts),
        MomentMethod::NarrowProbe => narrow_moments(input, kernel, probe, n_max, opts),
    }
}

fn narrow_moments(
    input: &CoherentInput,
    kernel: &PhaseKernel,
    probe: &ProbeMode,
    n_max: usize,
    opts: &MomentOptions,
) -> Result<ModeMoments> {
    let l = probe.l_probe();
    if l > kernel.xi_out() / 10.0 || l > input.l_coh() / 10.0 {
        return Err(Error::Precondition(format!(
            "narrow-probe moments need l_probe <= xi_out/10 and l_coh/10 (l_probe = {l}, xi_out = {}, l_coh = {})",
            kernel.xi_out(),
            input.l_coh()
        )));
    }
    let c = probe.overlap(input)?;
    let tau0 = probe.center();
    let phi0 = kernel.phi0();
    // F_Δ for Δ = 0..=n_max; F_{−Δ} = conj F_Δ
    let f_pos = (0..=n_max)
        .into_par_iter()
        .map(|d| {
            let creators = vec![tau0; d];
            fluctuation_exponent(input, kernel, &creators, &[], &opts.scattering)
        })
        .collect::<Result<Vec<_>>>()?;
    let quadrature_error = f_pos.iter().fold(0.0f64, |e, x| e.max(x.error));
    let max_re_f = f_pos.iter().fold(f64::NEG_INFINITY, |m, x| m.max(x.value.re));
    let size = n_max + 1;
    let mut gnm = vec![Complex64::new(0.0, 0.0); size * size];
    let cpow: Vec<Complex64> = (0..size).map(|k| c.powu(k as u32)).collect();
    for n in 0..size {
        for m in n..size {
            let f = f_pos[m - n].value.conj();
            let nn = (n * n.saturating_sub(1)) as f64;
            let mm = (m * m.saturating_sub(1)) as f64;
            let phase = Complex64::new(0.0, 0.5 * (nn - mm) * phi0);
            let v = cpow[n].conj() * cpow[m] * (phase + f).exp();
            gnm[n * size + m] = v;
            gnm[m * size + n] = v.conj();
        }
    }
    gnm[0] = Complex64::new(1.0, 0.0);
    Ok(ModeMoments {
        n_max,
        method: Some(MomentMethod::NarrowProbe),
        gnm,
        tail_estimate: tail_bound(c.norm(), n_max, max_re_f),
        quadrature_error,
    })
}

fn exact_moments(
    input: &CoherentInput,
    kernel: &PhaseKernel,
    probe: &ProbeMode,
    n_max: usize,
    opts: &MomentOptions,
) -> Result<ModeMoments> {
    if 2 * n_max > 4 {
        return Err(Error::Precondition(format!(
            "exact-quadrature moments need n + m <= 4, so n_max <= 2 (got {n_max})"
        )));
    }
    let size = n_max + 1;
    let pairs: Vec<(usize, usize)> = (0..size).flat_map(|n| (n..size).map(move |m| (n, m))).collect();
    let values = pairs
        .iter()
        .map(|&(n, m)| exact_moment(input, kernel, probe, n, m, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut gnm = vec![Complex64::new(0.0, 0.0); size * size];
    let mut quadrature_error: f64 = 0.0;
    for (&(n, m), &(v, e)) in pairs.iter().zip(&values) {
        gnm[n * size + m] = v;
        gnm[m * size + n] = v.conj();
        quadrature_error = quadrature_error.max(e);
    }
    let c = probe.overlap(input)?;
    Ok(ModeMoments {
        n_max,
        method: Some(MomentMethod::ExactQuadrature),
        gnm,
        tail_estimate: tail_bound(c.norm(), n_max, 0.0),
        quadrature_error,
    })
}

/// One moment by tensor Gauss-Legendre quadrature of the closed-form
/// correlator over the probe window; returns the value and the difference
/// to the same rule at half the order.
pub fn exact_moment(
    input: &CoherentInput,
    kernel: &PhaseKernel,
    probe: &ProbeMode,
    n: usize,
    m: usize,
    opts: &MomentOptions,
) -> Result<(Complex64, f64)> {
    if n + m > 4 {
        return Err(Error::Precondition(format!("exact-quadrature moments need n + m <= 4 (got {})", n + m)));
    }
    if n + m == 0 {
        return Ok((Complex64::new(1.0, 0.0), 0.0));
    }
    let p = opts.exact_order.max(2);
    let coarse = tensor_moment(input, kernel, probe, n, m, p, &opts.scattering)?;
    let fine = tensor_moment(input, kernel, probe, n, m, 2 * p, &opts.scattering)?;
    Ok((fine, (fine - coarse).norm()))
}

/// Visits nondecreasing index tuples of length `len` over `0..p`, passing
/// the number of distinct orderings of each tuple.
fn sorted_tuples(len: usize, p: usize, visit: &mut dyn FnMut(&[usize], f64)) {
    fn rec(idx: &mut Vec<usize>, len: usize, start: usize, p: usize, visit: &mut dyn FnMut(&[usize], f64)) {
        if idx.len() == len {
            let mut mult = factorial(len);
            let mut run = 1;
            for w in idx.windows(2) {
                if w[0] == w[1] {
                    run += 1;
                } else {
                    mult /= factorial(run);
                    run = 1;
                }
            }
            mult /= factorial(run);
            visit(idx, mult);
            return;
        }
        for i in start..p {
            idx.push(i);
            rec(idx, len, i, p, visit);
            idx.pop();
        }
    }
    rec(&mut Vec::with_capacity(len), len, 0, p, visit);
}

fn tensor_moment(
    input: &CoherentInput,
    kernel: &PhaseKernel,
    probe: &ProbeMode,
    n: usize,
    m: usize,
    p: usize,
    sopts: &ScatteringOptions,
) -> Result<Complex64> {
    let (lo, hi) = match probe.shape {
        // the product of mode functions is negligible past six widths
        Shape::Gaussian { width } => (probe.center - 6.0 * width, probe.center + 6.0 * width),
        Shape::Custom { .. } => probe.window(),
    };
    let (x, w) = gauss_legendre(p);
    let half = 0.5 * (hi - lo);
    let nodes: Vec<f64> = x.iter().map(|t| lo + half * (t + 1.0)).collect();
    let weights: Vec<f64> = w.iter().map(|v| v * half).collect();
    let mut left: Vec<(Vec<usize>, f64)> = Vec::new();
    sorted_tuples(n, p, &mut |idx, mult| left.push((idx.to_vec(), mult)));
    let mut right: Vec<(Vec<usize>, f64)> = Vec::new();
    sorted_tuples(m, p, &mut |idx, mult| right.push((idx.to_vec(), mult)));
    let jobs: Vec<_> =
        left.iter().flat_map(|a| right.iter().map(move |b| (a, b))).collect();
    let terms = jobs
        .par_iter()
        .map(|((li, lm), (ri, rm))| {
            let mut points = Vec::with_capacity(n + m);
            let mut weight = Complex64::new(lm * rm, 0.0);
            for &i in li {
                points.push(nodes[i]);
                weight *= probe.evaluate(nodes[i]).conj() * weights[i];
            }
            for &j in ri {
                points.push(nodes[j]);
                weight *= probe.evaluate(nodes[j]) * weights[j];
            }
            if weight.norm() == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let req = CorrelatorRequest { n, m, points };
            Ok(weight * correlator(input, kernel, &req, sopts)?.value)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sum = CompensatedSum::<Complex64>::default();
    for t in terms {
        sum.add(t);
    }
    Ok(sum.value())
}

/// `∂_{α*}ⁿ ∂_α^m e^{−2αα*}` at `α`.
pub fn gaussian_derivative(n: usize, m: usize, alpha: Complex64) -> Complex64 {
    let ac = alpha.conj();
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=n.min(m) {
        let coef = factorial(n) / (factorial(k) * factorial(n - k)) * factorial(m) / factorial(m - k);
        sum += ac.powu((m - k) as u32) * (-2.0 * alpha).powu((n - k) as u32) * coef;
    }
    sum * (-2.0f64).powi(m as i32) * (-2.0 * alpha.norm_sqr()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nq: usize,
    pub np: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, points: usize) -> Self {
        GridSpec {
            q_min: -half_width,
            q_max: half_width,
            p_min: -half_width,
            p_max: half_width,
            nq: points,
            np: points,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.q_max > self.q_min && self.p_max > self.p_min) || self.nq < 2 || self.np < 2 {
            return Err(Error::invalid("grid", "need nonempty ranges and at least two points per axis"));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WignerOptions {
    /// Series is truncated once the next shell's term bound falls below
    /// this fraction of the peak scale 2/π.
    pub truncation_tolerance: f64,
}

impl Default for WignerOptions {
    fn default() -> Self {
        WignerOptions {
            truncation_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WignerDiagnostics {
    pub truncation_order: usize,
    /// Bound on the first dropped shell.
    pub tail_bound: f64,
    /// Largest |contribution| of the last included shell over the grid.
    pub last_shell: f64,
    /// Largest |Im W| before taking the real part.
    pub imaginary_residual: f64,
    pub converged: bool,
}

/// Row-major samples, `values[i * p.len() + j] = W(q[i], p[j])`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WignerGrid {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub values: Vec<f64>,
    pub diagnostics: WignerDiagnostics,
}

/// Upper bound of `|∂_{α*}ⁿ ∂_α^m e^{−2|α|²}|` for `|α| ≤ r_max`.
fn derivative_bound(n: usize, m: usize, r_max: f64) -> f64 {
    let mut best: f64 = 0.0;
    for s in 0..=64 {
        let r = r_max * s as f64 / 64.0;
        let mut poly = 0.0;
        for k in 0..=n.min(m) {
            let coef = factorial(n) / (factorial(k) * factorial(n - k)) * factorial(m) / factorial(m - k);
            poly += coef * 2f64.powi((n - k) as i32) * r.powi((n + m - 2 * k) as i32);
        }
        best = best.max(poly * 2f64.powi(m as i32) * (-2.0 * r * r).exp());
    }
    best
}

fn shell_bound(moments: &ModeMoments, shell: usize, r_max: f64) -> f64 {
    let mut best: f64 = 0.0;
    for a in 0..=shell {
        for (n, m) in [(shell, a), (a, shell)] {
            let g = if n <= moments.n_max && m <= moments.n_max {
                moments.get(n, m).norm()
            } else {
                moments.tail_estimate
            };
            best = best.max(g / (factorial(n) * factorial(m)) * derivative_bound(n, m, r_max));
        }
    }
    best
}

pub fn wigner(moments: &ModeMoments, spec: &GridSpec, opts: &WignerOptions) -> Result<WignerGrid> {
    spec.validate()?;
    let r_max = [spec.q_min, spec.q_max]
        .iter()
        .flat_map(|q| [spec.p_min, spec.p_max].map(|p| q.hypot(p)))
        .fold(0.0, f64::max);
    let target = opts.truncation_tolerance * 2.0 / PI;
    let mut order = moments.n_max;
    let mut converged = false;
    for s in 0..=moments.n_max {
        if shell_bound(moments, s + 1, r_max) < target {
            order = s;
            converged = true;
            break;
        }
    }
    let tail = shell_bound(moments, order + 1, r_max);
    let size = order + 1;
    // Wigner coefficients a_{nmk} = 𝒢_{nm} (−1)^k 2^{n+m−k} / (k!(n−k)!(m−k)!)
    let mut terms: Vec<(usize, usize, usize, Complex64)> = Vec::new();
    for n in 0..size {
        for m in 0..size {
            let g = moments.get(n, m);
            if g == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..=n.min(m) {
                let coef = (-1f64).powi(k as i32) * 2f64.powi((n + m - k) as i32)
                    / (factorial(k) * factorial(n - k) * factorial(m - k));
                terms.push((n, m, k, g * coef));
            }
        }
    }
    let q = GridSpec::axis(spec.q_min, spec.q_max, spec.nq);
    let p = GridSpec::axis(spec.p_min, spec.p_max, spec.np);
    let rows: Vec<(Vec<f64>, f64, f64)> = q
        .par_iter()
        .map(|&qi| {
            let mut row = Vec::with_capacity(p.len());
            let mut last: f64 = 0.0;
            let mut imag: f64 = 0.0;
            let mut apow = vec![Complex64::new(1.0, 0.0); size];
            let mut cpow = vec![Complex64::new(1.0, 0.0); size];
            for &pj in &p {
                let alpha = Complex64::new(qi, pj);
                for k in 1..size {
                    apow[k] = apow[k - 1] * alpha;
                    cpow[k] = cpow[k - 1] * alpha.conj();
                }
                let mut sum = CompensatedSum::<Complex64>::default();
                let mut shell = Complex64::new(0.0, 0.0);
                for &(n, m, k, a) in &terms {
                    let t = a * cpow[m - k] * apow[n - k];
                    sum.add(t);
                    if n.max(m) == order {
                        shell += t;
                    }
                }
                let scale = 2.0 / PI * (-2.0 * alpha.norm_sqr()).exp();
                let w = sum.value() * scale;
                last = last.max(shell.norm() * scale);
                imag = imag.max(w.im.abs());
                row.push(w.re);
            }
            (row, last, imag)
        })
        .collect();
    let mut values = Vec::with_capacity(q.len() * p.len());
    let mut last_shell: f64 = 0.0;
    let mut imaginary_residual: f64 = 0.0;
    for (row, last, imag) in rows {
        values.extend(row);
        last_shell = last_shell.max(last);
        imaginary_residual = imaginary_residual.max(imag);
    }
    Ok(WignerGrid {
        q,
        p,
        values,
        diagnostics: WignerDiagnostics {
            truncation_order: order,
            tail_bound: tail,
            last_shell,
            imaginary_residual,
            converged,
        },
    })
}

impl WignerGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p.len() + j]
    }

    fn integrate_with(&self, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let wq = trapezoid_weights(&self.q);
        let wp = trapezoid_weights(&self.p);
        let mut sum = CompensatedSum::<f64>::default();
        for (i, &qi) in self.q.iter().enumerate() {
            for (j, &pj) in self.p.iter().enumerate() {
                sum.add(wq[i] * wp[j] * f(qi, pj, self.at(i, j)));
            }
        }
        sum.value()
    }

    /// `∫∫ W dq dp`
    pub fn integral(&self) -> f64 {
        self.integrate_with(|_, _, w| w)
    }

    /// `(⟨q⟩, ⟨p⟩)`
    pub fn mean(&self) -> (f64, f64) {
        let norm = self.integral();
        (
            self.integrate_with(|q, _, w| q * w) / norm,
            self.integrate_with(|_, p, w| p * w) / norm,
        )
    }

    /// Symmetric covariance `[[Vqq, Vqp], [Vqp, Vpp]]`; a coherent state
    /// has `1/4` on the diagonal.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let norm = self.integral();
        let (mq, mp) = self.mean();
        let vqq = self.integrate_with(|q, _, w| (q - mq) * (q - mq) * w) / norm;
        let vpp = self.integrate_with(|_, p, w| (p - mp) * (p - mp) * w) / norm;
        let vqp = self.integrate_with(|q, p, w| (q - mq) * (p - mp) * w) / norm;
        [[vqq, vqp], [vqp, vpp]]
    }

    /// Eigenvalues `(minor, major)` of the covariance.
    pub fn principal_variances(&self) -> (f64, f64) {
        let [[a, b], [_, d]] = self.covariance();
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        (mid - rad, mid + rad)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// CSV `q,p,W`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "q,p,W")?;
        for (i, &qi) in self.q.iter().enumerate() {
            for (j, &pj) in self.p.iter().enumerate() {
                writeln!(out, "{qi:.17e},{pj:.17e},{:.17e}", self.at(i, j))?;
            }
        }
        Ok(())
    }
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = 0.5 * (x[i + 1] - x[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

/// `π ∫∫ W² dq dp`: 1 for pure states, less for mixed ones.
pub fn purity(grid: &WignerGrid) -> f64 {
    PI * grid.integrate_with(|_, _, w| w * w)
}


#[cfg(test)]
mod properties {
    use num_complex::Complex64;
    use proptest::prelude::*;

    use crate::homodyne::{mode_moments, wigner, GridSpec, MomentMethod, MomentOptions, ProbeMode, WignerOptions};
    use crate::phase::{KernelOptions, PhaseKernel};
    use crate::scattering::CoherentInput;

    fn universal(phi0: f64) -> PhaseKernel {
        PhaseKernel::universal(phi0, 2.0, &KernelOptions::default()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn wigner_is_real_and_hermitian(phi0 in 0.0f64..std::f64::consts::PI, re in -1.0f64..1.0, im in -1.0f64..1.0) {
            let probe = ProbeMode::gaussian(0.0, 0.1).unwrap();
            let input = CoherentInput::gaussian(Complex64::new(re, im) * 3.0, 0.0, 10.0).unwrap();
            let m = mode_moments(&input, &universal(phi0), &probe, 12, MomentMethod::NarrowProbe, &MomentOptions::default())
                .unwrap();
            prop_assert!(m.hermiticity_defect() < 1e-12);
            let w = wigner(&m, &GridSpec::square(3.5, 31), &WignerOptions::default()).unwrap();
            prop_assert!(w.diagnostics.imaginary_residual < 1e-8);
        }

        #[test]
        fn free_round_trip_recovers_coherent_mean(re in -1.0f64..1.0, im in -1.0f64..1.0) {
            let probe = ProbeMode::gaussian(0.0, 0.1).unwrap();
            let unit = CoherentInput::gaussian(Complex64::new(1.0, 0.0), 0.0, 10.0).unwrap();
            let input = CoherentInput::gaussian(Complex64::new(re, im) / probe.overlap(&unit).unwrap(), 0.0, 10.0).unwrap();
            let zero = PhaseKernel::zero(2.0, 50.0);
            let m = mode_moments(&input, &zero, &probe, 20, MomentMethod::NarrowProbe, &MomentOptions::default()).unwrap();
            let w = wigner(&m, &GridSpec::square(4.5, 91), &WignerOptions::default()).unwrap();
            let (q, p) = w.mean();
            prop_assert!((q - re).abs() < 1e-3 && (p - im).abs() < 1e-3);
            let (minor, major) = w.principal_variances();
            prop_assert!((minor - 0.25).abs() < 1e-3 && (major - 0.25).abs() < 1e-3);
        }
    }
}
