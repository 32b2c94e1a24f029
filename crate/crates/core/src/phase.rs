//! Correlation phase kernels.
//!
//! Two photons separated by `u` in the transformed coordinate leave the
//! medium with the relative phase
//!
//! ```text
//! φ(u) = (1/c) ∫ dw ñ(w+u) ñ(w) V(ζ(w+u) − ζ(w)),
//! ```
//!
//! where `ñ(w) = n(ζ(w))` is the Rydberg fraction along the transformed
//! axis. Past the cloud the transformed and lab separations coincide, so
//! the kernel argument is also the separation of the outgoing photons.
//!
//! The integral is evaluated in lab coordinates: with `y = ζ(w)` one has
//! `ñ(w) dw = (g₀²/Ω²) n_a(y) dy`, which keeps the integrand free of the
//! Jacobian singularities a change of variables would otherwise add.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::{NBodyPotential, TwoBodyPotential};
use crate::interp::CubicTable;
use crate::medium::{derive, CoordinateMap, MediumProfile, PolaritonParams};
use crate::quadrature::{kronrod_panel, integrate, CompensatedSum, Estimate, Tolerance};

/// Tabulation controls for [`build_phase_kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelOptions {
    /// Per-sample quadrature tolerance. `abs` is taken relative to the
    /// kernel scale `|V(0)| (g₀²/Ω²) ∫n_a / c`.
    pub quadrature: Tolerance,
    /// Interpolation error target relative to `max |φ|`.
    pub table_tolerance: f64,
    /// Table extent past the transformed cloud length, in units of ξ_out.
    pub extent_margin: f64,
    pub initial_samples: usize,
    pub max_samples: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            quadrature: Tolerance {
                abs: 1e-14,
                rel: 1e-11,
                max_intervals: 4000,
            },
            table_tolerance: 1e-10,
            extent_margin: 10.0,
            initial_samples: 129,
            max_samples: 200_000,
        }
    }
}

/// Exact kernel of a homogeneous slab,
/// `φ(u) = φ(0) [1 + (β̄²u/ξ)⁶]⁻¹ max(0, 1 − β̄²|u|/L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabPhase {
    pub phi0: f64,
    pub beta_sq: f64,
    pub xi: f64,
    pub length: f64,
}

impl SlabPhase {
    pub fn new(params: &PolaritonParams, medium: &MediumProfile) -> Result<Self> {
        let (n, length) = medium
            .as_slab()
            .ok_or_else(|| Error::Precondition("slab closed form needs a homogeneous slab".into()))?;
        let omega2 = params.omega * params.omega;
        let g2 = params.g0 * params.g0 * n;
        let phi0 = g2 * g2 * params.potential_depth() * length / ((g2 + omega2) * omega2 * params.c);
        Ok(SlabPhase {
            phi0,
            beta_sq: omega2 / (g2 + omega2),
            xi: params.blockade_radius(),
            length,
        })
    }

    pub fn evaluate(&self, u: f64) -> f64 {
        let s = self.beta_sq * u / self.xi;
        let s2 = s * s;
        let overlap = (1.0 - self.beta_sq * u.abs() / self.length).max(0.0);
        self.phi0 / (1.0 + s2 * s2 * s2) * overlap
    }

    /// Slab length in the transformed coordinate, `L/β̄²`.
    pub fn transformed_length(&self) -> f64 {
        self.length / self.beta_sq
    }
}

/// Both printed forms of the slab peak phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakPhase {
    /// `g⁴ V(0) L / ((g² + Ω²) Ω² c)`
    pub from_potential: f64,
    /// `−(g²/(g² + Ω²)) κγ/δ`
    pub from_optical_depth: f64,
}

pub fn peak_phase(params: &PolaritonParams, medium: &MediumProfile) -> Result<PeakPhase> {
    let (_, length) = medium
        .as_slab()
        .ok_or_else(|| Error::Precondition("peak phase closed form needs a homogeneous slab".into()))?;
    let d = derive(params, medium)?;
    let omega2 = params.omega * params.omega;
    let g2 = d.g * d.g;
    let from_potential = g2 * g2 * params.potential_depth() * length / ((g2 + omega2) * omega2 * params.c);
    let from_optical_depth = -(g2 / (g2 + omega2)) * d.kappa * params.gamma / params.delta;
    let scale = from_potential.abs().max(from_optical_depth.abs());
    if (from_potential - from_optical_depth).abs() > 1e-12 * scale {
        return Err(Error::Numerical(format!(
            "peak phase forms disagree: {from_potential:e} vs {from_optical_depth:e}"
        )));
    }
    Ok(PeakPhase {
        from_potential,
        from_optical_depth,
    })
}

fn check_map(medium: &MediumProfile, map: &CoordinateMap) -> Result<()> {
    if medium.support() != map.medium().support() {
        return Err(Error::invalid("map", "coordinate map was built for a different medium"));
    }
    Ok(())
}

/// Direct quadrature of the two-body kernel at single separations.
#[derive(Debug, Clone)]
pub struct PhaseIntegrator<'a> {
    map: &'a CoordinateMap,
    potential: TwoBodyPotential,
    inv_c: f64,
    tol: Tolerance,
}

impl<'a> PhaseIntegrator<'a> {
    pub fn new(params: &PolaritonParams, map: &'a CoordinateMap, potential: TwoBodyPotential) -> Result<Self> {
        Self::with_tolerance(params, map, potential, &KernelOptions::default().quadrature)
    }

    pub fn with_tolerance(
        params: &PolaritonParams,
        map: &'a CoordinateMap,
        potential: TwoBodyPotential,
        tol: &Tolerance,
    ) -> Result<Self> {
        if !(params.c > 0.0) {
            return Err(Error::invalid("params.c", "must be positive"));
        }
        let mut integrator = PhaseIntegrator {
            map,
            potential,
            inv_c: 1.0 / params.c,
            tol: *tol,
        };
        let column = map.medium().column_density(&Tolerance::default())?;
        let scale = potential.depth.abs() * map.coupling_ratio() * column * integrator.inv_c;
        integrator.tol.abs = tol.abs * scale.max(f64::MIN_POSITIVE);
        Ok(integrator)
    }

    /// φ(u) by adaptive quadrature; even in `u` by construction.
    pub fn phase_at(&self, u: f64) -> Result<Estimate<f64>> {
        let u = u.abs();
        let map = self.map;
        let medium = map.medium();
        let (xmin, xmax) = medium.support();
        let (zmin, zmax) = map.transformed_support();
        let empty = Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            intervals: 0,
        };
        if u >= zmax - zmin {
            return Ok(empty);
        }
        let lo = xmin;
        let hi = map.inverse(zmax - u).min(xmax);
        if hi <= lo {
            return Ok(empty);
        }
        let mut points = vec![lo, hi];
        for b in medium.breakpoints() {
            for p in [b, map.inverse(map.forward(b) - u)] {
                if p > lo && p < hi {
                    points.push(p);
                }
            }
        }
        let k = map.coupling_ratio();
        let integrand = |y: f64| {
            let na = medium.density(y);
            if na == 0.0 {
                return 0.0;
            }
            let xp = map.inverse(map.forward(y) + u);
            k * na * map.rydberg_fraction(xp) * self.potential.evaluate(xp - y) * self.inv_c
        };
        Ok(integrate(integrand, &points, &self.tol)?)
    }
}

/// Tabulated even kernel φ(u), stored for `u ≥ 0` and zero past `extent`.
#[derive(Debug, Clone)]
pub struct PhaseKernel {
    table: CubicTable,
    extent: f64,
    xi_out: f64,
    kinks: Vec<f64>,
    slab: Option<SlabPhase>,
}

impl PhaseKernel {
    /// The identically vanishing kernel.
    pub fn zero(xi_out: f64, extent: f64) -> Self {
        PhaseKernel {
            table: CubicTable::new(vec![0.0, extent.max(f64::MIN_POSITIVE)], vec![0.0, 0.0])
                .expect("two-node zero table"),
            extent,
            xi_out,
            kinks: Vec::new(),
            slab: None,
        }
    }

    /// Tabulates an arbitrary even function on `[0, extent]`. Kinks at
    /// `breaks` are placed on nodes and never interpolated across.
    pub fn from_fn<F>(f: F, xi_out: f64, extent: f64, breaks: &[f64], opts: &KernelOptions) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::invalid("kernel.extent", "must be positive and finite"));
        }
        let table = tabulate(&f, extent, breaks, opts)?;
        let kinks = breaks.iter().copied().filter(|&b| b > 0.0 && b < extent).collect();
        Ok(PhaseKernel {
            table,
            extent,
            xi_out,
            kinks,
            slab: None,
        })
    }

    /// `φ₀ / (1 + (u/ξ_out)⁶)`, the long-cloud limit.
    pub fn universal(phi0: f64, xi_out: f64, opts: &KernelOptions) -> Result<Self> {
        let extent = (40.0 + opts.extent_margin) * xi_out;
        Self::from_fn(
            |u| {
                let s = u / xi_out;
                Ok(phi0 / (1.0 + s.powi(6)))
            },
            xi_out,
            extent,
            &[],
            opts,
        )
    }

    pub fn evaluate(&self, u: f64) -> f64 {
        let a = u.abs();
        if a >= self.extent {
            0.0
        } else {
            self.table.eval(a)
        }
    }

    pub fn phi0(&self) -> f64 {
        self.table.values()[0]
    }

    pub fn xi_out(&self) -> f64 {
        self.xi_out
    }

    /// Separation past which the kernel is treated as zero.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Separations `u > 0` where the kernel may have a kink.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn slab_closed_form(&self) -> Option<&SlabPhase> {
        self.slab.as_ref()
    }

    /// Sample nodes `u ≥ 0` and values.
    pub fn samples(&self) -> (&[f64], &[f64]) {
        (self.table.nodes(), self.table.values())
    }

    /// Same shape with peak `phi0`; the slab closed form is dropped unless
    /// it can be rescaled consistently.
    pub fn rescaled(&self, phi0: f64) -> Result<Self> {
        let current = self.phi0();
        if current == 0.0 {
            return Err(Error::Precondition("cannot rescale a kernel with zero peak".into()));
        }
        let factor = phi0 / current;
        Ok(PhaseKernel {
            table: self.table.map_values(|v| v * factor),
            extent: self.extent,
            xi_out: self.xi_out,
            kinks: self.kinks.clone(),
            slab: self.slab.map(|s| SlabPhase { phi0, ..s }),
        })
    }

    /// Two-column CSV `u,phi` over the mirrored table.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "u,phi")?;
        let (u, phi) = self.samples();
        for i in (1..u.len()).rev() {
            writeln!(out, "{:.17e},{:.17e}", -u[i], phi[i])?;
        }
        for i in 0..u.len() {
            writeln!(out, "{:.17e},{:.17e}", u[i], phi[i])?;
        }
        Ok(())
    }
}

fn tabulate<F>(f: &F, extent: f64, breaks: &[f64], opts: &KernelOptions) -> Result<CubicTable>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let n0 = opts.initial_samples.max(4);
    let mut xs: Vec<f64> = (0..n0).map(|i| extent * i as f64 / (n0 - 1) as f64).collect();
    let inner: Vec<f64> = breaks.iter().copied().filter(|&b| b > 0.0 && b < extent).collect();
    xs.extend(&inner);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let ys = xs.par_iter().map(|&u| f(u)).collect::<Result<Vec<f64>>>()?;
    let mut points: Vec<(f64, f64)> = xs.into_iter().zip(ys).collect();
    let mut active: Vec<(f64, f64)> = points.windows(2).map(|w| (w[0].0, w[1].0)).collect();
    let min_width = 1e-12 * extent;

    loop {
        let (x, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let table = CubicTable::with_breaks(x, y, &inner)?;
        if active.is_empty() || scale == 0.0 {
            return Ok(table);
        }
        if points.len() + active.len() > opts.max_samples {
            let (a, b) = active[0];
            return Err(Error::Numerical(format!(
                "kernel table exceeded {} samples; still refining near u in [{a}, {b}]",
                opts.max_samples
            )));
        }
        let tol = opts.table_tolerance * scale;
        let fresh = active
            .par_iter()
            .map(|&(a, b)| {
                let m = 0.5 * (a + b);
                f(m).map(|v| (a, m, b, v, (v - table.eval(m)).abs()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut next = Vec::new();
        for &(a, m, b, v, err) in &fresh {
            points.push((m, v));
            if err > tol && b - a > min_width {
                next.push((a, m));
                next.push((m, b));
            }
        }
        points.sort_by(|p, q| p.0.total_cmp(&q.0));
        active = next;
    }
}

/// Builds the tabulated two-body kernel over `|u| ≤` transformed cloud
/// length plus `extent_margin` ξ_out.
pub fn build_phase_kernel(
    params: &PolaritonParams,
    medium: &MediumProfile,
    potential: &TwoBodyPotential,
    map: &CoordinateMap,
    opts: &KernelOptions,
) -> Result<PhaseKernel> {
    check_map(medium, map)?;
    let integrator = PhaseIntegrator::with_tolerance(params, map, *potential, &opts.quadrature)?;
    let (zmin, zmax) = map.transformed_support();
    let length = zmax - zmin;
    let xi_out = potential.xi * (1.0 + map.coupling_ratio() * medium.reference_density());
    let extent = length + opts.extent_margin * xi_out;
    let mut kernel = PhaseKernel::from_fn(|u| Ok(integrator.phase_at(u)?.value), xi_out, extent, &[length], opts)?;
    if medium.as_slab().is_some() {
        kernel.slab = Some(SlabPhase::new(params, medium)?);
    }
    Ok(kernel)
}

/// σ, Φ and η of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrSummary {
    /// σ = ∫ φ du
    pub sigma: f64,
    /// Φ = ∫ sin φ du / ξ_out
    pub phi: f64,
    /// η = ∫ (1 − cos φ) du / ξ_out
    pub eta: f64,
}

pub fn kerr_summary(kernel: &PhaseKernel, xi_out: f64) -> KerrSummary {
    let (u, _) = kernel.samples();
    let mut sigma = CompensatedSum::<f64>::default();
    let mut phi = CompensatedSum::<f64>::default();
    let mut eta = CompensatedSum::<f64>::default();
    for w in u.windows(2) {
        sigma.add(kronrod_panel(&|t| kernel.evaluate(t), w[0], w[1]));
        phi.add(kronrod_panel(&|t| kernel.evaluate(t).sin(), w[0], w[1]));
        eta.add(kronrod_panel(
            &|t| {
                let s = (0.5 * kernel.evaluate(t)).sin();
                2.0 * s * s
            },
            w[0],
            w[1],
        ));
    }
    KerrSummary {
        sigma: 2.0 * sigma.value(),
        phi: 2.0 * phi.value() / xi_out,
        eta: 2.0 * eta.value() / xi_out,
    }
}

/// Long-slab Kerr coefficient `(2π/3) φ(0) ξ_out`, signed like ∫φ.
///
/// The frequently quoted `(2π/3)(g²/(Ω²+g²))(κγ/δ) ξ_out` is its negative.
pub fn sigma_long_slab(phi0: f64, xi_out: f64) -> f64 {
    2.0 * std::f64::consts::PI / 3.0 * phi0 * xi_out
}

/// Kerr summaries for a family of kernels sharing the shape of `kernel`.
pub fn kerr_scan(kernel: &PhaseKernel, phi0_values: &[f64]) -> Result<Vec<(f64, KerrSummary)>> {
    phi0_values
        .par_iter()
        .map(|&p| {
            let k = kernel.rescaled(p)?;
            Ok((p, kerr_summary(&k, kernel.xi_out())))
        })
        .collect()
}

/// Tabulation controls for [`build_phi3`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThreeBodyOptions {
    pub quadrature: Tolerance,
    /// Samples per axis; forced odd so that zero is a node.
    pub grid_points: usize,
}

impl Default for ThreeBodyOptions {
    fn default() -> Self {
        ThreeBodyOptions {
            quadrature: Tolerance::new(1e-14, 1e-10),
            grid_points: 41,
        }
    }
}

/// Direct quadrature of the three-body kernel.
#[derive(Debug, Clone)]
pub struct ThreeBodyIntegrator<'a> {
    map: &'a CoordinateMap,
    u3: &'a NBodyPotential,
    inv_c: f64,
    tol: Tolerance,
}

impl<'a> ThreeBodyIntegrator<'a> {
    pub fn new(params: &PolaritonParams, map: &'a CoordinateMap, u3: &'a NBodyPotential, tol: &Tolerance) -> Result<Self> {
        if u3.arity() != 3 {
            return Err(Error::invalid("u3.arity", format!("expected 3, got {}", u3.arity())));
        }
        if !(params.c > 0.0) {
            return Err(Error::invalid("params.c", "must be positive"));
        }
        Ok(ThreeBodyIntegrator {
            map,
            u3,
            inv_c: 1.0 / params.c,
            tol: *tol,
        })
    }

    /// φ₃(u, v): photons at transformed offsets `u`, `v` and `0`.
    pub fn phase_at(&self, u: f64, v: f64) -> Result<Estimate<f64>> {
        let map = self.map;
        let medium = map.medium();
        let (xmin, xmax) = medium.support();
        let (zmin, zmax) = map.transformed_support();
        let wlo = zmin - u.min(v).min(0.0);
        let whi = zmax - u.max(v).max(0.0);
        let empty = Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            intervals: 0,
        };
        if whi <= wlo {
            return Ok(empty);
        }
        let lo = map.inverse(wlo).max(xmin);
        let hi = map.inverse(whi).min(xmax);
        if hi <= lo {
            return Ok(empty);
        }
        let mut points = vec![lo, hi];
        for b in medium.breakpoints() {
            let zb = map.forward(b);
            for p in [b, map.inverse(zb - u), map.inverse(zb - v)] {
                if p > lo && p < hi {
                    points.push(p);
                }
            }
        }
        let k = map.coupling_ratio();
        let integrand = |y: f64| {
            let na = medium.density(y);
            if na == 0.0 {
                return 0.0;
            }
            let w = map.forward(y);
            let xu = map.inverse(w + u);
            let xv = map.inverse(w + v);
            let nn = map.rydberg_fraction(xu) * map.rydberg_fraction(xv);
            if nn == 0.0 {
                return 0.0;
            }
            k * na * nn * self.u3.evaluate(&[xu, xv, y]) * self.inv_c
        };
        Ok(integrate(integrand, &points, &self.tol)?)
    }
}

/// φ₃ sampled on a square grid with bilinear interpolation, zero outside.
#[derive(Debug, Clone)]
pub struct ThreeBodyKernel {
    axis: Vec<f64>,
    values: Vec<f64>,
}

impl ThreeBodyKernel {
    pub fn zero(extent: f64) -> Self {
        ThreeBodyKernel {
            axis: vec![-extent, 0.0, extent],
            values: vec![0.0; 9],
        }
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    /// Row-major samples, `values[i * n + j] = φ₃(axis[i], axis[j])`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn evaluate(&self, u: f64, v: f64) -> f64 {
        let n = self.axis.len();
        let (lo, hi) = (self.axis[0], self.axis[n - 1]);
        if !(u >= lo && u <= hi && v >= lo && v <= hi) {
            return 0.0;
        }
        let h = (hi - lo) / (n - 1) as f64;
        let locate = |t: f64| {
            let s = (t - lo) / h;
            let i = (s.floor() as usize).min(n - 2);
            (i, s - i as f64)
        };
        let (i, a) = locate(u);
        let (j, b) = locate(v);
        let at = |i: usize, j: usize| self.values[i * n + j];
        (1.0 - a) * ((1.0 - b) * at(i, j) + b * at(i, j + 1)) + a * ((1.0 - b) * at(i + 1, j) + b * at(i + 1, j + 1))
    }

    /// Three-column CSV `u,v,phi3`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "u,v,phi3")?;
        let n = self.axis.len();
        for i in 0..n {
            for j in 0..n {
                writeln!(out, "{:.17e},{:.17e},{:.17e}", self.axis[i], self.axis[j], self.values[i * n + j])?;
            }
        }
        Ok(())
    }
}

/// Samples φ₃ over `|u|, |v| ≤` transformed cloud length.
pub fn build_phi3(
    params: &PolaritonParams,
    medium: &MediumProfile,
    u3: &NBodyPotential,
    map: &CoordinateMap,
    opts: &ThreeBodyOptions,
) -> Result<ThreeBodyKernel> {
    check_map(medium, map)?;
    let integrator = ThreeBodyIntegrator::new(params, map, u3, &opts.quadrature)?;
    let (zmin, zmax) = map.transformed_support();
    let extent = zmax - zmin;
    let n = opts.grid_points.max(3) | 1;
    let axis: Vec<f64> = (0..n)
        .map(|i| -extent + 2.0 * extent * i as f64 / (n - 1) as f64)
        .collect();
    // upper triangle only, mirrored afterwards
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let computed = pairs
        .par_iter()
        .map(|&(i, j)| integrator.phase_at(axis[i], axis[j]).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;
    let mut values = vec![0.0; n * n];
    for (&(i, j), &v) in pairs.iter().zip(&computed) {
        values[i * n + j] = v;
        values[j * n + i] = v;
    }
    Ok(ThreeBodyKernel { axis, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::make_constant_u3;

    fn params() -> PolaritonParams {
        PolaritonParams {
            omega: 1.0,
            delta: 100.0,
            gamma: 0.5,
            g0: 1.0,
            c6: 0.0,
            c: 1.0,
        }
        .with_blockade_radius(1.0)
    }

    fn slab_kernel(length: f64) -> (PhaseKernel, SlabPhase) {
        let p = params();
        let medium = MediumProfile::slab(1.0, length).unwrap();
        let map = CoordinateMap::build(&p, &medium).unwrap();
        let pot = TwoBodyPotential::from_params(&p).unwrap();
        let k = build_phase_kernel(&p, &medium, &pot, &map, &KernelOptions::default()).unwrap();
        let slab = SlabPhase::new(&p, &medium).unwrap();
        (k, slab)
    }

    #[test]
    fn slab_peak_example() {
        let p = params();
        let medium = MediumProfile::slab(1.0, 50.0).unwrap();
        let peak = peak_phase(&p, &medium).unwrap();
        assert!((peak.from_potential + 0.5).abs() < 1e-15);
        let flipped = peak_phase(&p.with_detuning(-100.0), &medium).unwrap();
        assert!((flipped.from_potential - 0.5).abs() < 1e-15);
        let weak = PolaritonParams { g0: 1e-6, ..p };
        assert!(peak_phase(&weak, &medium).unwrap().from_potential.abs() < 1e-20);
        let gauss = MediumProfile::gaussian(1.0, 5.0, 0.0).unwrap();
        assert!(matches!(peak_phase(&p, &gauss), Err(Error::Precondition(_))));
    }

    #[test]
    fn slab_kernel_matches_closed_form() {
        let (k, slab) = slab_kernel(50.0);
        assert!((k.phi0() + 0.5).abs() < 1e-10);
        // β̄²u = ξ: half the potential, reduced by the overlap factor
        let u = 2.0;
        let expected = -0.5 * 0.5 * (1.0 - 1.0 / 50.0);
        assert!((k.evaluate(u) - expected).abs() < 1e-9);
        for i in 0..200 {
            let u = 0.031 * i as f64;
            let exact = slab.evaluate(u);
            assert!((k.evaluate(u) - exact).abs() <= 1e-6 * exact.abs(), "u = {u}");
        }
    }

    #[test]
    fn kernel_even_bounded_and_compact() {
        let (k, _) = slab_kernel(10.0);
        let peak = k.phi0().abs();
        for i in 0..300 {
            let u = 0.1 * i as f64;
            assert_eq!(k.evaluate(u), k.evaluate(-u));
            assert!(k.evaluate(u).abs() <= peak * (1.0 + 1e-12));
        }
        assert_eq!(k.evaluate(20.0 + 1e-9), 0.0);
        assert_eq!(k.evaluate(1e6), 0.0);
    }

    #[test]
    fn zero_density_gives_zero_kernel() {
        let p = params();
        let medium = MediumProfile::slab(0.0, 10.0).unwrap();
        let map = CoordinateMap::build(&p, &medium).unwrap();
        let pot = TwoBodyPotential::from_params(&p).unwrap();
        let k = build_phase_kernel(&p, &medium, &pot, &map, &KernelOptions::default()).unwrap();
        assert!(k.samples().1.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gaussian_cloud_kernel_against_direct_quadrature() {
        let p = params();
        let medium = MediumProfile::gaussian(1.0, 6.0, 0.0).unwrap();
        let map = CoordinateMap::build(&p, &medium).unwrap();
        let pot = TwoBodyPotential::from_params(&p).unwrap();
        let k = build_phase_kernel(&p, &medium, &pot, &map, &KernelOptions::default()).unwrap();
        let direct = PhaseIntegrator::new(&p, &map, pot).unwrap();
        for u in [0.0, 0.77, 1.9, 3.3, 7.1, 15.0] {
            let d = direct.phase_at(u).unwrap().value;
            assert!((k.evaluate(u) - d).abs() < 1e-8 * k.phi0().abs(), "u = {u}");
        }
        assert!(k.phi0() < 0.0);
    }

    #[test]
    fn universal_unit_integral() {
        let k = PhaseKernel::universal(1.0, 1.0, &KernelOptions::default()).unwrap();
        let s = kerr_summary(&k, 1.0);
        assert!((s.sigma - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-7);
    }

    #[test]
    fn kerr_summary_weak_limit() {
        let base = PhaseKernel::universal(1.0, 2.0, &KernelOptions::default()).unwrap();
        let k = base.rescaled(1e-3).unwrap();
        let s = kerr_summary(&k, 2.0);
        assert!(s.eta >= 0.0);
        assert!((s.phi - s.sigma / 2.0).abs() < 1e-6 * s.phi.abs());
        assert!(s.eta / s.phi < 1e-3);
    }

    #[test]
    fn long_slab_sigma_sign() {
        let (k, _) = slab_kernel(200.0);
        let s = kerr_summary(&k, 2.0);
        let closed = sigma_long_slab(k.phi0(), 2.0);
        assert!(closed < 0.0);
        assert!(((s.sigma - closed) / closed).abs() < 0.005);
    }

    #[test]
    fn three_body_slab_peak_and_symmetry() {
        let p = params();
        let medium = MediumProfile::slab(1.0, 4.0).unwrap();
        let map = CoordinateMap::build(&p, &medium).unwrap();
        let u3 = make_constant_u3(0.3, 100.0).unwrap();
        let integ = ThreeBodyIntegrator::new(&p, &map, &u3, &Tolerance::new(1e-14, 1e-12)).unwrap();
        let nbar: f64 = 0.5;
        let lz = 8.0;
        let expected = nbar.powi(3) * 0.3 * lz;
        let got = integ.phase_at(0.0, 0.0).unwrap().value;
        assert!((got - expected).abs() < 1e-10 * expected);
        for (u, v) in [(0.3, -1.2), (2.5, 0.7), (-3.1, -0.2)] {
            let a = integ.phase_at(u, v).unwrap().value;
            let b = integ.phase_at(v, u).unwrap().value;
            assert!((a - b).abs() < 1e-12 * expected);
        }
        let opts = ThreeBodyOptions {
            grid_points: 9,
            ..Default::default()
        };
        let table = build_phi3(&p, &medium, &u3, &map, &opts).unwrap();
        assert!((table.evaluate(0.0, 0.0) - expected).abs() < 1e-10 * expected);
        assert_eq!(table.evaluate(1.3, -0.4), table.evaluate(-0.4, 1.3));
        let zero = make_constant_u3(0.0, 100.0).unwrap();
        let t0 = build_phi3(&p, &medium, &zero, &map, &opts).unwrap();
        assert!(t0.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn csv_export_is_mirrored() {
        let k = PhaseKernel::universal(1.0, 1.0, &KernelOptions::default()).unwrap();
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows = text.lines().count() - 1;
        assert_eq!(rows, 2 * k.samples().0.len() - 1);
    }
}

#[cfg(test)]
mod properties {
    use proptest::prelude::*;

    use crate::phase::{kerr_summary, sigma_long_slab, KernelOptions, PhaseKernel};

    fn universal(phi0: f64) -> PhaseKernel {
        PhaseKernel::universal(phi0, 2.0, &KernelOptions::default()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn kernel_is_even_and_peaked(phi0 in -6.0f64..6.0, u in -30.0f64..30.0) {
            let k = universal(phi0);
            prop_assert_eq!(k.evaluate(u), k.evaluate(-u));
            prop_assert!(k.evaluate(u).abs() <= phi0.abs() * (1.0 + 1e-12));
        }

        #[test]
        fn suppression_is_nonnegative(phi0 in -10.0f64..10.0) {
            prop_assert!(kerr_summary(&universal(phi0), 2.0).eta >= -1e-15);
        }
    }

    #[test]
    fn weak_kernel_limits() {
        let s = kerr_summary(&universal(1e-5), 2.0);
        assert!((s.phi - s.sigma / 2.0).abs() < 1e-9 * s.phi.abs());
        assert!(s.eta / s.phi < 1e-4);
        assert!((s.sigma - sigma_long_slab(1e-5, 2.0)).abs() < 1e-8 * s.sigma);
    }
}
