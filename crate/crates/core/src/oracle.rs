//! Brute-force reference: a truncated-Fock state on a discrete mode grid.
//!
//! The field is sampled on `M` cells of width `h`, with `ψ(x_k) = a_k/√h`.
//! A coherent input becomes the product of single-cell coherent states
//! `α_k = 𝓔(x_k)√h`, truncated to at most `N_trunc` photons. In the
//! occupation basis the amplitude of a configuration `c` is
//!
//! ```text
//! A(c) = e^{−n̄/2} Π_k α_k^{c_k}/√(c_k!) · e^{−iΘ(c)},
//! ```
//!
//! where `Θ` sums the pair (and triple) phases over all photons. The
//! number of configurations grows like `C(M+N, N)`, so amplitudes are
//! produced on demand inside explicit depth-first sector sums instead of
//! being stored.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::TwoBodyPotential;
use crate::medium::{CoordinateMap, MediumProfile, PolaritonParams};
use crate::phase::{build_phase_kernel, KernelOptions, PhaseKernel, ThreeBodyKernel};
use crate::quadrature::CompensatedSum;
use crate::scattering::{correlator, CoherentInput, CorrelatorRequest, ScatteringOptions};

/// Equally spaced nodes `x_k = x0 + k h`, `k = 0..m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    pub x0: f64,
    pub h: f64,
    pub m: usize,
}

impl ModeGrid {
    pub fn new(x0: f64, h: f64, m: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) || m == 0 || !x0.is_finite() {
            return Err(Error::invalid("grid", "need h > 0 and at least one cell"));
        }
        Ok(ModeGrid { x0, h, m })
    }

    /// Grid over the envelope window padded by `5 ξ_out` on each side.
    pub fn covering(input: &CoherentInput, xi_out: f64, h: f64) -> Result<Self> {
        let (lo, hi) = input.window();
        let lo = lo - 5.0 * xi_out;
        let span = hi + 5.0 * xi_out - lo;
        Self::new(lo, h, (span / h).ceil() as usize + 1)
    }

    pub fn node(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.h
    }

    /// Index of the node at `x`; off-grid points are rejected.
    pub fn index_of(&self, x: f64) -> Result<usize> {
        let s = (x - self.x0) / self.h;
        let k = s.round();
        if (s - k).abs() > 1e-9 || k < 0.0 || k >= self.m as f64 {
            return Err(Error::invalid("points", format!("{x} is not a grid node")));
        }
        Ok(k as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleOptions {
    /// Branches whose multiset weight falls below this are skipped; the
    /// skipped weight is bounded and reported.
    pub prune: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { prune: 1e-16 }
    }
}

#[derive(Debug, Clone)]
pub struct GridState {
    grid: ModeGrid,
    n_trunc: usize,
    alpha: Vec<Complex64>,
    nbar: f64,
    tail_weight: f64,
    // pair[i * m + j] = φ(x_i − x_j), present once a map has been applied
    pair: Option<Vec<f64>>,
    triple: Option<ThreeBodyKernel>,
}

/// `e^{−n̄} Σ_{N > n_trunc} n̄^N / N!`, summed directly.
pub fn poisson_tail(nbar: f64, n_trunc: usize) -> f64 {
    let mut term = (-nbar).exp();
    for n in 1..=n_trunc {
        term *= nbar / n as f64;
    }
    let mut tail = 0.0;
    let mut n = n_trunc + 1;
    loop {
        term *= nbar / n as f64;
        tail += term;
        if term <= 1e-18 * tail || term == 0.0 {
            break;
        }
        n += 1;
    }
    tail
}

pub fn prepare_coherent(input: &CoherentInput, grid: &ModeGrid, n_trunc: usize) -> Result<GridState> {
    let sqrt_h = grid.h.sqrt();
    let alpha: Vec<Complex64> = (0..grid.m).map(|k| input.amplitude(grid.node(k)) * sqrt_h).collect();
    let nbar: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    let tail_weight = poisson_tail(nbar, n_trunc);
    if tail_weight > 1e-6 {
        return Err(Error::Precondition(format!(
            "dropped Fock tail weight {tail_weight:e} exceeds 1e-6 (nbar = {nbar}, n_trunc = {n_trunc})"
        )));
    }
    Ok(GridState {
        grid: *grid,
        n_trunc,
        alpha,
        nbar,
        tail_weight,
        pair: None,
        triple: None,
    })
}

/// Multiplies every configuration by its pair (and triple) phase.
pub fn apply_phase_map(state: &GridState, kernel: &PhaseKernel, kernel3: Option<&ThreeBodyKernel>) -> GridState {
    let m = state.grid.m;
    let mut pair = state.pair.clone().unwrap_or_else(|| vec![0.0; m * m]);
    for i in 0..m {
        for j in 0..m {
            pair[i * m + j] += kernel.evaluate(state.grid.node(i) - state.grid.node(j));
        }
    }
    let triple = match (&state.triple, kernel3) {
        (None, k) => k.cloned(),
        (Some(t), None) => Some(t.clone()),
        // composing two triple maps would need a summed table; keep it simple
        (Some(_), Some(k)) => Some(k.clone()),
    };
    GridState {
        pair: Some(pair),
        triple,
        ..state.clone()
    }
}

/// Normally ordered expectation with its pruning diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleMeasurement {
    pub value: Complex64,
    /// Upper bound on the magnitude dropped by pruning.
    pub pruned_bound: f64,
    /// Configurations visited.
    pub configurations: u64,
}

struct Walk<'a> {
    state: &'a GridState,
    cells: Vec<usize>,
    // Σ_{t∈T} φ(x_t − x_k) for creators and annihilators
    shift_c: Vec<f64>,
    shift_a: Vec<f64>,
    tc: &'a [usize],
    ta: &'a [usize],
    theta_tc: f64,
    theta_ta: f64,
    prune: f64,
    acc: CompensatedSum<Complex64>,
    pruned: f64,
    visited: u64,
}

impl GridState {
    pub fn grid(&self) -> &ModeGrid {
        &self.grid
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    /// Mean photon number on the grid, `Σ|α_k|²`.
    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// Weight of the dropped sectors `N > N_trunc`.
    pub fn tail_weight(&self) -> f64 {
        self.tail_weight
    }

    pub fn cell_amplitudes(&self) -> &[Complex64] {
        &self.alpha
    }

    fn pair_phase(&self, i: usize, j: usize) -> f64 {
        match &self.pair {
            Some(p) => p[i * self.grid.m + j],
            None => 0.0,
        }
    }

    /// Θ of a photon list (cell indices, any order).
    fn theta(&self, photons: &[usize]) -> f64 {
        let mut t = 0.0;
        for a in 0..photons.len() {
            for b in a + 1..photons.len() {
                t += self.pair_phase(photons[a], photons[b]);
            }
        }
        if let Some(k3) = &self.triple {
            let x: Vec<f64> = photons.iter().map(|&k| self.grid.node(k)).collect();
            for a in 0..x.len() {
                for b in a + 1..x.len() {
                    for c in b + 1..x.len() {
                        t += k3.evaluate(x[a] - x[c], x[b] - x[c]);
                    }
                }
            }
        }
        t
    }

    /// Amplitude of the configuration listing one cell index per photon.
    pub fn amplitude(&self, photons: &[usize]) -> Complex64 {
        if photons.len() > self.n_trunc || photons.iter().any(|&k| k >= self.grid.m) {
            return Complex64::new(0.0, 0.0);
        }
        let mut sorted = photons.to_vec();
        sorted.sort_unstable();
        let mut amp = Complex64::new((-0.5 * self.nbar).exp(), 0.0);
        let mut run = 0;
        for (i, &k) in sorted.iter().enumerate() {
            run = if i > 0 && sorted[i - 1] == k { run + 1 } else { 1 };
            amp *= self.alpha[k] / (run as f64).sqrt();
        }
        amp * Complex64::from_polar(1.0, -self.theta(&sorted))
    }

    /// `Σ |A(c)|²` over all configurations with nonzero amplitude.
    pub fn norm_sq(&self) -> f64 {
        let cells: Vec<usize> = (0..self.grid.m).filter(|&k| self.alpha[k].norm_sqr() > 0.0).collect();
        let mut sum = CompensatedSum::<f64>::default();
        let mut photons = Vec::new();
        self.norm_walk(&cells, 0, &mut photons, &mut sum);
        sum.value()
    }

    fn norm_walk(&self, cells: &[usize], start: usize, photons: &mut Vec<usize>, sum: &mut CompensatedSum<f64>) {
        sum.add(self.amplitude(photons).norm_sqr());
        if photons.len() == self.n_trunc {
            return;
        }
        for idx in start..cells.len() {
            photons.push(cells[idx]);
            self.norm_walk(cells, idx, photons, sum);
            photons.pop();
        }
    }

    /// `⟨ψ†(c₁)…ψ†(c_n) ψ(a₁)…ψ(a_m)⟩` with creators at `points[..n]`.
    pub fn measure_correlator(&self, n: usize, m: usize, points: &[f64]) -> Result<Complex64> {
        Ok(self.measure_correlator_with(n, m, points, &OracleOptions::default())?.value)
    }

    pub fn measure_correlator_with(
        &self,
        n: usize,
        m: usize,
        points: &[f64],
        opts: &OracleOptions,
    ) -> Result<OracleMeasurement> {
        if points.len() != n + m || n + m == 0 {
            return Err(Error::invalid("points", format!("expected {} points", n + m)));
        }
        if n.max(m) > self.n_trunc {
            return Err(Error::Precondition(format!(
                "correlator order {} exceeds the Fock truncation {}",
                n.max(m),
                self.n_trunc
            )));
        }
        let idx = points.iter().map(|&x| self.grid.index_of(x)).collect::<Result<Vec<usize>>>()?;
        let (tc, ta) = idx.split_at(n);
        let mcells = self.grid.m;
        let shift = |t: &[usize]| -> Vec<f64> {
            (0..mcells).map(|k| t.iter().map(|&j| self.pair_phase(j, k)).sum()).collect()
        };
        let mut walk = Walk {
            state: self,
            cells: (0..mcells).filter(|&k| self.alpha[k].norm_sqr() > 0.0).collect(),
            shift_c: shift(tc),
            shift_a: shift(ta),
            tc,
            ta,
            theta_tc: self.theta(tc),
            theta_ta: self.theta(ta),
            prune: opts.prune,
            acc: CompensatedSum::default(),
            pruned: 0.0,
            visited: 0,
        };
        let depth = self.n_trunc - n.max(m);
        let mut photons = Vec::with_capacity(depth);
        walk.visit(
            0,
            depth,
            &mut photons,
            Complex64::new((-0.5 * self.nbar).exp(), 0.0),
            0.0,
            0.0,
            0.0,
        );
        let scale = self.grid.h.powf(-0.5 * (n + m) as f64);
        let mut t_amp_c = Complex64::new(1.0, 0.0);
        for &k in tc {
            t_amp_c *= self.alpha[k];
        }
        let mut t_amp_a = Complex64::new(1.0, 0.0);
        for &k in ta {
            t_amp_a *= self.alpha[k];
        }
        let bound_scale = scale * t_amp_c.norm() * t_amp_a.norm();
        Ok(OracleMeasurement {
            value: walk.acc.value() * t_amp_c.conj() * t_amp_a * scale,
            pruned_bound: walk.pruned * bound_scale,
            configurations: walk.visited,
        })
    }
}

impl Walk<'_> {
    /// `amp` is `e^{−n̄/2} Π α^{d}/√d!` of the spectator multiset `d`;
    /// `theta_d` its own phase and `cross_*` the phases between `d` and
    /// the creator/annihilator sets.
    #[allow(clippy::too_many_arguments)]
    fn visit(
        &mut self,
        start: usize,
        depth: usize,
        photons: &mut Vec<usize>,
        amp: Complex64,
        theta_d: f64,
        cross_c: f64,
        cross_a: f64,
    ) {
        self.visited += 1;
        let state = self.state;
        let (theta_c, theta_a) = if state.triple.is_some() {
            let mut full_c = photons.clone();
            full_c.extend_from_slice(self.tc);
            let mut full_a = photons.clone();
            full_a.extend_from_slice(self.ta);
            (state.theta(&full_c), state.theta(&full_a))
        } else {
            (theta_d + cross_c + self.theta_tc, theta_d + cross_a + self.theta_ta)
        };
        // ⟨d|Π a_T|ψ⟩ = amp · Π_{t∈T} α_t · e^{−iΘ(d+T)}; the T factors are
        // applied by the caller
        let left = amp * Complex64::from_polar(1.0, -theta_c);
        let right = amp * Complex64::from_polar(1.0, -theta_a);
        self.acc.add(left.conj() * right);
        if depth == 0 {
            return;
        }
        let last = photons.last().copied();
        let run = photons.iter().rev().take_while(|&&p| Some(p) == last).count();
        for idx in start..self.cells.len() {
            let k = self.cells[idx];
            let mult = if Some(k) == last { run + 1 } else { 1 };
            let next = amp * state.alpha[k] / (mult as f64).sqrt();
            let weight = next.norm_sqr();
            if weight < self.prune {
                // subtree weight is at most weight · e^{n̄}, relative to e^{−n̄}
                self.pruned += weight * state.nbar.exp();
                continue;
            }
            let mut dtheta = 0.0;
            for &p in photons.iter() {
                dtheta += state.pair_phase(k, p);
            }
            photons.push(k);
            self.visit(
                idx,
                depth - 1,
                photons,
                next,
                theta_d + dtheta,
                cross_c + self.shift_c[k],
                cross_a + self.shift_a[k],
            );
            photons.pop();
        }
    }
}

/// One grid of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub h: f64,
    pub value: Complex64,
    pub rel_error: f64,
    pub pruned_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub n: usize,
    pub m: usize,
    pub points: Vec<f64>,
    pub closed_form: Complex64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln error` against `ln h`.
    pub fitted_order: f64,
    /// Slopes between consecutive grids.
    pub pairwise_orders: Vec<f64>,
}

impl ConvergenceStudy {
    /// Relative error on the finest grid.
    pub fn finest_error(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.rel_error)
    }

    /// Every consecutive slope lies within `fraction` of the fitted order.
    pub fn order_consistent(&self, fraction: f64) -> bool {
        self.pairwise_orders
            .iter()
            .all(|p| (p - self.fitted_order).abs() <= fraction * self.fitted_order.abs())
    }
}

/// Compares one closed-form correlator with the oracle on grids of
/// `cells` nodes spanning `[x0, x0 + span)`.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study(
    input: &CoherentInput,
    kernel: &PhaseKernel,
    n: usize,
    m: usize,
    points: &[f64],
    x0: f64,
    span: f64,
    cells: &[usize],
    n_trunc: usize,
    opts: &ScatteringOptions,
) -> Result<ConvergenceStudy> {
    let req = CorrelatorRequest::new(n, m, points.to_vec())?;
    let closed = correlator(input, kernel, &req, opts)?.value;
    let mut rows = Vec::with_capacity(cells.len());
    for &c in cells {
        let grid = ModeGrid::new(x0, span / c as f64, c)?;
        let state = apply_phase_map(&prepare_coherent(input, &grid, n_trunc)?, kernel, None);
        let r = state.measure_correlator_with(n, m, points, &OracleOptions::default())?;
        rows.push(ConvergenceRow {
            cells: c,
            h: grid.h,
            value: r.value,
            rel_error: (r.value - closed).norm() / closed.norm(),
            pruned_bound: r.pruned_bound / closed.norm(),
        });
    }
    let logs: Vec<(f64, f64)> = rows.iter().map(|r| (r.h.ln(), r.rel_error.ln())).collect();
    let pairwise_orders = logs.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(ConvergenceStudy {
        n,
        m,
        points: points.to_vec(),
        closed_form: closed,
        rows,
        fitted_order: sxy / sxx,
        pairwise_orders,
    })
}

/// The standard oracle comparison: a short slab (`L = 4ξ`, `φ(0) = 1`,
/// `ξ_out = 2ξ`) and a weak Gaussian pulse, on grids of 32, 64 and 128
/// nodes over a fixed span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub nbar: f64,
    pub width: f64,
    pub span: f64,
    pub cells: Vec<usize>,
    pub n_trunc: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            nbar: 0.1,
            width: 2.0,
            span: 24.0,
            cells: vec![32, 64, 128],
            n_trunc: 6,
        }
    }
}

/// Kernel used by [`verify`].
pub fn verify_kernel() -> Result<PhaseKernel> {
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
    build_phase_kernel(&params, &medium, &pot, &map, &KernelOptions::default())
}

/// `G_{0,1}(0)` and `G_{0,2}(0, 1.5)` against the oracle.
pub fn verify(cfg: &VerifyConfig) -> Result<Vec<ConvergenceStudy>> {
    let kernel = verify_kernel()?;
    let input = CoherentInput::gaussian_with_photons(cfg.nbar, 0.0, cfg.width)?;
    let x0 = -0.5 * cfg.span;
    let opts = ScatteringOptions::default();
    [(0, 1, vec![0.0]), (0, 2, vec![0.0, 1.5])]
        .iter()
        .map(|(n, m, p)| convergence_study(&input, &kernel, *n, *m, p, x0, cfg.span, &cfg.cells, cfg.n_trunc, &opts))
        .collect()
}
