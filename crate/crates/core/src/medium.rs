//! Atomic cloud, polariton parameters and the slow-light coordinate map.
//!
//! Units are self-consistent and user-chosen, with ħ = 1. The light speed
//! `c` stays an explicit parameter because delays and group velocities
//! depend on it.
//!
//! The coordinate map sends a lab position `x` to the time-like coordinate
//! `z = ∫₀ˣ dy / β(y)²`, where `β(x)² = Ω² / (Ω² + g₀² n_a(x))` is the
//! photonic fraction of the polariton. Since `1/β² = 1 + (g₀²/Ω²) n_a`, the
//! map reduces to `z = x + (g₀²/Ω²) ∫₀ˣ n_a`, which is what gets tabulated.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::quadrature::{integrate, kronrod_panel, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritonParams {
    /// Rabi frequency Ω of the coupling laser.
    pub omega: f64,
    /// Signed detuning δ from the intermediate level.
    pub delta: f64,
    /// Decay rate γ of the intermediate level.
    pub gamma: f64,
    /// Single-atom coupling; `g0 * sqrt(n_a)` is a frequency.
    pub g0: f64,
    /// Signed van der Waals coefficient.
    pub c6: f64,
    /// Vacuum light speed.
    pub c: f64,
}

impl PolaritonParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega", self.omega),
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("g0", self.g0),
            ("c6", self.c6),
            ("c", self.c),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(format!("params.{name}"), "must be finite"));
            }
        }
        if self.omega <= 0.0 {
            return Err(Error::invalid("params.omega", "must be positive"));
        }
        if self.gamma <= 0.0 {
            return Err(Error::invalid("params.gamma", "must be positive"));
        }
        if self.c <= 0.0 {
            return Err(Error::invalid("params.c", "must be positive"));
        }
        if self.g0 < 0.0 {
            return Err(Error::invalid("params.g0", "must be nonnegative"));
        }
        if self.delta.abs() <= self.omega.max(self.gamma) {
            return Err(Error::invalid(
                "params.delta",
                format!(
                    "not dispersive: |delta| = {} must exceed max(omega, gamma) = {}",
                    self.delta.abs(),
                    self.omega.max(self.gamma)
                ),
            ));
        }
        if self.c6 * self.delta >= 0.0 {
            return Err(Error::invalid(
                "params.c6",
                format!("c6 * delta = {} must be negative (attractive branch)", self.c6 * self.delta),
            ));
        }
        Ok(())
    }

    /// ξ = (|C₆ δ| / 2Ω²)^{1/6}
    pub fn blockade_radius(&self) -> f64 {
        ((self.c6 * self.delta).abs() / (2.0 * self.omega * self.omega)).powf(1.0 / 6.0)
    }

    /// Returns a copy whose C₆ yields blockade radius `xi` on the attractive branch.
    pub fn with_blockade_radius(mut self, xi: f64) -> Self {
        let magnitude = 2.0 * self.omega * self.omega * xi.powi(6) / self.delta.abs();
        self.c6 = -self.delta.signum() * magnitude;
        self
    }

    /// Returns a copy with a new detuning, keeping the blockade radius fixed.
    pub fn with_detuning(self, delta: f64) -> Self {
        let xi = self.blockade_radius();
        PolaritonParams { delta, ..self }.with_blockade_radius(xi)
    }

    /// Potential depth V(0) = −2Ω²/δ.
    pub fn potential_depth(&self) -> f64 {
        -2.0 * self.omega * self.omega / self.delta
    }

    /// g₀²/Ω², the factor relating atomic density to `1/β² − 1`.
    pub fn coupling_ratio(&self) -> f64 {
        self.g0 * self.g0 / (self.omega * self.omega)
    }
}

/// Atomic density on the tabulated grid, zero outside it.
#[derive(Debug, Clone)]
pub struct TabulatedDensity {
    interp: Arc<Pchip>,
}

impl TabulatedDensity {
    pub fn new(x: Vec<f64>, n: Vec<f64>) -> Result<Self> {
        if n.iter().any(|v| *v < 0.0) {
            return Err(Error::invalid("medium.samples", "density must be nonnegative"));
        }
        Ok(TabulatedDensity {
            interp: Arc::new(Pchip::new(x, n)?),
        })
    }

    /// Reads a two-column CSV `(x, n_a)`. Lines starting with `#` and a
    /// non-numeric header row are skipped.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut xs = Vec::new();
        let mut ns = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() < 2 {
                return Err(Error::Config(format!("{}:{}: expected two columns", path.display(), lineno + 1)));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(x), Ok(n)) => {
                    xs.push(x);
                    ns.push(n);
                }
                _ if xs.is_empty() => continue,
                _ => {
                    return Err(Error::Config(format!(
                        "{}:{}: cannot parse '{line}'",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(xs, ns)
    }

    pub fn nodes(&self) -> &[f64] {
        self.interp.nodes()
    }

    pub fn values(&self) -> &[f64] {
        self.interp.values()
    }
}

#[derive(Debug, Clone)]
pub enum DensityProfile {
    /// `n̄ θ(L²/4 − x²)`, centred on the origin.
    Slab { mean_density: f64, length: f64 },
    /// `peak exp(−(x−center)²/2w²)`, cut to `center ± cutoff·w`.
    Gaussian {
        peak: f64,
        width: f64,
        center: f64,
        cutoff: f64,
    },
    Tabulated(TabulatedDensity),
}

#[derive(Debug, Clone)]
pub struct MediumProfile {
    density: DensityProfile,
}

impl MediumProfile {
    pub fn slab(mean_density: f64, length: f64) -> Result<Self> {
        if !(mean_density >= 0.0 && mean_density.is_finite()) {
            return Err(Error::invalid("medium.mean_density", "must be finite and nonnegative"));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("medium.length", "must be positive"));
        }
        Ok(MediumProfile {
            density: DensityProfile::Slab { mean_density, length },
        })
    }

    pub fn gaussian(peak: f64, width: f64, center: f64) -> Result<Self> {
        Self::gaussian_with_cutoff(peak, width, center, 8.0)
    }

    pub fn gaussian_with_cutoff(peak: f64, width: f64, center: f64, cutoff: f64) -> Result<Self> {
        if !(peak >= 0.0 && peak.is_finite()) {
            return Err(Error::invalid("medium.peak", "must be finite and nonnegative"));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::invalid("medium.width", "must be positive"));
        }
        if !(cutoff > 0.0 && center.is_finite()) {
            return Err(Error::invalid("medium.cutoff", "must be positive"));
        }
        Ok(MediumProfile {
            density: DensityProfile::Gaussian {
                peak,
                width,
                center,
                cutoff,
            },
        })
    }

    pub fn tabulated(x: Vec<f64>, n: Vec<f64>) -> Result<Self> {
        Ok(MediumProfile {
            density: DensityProfile::Tabulated(TabulatedDensity::new(x, n)?),
        })
    }

    pub fn from_table(table: TabulatedDensity) -> Self {
        MediumProfile {
            density: DensityProfile::Tabulated(table),
        }
    }

    pub fn profile(&self) -> &DensityProfile {
        &self.density
    }

    /// `Some((n̄, L))` for homogeneous slabs.
    pub fn as_slab(&self) -> Option<(f64, f64)> {
        match self.density {
            DensityProfile::Slab { mean_density, length } => Some((mean_density, length)),
            _ => None,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match &self.density {
            DensityProfile::Slab { length, .. } => (-0.5 * length, 0.5 * length),
            DensityProfile::Gaussian {
                width, center, cutoff, ..
            } => (center - cutoff * width, center + cutoff * width),
            DensityProfile::Tabulated(t) => {
                let x = t.nodes();
                (x[0], x[x.len() - 1])
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        match &self.density {
            DensityProfile::Slab { mean_density, .. } => *mean_density,
            DensityProfile::Gaussian {
                peak, width, center, ..
            } => {
                let s = (x - center) / width;
                peak * (-0.5 * s * s).exp()
            }
            DensityProfile::Tabulated(t) => t.interp.eval(x).max(0.0),
        }
    }

    /// Density used for the collective coupling `g = g₀ √n_ref`: the slab
    /// mean, the Gaussian peak, or the tabulated maximum.
    pub fn reference_density(&self) -> f64 {
        match &self.density {
            DensityProfile::Slab { mean_density, .. } => *mean_density,
            DensityProfile::Gaussian { peak, .. } => *peak,
            DensityProfile::Tabulated(t) => t.values().iter().copied().fold(0.0, f64::max),
        }
    }

    /// Points where the density may be non-smooth, support ends included.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.density {
            DensityProfile::Tabulated(t) => t.nodes().to_vec(),
            _ => {
                let (lo, hi) = self.support();
                vec![lo, hi]
            }
        }
    }

    /// Nodes for the cumulative-density table: each gap is short enough for a
    /// single 15-point rule to be exact or accurate to round-off.
    fn table_nodes(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        match &self.density {
            DensityProfile::Slab { .. } => vec![lo, hi],
            DensityProfile::Gaussian { width, .. } => {
                let pieces = (((hi - lo) / width) * 16.0).ceil().max(16.0) as usize;
                (0..=pieces).map(|i| lo + (hi - lo) * i as f64 / pieces as f64).collect()
            }
            DensityProfile::Tabulated(t) => t.nodes().to_vec(),
        }
    }

    /// ∫ n_a dx over the support.
    pub fn column_density(&self, tol: &Tolerance) -> Result<f64> {
        let est = integrate(|x| self.density(x), &self.table_nodes(), tol)?;
        Ok(est.value)
    }
}

/// Single-polariton quantities derived from the parameters and the cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    /// Collective coupling g = g₀ √n_ref.
    pub g: f64,
    /// Blockade radius ξ.
    pub xi: f64,
    /// Output correlation width ξ_out = ξ (g² + Ω²)/Ω².
    pub xi_out: f64,
    /// Slow-light velocity c Ω²/(g² + Ω²).
    pub v_g: f64,
    /// Optical depth 2 g₀² ∫n_a / (γ c); equals 2g²L/(γc) for a slab.
    pub kappa: f64,
    /// Medium delay ∫(1/β² − 1)/c.
    pub delta_t: f64,
    /// Polariton mass (g² + Ω²)³ / (2 c² g² δ Ω²), signed with δ.
    pub mass: f64,
}

pub fn derive(params: &PolaritonParams, medium: &MediumProfile) -> Result<DerivedQuantities> {
    derive_with(params, medium, &Tolerance::default())
}

pub fn derive_with(params: &PolaritonParams, medium: &MediumProfile, tol: &Tolerance) -> Result<DerivedQuantities> {
    params.validate()?;
    let n_ref = medium.reference_density();
    if let Some((n, _)) = medium.as_slab() {
        if n <= 0.0 {
            return Err(Error::Precondition("slab mean density must be positive".into()));
        }
    }
    let omega2 = params.omega * params.omega;
    let g = params.g0 * n_ref.sqrt();
    let g2 = g * g;
    let xi = params.blockade_radius();
    let xi_out = xi * (g2 + omega2) / omega2;
    let v_g = params.c * omega2 / (g2 + omega2);
    let (kappa, delta_t) = match medium.as_slab() {
        Some((_, length)) => (
            2.0 * g2 * length / (params.gamma * params.c),
            length * (1.0 / v_g - 1.0 / params.c),
        ),
        None => {
            let column = medium.column_density(tol)?;
            let g0sq = params.g0 * params.g0;
            (
                2.0 * g0sq * column / (params.gamma * params.c),
                params.coupling_ratio() * column / params.c,
            )
        }
    };
    let mass = if g2 > 0.0 {
        (g2 + omega2).powi(3) / (2.0 * params.c * params.c * g2 * params.delta * omega2)
    } else {
        f64::INFINITY
    };
    Ok(DerivedQuantities {
        g,
        xi,
        xi_out,
        v_g,
        kappa,
        delta_t,
        mass,
    })
}

/// Monotone map between lab positions `x` and transformed coordinates `z`.
#[derive(Debug, Clone)]
pub struct CoordinateMap {
    medium: MediumProfile,
    coupling: f64,
    nodes: Vec<f64>,
    // ∫ n_a from the support start to each node
    cumulative: Vec<f64>,
    z_nodes: Vec<f64>,
    origin_offset: f64,
}

impl CoordinateMap {
    pub fn build(params: &PolaritonParams, medium: &MediumProfile) -> Result<Self> {
        Self::build_with(params, medium, &Tolerance::default())
    }

    pub fn build_with(params: &PolaritonParams, medium: &MediumProfile, tol: &Tolerance) -> Result<Self> {
        if !(params.omega > 0.0) || !params.g0.is_finite() || params.g0 < 0.0 {
            return Err(Error::invalid("params", "omega must be positive and g0 nonnegative"));
        }
        let coupling = params.coupling_ratio();
        let nodes = medium.table_nodes();
        let mut cumulative = Vec::with_capacity(nodes.len());
        cumulative.push(0.0);
        for w in nodes.windows(2) {
            let est = integrate(|x| medium.density(x), &[w[0], w[1]], tol)?;
            cumulative.push(cumulative.last().unwrap() + est.value);
        }
        let mut map = CoordinateMap {
            medium: medium.clone(),
            coupling,
            nodes,
            cumulative,
            z_nodes: Vec::new(),
            origin_offset: 0.0,
        };
        map.origin_offset = map.column_to(0.0);
        map.z_nodes = map.nodes.iter().map(|&x| map.forward(x)).collect();
        map.check_round_trip()?;
        Ok(map)
    }

    fn check_round_trip(&self) -> Result<()> {
        let (lo, hi) = self.medium.support();
        let pad = 0.1 * (hi - lo);
        for i in 0..=64 {
            let x = lo - pad + (hi - lo + 2.0 * pad) * i as f64 / 64.0;
            let back = self.inverse(self.forward(x));
            let scale = 1.0 + x.abs().max(hi - lo);
            if (back - x).abs() > 1e-9 * scale {
                return Err(Error::Numerical(format!(
                    "coordinate map round trip failed at x = {x}: got {back}"
                )));
            }
        }
        Ok(())
    }

    pub fn medium(&self) -> &MediumProfile {
        &self.medium
    }

    /// ∫ n_a from the support start to `x`.
    fn column_to(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return 0.0;
        }
        if x >= self.nodes[n - 1] {
            return self.cumulative[n - 1];
        }
        let i = self.nodes.partition_point(|&v| v <= x) - 1;
        self.cumulative[i] + kronrod_panel(&|t| self.medium.density(t), self.nodes[i], x)
    }

    /// z = ζ⁻¹(x) = ∫₀ˣ dy / β(y)²
    pub fn forward(&self, x: f64) -> f64 {
        x + self.coupling * (self.column_to(x) - self.origin_offset)
    }

    /// x = ζ(z)
    pub fn inverse(&self, z: f64) -> f64 {
        let n = self.nodes.len();
        if z <= self.z_nodes[0] {
            return self.nodes[0] + (z - self.z_nodes[0]);
        }
        if z >= self.z_nodes[n - 1] {
            return self.nodes[n - 1] + (z - self.z_nodes[n - 1]);
        }
        let i = (self.z_nodes.partition_point(|&v| v <= z) - 1).min(n - 2);
        let (mut lo, mut hi) = (self.nodes[i], self.nodes[i + 1]);
        let (zl, zh) = (self.z_nodes[i], self.z_nodes[i + 1]);
        let mut x = lo + (hi - lo) * (z - zl) / (zh - zl);
        let scale = 4.0 * f64::EPSILON * (1.0 + x.abs().max(hi - lo));
        for _ in 0..80 {
            let g = self.forward(x) - z;
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = 1.0 + self.coupling * self.medium.density(x);
            let mut next = x - g / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - x).abs();
            x = next;
            if step <= scale || hi - lo <= scale {
                break;
            }
        }
        x
    }

    /// Photonic fraction β(x)² = Ω²/(Ω² + g₀² n_a(x)).
    pub fn beta_sq(&self, x: f64) -> f64 {
        1.0 / (1.0 + self.coupling * self.medium.density(x))
    }

    /// Rydberg fraction n(x) = 1 − β(x)².
    pub fn rydberg_fraction(&self, x: f64) -> f64 {
        let k = self.coupling * self.medium.density(x);
        k / (1.0 + k)
    }

    /// `1/β(x)² − 1`, the Jacobian excess `dz/dx − 1`.
    pub fn delay_density(&self, x: f64) -> f64 {
        self.coupling * self.medium.density(x)
    }

    /// Transformed image `[ζ⁻¹(x_min), ζ⁻¹(x_max)]` of the support.
    pub fn transformed_support(&self) -> (f64, f64) {
        (self.z_nodes[0], self.z_nodes[self.z_nodes.len() - 1])
    }

    pub fn coupling_ratio(&self) -> f64 {
        self.coupling
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn unit_params(delta: f64) -> PolaritonParams {
        PolaritonParams {
            omega: 1.0,
            delta,
            gamma: 0.5,
            g0: 1.0,
            c6: 0.0,
            c: 1.0,
        }
        .with_blockade_radius(1.0)
    }

    #[test]
    fn blockade_radius_power_law() {
        let p = PolaritonParams {
            omega: 1.0,
            delta: 4.0,
            gamma: 0.5,
            g0: 1.0,
            c6: 32.0,
            c: 1.0,
        };
        assert!((p.blockade_radius() - 2.0).abs() < 1e-14);
        // wrong branch is rejected by validation
        assert!(p.validate().is_err());
        let q = PolaritonParams { c6: -32.0, ..p };
        assert!(q.validate().is_ok());
        assert!((q.blockade_radius() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_dispersive() {
        let p = unit_params(1.0);
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("dispersive"), "{err}");
        let p = PolaritonParams { gamma: 5.0, ..unit_params(4.0) };
        assert!(p.validate().is_err());
    }

    #[test]
    fn slab_derived_closed_forms() {
        let p = unit_params(100.0);
        let m = MediumProfile::slab(1.0, 50.0).unwrap();
        let d = derive(&p, &m).unwrap();
        assert_eq!(d.g, 1.0);
        assert!((d.v_g - 0.5).abs() < 1e-15);
        assert!((d.delta_t - 50.0).abs() < 1e-12);
        assert!((d.xi - 1.0).abs() < 1e-12);
        assert!((d.xi_out - 2.0).abs() < 1e-12);
        assert!((d.kappa - 2.0 * 50.0 / 0.5).abs() < 1e-12);
        assert!((d.mass - 8.0 / 200.0).abs() < 1e-15);
    }

    #[test]
    fn derived_invariants_for_gaussian_cloud() {
        let p = unit_params(50.0);
        let m = MediumProfile::gaussian(2.0, 5.0, 1.0).unwrap();
        let d = derive(&p, &m).unwrap();
        assert!(d.xi_out >= d.xi);
        assert!(d.v_g > 0.0 && d.v_g <= p.c);
        assert!(d.delta_t >= 0.0);
        // ∫ n_a = peak · w · √(2π) up to the 8σ cutoff
        let column = 2.0 * 5.0 * (2.0 * std::f64::consts::PI).sqrt();
        assert!((d.delta_t - column).abs() < 1e-8 * column);
    }

    #[test]
    fn zero_slab_density_is_rejected_by_derive() {
        let m = MediumProfile::slab(0.0, 10.0).unwrap();
        assert!(derive(&unit_params(100.0), &m).is_err());
    }

    #[test]
    fn vacuum_map_is_identity() {
        let m = MediumProfile::slab(0.0, 10.0).unwrap();
        let map = CoordinateMap::build(&unit_params(100.0), &m).unwrap();
        for x in [-30.0, -5.0, 0.0, 2.5, 17.0] {
            assert_eq!(map.forward(x), x);
            assert!((map.inverse(x) - x).abs() < 1e-14);
        }
    }

    #[test]
    fn slab_map_doubles_length() {
        let m = MediumProfile::slab(1.0, 50.0).unwrap();
        let map = CoordinateMap::build(&unit_params(100.0), &m).unwrap();
        assert!((map.forward(25.0) - map.forward(-25.0) - 100.0).abs() < 1e-12);
        assert!((map.beta_sq(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(map.beta_sq(30.0), 1.0);
        assert!((map.rydberg_fraction(3.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gaussian_map_matches_fine_trapezoid() {
        let p = unit_params(100.0);
        let m = MediumProfile::gaussian(1.5, 4.0, 0.5).unwrap();
        let map = CoordinateMap::build(&p, &m).unwrap();
        // independent oracle: composite trapezoid of 1/β² from 0 to x on a
        // grid ten times finer than needed for 1e-8
        let trapezoid = |x: f64| {
            let n = 200_000;
            let h = x / n as f64;
            let f = |y: f64| 1.0 + p.coupling_ratio() * m.density(y);
            let mut s = 0.5 * (f(0.0) + f(x));
            for i in 1..n {
                s += f(i as f64 * h);
            }
            s * h
        };
        for x in [-20.0, -7.0, -1.0, 3.0, 11.0, 40.0] {
            let want = trapezoid(x);
            let got = map.forward(x);
            assert!((got - want).abs() <= 1e-8 * want.abs(), "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn tabulated_map_round_trips() {
        let x: Vec<f64> = (0..41).map(|i| -10.0 + 0.5 * i as f64).collect();
        let n: Vec<f64> = x.iter().map(|v| 1.0 / (1.0 + 0.1 * v * v)).collect();
        let m = MediumProfile::tabulated(x, n).unwrap();
        let map = CoordinateMap::build(&unit_params(100.0), &m).unwrap();
        for i in 0..100 {
            let x = -15.0 + 0.3 * i as f64;
            assert!((map.inverse(map.forward(x)) - x).abs() < 1e-11);
        }
    }

    #[test]
    fn monotone_and_isometric_outside() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let p = unit_params(60.0);
        let m = MediumProfile::gaussian(3.0, 2.0, -1.0).unwrap();
        let map = CoordinateMap::build(&p, &m).unwrap();
        for _ in 0..500 {
            let a: f64 = rng.gen_range(-40.0..40.0);
            let b: f64 = rng.gen_range(-40.0..40.0);
            if a < b {
                assert!(map.forward(a) < map.forward(b));
            }
        }
        let (lo, hi) = m.support();
        for (x1, x2) in [(hi + 1.0, hi + 9.0), (lo - 30.0, lo - 0.5)] {
            let dz = map.forward(x2) - map.forward(x1);
            assert!((dz - (x2 - x1)).abs() <= 1e-9 * (x2 - x1).abs());
        }
    }

    #[test]
    fn frequency_rescaling_leaves_fractions_invariant() {
        let p = unit_params(100.0);
        let m = MediumProfile::gaussian(1.0, 3.0, 0.0).unwrap();
        let lambda: f64 = 3.7;
        let scaled = PolaritonParams {
            omega: p.omega * lambda,
            delta: p.delta * lambda,
            gamma: p.gamma * lambda,
            g0: p.g0 * lambda,
            c6: 0.0,
            c: p.c,
        }
        .with_blockade_radius(p.blockade_radius());
        assert!((scaled.blockade_radius() - p.blockade_radius()).abs() < 1e-12);
        let a = CoordinateMap::build(&p, &m).unwrap();
        let b = CoordinateMap::build(&scaled, &m).unwrap();
        for x in [-4.0, 0.0, 1.3] {
            assert!((a.beta_sq(x) - b.beta_sq(x)).abs() < 1e-14);
            assert!((a.rydberg_fraction(x) - b.rydberg_fraction(x)).abs() < 1e-14);
        }
        let da = derive(&p, &m).unwrap();
        let db = derive(&scaled, &m).unwrap();
        assert!((da.v_g / p.c - db.v_g / scaled.c).abs() < 1e-14);
    }
}

#[cfg(test)]
mod properties {
    use proptest::prelude::*;

    use crate::medium::{derive, CoordinateMap, MediumProfile, PolaritonParams};

    fn params(omega: f64, delta_factor: f64, g0: f64, xi: f64) -> PolaritonParams {
        PolaritonParams { omega, delta: -delta_factor * omega, gamma: 0.5 * omega, g0, c6: 0.0, c: 1.0 }
            .with_blockade_radius(xi)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn coordinate_map_is_monotone_and_isometric_outside(
            width in 0.5f64..5.0, g0 in 0.1f64..3.0, a in -40.0f64..40.0, b in -40.0f64..40.0,
        ) {
            let p = params(1.0, 10.0, g0, 1.0);
            let medium = MediumProfile::gaussian(1.0, width, 0.0).unwrap();
            let map = CoordinateMap::build(&p, &medium).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            prop_assert!(map.forward(hi) > map.forward(lo));
            prop_assert!((map.inverse(map.forward(a)) - a).abs() < 1e-8);
            let (_, edge) = medium.support();
            let (x1, x2) = (edge + 1.0 + a.abs(), edge + 2.0 + b.abs());
            let d = map.forward(x2) - map.forward(x1);
            prop_assert!((d - (x2 - x1)).abs() <= 1e-9 * (x2 - x1).abs().max(1.0));
            let beta = map.beta_sq(a);
            prop_assert!(beta > 0.0 && beta <= 1.0);
        }

        #[test]
        fn slab_derived_quantities(omega in 0.5f64..2.0, g0 in 0.1f64..3.0, n in 0.2f64..2.0, l in 1.0f64..100.0) {
            let p = params(omega, 10.0, g0, 1.0);
            let d = derive(&p, &MediumProfile::slab(n, l).unwrap()).unwrap();
            let (g2, w2) = (g0 * g0 * n, omega * omega);
            prop_assert!((d.v_g - w2 / (w2 + g2)).abs() <= 1e-14);
            prop_assert!((d.delta_t - l * g2 / w2).abs() <= 1e-12 * d.delta_t);
            prop_assert!((d.xi_out - (g2 + w2) / w2).abs() <= 1e-14 * d.xi_out);
            prop_assert!(d.xi_out >= d.xi && d.v_g <= 1.0 && d.delta_t >= 0.0);
        }

        #[test]
        fn frequency_rescaling_keeps_slow_light(lambda in 0.1f64..10.0, g0 in 0.1f64..3.0, x in -3.0f64..3.0) {
            let medium = MediumProfile::gaussian(1.0, 2.0, 0.0).unwrap();
            let p = params(1.0, 10.0, g0, 1.0);
            let q = params(lambda, 10.0, g0 * lambda, 1.0);
            let (a, b) = (CoordinateMap::build(&p, &medium).unwrap(), CoordinateMap::build(&q, &medium).unwrap());
            prop_assert!((a.beta_sq(x) - b.beta_sq(x)).abs() < 1e-14);
            prop_assert!((a.forward(x) - b.forward(x)).abs() < 1e-10);
            prop_assert!((q.blockade_radius() - 1.0).abs() < 1e-12);
        }
    }
}
