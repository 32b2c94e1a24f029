//! Adaptive Gauss-Kronrod quadrature for real and complex integrands.
//!
//! The driver bisects the subinterval with the largest error estimate until
//! the summed estimate drops below `max(abs, rel * |I|)`. Callers pass a
//! sorted list of breakpoints (at least the two endpoints); the integrand
//! may have kinks or jumps there without slowing convergence.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::QuadratureError;

// Kronrod abscissae; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Send + Sync + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-8,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Default::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl CompensatedSum<f64> {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl CompensatedSum<Complex64> {
    pub fn add(&mut self, z: Complex64) {
        let mut re = CompensatedSum {
            sum: self.sum.re,
            carry: self.carry.re,
        };
        let mut im = CompensatedSum {
            sum: self.sum.im,
            carry: self.carry.im,
        };
        re.add(z.re);
        im.add(z.im);
        self.sum = Complex64::new(re.sum, im.sum);
        self.carry = Complex64::new(re.carry, im.carry);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.carry
    }
}

/// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
fn kronrod15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    let err = (kronrod - gauss).magnitude();
    (kronrod, err)
}

/// A single 15-point Kronrod panel over `[a, b]`, without error control.
pub fn kronrod_panel<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> T {
    kronrod15(f, a, b).0
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over `[points[0], points[last]]` with `points` as initial
/// breakpoints. Points are sorted and deduplicated internally.
pub fn integrate<T, F>(f: F, points: &[f64], tol: &Tolerance) -> Result<Estimate<T>, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut pts: Vec<f64> = points.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Ok(Estimate {
            value: T::default(),
            error: 0.0,
            evaluations: 0,
            intervals: 0,
        });
    }

    let mut heap = BinaryHeap::new();
    // panels too narrow to bisect any further
    let mut frozen: Vec<Panel<T>> = Vec::new();
    let mut evaluations = 0usize;
    let mut running_value = T::default();
    let mut running_error = 0.0;
    for w in pts.windows(2) {
        let (value, error) = kronrod15(&f, w[0], w[1]);
        evaluations += 15;
        running_value = running_value + value;
        running_error += error;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    loop {
        let target = tol.target(running_value.magnitude());
        if running_error <= target {
            let (value, error) = totals(heap.iter().chain(frozen.iter()));
            return Ok(Estimate {
                value,
                error,
                evaluations,
                intervals: heap.len() + frozen.len(),
            });
        }
        let intervals = heap.len() + frozen.len();
        let worst = match heap.pop() {
            Some(p) if intervals < tol.max_intervals => p,
            other => {
                let (lo, hi, we) = other
                    .map(|p| (p.a, p.b, p.error))
                    .or_else(|| {
                        frozen
                            .iter()
                            .max_by(|x, y| x.error.total_cmp(&y.error))
                            .map(|p| (p.a, p.b, p.error))
                    })
                    .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                return Err(QuadratureError {
                    value: running_value.magnitude(),
                    error: running_error,
                    target,
                    worst_lo: lo,
                    worst_hi: hi,
                    worst_error: we,
                    intervals,
                });
            }
        };
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(1e-300);
        if worst.b - worst.a <= 64.0 * f64::EPSILON * scale || mid <= worst.a || mid >= worst.b {
            frozen.push(worst);
            if heap.is_empty() {
                // nothing left to refine; accept only if the error is pure round-off
                let (value, error) = totals(frozen.iter());
                return Err(QuadratureError {
                    value: value.magnitude(),
                    error,
                    target,
                    worst_lo: frozen[0].a,
                    worst_hi: frozen[0].b,
                    worst_error: frozen[0].error,
                    intervals: frozen.len(),
                });
            }
            continue;
        }
        let (v1, e1) = kronrod15(&f, worst.a, mid);
        let (v2, e2) = kronrod15(&f, mid, worst.b);
        evaluations += 30;
        running_value = running_value - worst.value + v1 + v2;
        running_error += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
}

fn totals<'a, T: QuadValue + 'a>(panels: impl Iterator<Item = &'a Panel<T>>) -> (T, f64) {
    // summed in a fixed (sorted) order so results are reproducible
    let mut items: Vec<&Panel<T>> = panels.collect();
    items.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = T::default();
    let mut error = 0.0;
    for p in items {
        value = value + p.value;
        error += p.error;
    }
    (value, error)
}

/// Integrate over `[a, ∞)` via the substitution `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<T, F>(f: F, a: f64, tol: &Tolerance) -> Result<Estimate<T>, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate(
        |t: f64| {
            let s = 1.0 - t;
            f(a + t / s) * (1.0 / (s * s))
        },
        &[0.0, 0.5, 1.0],
        tol,
    )
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact_on_one_panel() {
        let est = integrate(|x: f64| x.powi(5) - 3.0 * x * x, &[0.0, 2.0], &Tolerance::default()).unwrap();
        assert!((est.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
        assert_eq!(est.intervals, 1);
    }

    #[test]
    fn rational_tail_to_infinity() {
        let tol = Tolerance::new(1e-13, 1e-12);
        let est = integrate_to_infinity(|x: f64| 1.0 / (1.0 + x.powi(6)), 0.0, &tol).unwrap();
        assert!((2.0 * est.value - 2.0 * PI / 3.0).abs() < 1e-10, "{}", est.value);
    }

    #[test]
    fn breakpoints_handle_jumps() {
        let f = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let est = integrate(f, &[0.0, 0.3, 1.0], &Tolerance::default()).unwrap();
        assert!((est.value - 1.7).abs() < 1e-14);
    }

    #[test]
    fn complex_oscillatory() {
        let est: Estimate<Complex64> = integrate(
            |x: f64| Complex64::from_polar(1.0, 10.0 * x),
            &[0.0, PI],
            &Tolerance::new(1e-12, 1e-12),
        )
        .unwrap();
        // ∫ e^{10ix} over [0, π] = (e^{10iπ} - 1) / 10i = 0
        assert!(est.value.norm() < 1e-10);
    }

    #[test]
    fn failure_reports_worst_interval() {
        let tol = Tolerance {
            abs: 1e-14,
            rel: 1e-14,
            max_intervals: 8,
        };
        let err = integrate(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), &[-1.0, 0.0, 1.0], &tol).unwrap_err();
        assert!(err.worst_lo.abs() < 1.0 && err.worst_hi.abs() <= 1.0);
        assert!(err.to_string().contains("worst subinterval"));
    }

    #[test]
    fn gauss_legendre_weights() {
        for n in [1, 2, 5, 20, 33] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            // exact for x^(2n-2)
            let k = 2 * n as i32 - 2;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            assert!((q - 2.0 / (k as f64 + 1.0)).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::<f64>::default();
        s.add(1e16);
        for _ in 0..10 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 10.0);
    }
}
