//! One-dimensional interpolation on strictly increasing grids.

use crate::error::{Error, Result};

fn check_grid(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::invalid("samples", "abscissa and ordinate lengths differ"));
    }
    if x.len() < 2 {
        return Err(Error::invalid("samples", "need at least two samples"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("samples", "non-finite sample"));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("samples", "grid is not strictly increasing"));
    }
    Ok(())
}

fn segment(x: &[f64], t: f64) -> usize {
    match x.partition_point(|&v| v <= t) {
        0 => 0,
        i if i >= x.len() => x.len() - 2,
        i => i - 1,
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
///
/// Between two samples the curve stays within their range, so nonnegative
/// data gives a nonnegative interpolant.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_grid(&x, &y)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut slope = vec![0.0; n];
        if n == 2 {
            slope[0] = d[0];
            slope[1] = d[0];
        } else {
            for i in 1..n - 1 {
                if d[i - 1] * d[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slope[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
                }
            }
            slope[0] = end_slope(h[0], h[1], d[0], d[1]);
            slope[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        }
        Ok(Pchip { x, y, slope })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Evaluates the interpolant; extrapolation is the caller's problem.
    pub fn eval(&self, t: f64) -> f64 {
        let i = segment(&self.x, t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[i] + h10 * h * self.slope[i] + h01 * self.y[i + 1] + h11 * h * self.slope[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

/// Local cubic (four-point Lagrange) interpolation on a non-uniform grid.
///
/// Optional break nodes split the table into pieces; stencils never reach
/// across a break, so kinks placed on a break node do not pollute the
/// neighbouring segments.
#[derive(Debug, Clone)]
pub struct CubicTable {
    x: Vec<f64>,
    y: Vec<f64>,
    // node indices of piece boundaries, always containing 0 and n - 1
    breaks: Vec<usize>,
}

impl CubicTable {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_grid(&x, &y)?;
        let breaks = vec![0, x.len() - 1];
        Ok(CubicTable { x, y, breaks })
    }

    /// `break_points` are abscissae that must coincide with nodes.
    pub fn with_breaks(x: Vec<f64>, y: Vec<f64>, break_points: &[f64]) -> Result<Self> {
        check_grid(&x, &y)?;
        let mut breaks = vec![0, x.len() - 1];
        for b in break_points {
            match x.iter().position(|v| v == b) {
                Some(i) => breaks.push(i),
                None => return Err(Error::invalid("breaks", format!("break {b} is not a node"))),
            }
        }
        breaks.sort_unstable();
        breaks.dedup();
        Ok(CubicTable { x, y, breaks })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = segment(&self.x, t);
        let k = self.breaks.partition_point(|&b| b <= i);
        let (p0, p1) = (self.breaks[k - 1], self.breaks[k.min(self.breaks.len() - 1)]);
        let count = (p1 - p0 + 1).min(4);
        let start = if count < 4 {
            p0
        } else {
            i.saturating_sub(1).clamp(p0, p1 - 3)
        };
        let xs = &self.x[start..start + count];
        let ys = &self.y[start..start + count];
        let mut acc = 0.0;
        for j in 0..count {
            let mut basis = 1.0;
            for k in 0..count {
                if k != j {
                    basis *= (t - xs[k]) / (xs[j] - xs[k]);
                }
            }
            acc += basis * ys[j];
        }
        acc
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> CubicTable {
        CubicTable {
            x: self.x.clone(),
            y: self.y.iter().map(|&v| f(v)).collect(),
            breaks: self.breaks.clone(),
        }
    }
}
