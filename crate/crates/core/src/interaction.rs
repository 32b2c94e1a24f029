//! Effective polariton-polariton potentials.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::medium::PolaritonParams;

/// Two-body potential `V(x) = V(0) / (1 + (x/ξ)⁶)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBodyPotential {
    pub depth: f64,
    pub xi: f64,
}

impl TwoBodyPotential {
    pub fn new(depth: f64, xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) || !depth.is_finite() {
            return Err(Error::invalid("potential", "need finite depth and positive blockade radius"));
        }
        Ok(TwoBodyPotential { depth, xi })
    }

    /// Depth `−2Ω²/δ` and blockade radius from the parameters (ħ = 1).
    pub fn from_params(params: &PolaritonParams) -> Result<Self> {
        Self::new(params.potential_depth(), params.blockade_radius())
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let s = x / self.xi;
        let s2 = s * s;
        self.depth / (1.0 + s2 * s2 * s2)
    }
}

type Kernel = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Permutation-symmetric n-body potential `U_n(x₁,…,x_n)`.
///
/// `range` bounds the pairwise separations beyond which the kernel is
/// negligible; quadratures use it to bound their domains.
#[derive(Clone)]
pub struct NBodyPotential {
    arity: usize,
    range: f64,
    kernel: Arc<Kernel>,
}

impl fmt::Debug for NBodyPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NBodyPotential")
            .field("arity", &self.arity)
            .field("range", &self.range)
            .finish_non_exhaustive()
    }
}

impl NBodyPotential {
    /// The kernel must be symmetric under argument permutations; this is not
    /// checked here (see [`NBodyPotential::symmetry_defect`]).
    pub fn new(arity: usize, range: f64, kernel: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if arity < 3 {
            return Err(Error::invalid("u_n.arity", "n-body potentials need n >= 3"));
        }
        if !(range > 0.0) {
            return Err(Error::invalid("u_n.range", "must be positive"));
        }
        Ok(NBodyPotential {
            arity,
            range,
            kernel: Arc::new(kernel),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.arity);
        (self.kernel)(x)
    }

    /// Largest `|U(x) − U(π x)|` over all permutations of `x`.
    pub fn symmetry_defect(&self, x: &[f64]) -> f64 {
        let base = self.evaluate(x);
        let mut perm: Vec<usize> = (0..x.len()).collect();
        let mut worst: f64 = 0.0;
        let mut buf = vec![0.0; x.len()];
        // Heap's algorithm
        let n = perm.len();
        let mut c = vec![0usize; n];
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                for (b, &p) in buf.iter_mut().zip(&perm) {
                    *b = x[p];
                }
                worst = worst.max((self.evaluate(&buf) - base).abs());
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        worst
    }
}

/// Reference three-body model: `amplitude` whenever every pairwise
/// separation is at most `box_halfwidth`, zero otherwise.
pub fn make_constant_u3(amplitude: f64, box_halfwidth: f64) -> Result<NBodyPotential> {
    if !(box_halfwidth > 0.0) {
        return Err(Error::invalid("u3.box_halfwidth", "must be positive"));
    }
    NBodyPotential::new(3, box_halfwidth, move |x| {
        let inside = (x[0] - x[1]).abs() <= box_halfwidth
            && (x[1] - x[2]).abs() <= box_halfwidth
            && (x[0] - x[2]).abs() <= box_halfwidth;
        if inside {
            amplitude
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_values() {
        let params = PolaritonParams {
            omega: 1.0,
            delta: 100.0,
            gamma: 0.1,
            g0: 1.0,
            c6: 0.0,
            c: 1.0,
        }
        .with_blockade_radius(1.5);
        let v = TwoBodyPotential::from_params(&params).unwrap();
        assert!((v.depth + 0.02).abs() < 1e-16);
        assert_eq!(v.evaluate(0.0), v.depth);
        assert!((v.evaluate(1.5) - v.depth / 2.0).abs() < 1e-16);
    }

    #[test]
    fn even_and_monotone_on_log_grid() {
        let v = TwoBodyPotential::new(-0.3, 2.0).unwrap();
        let mut prev = v.evaluate(0.0).abs();
        for k in 0..200 {
            let x = 1e-3 * 10f64.powf(k as f64 * 0.025);
            assert_eq!(v.evaluate(x), v.evaluate(-x));
            let cur = v.evaluate(x).abs();
            assert!(cur < prev || (cur == prev && x < 1e-2));
            assert!(cur <= v.depth.abs());
            prev = cur;
        }
    }

    #[test]
    fn sixth_power_tail() {
        let v = TwoBodyPotential::new(1.0, 1.0).unwrap();
        let x: f64 = 10.0;
        let ratio = v.evaluate(x) * x.powi(6) / v.depth;
        assert!((ratio - 1.0).abs() < 0.01);
    }

    #[test]
    fn constant_box() {
        let u = make_constant_u3(2.5, 1.0).unwrap();
        assert_eq!(u.evaluate(&[0.0, 0.0, 0.0]), 2.5);
        assert_eq!(u.evaluate(&[0.0, 0.5, 1.2]), 0.0);
        assert_eq!(u.symmetry_defect(&[0.3, -0.4, 0.1]), 0.0);
        assert_eq!(u.symmetry_defect(&[0.3, -0.9, 0.1]), 0.0);
        let zero = make_constant_u3(0.0, 1.0).unwrap();
        assert_eq!(zero.evaluate(&[0.1, 0.2, 0.3]), 0.0);
        assert!(make_constant_u3(1.0, 0.0).is_err());
    }

    #[test]
    fn symmetry_defect_detects_asymmetry() {
        let u = NBodyPotential::new(3, 1.0, |x| x[0]).unwrap();
        assert!(u.symmetry_defect(&[1.0, 2.0, 3.0]) > 0.5);
    }
}

#[cfg(test)]
mod properties {
    use proptest::prelude::*;

    use crate::interaction::TwoBodyPotential;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn potential_is_even_bounded_with_sixth_power_tail(depth in -5.0f64..5.0, xi in 0.2f64..5.0, x in 0.0f64..50.0) {
            prop_assume!(depth != 0.0);
            let v = TwoBodyPotential::new(depth, xi).unwrap();
            prop_assert_eq!(v.evaluate(x), v.evaluate(-x));
            prop_assert!(v.evaluate(x).abs() <= depth.abs());
            prop_assert!(v.evaluate(x + 0.1).abs() <= v.evaluate(x).abs());
            let tail = v.evaluate(10.0 * xi) * 1e6 / depth;
            prop_assert!((tail - 1.0).abs() < 0.01);
        }
    }
}
