//! Small numerical kernels shared by the other modules.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std methods whenever std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Neumaier-compensated accumulator.
///
/// Sums over up to a few hundred thousand grid cells stay within a couple of
/// ulps of the exact value, and the result does not depend on how the terms
/// happen to be chunked.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sum {
    sum: f64,
    comp: f64,
}

impl Sum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for Sum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Sum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<Sum>().value()
}

/// `∫_a^b t^{α-1} dt` in closed form, `ln(b/a)` at `α = 0`.
///
/// Returns `+∞` when the integral diverges at `a = 0`.
pub fn power_segment(a: f64, b: f64, alpha: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if alpha == 0.0 {
        if a == 0.0 {
            return f64::INFINITY;
        }
        return (b / a).ln();
    }
    if alpha < 0.0 && a == 0.0 {
        return f64::INFINITY;
    }
    (b.powf(alpha) - a.powf(alpha)) / alpha
}

/// Generalized binomial coefficient `p(p-1)…(p-j+1)/j!`.
pub fn binomial(p: f64, j: u32) -> f64 {
    let mut c = 1.0;
    for i in 0..j {
        c *= (p - i as f64) / (i + 1) as f64;
    }
    c
}

/// The integer `k` with `k < p ≤ k + 1`.
pub fn binomial_order(p: f64) -> u32 {
    let k = p.ceil() - 1.0;
    if k < 0.0 {
        0
    } else {
        k as u32
    }
}

/// The constant `2^{(k+1)/p - 1}` appearing in the oscillation bound.
pub fn oscillation_constant(p: f64) -> f64 {
    let k = binomial_order(p) as f64;
    2f64.powf((k + 1.0) / p - 1.0)
}

/// Geometric evaluation grid on `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: u32,
}

impl GeometricGrid {
    pub fn new(t_min: f64, t_max: f64, points_per_decade: u32) -> Result<Self> {
        if !(t_min > 0.0) || !(t_max >= t_min) || !t_max.is_finite() {
            return Err(Error::invalid("geometric grid needs 0 < t_min ≤ t_max < ∞"));
        }
        if points_per_decade == 0 {
            return Err(Error::invalid("points_per_decade must be positive"));
        }
        Ok(Self {
            t_min,
            t_max,
            points_per_decade,
        })
    }

    /// Grid points, strictly increasing, both endpoints included.
    pub fn points(&self) -> Vec<f64> {
        let ratio = 10f64.powf(1.0 / self.points_per_decade as f64);
        let mut out = Vec::new();
        let mut k = 0i32;
        loop {
            let t = self.t_min * ratio.powi(k);
            // stop just short of t_max so the endpoint is not duplicated
            if t >= self.t_max * (1.0 - 1e-12) {
                break;
            }
            out.push(t);
            k += 1;
        }
        out.push(self.t_max);
        out
    }
}

const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = Sum::new();
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc.add(w * f(mid + half * x));
    }
    half * acc.value()
}
