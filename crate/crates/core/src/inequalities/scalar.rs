//! Scalar lemmas behind the oscillation form, swept over lattices, and the
//! chain rule on grids.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std methods whenever std is linked
use num_traits::Float;

use super::{InequalityId, InequalityParams};
use crate::gradient::metric_gradient_modulus;
use crate::measure::{ratio, CheckReport, GridFunction};
use crate::numeric::{binomial, binomial_order, oscillation_constant};
use crate::{Error, Result};

/// Relative slack allowed on scalar sweeps.
pub const SCALAR_TOLERANCE: f64 = 1e-10;

fn lattice(a_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(a_max > 0.0) || !a_max.is_finite() || points < 2 {
        return Err(Error::domain(
            "lattice needs a_max > 0 and at least two points",
        ));
    }
    let step = a_max / (points - 1) as f64;
    Ok((0..points).map(|i| i as f64 * step).collect())
}

/// `Σ_{j=1}^k C(p,j) b^{p−j} (a−b)^j`.
fn binomial_tail(p: f64, k: u32, coeffs: &[f64], a: f64, b: f64) -> f64 {
    let d = a - b;
    let mut s = 0.0;
    let mut dj = 1.0;
    for j in 1..=k {
        dj *= d;
        let bp = if b == 0.0 { 0.0 } else { b.powf(p - j as f64) };
        s += coeffs[j as usize] * bp * dj;
    }
    s
}

/// Worst relative violations of both halves of the lemma on the lattice,
/// with the `(a, b)` where each occurs.
struct DesSweep {
    first: (f64, f64, f64),
    second: (f64, f64, f64),
    /// Largest `|(a−b)^p − (a^p − b^p − Σ)| / max(a^p, 1)`.
    first_abs_slack: f64,
}

fn sweep_des(p: f64, a_max: f64, points: usize) -> Result<DesSweep> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::domain("the lemma needs p > 1"));
    }
    let xs = lattice(a_max, points)?;
    let k = binomial_order(p);
    let coeffs: Vec<f64> = (0..=k).map(|j| binomial(p, j)).collect();
    let c = oscillation_constant(p);
    let mut out = DesSweep {
        first: (0.0, 0.0, 0.0),
        second: (0.0, 0.0, 0.0),
        first_abs_slack: 0.0,
    };
    for &a in &xs {
        let ap = a.powf(p);
        for &b in xs.iter().take_while(|&&b| b <= a) {
            let bp = b.powf(p);
            let tail = binomial_tail(p, k, &coeffs, a, b);
            let scale = (ap + bp + tail.abs()).max(f64::MIN_POSITIVE);

            let left = (a - b).powf(p);
            let right = ap - bp - tail;
            let v1 = (right - left) / scale;
            if v1 > out.first.0 {
                out.first = (v1, a, b);
            }
            out.first_abs_slack = out.first_abs_slack.max((left - right).abs() / ap.max(1.0));

            let v2 = (ap + bp + tail - (c * a + b).powf(p)) / scale;
            if v2 > out.second.0 {
                out.second = (v2, a, b);
            }
        }
    }
    Ok(out)
}

/// Sweeps `(a−b)^p ≥ a^p − b^p − Σ` and `a^p + b^p + Σ ≤ (c(p)a + b)^p` over
/// `a ≥ b` on a `points × points` lattice of `[0, a_max]²`.
///
/// `worst_ratio = 1 + v`, where `v ≥ 0` is the worst relative violation.
pub fn check_lemma_des(p: f64, a_max: f64, points: usize) -> Result<CheckReport> {
    let s = sweep_des(p, a_max, points)?;
    let (worst, loc) = if s.first.0 >= s.second.0 {
        (s.first.0, s.first.1)
    } else {
        (s.second.0, s.second.1)
    };
    Ok(CheckReport::new(
        InequalityId::LemmaDes,
        1.0 + worst,
        loc,
        1.0,
        SCALAR_TOLERANCE,
    )
    .with_param("p", p)
    .with_param("k", binomial_order(p) as f64)
    .with_param("c_p", oscillation_constant(p))
    .with_param("first_violation", s.first.0)
    .with_param("second_violation", s.second.0)
    .with_param("first_abs_slack", s.first_abs_slack)
    .with_param("lattice_points", points as f64)
    .with_param("a_max", a_max))
}

/// Largest `|(a−b)^p − (a^p − b^p − Σ)|` relative to `max(a^p, 1)` on the
/// lattice; zero up to rounding when `p = 2`.
pub fn des1_max_slack(p: f64, a_max: f64, points: usize) -> Result<f64> {
    Ok(sweep_des(p, a_max, points)?.first_abs_slack)
}

/// Sweeps `|a^r − b^r| ≤ r (a^{r−1} + b^{r−1}) |a − b|` over the lattice.
pub fn check_chain_rule_scalar(r: f64, a_max: f64, points: usize) -> Result<CheckReport> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::domain("the chain rule needs r > 1"));
    }
    let xs = lattice(a_max, points)?;
    let mut worst = (0.0, 0.0);
    for &a in &xs {
        for &b in xs.iter().take_while(|&&b| b <= a) {
            let lhs = (a.powf(r) - b.powf(r)).abs();
            let rhs = r * (a.powf(r - 1.0) + b.powf(r - 1.0)) * (a - b);
            let scale = (lhs + rhs).max(f64::MIN_POSITIVE);
            let v = (lhs - rhs) / scale;
            if v > worst.0 {
                worst = (v, a);
            }
        }
    }
    Ok(CheckReport::new(
        InequalityId::ChainRule,
        1.0 + worst.0,
        worst.1,
        1.0,
        SCALAR_TOLERANCE,
    )
    .with_param("r", r)
    .with_param("lattice_points", points as f64)
    .with_param("a_max", a_max)
    .with_flag("scalar"))
}

/// Cellwise `|∇f^r|(x) ≤ 2r (max f over the stencil of x)^{r−1} |∇f|(x)`.
///
/// `f` must be nonnegative. The power is taken at the stencil maximum rather
/// than at `x` itself so the bound survives at cells where `f(x) = 0` next to
/// positive values.
pub fn check_chain_rule(
    f: &GridFunction,
    r: f64,
    params: &InequalityParams,
) -> Result<CheckReport> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::domain("the chain rule needs r > 1"));
    }
    if f.values().iter().any(|&v| v < 0.0) {
        return Err(Error::domain("the chain rule check needs f ≥ 0"));
    }
    let powered = f.map(|v| v.powf(r))?;
    let grad_f = metric_gradient_modulus(f, params.gradient_mode);
    let grad_g = metric_gradient_modulus(&powered, params.gradient_mode);
    let geom = f.geometry();
    let strides = geom.strides();
    let v = f.values();
    let mut worst = (0.0, 0.0);
    for flat in 0..v.len() {
        if geom.is_boundary(flat) {
            continue;
        }
        let lhs = grad_g.values()[flat];
        if lhs <= 0.0 {
            continue;
        }
        // interior cells have all 2n neighbours
        let local = strides
            .iter()
            .fold(v[flat], |m, &s| m.max(v[flat - s]).max(v[flat + s]));
        let rhs = 2.0 * r * local.powf(r - 1.0) * grad_f.values()[flat];
        let q = ratio(lhs, rhs);
        if q > worst.0 || q.is_nan() {
            worst = (q, flat as f64);
        }
    }
    Ok(params
        .report(InequalityId::ChainRule, worst.0, worst.1, 1.0)
        .with_param("r", r))
}
