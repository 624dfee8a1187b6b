//! Exact calculus on decreasing rearrangements.
//!
//! A [`StepProfile`] is the right-continuous, non-increasing step function
//! `f*` on `(0, M]`, extended by zero beyond `M`. Because it is piecewise
//! constant, `f**`, the layer-cake excess `t(f**(t) − f*(t))` and every
//! power-weighted integral of them have closed forms on each segment; nothing
//! here uses quadrature.
//!
//! On the segment `[t_i, t_{i+1})` where `f* = L_i`,
//!
//! ```text
//! f**(t) − f*(t) = E_i / t,    E_i = ∫₀^{t_i} f* − L_i t_i,
//! ```
//!
//! and `E_i` is exactly the layer-cake excess `∫ (|f| − L_i)₊ dμ`.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std methods whenever std is linked
use num_traits::Float;

use crate::measure::MassFunction;
use crate::numeric::{self, power_segment, Sum};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
    /// `prefix[i] = ∫₀^{t_i} f*`.
    prefix: Vec<f64>,
}

impl StepProfile {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || breakpoints.len() != levels.len() + 1 {
            return Err(Error::invalid(
                "a step profile needs one more breakpoint than levels",
            ));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::invalid("breakpoints must start at 0"));
        }
        if !breakpoints.windows(2).all(|w| w[0] < w[1])
            || !breakpoints.iter().all(|t| t.is_finite())
        {
            return Err(Error::invalid(
                "breakpoints must be finite and strictly increasing",
            ));
        }
        if levels.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(Error::invalid("levels must be finite and nonnegative"));
        }
        if !levels.windows(2).all(|w| w[0] >= w[1]) {
            return Err(Error::invalid("levels must be non-increasing"));
        }
        Ok(Self::from_sorted(breakpoints, levels))
    }

    fn from_sorted(breakpoints: Vec<f64>, levels: Vec<f64>) -> Self {
        let mut prefix = Vec::with_capacity(breakpoints.len());
        let mut acc = Sum::new();
        prefix.push(0.0);
        for (i, &l) in levels.iter().enumerate() {
            acc.add(l * (breakpoints[i + 1] - breakpoints[i]));
            prefix.push(acc.value());
        }
        Self {
            breakpoints,
            levels,
            prefix,
        }
    }

    /// The generalized inverse of `μ_f`: atoms in descending order, laid end
    /// to end.
    pub fn from_mass(f: &MassFunction) -> Self {
        let mut breakpoints = Vec::with_capacity(f.atoms().len() + 1);
        let mut levels = Vec::with_capacity(f.atoms().len());
        let mut acc = Sum::new();
        breakpoints.push(0.0);
        for a in f.atoms() {
            acc.add(a.mass);
            breakpoints.push(acc.value());
            levels.push(a.value);
        }
        Self::from_sorted(breakpoints, levels)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Right end `M` of the profile.
    pub fn measure(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn segments(&self) -> usize {
        self.levels.len()
    }

    /// `∫₀^M f*`.
    pub fn integral(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// Index of the segment containing `t`, `None` for `t ≥ M`.
    fn segment_of(&self, t: f64) -> Option<usize> {
        if t >= self.measure() {
            return None;
        }
        // first breakpoint strictly greater than t, minus one
        let j = self.breakpoints.partition_point(|&b| b <= t);
        Some(j.saturating_sub(1))
    }

    /// `f*(t)`, right-continuous, zero for `t ≥ M`.
    pub fn value(&self, t: f64) -> f64 {
        self.segment_of(t).map_or(0.0, |i| self.levels[i])
    }

    /// `f*(0⁺)`, the essential supremum.
    pub fn sup(&self) -> f64 {
        self.levels[0]
    }

    /// `∫₀ᵗ f*`.
    pub fn integral_to(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.segment_of(t) {
            Some(i) => self.prefix[i] + self.levels[i] * (t - self.breakpoints[i]),
            None => self.integral(),
        }
    }

    /// `f**(t) = (1/t) ∫₀ᵗ f*`.
    pub fn maximal_average(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain("maximal average needs t > 0"));
        }
        Ok(self.integral_to(t) / t)
    }

    /// `f**(t) − f*(t)`, i.e. `E(t)/t`.
    pub fn oscillation(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain("oscillation needs t > 0"));
        }
        Ok(self.excess(t) / t)
    }

    /// `t(f**(t) − f*(t))`, computed segment-wise so it stays nonnegative.
    pub fn excess(&self, t: f64) -> f64 {
        match self.segment_of(t) {
            Some(i) => self.segment_excess(i),
            None => self.integral(),
        }
    }

    /// `E_i = ∫₀^{t_i} f* − L_i t_i` for segment `i`.
    fn segment_excess(&self, i: usize) -> f64 {
        let e = self.prefix[i] - self.levels[i] * self.breakpoints[i];
        e.max(0.0)
    }

    /// Length of `{f* > λ}`.
    pub fn distribution(&self, lambda: f64) -> f64 {
        let k = self.levels.partition_point(|&l| l > lambda);
        self.breakpoints[k]
    }

    /// Pointwise `p`-th power of the levels.
    pub fn powered(&self, p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain("powered profile needs finite p ≥ 1"));
        }
        if p == 1.0 {
            return Ok(self.clone());
        }
        let levels = self.levels.iter().map(|l| l.powf(p)).collect();
        Ok(Self::from_sorted(self.breakpoints.clone(), levels))
    }

    /// `∫₀^M (f*)^p`.
    pub fn lp_integral(&self, p: f64) -> f64 {
        numeric::sum(
            self.levels
                .iter()
                .zip(self.breakpoints.windows(2))
                .map(|(l, w)| l.powf(p) * (w[1] - w[0])),
        )
    }

    /// `(1/t) ∫₀ᵗ f*(s) g*(s) ds` on the merged breakpoints.
    pub fn product_average(&self, other: &StepProfile, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain("product average needs t > 0"));
        }
        let end = t.min(self.measure()).min(other.measure());
        let (mut i, mut j) = (0usize, 0usize);
        let mut lo = 0.0;
        let mut acc = Sum::new();
        while lo < end {
            let hi = self.breakpoints[i + 1]
                .min(other.breakpoints[j + 1])
                .min(end);
            acc.add(self.levels[i] * other.levels[j] * (hi - lo));
            lo = hi;
            if self.breakpoints[i + 1] <= lo {
                i += 1;
            }
            if other.breakpoints[j + 1] <= lo {
                j += 1;
            }
            if i == self.levels.len() || j == other.levels.len() {
                break;
            }
        }
        Ok(acc.value() / t)
    }

    /// `∫₀^{upper} ((f** − f*)(t) · t^β)^q dt/t` for finite `q ≥ 1`.
    ///
    /// `upper = ∞` includes the tail beyond `M`, where `f** − f* = ∫f*/t`.
    /// Divergence is reported as `+∞`.
    pub fn oscillation_power_integral(&self, beta: f64, q: f64, upper: f64) -> f64 {
        // ∫ (E/t · t^β)^q dt/t = E^q ∫ t^{(β-1)q - 1} dt
        let alpha = (beta - 1.0) * q;
        let mut acc = Sum::new();
        for i in 0..self.levels.len() {
            let a = self.breakpoints[i];
            if a >= upper {
                break;
            }
            let b = self.breakpoints[i + 1].min(upper);
            let e = self.segment_excess(i);
            if e > 0.0 {
                acc.add(e.powf(q) * power_segment(a, b, alpha));
            }
        }
        if upper > self.measure() {
            let e = self.integral();
            if e > 0.0 {
                let tail = if upper.is_infinite() {
                    if alpha < 0.0 {
                        -self.measure().powf(alpha) / alpha
                    } else {
                        f64::INFINITY
                    }
                } else {
                    power_segment(self.measure(), upper, alpha)
                };
                acc.add(e.powf(q) * tail);
            }
        }
        acc.value()
    }

    /// `sup_{t>0} (f** − f*)(t) · t^β` and the location where it is attained
    /// (or approached).
    pub fn oscillation_sup(&self, beta: f64) -> (f64, f64) {
        // On each segment the function is E_i t^{β-1}: monotone, so the sup is
        // at one of the ends.
        let mut best = (0.0, 0.0);
        let mut consider = |value: f64, t: f64| {
            if value > best.0 {
                best = (value, t);
            }
        };
        for i in 0..self.levels.len() {
            let e = self.segment_excess(i);
            if e <= 0.0 {
                continue;
            }
            let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
            consider(e * a.powf(beta - 1.0), a);
            consider(e * b.powf(beta - 1.0), b);
        }
        let e = self.integral();
        if e > 0.0 {
            if beta > 1.0 {
                return (f64::INFINITY, f64::INFINITY);
            }
            consider(e * self.measure().powf(beta - 1.0), self.measure());
            if beta == 1.0 {
                consider(e, f64::INFINITY);
            }
        }
        best
    }
}

/// `μ_f(λ) = μ{|f| > λ}`.
pub fn distribution(f: &MassFunction, lambda: f64) -> f64 {
    f.support_measure(lambda)
}

pub fn decreasing_rearrangement(f: &MassFunction) -> StepProfile {
    StepProfile::from_mass(f)
}

/// `f**(t)`; rejects `t ≤ 0`.
pub fn maximal_average(s: &StepProfile, t: f64) -> Result<f64> {
    s.maximal_average(t)
}

pub fn powered_profile(s: &StepProfile, p: f64) -> Result<StepProfile> {
    s.powered(p)
}

/// `∫_{|f|>λ} (|f| − λ) dμ`, summed directly over the atoms.
pub fn layer_cake_excess(f: &MassFunction, lambda: f64) -> f64 {
    numeric::sum(
        f.atoms()
            .iter()
            .take_while(|a| a.value > lambda)
            .map(|a| (a.value - lambda) * a.mass),
    )
}

/// `∫_λ^∞ μ_f(s) ds`, integrating the distribution function as a step
/// function of the level `s`.
pub fn distribution_tail_integral(f: &MassFunction, lambda: f64) -> f64 {
    let atoms = f.atoms();
    let mut cumulative = Sum::new();
    let mut acc = Sum::new();
    for (i, a) in atoms.iter().enumerate() {
        if a.value <= lambda {
            break;
        }
        cumulative.add(a.mass);
        // μ_f = cumulative mass on [next value, this value)
        let below = atoms.get(i + 1).map_or(0.0, |b| b.value).max(lambda);
        acc.add(cumulative.value() * (a.value - below));
    }
    acc.value()
}

/// Lorentz functional `‖f‖_{L(r,q)}`.
///
/// - `r < ∞, q < ∞`: `{∫ (f*(t) t^{1/r})^q dt/t}^{1/q}`
/// - `r < ∞, q = ∞`: `sup f*(t) t^{1/r}`
/// - `r = ∞, q < ∞`: `{∫₀^∞ (f**(t) − f*(t))^q dt/t}^{1/q}`
pub fn lorentz_norm(s: &StepProfile, r: f64, q: f64) -> Result<f64> {
    if !(r >= 1.0) || !(q >= 1.0) {
        return Err(Error::domain("Lorentz indices need r ≥ 1 and q ≥ 1"));
    }
    match (r.is_infinite(), q.is_infinite()) {
        (true, true) => Err(Error::domain("L(∞,∞) is not supported")),
        (true, false) => Ok(s
            .oscillation_power_integral(0.0, q, f64::INFINITY)
            .powf(1.0 / q)),
        (false, true) => Ok(s
            .levels
            .iter()
            .zip(&s.breakpoints[1..])
            .map(|(l, b)| l * b.powf(1.0 / r))
            .fold(0.0, f64::max)),
        (false, false) => {
            let alpha = q / r;
            let total = numeric::sum(
                s.levels
                    .iter()
                    .zip(s.breakpoints.windows(2))
                    .filter(|(l, _)| **l > 0.0)
                    .map(|(l, w)| l.powf(q) * power_segment(w[0], w[1], alpha)),
            );
            Ok(total.powf(1.0 / q))
        }
    }
}

/// Right-hand side of
/// `−∂/∂t (f₍p₎**)^{1/p} = (1/p)(f₍p₎**)^{1/p−1}(f₍p₎** − f₍p₎*)/t`,
/// evaluated from the profile `f*` without differentiating anything.
pub fn dform_derivative(s: &StepProfile, p: f64, t: f64) -> Result<f64> {
    let powered = s.powered(p)?;
    dform_from_powered(&powered, p, t)
}

/// Same as [`dform_derivative`] for an already powered profile `f₍p₎*`.
pub fn dform_from_powered(powered: &StepProfile, p: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain("derivative form needs t > 0"));
    }
    let avg = powered.maximal_average(t)?;
    if avg <= 0.0 {
        return Ok(0.0);
    }
    let osc = powered.excess(t) / t;
    Ok(avg.powf(1.0 / p - 1.0) * osc / (p * t))
}

/// Levels closer than this fraction of `f*(0⁺)` are merged before building a
/// [`LinearProfile`]; mirrored grid samples often differ only by rounding.
pub const TIE_RELATIVE: f64 = 1e-9;

/// Continuous, non-increasing, piecewise-linear interpolant of a step profile:
/// the top level at `t = 0`, every other level at the midpoint of its segment,
/// flat on the last half-segment and zero beyond `M`.
///
/// Cell samples of a Lipschitz function have a step profile that drops by
/// roughly `h|∇f|` at every cell, which a difference-quotient gradient cannot
/// see. Comparisons between `f** − f*` and gradient averages at scales of a
/// few cells use this interpolant instead.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProfile {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// `∫₀^{knots[j]}` of the interpolant.
    prefix: Vec<f64>,
}

impl LinearProfile {
    pub fn from_step(s: &StepProfile) -> Self {
        let tol = TIE_RELATIVE * s.sup();
        // merged (width, level) runs
        let mut runs: Vec<(f64, f64)> = Vec::with_capacity(s.segments());
        for (w, &l) in s.breakpoints.windows(2).zip(&s.levels) {
            let width = w[1] - w[0];
            match runs.last_mut() {
                Some(last) if last.1 - l <= tol => {
                    let total = last.0 + width;
                    last.1 = (last.1 * last.0 + l * width) / total;
                    last.0 = total;
                }
                _ => runs.push((width, l)),
            }
        }
        let mut knots = Vec::with_capacity(runs.len() + 2);
        let mut values = Vec::with_capacity(runs.len() + 2);
        // the top class sits at t = 0: a continuous f has f*(0⁺) = sup f
        knots.push(0.0);
        values.push(runs[0].1);
        let mut start = Sum::new();
        start.add(runs[0].0);
        for &(w, l) in &runs[1..] {
            knots.push(start.value() + 0.5 * w);
            values.push(l);
            start.add(w);
        }
        knots.push(s.measure());
        values.push(runs[runs.len() - 1].1);
        let mut prefix = Vec::with_capacity(knots.len());
        let mut acc = Sum::new();
        prefix.push(0.0);
        for j in 1..knots.len() {
            acc.add(0.5 * (values[j - 1] + values[j]) * (knots[j] - knots[j - 1]));
            prefix.push(acc.value());
        }
        Self {
            knots,
            values,
            prefix,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn knot_values(&self) -> &[f64] {
        &self.values
    }

    pub fn measure(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// Index `j` with `knots[j] ≤ t < knots[j+1]`, `None` for `t ≥ M`.
    fn piece_of(&self, t: f64) -> Option<usize> {
        if t >= self.measure() {
            return None;
        }
        Some(self.knots.partition_point(|&k| k <= t).saturating_sub(1))
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.piece_of(t) {
            Some(j) => {
                let (a, b) = (self.knots[j], self.knots[j + 1]);
                let (ya, yb) = (self.values[j], self.values[j + 1]);
                ya + (yb - ya) * (t - a) / (b - a)
            }
            None => 0.0,
        }
    }

    pub fn integral_to(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.piece_of(t) {
            Some(j) => {
                let a = self.knots[j];
                self.prefix[j] + 0.5 * (self.values[j] + self.value(t)) * (t - a)
            }
            None => *self.prefix.last().unwrap(),
        }
    }

    /// Maximal average of the interpolant.
    pub fn average(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain("maximal average needs t > 0"));
        }
        Ok(self.integral_to(t) / t)
    }

    /// `average(t) − value(t)`, never negative.
    pub fn oscillation(&self, t: f64) -> Result<f64> {
        Ok((self.average(t)? - self.value(t)).max(0.0))
    }

    /// The interpolant raised to the power `p`, with exact averages.
    pub fn powered(&self, p: f64) -> Result<PoweredLinear<'_>> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain("powered profile needs finite p ≥ 1"));
        }
        let mut prefix = Vec::with_capacity(self.knots.len());
        let mut acc = Sum::new();
        prefix.push(0.0);
        for j in 1..self.knots.len() {
            acc.add(linear_power_integral(
                self.values[j - 1],
                self.values[j],
                self.knots[j] - self.knots[j - 1],
                p,
            ));
            prefix.push(acc.value());
        }
        Ok(PoweredLinear {
            base: self,
            p,
            prefix,
        })
    }
}

/// `∫₀^w (y0 + (y1 − y0)s/w)^p ds`.
fn linear_power_integral(y0: f64, y1: f64, w: f64, p: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let d = y1 - y0;
    if d.abs() <= 1e-12 * y0.abs().max(y1.abs()) {
        return 0.5 * (y0.powf(p) + y1.powf(p)) * w;
    }
    w * (y1.powf(p + 1.0) - y0.powf(p + 1.0)) / (d * (p + 1.0))
}

/// `P^p` for a [`LinearProfile`] `P`.
#[derive(Debug, Clone)]
pub struct PoweredLinear<'a> {
    base: &'a LinearProfile,
    p: f64,
    prefix: Vec<f64>,
}

impl PoweredLinear<'_> {
    pub fn value(&self, t: f64) -> f64 {
        self.base.value(t).powf(self.p)
    }

    pub fn integral_to(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.base.piece_of(t) {
            Some(j) => {
                let a = self.base.knots[j];
                let part =
                    linear_power_integral(self.base.values[j], self.base.value(t), t - a, self.p);
                self.prefix[j] + part
            }
            None => *self.prefix.last().unwrap(),
        }
    }

    pub fn average(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain("maximal average needs t > 0"));
        }
        Ok(self.integral_to(t) / t)
    }

    /// `(1/p)(F**)^{1/p−1}(F** − F*)/t`, the derivative of `−(F**)^{1/p}`.
    pub fn dform(&self, t: f64) -> Result<f64> {
        let avg = self.average(t)?;
        if avg <= 0.0 {
            return Ok(0.0);
        }
        let osc = (avg - self.value(t)).max(0.0);
        Ok(avg.powf(1.0 / self.p - 1.0) * osc / (self.p * t))
    }
}
