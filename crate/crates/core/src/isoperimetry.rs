//! Isoperimetric profiles `I`, the Coulhon function `φ(t) = t/I(t)`, profile
//! admissibility, and mollified indicators of grid sets.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by std methods whenever std is linked
use num_traits::Float;

use crate::measure::{GridFunction, GridGeometry};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `c · t^α`.
    PowerLaw { coefficient: f64, exponent: f64 },
    /// Piecewise-linear through `(t, value)` samples, constant outside the
    /// sampled range.
    Table { samples: Vec<(f64, f64)> },
}

/// A monotone scalar function on `(0, domain_max]`: an isoperimetric profile
/// or a Coulhon function.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileHandle {
    kind: ProfileKind,
    domain_max: f64,
}

impl ProfileHandle {
    pub fn power_law(coefficient: f64, exponent: f64, domain_max: f64) -> Result<Self> {
        if !(coefficient > 0.0) || !coefficient.is_finite() || !exponent.is_finite() {
            return Err(Error::invalid(
                "power law needs c > 0 and a finite exponent",
            ));
        }
        Self::with_domain(
            ProfileKind::PowerLaw {
                coefficient,
                exponent,
            },
            domain_max,
        )
    }

    pub fn table(samples: Vec<(f64, f64)>, domain_max: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("profile table needs at least one sample"));
        }
        if samples
            .iter()
            .any(|&(t, v)| !(t >= 0.0) || !(v >= 0.0) || !v.is_finite())
        {
            return Err(Error::invalid(
                "profile samples must be nonnegative and finite",
            ));
        }
        if !samples.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(Error::invalid("profile sample abscissae must increase"));
        }
        Self::with_domain(ProfileKind::Table { samples }, domain_max)
    }

    fn with_domain(kind: ProfileKind, domain_max: f64) -> Result<Self> {
        if !(domain_max > 0.0) {
            return Err(Error::invalid("profile domain must be positive"));
        }
        Ok(Self { kind, domain_max })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn domain_max(&self) -> f64 {
        self.domain_max
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::PowerLaw {
                coefficient,
                exponent,
            } => {
                if *exponent == 0.0 {
                    *coefficient
                } else {
                    coefficient * t.powf(*exponent)
                }
            }
            ProfileKind::Table { samples } => interpolate(samples, t),
        }
    }

    /// `t / self(t)`; rejects `t > 0` where the profile vanishes.
    pub fn quotient(&self, t: f64) -> Result<f64> {
        let v = self.eval(t);
        if t > 0.0 && v <= 0.0 {
            return Err(Error::domain(alloc::format!("profile vanishes at t = {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(t / v)
    }

    pub fn is_constant(&self) -> bool {
        match &self.kind {
            ProfileKind::PowerLaw { exponent, .. } => *exponent == 0.0,
            ProfileKind::Table { samples } => samples.windows(2).all(|w| w[0].1 == w[1].1),
        }
    }
}

fn interpolate(samples: &[(f64, f64)], t: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    let j = samples.partition_point(|s| s.0 <= t);
    let (a, b) = (samples[j - 1], samples[j]);
    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // ω_0 = 1, ω_1 = 2, ω_n = ω_{n-2} · 2π/n
    let mut even = 1.0;
    let mut odd = 2.0;
    for k in 2..=n {
        if k % 2 == 0 {
            even *= 2.0 * PI / k as f64;
        } else {
            odd *= 2.0 * PI / k as f64;
        }
    }
    if n.is_multiple_of(2) {
        even
    } else {
        odd
    }
}

/// `c_n = n ω_n^{1/n}`, the perimeter of the ball of unit volume.
pub fn euclidean_constant(n: usize) -> f64 {
    let n_f = n as f64;
    n_f * unit_ball_volume(n).powf(1.0 / n_f)
}

/// `I(t) = c_n t^{1−1/n}` on `(0, ∞)`.
pub fn euclidean_profile(n: usize) -> Result<ProfileHandle> {
    if n == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    ProfileHandle::power_law(euclidean_constant(n), 1.0 - 1.0 / n as f64, f64::MAX)
}

/// `φ(t) = t / I(t)`.
pub fn phi_from_profile(profile: &ProfileHandle) -> Result<ProfileHandle> {
    match profile.kind() {
        ProfileKind::PowerLaw {
            coefficient,
            exponent,
        } => ProfileHandle::power_law(1.0 / coefficient, 1.0 - exponent, profile.domain_max),
        ProfileKind::Table { samples } => {
            let mut out = Vec::with_capacity(samples.len());
            for &(t, _) in samples.iter().filter(|s| s.0 > 0.0) {
                out.push((t, profile.quotient(t)?));
            }
            if out.is_empty() {
                return Err(Error::invalid("profile table has no sample at t > 0"));
            }
            ProfileHandle::table(out, profile.domain_max)
        }
    }
}

/// `φ(t) = t^{1/n} / c_n`, the Euclidean Coulhon function.
pub fn euclidean_phi(n: usize) -> Result<ProfileHandle> {
    phi_from_profile(&euclidean_profile(n)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Midpoint concavity fails.
    NotConcave,
    /// `I(0⁺)` does not tend to zero.
    NonzeroAtOrigin,
    /// `t/I(t)` decreases.
    QuotientDecreasing,
    /// `I(t) = 0` at some `t > 0`.
    VanishesInside,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileValidation {
    pub violations: Vec<Violation>,
    /// Set for constant profiles (the one-dimensional Euclidean case), where
    /// `I(0) = 0` cannot hold and the check is skipped.
    pub origin_waived: bool,
}

impl ProfileValidation {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

const VALIDATION_POINTS: usize = 512;

/// Checks concavity, `I(0⁺) → 0` and monotonicity of `t/I(t)` on a uniform
/// grid of `(0, domain_max]`.
pub fn validate_profile(profile: &ProfileHandle) -> ProfileValidation {
    // Euclidean handles carry an unbounded domain; validate them on (0, 1].
    let top = if profile.domain_max() >= f64::MAX / 2.0 {
        1.0
    } else {
        profile.domain_max()
    };
    let ts: Vec<f64> = (0..=VALIDATION_POINTS)
        .map(|j| top * j as f64 / VALIDATION_POINTS as f64)
        .collect();
    let vals: Vec<f64> = ts.iter().map(|&t| profile.eval(t)).collect();
    let scale = vals
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut violations = Vec::new();

    for j in 1..VALIDATION_POINTS {
        let mid = 0.5 * (vals[j - 1] + vals[j + 1]);
        if vals[j] < mid - 1e-12 * scale {
            violations.push(Violation {
                kind: ViolationKind::NotConcave,
                t: ts[j],
            });
        }
    }

    let origin_waived = profile.is_constant();
    if !origin_waived {
        let tiny = top * 1e-12;
        if profile.eval(tiny) > 1e-3 * scale {
            violations.push(Violation {
                kind: ViolationKind::NonzeroAtOrigin,
                t: tiny,
            });
        }
    }

    let mut prev: Option<f64> = None;
    for (&t, &v) in ts.iter().zip(&vals).skip(1) {
        if v <= 0.0 {
            violations.push(Violation {
                kind: ViolationKind::VanishesInside,
                t,
            });
            prev = None;
            continue;
        }
        let q = t / v;
        if let Some(p) = prev {
            if q < p * (1.0 - 1e-12) {
                violations.push(Violation {
                    kind: ViolationKind::QuotientDecreasing,
                    t,
                });
            }
        }
        prev = Some(q);
    }

    ProfileValidation {
        violations,
        origin_waived,
    }
}

/// Flat indices of lattice points within `radius` of `center`.
pub fn ball_cells(geometry: &GridGeometry, center: &[f64], radius: f64) -> Vec<usize> {
    (0..geometry.len())
        .filter(|&i| {
            let x = geometry.coords(i);
            let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 <= radius * radius
        })
        .collect()
}

/// `1` on `A`, `0` beyond distance `ε`, linear in the distance to `A` in
/// between (distance measured between lattice points).
pub fn indicator_mollify(
    geometry: &GridGeometry,
    cells: &[usize],
    epsilon: f64,
) -> Result<GridFunction> {
    let h = geometry.spacing();
    if !(epsilon >= h) {
        return Err(Error::domain(
            "collar width must be at least one grid spacing",
        ));
    }
    if cells.is_empty() {
        return Err(Error::invalid("cell set is empty"));
    }
    let mut sq = vec![f64::INFINITY; geometry.len()];
    for &c in cells {
        if c >= sq.len() {
            return Err(Error::invalid(alloc::format!(
                "cell {c} lies outside the grid"
            )));
        }
        sq[c] = 0.0;
    }
    squared_distance_transform(geometry, &mut sq);
    let values: Vec<f64> = sq
        .iter()
        .map(|&d2| (1.0 - d2.sqrt() * h / epsilon).max(0.0))
        .collect();
    GridFunction::new(geometry.clone(), values).map_err(|_| {
        Error::invalid("the ε-neighbourhood of the set reaches the outer layer of the grid")
    })
}

/// `(μ(A_ε) − μ(A)) / ε` read off a mollified indicator.
pub fn collar_perimeter(f: &GridFunction, epsilon: f64) -> f64 {
    let w = f.geometry().cell_measure();
    let plateau = f.values().iter().filter(|&&v| v >= 1.0).count() as f64 * w;
    let support = f.values().iter().filter(|&&v| v > 0.0).count() as f64 * w;
    (support - plateau) / epsilon
}

/// Exact squared Euclidean distance transform in lattice units, one axis at a
/// time (lower envelope of parabolas).
fn squared_distance_transform(geometry: &GridGeometry, grid: &mut [f64]) {
    let extents = geometry.extents();
    let strides = geometry.strides();
    let total = grid.len();
    for (axis, &stride) in strides.iter().enumerate() {
        let len = extents[axis];
        let mut line = vec![0.0; len];
        let mut out = vec![0.0; len];
        let mut hull = vec![0usize; len];
        let mut bounds = vec![0.0; len + 1];
        for start in 0..total {
            // a line starts wherever the coordinate along `axis` is zero
            if (start / stride) % len != 0 {
                continue;
            }
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = grid[start + k * stride];
            }
            envelope_1d(&line, &mut out, &mut hull, &mut bounds);
            for (k, v) in out.iter().enumerate() {
                grid[start + k * stride] = *v;
            }
        }
    }
}

fn envelope_1d(f: &[f64], out: &mut [f64], hull: &mut [usize], bounds: &mut [f64]) {
    let n = f.len();
    let mut k: isize = -1;
    for q in 0..n {
        if f[q].is_infinite() {
            continue;
        }
        loop {
            if k < 0 {
                k = 0;
                hull[0] = q;
                bounds[0] = f64::NEG_INFINITY;
                bounds[1] = f64::INFINITY;
                break;
            }
            let v = hull[k as usize];
            let s = ((f[q] + (q * q) as f64) - (f[v] + (v * v) as f64)) / (2.0 * (q - v) as f64);
            if s <= bounds[k as usize] {
                k -= 1;
                continue;
            }
            k += 1;
            hull[k as usize] = q;
            bounds[k as usize] = s;
            bounds[k as usize + 1] = f64::INFINITY;
            break;
        }
    }
    if k < 0 {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut j = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while bounds[j + 1] < q as f64 {
            j += 1;
        }
        let v = hull[j];
        let d = q as f64 - v as f64;
        *o = d * d + f[v];
    }
}
