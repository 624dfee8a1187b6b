//! Discrete gradient modulus and the Pólya–Szegő comparison.

use alloc::vec;
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)] // shadowed by std methods whenever std is linked
use num_traits::Float;

use crate::inequalities::InequalityId;
use crate::isoperimetry::euclidean_constant;
use crate::measure::{grid_to_mass, ratio, CheckReport, GridFunction};
use crate::numeric::{self, power_segment};
use crate::rearrangement::{LinearProfile, StepProfile};
use crate::{Error, Result};

/// A profile drop larger than this fraction of `f*(0⁺)` between two adjacent
/// levels marks the profile as a jump profile for Pólya–Szegő purposes.
pub const JUMP_FRACTION_LIMIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMode {
    /// `max_y |f(x) − f(y)| / h` over the `2n` axis neighbours.
    #[default]
    MetricMax,
    /// Euclidean norm of central differences.
    EuclideanCentral,
}

impl GradientMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            GradientMode::MetricMax => "metric_max",
            GradientMode::EuclideanCentral => "euclidean_central",
        }
    }
}

impl fmt::Display for GradientMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GradientMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metric_max" => Ok(GradientMode::MetricMax),
            "euclidean_central" => Ok(GradientMode::EuclideanCentral),
            other => Err(Error::invalid(alloc::format!(
                "unknown gradient mode {other:?}"
            ))),
        }
    }
}

/// `|∇f|` on the grid. The outer layer of the result is zero.
pub fn metric_gradient_modulus(f: &GridFunction, mode: GradientMode) -> GridFunction {
    let geom = f.geometry();
    let h = geom.spacing();
    let extents = geom.extents();
    let strides = geom.strides();
    let v = f.values();
    let mut out = vec![0.0; v.len()];
    for (flat, slot) in out.iter_mut().enumerate() {
        if geom.is_boundary(flat) {
            continue;
        }
        let x = v[flat];
        match mode {
            GradientMode::MetricMax => {
                let mut m: f64 = 0.0;
                for (axis, &stride) in strides.iter().enumerate() {
                    let c = (flat / stride) % extents[axis];
                    if c > 0 {
                        m = m.max((x - v[flat - stride]).abs());
                    }
                    if c + 1 < extents[axis] {
                        m = m.max((x - v[flat + stride]).abs());
                    }
                }
                *slot = m / h;
            }
            GradientMode::EuclideanCentral => {
                let mut s = 0.0;
                for &stride in &strides {
                    // interior points always have both neighbours
                    let d = (v[flat + stride] - v[flat - stride]) / (2.0 * h);
                    s += d * d;
                }
                *slot = s.sqrt();
            }
        }
    }
    GridFunction::from_parts_zeroing_boundary(geom.clone(), out)
}

/// Largest drop between adjacent levels (including the final drop to zero at
/// `M`), relative to `f*(0⁺)`.
pub fn jump_fraction(s: &StepProfile) -> f64 {
    let levels = s.levels();
    let top = levels[0];
    if top <= 0.0 {
        return 0.0;
    }
    let inner = levels.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    inner.max(*levels.last().unwrap()) / top
}

/// `{∫₀^M (t^{1−1/n} (−f*)'(t))^p dt}^{1/p}` with `(−f*)'` the slope of the
/// [`LinearProfile`] of `f*`.
pub fn polya_szego_lhs(s: &StepProfile, n: usize, p: f64) -> f64 {
    let lin = LinearProfile::from_step(s);
    let (knots, values) = (lin.knots(), lin.knot_values());
    let alpha = p * (1.0 - 1.0 / n as f64) + 1.0;
    let total = numeric::sum((0..knots.len() - 1).map(|j| {
        let drop = values[j] - values[j + 1];
        if drop <= 0.0 {
            return 0.0;
        }
        let slope = drop / (knots[j + 1] - knots[j]);
        slope.powf(p) * power_segment(knots[j], knots[j + 1], alpha)
    }));
    total.powf(1.0 / p)
}

/// Compares [`polya_szego_lhs`] of `f*` with `‖∇f‖_p`.
///
/// The report also carries `sharp_ratio`, the same ratio with the left side
/// multiplied by the Euclidean isoperimetric constant `c_n`; radially
/// decreasing functions make that one equal to 1.
pub fn polya_szego_compare(
    f: &GridFunction,
    n: usize,
    p: f64,
    mode: GradientMode,
    tolerance: f64,
) -> Result<CheckReport> {
    if n != f.dim() {
        return Err(Error::ModeMismatch(alloc::format!(
            "Pólya–Szegő dimension {n} differs from grid dimension {}",
            f.dim()
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::domain("Pólya–Szegő needs p ≥ 1"));
    }
    let profile = StepProfile::from_mass(&grid_to_mass(f));
    let grad = grid_to_mass(&metric_gradient_modulus(f, mode));
    let lhs = polya_szego_lhs(&profile, n, p);
    let rhs = grad.lp_norm(p)?;
    let r = ratio(lhs, rhs);
    let jumps = jump_fraction(&profile);
    let mut report = CheckReport::new(
        InequalityId::PolyaSzego,
        r,
        profile.measure(),
        1.0,
        tolerance,
    )
    .with_param("p", p)
    .with_param("n", n as f64)
    .with_param("lhs", lhs)
    .with_param("rhs", rhs)
    .with_param("sharp_ratio", ratio(euclidean_constant(n) * lhs, rhs))
    .with_param("jump_fraction", jumps);
    if jumps > JUMP_FRACTION_LIMIT {
        report = report.with_flag("jump_pathology");
    }
    Ok(report)
}
