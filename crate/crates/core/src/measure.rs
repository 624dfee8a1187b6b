//! Functions together with their measure: weighted value multisets, sampled
//! grid functions, and the elementary norms the inequalities compare.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
#[allow(unused_imports)] // shadowed by std methods whenever std is linked
use num_traits::Float;

use crate::inequalities::InequalityId;
use crate::numeric::{self, Sum};
use crate::{Error, Result};

/// One value of `|f|` carried by a positive amount of measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub mass: f64,
}

impl Atom {
    pub fn new(value: f64, mass: f64) -> Self {
        Self { value, mass }
    }
}

/// Distribution of `|f|` over a finite measure space, stored as atoms sorted
/// by value (descending) with equal values merged.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    atoms: Vec<Atom>,
    total_mass: f64,
}

impl MassFunction {
    pub fn new(mut atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("mass function needs at least one atom"));
        }
        for a in &atoms {
            if !(a.value >= 0.0) || !a.value.is_finite() {
                return Err(Error::invalid("atom values must be finite and nonnegative"));
            }
            if !(a.mass > 0.0) || !a.mass.is_finite() {
                return Err(Error::invalid("atom masses must be finite and positive"));
            }
        }
        atoms.sort_unstable_by(|a, b| b.value.total_cmp(&a.value));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        let mut run = Sum::new();
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.value == a.value => {
                    run.add(a.mass);
                    last.mass = run.value();
                }
                _ => {
                    run = Sum::new();
                    run.add(a.mass);
                    merged.push(a);
                }
            }
        }
        let total_mass = numeric::sum(merged.iter().map(|a| a.mass));
        Ok(Self {
            atoms: merged,
            total_mass,
        })
    }

    /// Builds the distribution of `|values|` where every cell carries `cell_mass`.
    pub fn from_cells(values: &[f64], cell_mass: f64) -> Result<Self> {
        if !(cell_mass > 0.0) {
            return Err(Error::invalid("cell mass must be positive"));
        }
        let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        if abs.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("cell values must be finite"));
        }
        if abs.is_empty() {
            return Err(Error::invalid("no cells"));
        }
        abs.sort_unstable_by(|a, b| b.total_cmp(a));
        // Equal values are merged by counting, so a tie class of c cells has
        // mass exactly c·cell_mass.
        let mut atoms = Vec::new();
        let mut i = 0;
        while i < abs.len() {
            let v = abs[i];
            let mut j = i + 1;
            while j < abs.len() && abs[j] == v {
                j += 1;
            }
            atoms.push(Atom::new(v, (j - i) as f64 * cell_mass));
            i = j;
        }
        let total_mass = abs.len() as f64 * cell_mass;
        Ok(Self { atoms, total_mass })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn max_value(&self) -> f64 {
        self.atoms[0].value
    }

    /// `μ{|f| > threshold}`.
    pub fn support_measure(&self, threshold: f64) -> f64 {
        numeric::sum(
            self.atoms
                .iter()
                .take_while(|a| a.value > threshold)
                .map(|a| a.mass),
        )
    }

    /// Total mass of atoms with value exactly zero.
    pub fn zero_mass(&self) -> f64 {
        self.atoms
            .last()
            .filter(|a| a.value == 0.0)
            .map_or(0.0, |a| a.mass)
    }

    /// `(Σ value^p · mass)^{1/p}`; the largest value for `p = ∞`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::domain("L^p norm needs p ≥ 1"));
        }
        if p.is_infinite() {
            return Ok(self.max_value());
        }
        let s = numeric::sum(self.atoms.iter().map(|a| a.value.powf(p) * a.mass));
        Ok(s.powf(1.0 / p))
    }
}

/// Free-function form of [`MassFunction::support_measure`].
pub fn support_measure(f: &MassFunction, threshold: f64) -> f64 {
    f.support_measure(threshold)
}

/// Free-function form of [`MassFunction::lp_norm`].
pub fn lp_norm(f: &MassFunction, p: f64) -> Result<f64> {
    f.lp_norm(p)
}

/// Shape of a uniform grid: `extents[i]` lattice points along axis `i`,
/// spacing `h`, row-major layout with the last axis fastest.
///
/// Point `(i_0, …, i_{n-1})` sits at `(i_0 h, …, i_{n-1} h)` and carries
/// measure `h^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    spacing: f64,
    extents: Vec<usize>,
}

impl GridGeometry {
    pub fn new(spacing: f64, extents: Vec<usize>) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        if extents.is_empty() {
            return Err(Error::invalid("grid needs at least one axis"));
        }
        if extents.iter().any(|&e| e < 3) {
            return Err(Error::invalid("every axis needs at least 3 cells"));
        }
        Ok(Self { spacing, extents })
    }

    /// Cube `[0, side]^dim` sampled with `points` lattice points per axis.
    pub fn cube(dim: usize, points: usize, side: f64) -> Result<Self> {
        if points < 3 {
            return Err(Error::invalid("every axis needs at least 3 cells"));
        }
        Self::new(side / (points - 1) as f64, vec![points; dim])
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_measure(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    pub fn domain_measure(&self) -> f64 {
        self.cell_measure() * self.len() as f64
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for i in (0..self.dim().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.extents[i + 1];
        }
        s
    }

    /// Multi-index of a flat index.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for i in (0..self.dim()).rev() {
            idx[i] = flat % self.extents[i];
            flat /= self.extents[i];
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> Option<usize> {
        if idx.len() != self.dim() {
            return None;
        }
        let mut flat = 0;
        for (i, &c) in idx.iter().enumerate() {
            if c >= self.extents[i] {
                return None;
            }
            flat = flat * self.extents[i] + c;
        }
        Some(flat)
    }

    /// Physical coordinates of a flat index.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat)
            .into_iter()
            .map(|c| c as f64 * self.spacing)
            .collect()
    }

    pub fn is_boundary(&self, mut flat: usize) -> bool {
        for &e in self.extents.iter().rev() {
            let c = flat % e;
            if c == 0 || c + 1 == e {
                return true;
            }
            flat /= e;
        }
        false
    }

    /// Side length along each axis, `(extent - 1)·h`.
    pub fn sides(&self) -> Vec<f64> {
        self.extents
            .iter()
            .map(|&e| (e - 1) as f64 * self.spacing)
            .collect()
    }
}

/// Real function sampled on a [`GridGeometry`], vanishing on the outermost
/// layer of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::invalid(
                "value count does not match the grid extents",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid values must be finite"));
        }
        let f = Self { geometry, values };
        if let Some(flat) = f.boundary_violation() {
            return Err(Error::invalid(alloc::format!(
                "value at boundary cell {flat} is nonzero; functions must vanish on the outer layer"
            )));
        }
        Ok(f)
    }

    /// Samples `g` at every lattice point.
    pub fn from_fn<G: FnMut(&[f64]) -> f64>(geometry: GridGeometry, mut g: G) -> Result<Self> {
        let values = (0..geometry.len())
            .map(|i| g(&geometry.coords(i)))
            .collect();
        Self::new(geometry, values)
    }

    /// Samples `g` and forces the outer layer to zero.
    pub fn from_fn_clamped<G: FnMut(&[f64]) -> f64>(
        geometry: GridGeometry,
        mut g: G,
    ) -> Result<Self> {
        let values = (0..geometry.len())
            .map(|i| {
                if geometry.is_boundary(i) {
                    0.0
                } else {
                    g(&geometry.coords(i))
                }
            })
            .collect();
        Self::new(geometry, values)
    }

    pub(crate) fn from_parts_zeroing_boundary(
        geometry: GridGeometry,
        mut values: Vec<f64>,
    ) -> Self {
        for (i, v) in values.iter_mut().enumerate() {
            if geometry.is_boundary(i) {
                *v = 0.0;
            }
        }
        Self { geometry, values }
    }

    fn boundary_violation(&self) -> Option<usize> {
        (0..self.values.len()).find(|&i| self.values[i] != 0.0 && self.geometry.is_boundary(i))
    }

    pub fn zeros(geometry: GridGeometry) -> Self {
        let n = geometry.len();
        Self {
            geometry,
            values: vec![0.0; n],
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn spacing(&self) -> f64 {
        self.geometry.spacing()
    }

    pub fn extents(&self) -> &[usize] {
        self.geometry.extents()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain_measure(&self) -> f64 {
        self.geometry.domain_measure()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Cellwise image under `g`; `g(0)` must be `0` to keep the boundary layer.
    pub fn map<G: Fn(f64) -> f64>(&self, g: G) -> Result<Self> {
        Self::new(
            self.geometry.clone(),
            self.values.iter().map(|&v| g(v)).collect(),
        )
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            geometry: self.geometry.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Direct quadrature `(Σ |f|^p h^n)^{1/p}`.
    pub fn lp_quadrature(&self, p: f64) -> f64 {
        let w = self.geometry.cell_measure();
        if p.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        numeric::sum(self.values.iter().map(|v| v.abs().powf(p) * w)).powf(1.0 / p)
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.geometry == other.geometry
    }
}

/// One atom per cell with value `|f(cell)|` and mass `h^n`; equal values
/// (in particular all zeros) are merged.
pub fn grid_to_mass(f: &GridFunction) -> MassFunction {
    MassFunction::from_cells(&f.values, f.geometry.cell_measure())
        .expect("grid functions always have finite values and cells")
}

/// One evaluation point of a checked inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl TracePoint {
    pub fn ratio(&self) -> f64 {
        ratio(self.lhs, self.rhs)
    }
}

/// `lhs / rhs` with `0/0 = 0` and `x/0 = ∞`.
pub(crate) fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs <= 0.0 {
        0.0
    } else if rhs <= 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

/// Outcome of one inequality check.
///
/// `pass` is always `worst_ratio ≤ constant_used · (1 + tolerance)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub inequality_id: InequalityId,
    pub params: Vec<(String, f64)>,
    pub worst_ratio: f64,
    pub worst_location: f64,
    pub constant_used: f64,
    pub pass: bool,
    pub tolerance: f64,
    pub flags: Vec<String>,
    pub trace: Vec<TracePoint>,
}

impl CheckReport {
    pub fn new(
        inequality_id: InequalityId,
        worst_ratio: f64,
        worst_location: f64,
        constant_used: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            inequality_id,
            params: Vec::new(),
            worst_ratio,
            worst_location,
            constant_used,
            pass: passes(worst_ratio, constant_used, tolerance),
            tolerance,
            flags: Vec::new(),
            trace: Vec::new(),
        }
    }

    /// Report whose constant is the observed ratio itself.
    pub fn fitted(
        inequality_id: InequalityId,
        worst_ratio: f64,
        worst_location: f64,
        tolerance: f64,
    ) -> Self {
        Self::new(
            inequality_id,
            worst_ratio,
            worst_location,
            worst_ratio,
            tolerance,
        )
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.push((String::from(key), value));
        self
    }

    pub fn with_flag(mut self, flag: &str) -> Self {
        self.flags.push(String::from(flag));
        self
    }

    pub fn with_trace(mut self, trace: Vec<TracePoint>) -> Self {
        self.trace = trace;
        self
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    /// Re-evaluates the verdict at a different constant.
    pub fn passes_at(&self, constant: f64) -> bool {
        passes(self.worst_ratio, constant, self.tolerance)
    }
}

fn passes(worst_ratio: f64, constant: f64, tolerance: f64) -> bool {
    matches!(
        worst_ratio.partial_cmp(&(constant * (1.0 + tolerance))),
        Some(Ordering::Less | Ordering::Equal)
    )
}
