//! `(fg)**(t) ≤ (1/t) ∫₀ᵗ f* g*`.

use alloc::vec::Vec;

use super::{InequalityId, InequalityParams};
use crate::measure::{grid_to_mass, ratio, CheckReport, GridFunction, MassFunction, TracePoint};
use crate::numeric::GeometricGrid;
use crate::rearrangement::StepProfile;
use crate::{Error, Result};

/// `f`, `g` and `product` must be distributions over the same cells, with
/// `product` built cellwise from `f · g` before atomization.
pub fn check_oneil(
    f: &MassFunction,
    g: &MassFunction,
    product: &MassFunction,
    ts: &[f64],
    tolerance: f64,
) -> Result<CheckReport> {
    let m = f.total_mass();
    let same = |x: f64| (x - m).abs() <= 1e-12 * m;
    if !same(g.total_mass()) || !same(product.total_mass()) {
        return Err(Error::DomainMismatch(alloc::format!(
            "total masses {} / {} / {} differ",
            m,
            g.total_mass(),
            product.total_mass()
        )));
    }
    let fs = StepProfile::from_mass(f);
    let gs = StepProfile::from_mass(g);
    let ps = StepProfile::from_mass(product);
    let mut trace = Vec::with_capacity(ts.len());
    let mut worst = (0.0, 0.0);
    for &t in ts {
        let lhs = ps.maximal_average(t)?;
        let rhs = fs.product_average(&gs, t)?;
        let r = ratio(lhs, rhs);
        if r > worst.0 || r.is_nan() {
            worst = (r, t);
        }
        trace.push(TracePoint { t, lhs, rhs });
    }
    Ok(CheckReport::new(InequalityId::ONeil, worst.0, worst.1, 1.0, tolerance).with_trace(trace))
}

/// [`check_oneil`] for two functions on one grid.
pub fn check_oneil_grid(
    f: &GridFunction,
    g: &GridFunction,
    params: &InequalityParams,
) -> Result<CheckReport> {
    if !f.same_grid(g) {
        return Err(Error::DomainMismatch(
            "the two functions live on different grids".into(),
        ));
    }
    let cell = f.geometry().cell_measure();
    let product: Vec<f64> = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a * b)
        .collect();
    let product = MassFunction::from_cells(&product, cell)?;
    let ts = GeometricGrid::new(cell, f.domain_measure(), params.points_per_decade)?.points();
    Ok(check_oneil(
        &grid_to_mass(f),
        &grid_to_mass(g),
        &product,
        &ts,
        params.tolerance,
    )?
    .with_param("p", params.p)
    .with_param("n", params.n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cells(values: &[f64]) -> MassFunction {
        MassFunction::from_cells(values, 0.5).unwrap()
    }

    fn product(a: &[f64], b: &[f64]) -> MassFunction {
        let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        cells(&p)
    }

    const TS: [f64; 6] = [0.1, 0.5, 1.0, 1.7, 2.5, 4.0];

    #[test]
    fn constant_factor_is_equality() {
        let f = [3.0, 1.0, 0.0, 2.0, 5.0];
        let g = [2.0; 5];
        let r = check_oneil(&cells(&f), &cells(&g), &product(&f, &g), &TS, 1e-12).unwrap();
        for tp in &r.trace {
            assert!((tp.lhs - tp.rhs).abs() < 1e-12, "{tp:?}");
        }
        assert!(r.pass);
    }

    #[test]
    fn aligned_indicators_are_equality() {
        let f = [1.0, 1.0, 0.0, 0.0, 1.0];
        let r = check_oneil(&cells(&f), &cells(&f), &product(&f, &f), &TS, 1e-12).unwrap();
        for tp in &r.trace {
            assert!((tp.lhs - tp.rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_indicators_are_strict() {
        let f = [1.0, 1.0, 0.0, 0.0];
        let g = [0.0, 0.0, 1.0, 1.0];
        let r = check_oneil(&cells(&f), &cells(&g), &product(&f, &g), &TS, 1e-12).unwrap();
        assert_eq!(r.worst_ratio, 0.0);
        assert!(r.trace.iter().all(|tp| tp.rhs > 0.0));
    }

    #[test]
    fn mismatched_domains_rejected() {
        let f = cells(&[1.0, 2.0]);
        let g = cells(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            check_oneil(&f, &g, &f, &TS, 1e-12),
            Err(Error::DomainMismatch(_))
        ));
        let a = GridFunction::zeros(crate::GridGeometry::new(0.1, vec![4]).unwrap());
        let b = GridFunction::zeros(crate::GridGeometry::new(0.1, vec![5]).unwrap());
        assert!(check_oneil_grid(&a, &b, &InequalityParams::default()).is_err());
    }
}
