//! Nash-type inequalities.

use super::{ConstantMode, InequalityId, InequalityParams, Prepared};
use crate::isoperimetry::ProfileHandle;
use crate::measure::{ratio, CheckReport, GridFunction};
use crate::{Error, Result};
#[allow(unused_imports)] // shadowed by std methods whenever std is linked
use num_traits::Float;

fn nonzero(fp: f64) -> Result<()> {
    if fp > 0.0 {
        Ok(())
    } else {
        Err(Error::domain("the Nash inequality needs ‖f‖_p > 0"))
    }
}

/// `‖f‖_p ≤ c1 φ(c2 (‖f‖₁/‖f‖_p)^{p/(p−1)}) ‖∇f‖_p`.
pub fn check_nash(
    f: &GridFunction,
    phi: &ProfileHandle,
    p: f64,
    c1: f64,
    c2: f64,
    params: &InequalityParams,
) -> Result<CheckReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::domain("the Nash inequality needs p > 1"));
    }
    let prep = Prepared::new(f, params.gradient_mode);
    let (fp, gp) = prep.norms(p)?;
    nonzero(fp)?;
    let f1 = prep.mass.lp_norm(1.0)?;
    let arg = c2 * (f1 / fp).powf(p / (p - 1.0));
    let rhs = c1 * phi.eval(arg) * gp;
    let params = InequalityParams {
        p,
        ..params.clone()
    };
    Ok(params
        .report(InequalityId::Nash, ratio(fp, rhs), arg, 1.0)
        .with_param("c1", c1)
        .with_param("c2", c2)
        .with_param("lhs", fp)
        .with_param("rhs", rhs))
}

/// `‖f‖₂^{1+2/n} ≤ c ‖f‖₁^{2/n} ‖∇f‖₂`; reports the smallest such `c` for
/// this `f`. The statement fixes no constant, so the report is always fitted.
pub fn check_nash_classical(f: &GridFunction, params: &InequalityParams) -> Result<CheckReport> {
    let n = params.n;
    if n != f.dim() {
        return Err(Error::ModeMismatch(alloc::format!(
            "classical Nash with n = {n} on a {}-dimensional grid",
            f.dim()
        )));
    }
    let prep = Prepared::new(f, params.gradient_mode);
    let (f2, g2) = prep.norms(2.0)?;
    nonzero(f2)?;
    let f1 = prep.mass.lp_norm(1.0)?;
    let e = 2.0 / n as f64;
    let lhs = f2.powf(1.0 + e);
    let rhs = f1.powf(e) * g2;
    let fitted = ratio(lhs, rhs);
    let params = InequalityParams {
        p: 2.0,
        constant_mode: ConstantMode::Fitted,
        ..params.clone()
    };
    Ok(params
        .report(InequalityId::Nash, fitted, prep.support, f64::NAN)
        .with_param("fitted_c", fitted)
        .with_flag("classical"))
}
