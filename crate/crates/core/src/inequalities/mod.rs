//! One checker per inequality. Every checker returns a [`CheckReport`] whose
//! `worst_ratio` is the largest observed `lhs / rhs` and whose
//! `constant_used` is the bound that ratio is held to.

mod coulhon;
mod nash;
mod oneil;
mod scalar;
mod sobolev;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)] // shadowed by std methods whenever std is linked
use num_traits::Float;

use crate::gradient::{metric_gradient_modulus, polya_szego_compare, GradientMode};
use crate::isoperimetry::{euclidean_phi, ProfileHandle};
use crate::measure::{grid_to_mass, CheckReport, GridFunction, MassFunction};
use crate::numeric::{binomial_order, oscillation_constant, GeometricGrid};
use crate::rearrangement::StepProfile;
use crate::{Error, Result};

pub use coulhon::{check_derivative_p, check_oscillation_p, check_s_phi_p, coulhon_direct};
pub use nash::{check_nash, check_nash_classical};
pub use oneil::{check_oneil, check_oneil_grid};
pub use scalar::{check_chain_rule, check_chain_rule_scalar, check_lemma_des, des1_max_slack};
pub use sobolev::{check_sobolev, sobolev_exponent, SobolevMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InequalityId {
    SPhiP,
    OscillationP,
    DerivativeP,
    LemmaDes,
    ChainRule,
    ONeil,
    Nash,
    SobolevWeak,
    SobolevStrong,
    SobolevExp,
    SobolevMorrey,
    PolyaSzego,
}

impl InequalityId {
    pub const ALL: [InequalityId; 12] = [
        InequalityId::SPhiP,
        InequalityId::OscillationP,
        InequalityId::DerivativeP,
        InequalityId::LemmaDes,
        InequalityId::ChainRule,
        InequalityId::ONeil,
        InequalityId::Nash,
        InequalityId::SobolevWeak,
        InequalityId::SobolevStrong,
        InequalityId::SobolevExp,
        InequalityId::SobolevMorrey,
        InequalityId::PolyaSzego,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            InequalityId::SPhiP => "s_phi_p",
            InequalityId::OscillationP => "oscillation_p",
            InequalityId::DerivativeP => "derivative_p",
            InequalityId::LemmaDes => "lemma_des",
            InequalityId::ChainRule => "chain_rule",
            InequalityId::ONeil => "oneil",
            InequalityId::Nash => "nash",
            InequalityId::SobolevWeak => "sobolev_weak",
            InequalityId::SobolevStrong => "sobolev_strong",
            InequalityId::SobolevExp => "sobolev_exp",
            InequalityId::SobolevMorrey => "sobolev_morrey",
            InequalityId::PolyaSzego => "polya_szego",
        }
    }

    /// Whether the check depends on a function at all.
    pub fn needs_function(&self) -> bool {
        !matches!(self, InequalityId::LemmaDes)
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InequalityId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::invalid(alloc::format!("unknown inequality id {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstantMode {
    /// Hold the ratio to the constant of the statement.
    #[default]
    PaperConstant,
    /// Report the observed ratio as the constant; never fails.
    Fitted,
}

impl ConstantMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConstantMode::PaperConstant => "paper_constant",
            ConstantMode::Fitted => "fitted",
        }
    }
}

impl fmt::Display for ConstantMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstantMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper_constant" => Ok(ConstantMode::PaperConstant),
            "fitted" => Ok(ConstantMode::Fitted),
            other => Err(Error::invalid(alloc::format!(
                "unknown constant mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeForm {
    /// `(F**(a))^{1/p} − (F**(b))^{1/p}` against the integral of the bound
    /// over each grid interval.
    #[default]
    Integrated,
    /// The closed-form derivative at each grid point.
    Pointwise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityParams {
    pub p: f64,
    pub n: usize,
    pub constant_mode: ConstantMode,
    pub tolerance: f64,
    pub points_per_decade: u32,
    /// Multiplies `2^{(k+1)/p}` in the derivative form; `None` means `p`.
    pub derivative_factor: Option<f64>,
    pub derivative_form: DerivativeForm,
    pub gradient_mode: GradientMode,
    /// `(c1, c2)` for the general Nash form; `None` selects the classical one.
    pub nash_constants: Option<(f64, f64)>,
    /// Exponent of the chain rule check.
    pub chain_exponent: f64,
    /// Lattice for the scalar sweeps: points per axis and the upper end.
    pub lattice_points: usize,
    pub lattice_max: f64,
}

impl Default for InequalityParams {
    fn default() -> Self {
        Self {
            p: 1.0,
            n: 2,
            constant_mode: ConstantMode::PaperConstant,
            tolerance: 0.05,
            points_per_decade: 64,
            derivative_factor: None,
            derivative_form: DerivativeForm::Integrated,
            gradient_mode: GradientMode::MetricMax,
            nash_constants: None,
            chain_exponent: 2.0,
            lattice_points: 400,
            lattice_max: 20.0,
        }
    }
}

impl InequalityParams {
    pub fn new(p: f64, n: usize) -> Result<Self> {
        let params = Self {
            p,
            n,
            ..Self::default()
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::domain("p must be finite and at least 1"));
        }
        if self.n == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::domain("tolerance must be nonnegative"));
        }
        if self.points_per_decade == 0 {
            return Err(Error::domain("points_per_decade must be positive"));
        }
        Ok(())
    }

    /// The integer `k` with `k < p ≤ k + 1`.
    pub fn k(&self) -> u32 {
        binomial_order(self.p)
    }

    /// `2^{(k+1)/p − 1}`.
    pub fn oscillation_constant(&self) -> f64 {
        oscillation_constant(self.p)
    }

    /// `2^{(k+1)/p}`, the constant as stated for the derivative form.
    pub fn derivative_stated_constant(&self) -> f64 {
        2f64.powf((self.k() as f64 + 1.0) / self.p)
    }

    pub fn derivative_constant(&self) -> f64 {
        self.derivative_factor.unwrap_or(self.p) * self.derivative_stated_constant()
    }

    /// The geometric grid from one cell to the larger of the domain and twice
    /// the support.
    pub fn t_grid(&self, f: &GridFunction, support: f64) -> Result<Vec<f64>> {
        let top = f.domain_measure().max(2.0 * support);
        Ok(GeometricGrid::new(f.geometry().cell_measure(), top, self.points_per_decade)?.points())
    }

    pub(crate) fn report(
        &self,
        id: InequalityId,
        worst: f64,
        location: f64,
        constant: f64,
    ) -> CheckReport {
        let report = match self.constant_mode {
            ConstantMode::PaperConstant => {
                CheckReport::new(id, worst, location, constant, self.tolerance)
            }
            ConstantMode::Fitted => {
                let r = CheckReport::fitted(id, worst, location, self.tolerance);
                if constant.is_finite() {
                    r.with_param("reference_constant", constant)
                } else {
                    r
                }
            }
        };
        report
            .with_param("p", self.p)
            .with_param("n", self.n as f64)
    }
}

/// `f*`, `|∇f|` and the derived quantities every function check needs.
pub(crate) struct Prepared {
    pub mass: MassFunction,
    pub profile: StepProfile,
    pub gradient: MassFunction,
    pub support: f64,
}

impl Prepared {
    pub fn new(f: &GridFunction, mode: GradientMode) -> Self {
        let mass = grid_to_mass(f);
        let profile = StepProfile::from_mass(&mass);
        let gradient = grid_to_mass(&metric_gradient_modulus(f, mode));
        let support = mass.support_measure(0.0);
        Self {
            mass,
            profile,
            gradient,
            support,
        }
    }

    /// `‖f‖_p` and `‖∇f‖_p`, rejecting a vanishing gradient under a nonzero
    /// function.
    pub fn norms(&self, p: f64) -> Result<(f64, f64)> {
        let fp = self.mass.lp_norm(p)?;
        let gp = self.gradient.lp_norm(p)?;
        if gp <= 0.0 && fp > 0.0 {
            return Err(Error::MalformedInput(String::from(
                "gradient vanishes identically under a nonzero function",
            )));
        }
        Ok((fp, gp))
    }
}

/// Runs the checker registered under `id`.
///
/// `phi` defaults to the Euclidean Coulhon function of dimension `params.n`.
pub fn run_check(
    id: InequalityId,
    f: &GridFunction,
    phi: Option<&ProfileHandle>,
    params: &InequalityParams,
) -> Result<CheckReport> {
    params.validate()?;
    let euclid;
    let phi = match phi {
        Some(phi) => phi,
        None => {
            euclid = euclidean_phi(params.n)?;
            &euclid
        }
    };
    match id {
        InequalityId::SPhiP => check_s_phi_p(f, phi, params),
        InequalityId::OscillationP => check_oscillation_p(f, phi, params),
        InequalityId::DerivativeP => check_derivative_p(f, phi, params),
        InequalityId::LemmaDes => {
            check_lemma_des(params.p, params.lattice_max, params.lattice_points)
        }
        InequalityId::ChainRule => check_chain_rule(f, params.chain_exponent, params),
        InequalityId::ONeil => {
            let grad = metric_gradient_modulus(f, params.gradient_mode);
            let pow = f.map(|v| v.abs().powf(params.p - 1.0))?;
            check_oneil_grid(&pow, &grad, params)
        }
        InequalityId::Nash => match params.nash_constants {
            Some((c1, c2)) => check_nash(f, phi, params.p, c1, c2, params),
            None => check_nash_classical(f, params),
        },
        InequalityId::SobolevWeak => check_sobolev(f, SobolevMode::Weak, params),
        InequalityId::SobolevStrong => check_sobolev(f, SobolevMode::Strong, params),
        InequalityId::SobolevExp => check_sobolev(f, SobolevMode::Exp, params),
        InequalityId::SobolevMorrey => check_sobolev(f, SobolevMode::Morrey, params),
        InequalityId::PolyaSzego => polya_szego_compare(
            f,
            params.n,
            params.p,
            params.gradient_mode,
            params.tolerance,
        ),
    }
}

/// Supremum of `worst_ratio` over a corpus.
pub fn empirical_best_constant(
    id: InequalityId,
    corpus: &[GridFunction],
    phi: Option<&ProfileHandle>,
    params: &InequalityParams,
) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::invalid("corpus is empty"));
    }
    let mut best: f64 = 0.0;
    for f in corpus {
        let r = run_check(id, f, phi, params)?.worst_ratio;
        if r.is_nan() {
            return Ok(f64::NAN);
        }
        best = best.max(r);
    }
    Ok(best)
}
