//! Rearrangement calculus on finite measure spaces and numerical checkers for
//! the symmetrization inequalities that tie Coulhon-type conditions
//! `‖f‖_p ≤ φ(‖f‖₀)‖∇f‖_p` to pointwise bounds on `f**`, `f*` and `|∇f|**`.
//!
//! The crate is `no_std` (it needs `alloc`). All integrals over decreasing
//! rearrangements are evaluated exactly on step profiles; the only numerical
//! error left in a verdict comes from sampling a function on a grid.
//!
//! Layout:
//!
//! - [`measure`]: mass functions, grid functions, elementary norms, reports.
//! - [`rearrangement`]: `μ_f`, `f*`, `f**`, powered profiles, Lorentz functionals.
//! - [`gradient`]: discrete gradient modulus and the Pólya–Szegő comparison.
//! - [`isoperimetry`]: isoperimetric profiles, `φ = t/I(t)`, mollified indicators.
//! - [`inequalities`]: one checker per inequality, all returning [`CheckReport`].

#![no_std]
// negated comparisons double as NaN guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod gradient;
pub mod inequalities;
pub mod isoperimetry;
pub mod measure;
pub mod numeric;
pub mod rearrangement;

pub use error::{Error, Result};
pub use gradient::{metric_gradient_modulus, polya_szego_compare, polya_szego_lhs, GradientMode};
pub use inequalities::{run_check, ConstantMode, InequalityId, InequalityParams};
pub use isoperimetry::{euclidean_profile, phi_from_profile, ProfileHandle};
pub use measure::{Atom, CheckReport, GridFunction, GridGeometry, MassFunction, TracePoint};
pub use rearrangement::{LinearProfile, StepProfile};
