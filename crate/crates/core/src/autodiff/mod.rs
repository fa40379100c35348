//! Scalar automatic differentiation.
//!
//! Spatial derivatives come from forward-mode [`Dual`] numbers seeded on the
//! radius. Parameter gradients come from a reverse-mode [`Tape`]. Running
//! duals whose components are tape variables gives gradients of losses that
//! contain `d/dr` terms.

mod check;
mod dual;
mod scalar;
mod tape;

pub use check::{
    central_difference, check_gradient, check_gradient_with, max_relative_error, relative_error,
    Stencil,
};
pub use dual::Dual;
pub use scalar::Scalar;
pub use tape::{Adjoints, OpKind, Tape, TapeNode, Var};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdError {
    #[error("backward pass requested on an empty tape")]
    EmptyTape,
    #[error("loss evaluated to a non-finite value ({0})")]
    NonFinite(f64),
}

/// Value and exact derivative of a univariate function at `x`.
pub fn dual_eval<F>(f: F, x: f64) -> (f64, f64)
where
    F: Fn(Dual<f64>) -> Dual<f64>,
{
    let out = f(Dual::variable(x));
    (out.value, out.tangent)
}

/// Loss value and gradient with respect to `params`.
///
/// The gradient is ordered like `params`.
pub fn grad<F>(loss: F, params: &[f64]) -> Result<(f64, Vec<f64>), AdError>
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Var<'t>,
{
    let tape = Tape::with_capacity(params.len() * 4);
    let vars = tape.inputs(params);
    let out = loss(&tape, &vars);
    let adjoints = tape.backward(out)?;
    Ok((out.value(), adjoints.wrt_all(&vars)))
}
