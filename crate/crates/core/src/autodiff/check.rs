//! Finite-difference harness for validating tape gradients.

use super::{grad, AdError, Scalar, Tape, Var};

/// Central difference scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// `(f(x+h) − f(x−h)) / 2h`, error O(h²).
    ThreePoint,
    /// `(−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h`, error O(h⁴).
    FivePoint,
}

/// `|a − b| / max(|a|, |b|, 1e-12)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| relative_error(x, y))
        .fold(0.0, f64::max)
}

/// Derivative of a univariate function by central differences.
pub fn central_difference<F: FnMut(f64) -> f64>(mut f: F, x: f64, step: f64, stencil: Stencil) -> f64 {
    match stencil {
        Stencil::ThreePoint => (f(x + step) - f(x - step)) / (2.0 * step),
        Stencil::FivePoint => {
            (-f(x + 2.0 * step) + 8.0 * f(x + step) - 8.0 * f(x - step) + f(x - 2.0 * step))
                / (12.0 * step)
        }
    }
}

/// Largest relative disagreement between the tape gradient and three-point
/// central differences over all parameters.
pub fn check_gradient<F>(loss: F, params: &[f64], step: f64) -> Result<f64, AdError>
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Var<'t>,
{
    check_gradient_with(loss, params, step, Stencil::ThreePoint)
}

/// As [`check_gradient`] with a selectable stencil.
///
/// The finite-difference side evaluates `loss` on constant variables, which
/// never touch the tape, so it sees only primal arithmetic.
pub fn check_gradient_with<F>(
    loss: F,
    params: &[f64],
    step: f64,
    stencil: Stencil,
) -> Result<f64, AdError>
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Var<'t>,
{
    assert!(step > 0.0, "finite-difference step must be positive");
    let (_, ad) = grad(&loss, params)?;
    let scratch = Tape::new();
    let mut point: Vec<f64> = params.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..params.len() {
        let x0 = params[i];
        let fd = central_difference(
            |x| {
                point[i] = x;
                let consts: Vec<Var<'_>> = point.iter().map(|&v| Var::constant(v)).collect();
                let v = loss(&scratch, &consts).value();
                point[i] = x0;
                v
            },
            x0,
            step,
            stencil,
        );
        worst = worst.max(relative_error(ad[i], fd));
    }
    Ok(worst)
}
