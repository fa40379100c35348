//! Pointwise residuals of the governing equations.
//!
//! All are generic over [`Scalar`] so they run on plain numbers for
//! reporting and on tape variables for training.

use crate::autodiff::Scalar;

use super::YieldParams;

/// Radial equilibrium: `2(σ_r − σ_θ) + r dσ_r/dr`.
pub fn equilibrium_residual<S: Scalar>(sigma_r: S, sigma_t: S, dsigma_r: S, r: f64) -> S {
    S::from_f64(2.0) * (sigma_r - sigma_t) + S::from_f64(r) * dsigma_r
}

/// Isotropic compatibility and constitutive law combined:
/// `(σ_r − σ_θ) − r dσ_θ/dr`.
pub fn formc_stress_residual<S: Scalar>(sigma_r: S, sigma_t: S, dsigma_t: S, r: f64) -> S {
    (sigma_r - sigma_t) - S::from_f64(r) * dsigma_t
}

/// Material constants for the cross-anisotropic combined equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisoConstants {
    /// Modulus in the isotropic plane.
    pub e: f64,
    /// Radial modulus.
    pub e_radial: f64,
    pub nu: f64,
    pub nu_radial: f64,
}

/// Cross-anisotropic combined equation:
/// `[(1+ν′)/E′]σ_r − [(1+ν)/E]σ_θ − { −(ν′/E′) r dσ_r/dr + [(1−ν)/E] r dσ_θ/dr }`.
pub fn aniso_residual<S: Scalar>(
    sigma_r: S,
    sigma_t: S,
    dsigma_r: S,
    dsigma_t: S,
    r: f64,
    k: AnisoConstants,
) -> S {
    let c = S::from_f64;
    let lhs = c((1.0 + k.nu_radial) / k.e_radial) * sigma_r - c((1.0 + k.nu) / k.e) * sigma_t;
    let rhs = c(-k.nu_radial / k.e_radial * r) * dsigma_r + c((1.0 - k.nu) / k.e * r) * dsigma_t;
    lhs - rhs
}

/// Yield function: `(σ_r − α σ_θ) − σ_Y`.
pub fn yield_residual<S: Scalar>(sigma_r: S, sigma_t: S, yp: YieldParams) -> S {
    (sigma_r - S::from_f64(yp.alpha) * sigma_t) - S::from_f64(yp.sigma_y)
}

/// Compatibility, radial: `ε_r + du/dr`.
pub fn compat_radial_residual<S: Scalar>(eps_r: S, du: S) -> S {
    eps_r + du
}

/// Compatibility, tangential: `ε_θ + u/r`.
pub fn compat_tangential_residual<S: Scalar>(eps_t: S, u: S, r: f64) -> S {
    eps_t + u / S::from_f64(r)
}

/// Displacement-free compatibility: `ε_r − d(r ε_θ)/dr`.
pub fn compat_combined_residual<S: Scalar>(eps_r: S, eps_t: S, deps_t: S, r: f64) -> S {
    eps_r - (eps_t + S::from_f64(r) * deps_t)
}

/// Isotropic elasticity, radial row: `ε_r − (σ_r − 2ν σ_θ)/E`.
pub fn constitutive_radial_residual<S: Scalar>(eps_r: S, sigma_r: S, sigma_t: S, e: f64, nu: f64) -> S {
    eps_r - (S::from_f64(1.0 / e) * sigma_r - S::from_f64(2.0 * nu / e) * sigma_t)
}

/// Isotropic elasticity, tangential row: `ε_θ − (−ν σ_r + (1−ν) σ_θ)/E`.
pub fn constitutive_tangential_residual<S: Scalar>(
    eps_t: S,
    sigma_r: S,
    sigma_t: S,
    e: f64,
    nu: f64,
) -> S {
    eps_t - (S::from_f64(-nu / e) * sigma_r + S::from_f64((1.0 - nu) / e) * sigma_t)
}
