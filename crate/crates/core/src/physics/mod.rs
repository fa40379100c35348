//! Cavity cases, governing-equation residuals and loss functionals.

mod case;
mod loss;
mod residuals;

pub use case::{yield_params, CaseId, CaseSpec, YieldCriterion, YieldParams};
pub use loss::{
    loss_case_i, loss_case_ii, loss_data, loss_ep_elastic, loss_ep_plastic, loss_formulation,
    DataPoint, Formulation, LossBreakdown, LossKind, LossProblem, LossValue, LossWeights,
    NamedTerm, TermGroup,
};
pub use residuals::{
    aniso_residual, compat_combined_residual, compat_radial_residual, compat_tangential_residual,
    constitutive_radial_residual, constitutive_tangential_residual, equilibrium_residual,
    formc_stress_residual, yield_residual, AnisoConstants,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("unknown case `{0}` (expected i, ii, iii or iv)")]
    UnknownCase(String),
    #[error("unknown formulation `{0}` (expected A, B or C)")]
    UnknownFormulation(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("moduli must be positive")]
    Modulus,
    #[error("friction angle {0}° outside [0°, 90°)")]
    FrictionAngle(f64),
    #[error("case has no yield criterion")]
    NoYieldCriterion,
    #[error("network has {got} outputs, formulation needs {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("data loss weighted but no data points supplied")]
    EmptyData,
    #[error("non-finite loss: {0}")]
    NonFinite(String),
}
