//! Physics-informed neural network solver for spherical cavity expansion.
//!
//! A small tanh network maps the radius `r` to the radial and tangential
//! stresses. It is trained by minimizing squared residuals of the governing
//! ODEs and boundary conditions, with derivatives supplied by the
//! [`autodiff`] module and minimization by L-BFGS from [`optim`]. The
//! [`oracle`] module provides closed-form and Runge-Kutta reference fields.

pub mod autodiff;
pub mod cli;
pub mod mlp;
pub mod physics;
pub mod optim;
pub mod oracle;
pub mod train;
