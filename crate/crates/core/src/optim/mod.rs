//! Full-batch deterministic minimizers.
//!
//! [`lbfgs_minimize`] is the default. [`adam_minimize`] is a first-order
//! fallback. Both track the best point seen and never return a worse one.

mod adam;
mod lbfgs;
mod line_search;

pub use adam::{adam_minimize, AdamOptions};
pub use lbfgs::lbfgs_minimize;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("objective is not finite at the starting point ({0})")]
    NonFiniteStart(f64),
    #[error("invalid options: {0}")]
    Options(String),
}

/// Loss, gradient and (optionally) the individual loss terms at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub terms: Vec<f64>,
}

impl Evaluation {
    pub fn new(loss: f64, grad: Vec<f64>) -> Self {
        Self {
            loss,
            grad,
            terms: Vec::new(),
        }
    }

    fn is_finite(&self) -> bool {
        self.loss.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }
}

/// Something that can be minimized. A non-finite loss marks a point as
/// unusable; it is never an error.
pub trait Objective {
    fn evaluate(&mut self, x: &[f64]) -> Evaluation;
}

impl<F: FnMut(&[f64]) -> Evaluation> Objective for F {
    fn evaluate(&mut self, x: &[f64]) -> Evaluation {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimOptions {
    pub max_iters: usize,
    /// Number of stored curvature pairs.
    pub history_size: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Stop when the max-norm of the gradient falls below this.
    pub grad_tol: f64,
    /// Stop when one step changes the loss by less than this fraction.
    pub loss_tol: f64,
    /// Trial step for steepest descent after a curvature failure.
    pub initial_step: f64,
    /// Independent starts (used by the training driver).
    pub restarts: usize,
    /// Stop when the best loss improves by less than `plateau_tol` over
    /// `plateau_window` iterations.
    pub plateau_window: usize,
    pub plateau_tol: f64,
    /// Function evaluations allowed per line search.
    pub max_line_search_evals: usize,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            history_size: 20,
            c1: 1e-4,
            c2: 0.9,
            grad_tol: 1e-10,
            loss_tol: 1e-12,
            initial_step: 1e-3,
            restarts: 3,
            plateau_window: 50,
            plateau_tol: 1e-14,
            max_line_search_evals: 25,
        }
    }
}

impl OptimOptions {
    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |m: &str| Err(OptimError::Options(m.to_string()));
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return bad("need 0 < c1 < c2 < 1");
        }
        if self.history_size == 0 {
            return bad("history size must be at least 1");
        }
        if !(self.initial_step > 0.0) {
            return bad("initial step must be positive");
        }
        if self.max_line_search_evals == 0 {
            return bad("line search needs at least one evaluation");
        }
        Ok(())
    }
}

/// Line-search bookkeeping for one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCheck {
    pub alpha: f64,
    pub phi0: f64,
    pub slope0: f64,
    pub phi: f64,
    pub slope: f64,
}

impl StepCheck {
    /// Both strong Wolfe conditions.
    pub fn satisfies_wolfe(&self, c1: f64, c2: f64) -> bool {
        self.phi <= self.phi0 + c1 * self.alpha * self.slope0
            && self.slope.abs() <= -c2 * self.slope0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub loss: f64,
    pub best_loss: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub terms: Vec<f64>,
    pub check: Option<StepCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    LossTolerance,
    Plateau,
    MaxIterations,
    LineSearchFailed,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::GradientTolerance => "gradient_tolerance",
            Termination::LossTolerance => "loss_tolerance",
            Termination::Plateau => "plateau",
            Termination::MaxIterations => "max_iterations",
            Termination::LineSearchFailed => "line_search_failed",
        }
    }
}

/// Per-iteration history. Record 0 is the starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimTrace {
    pub records: Vec<IterRecord>,
    pub termination: Termination,
    pub evaluations: usize,
}

impl OptimTrace {
    pub fn final_loss(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.best_loss)
    }

    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn line_search_failed(&self) -> bool {
        self.termination == Termination::LineSearchFailed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    /// Best point seen.
    pub x: Vec<f64>,
    pub loss: f64,
    pub trace: OptimTrace,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Tracks the best point and detects plateaus.
#[derive(Debug)]
pub(crate) struct BestTracker {
    pub x: Vec<f64>,
    pub loss: f64,
    history: Vec<f64>,
}

impl BestTracker {
    pub fn new(x: &[f64], loss: f64) -> Self {
        Self {
            x: x.to_vec(),
            loss,
            history: vec![loss],
        }
    }

    pub fn offer(&mut self, x: &[f64], loss: f64) {
        if loss < self.loss {
            self.loss = loss;
            self.x.copy_from_slice(x);
        }
        self.history.push(self.loss);
    }

    pub fn plateaued(&self, window: usize, tol: f64) -> bool {
        let n = self.history.len();
        window > 0 && n > window && self.history[n - 1 - window] - self.history[n - 1] < tol
    }
}
