//! Strong Wolfe line search: bracketing followed by zoom with safeguarded
//! cubic interpolation.

use super::{dot, Evaluation, Objective};

/// A trial point along the search direction.
#[derive(Debug, Clone)]
pub(crate) struct Probe {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub eval: Evaluation,
    /// Directional derivative at the trial point.
    pub slope: f64,
}

impl Probe {
    fn phi(&self) -> f64 {
        if self.eval.loss.is_finite() {
            self.eval.loss
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct WolfeParams {
    pub c1: f64,
    pub c2: f64,
    pub max_evals: usize,
}

pub(crate) struct LineSearchOutcome {
    pub accepted: Option<Probe>,
    pub evaluations: usize,
}

struct Search<'a, O: Objective> {
    objective: &'a mut O,
    x0: &'a [f64],
    dir: &'a [f64],
    phi0: f64,
    slope0: f64,
    params: WolfeParams,
    evaluations: usize,
}

impl<O: Objective> Search<'_, O> {
    fn probe(&mut self, alpha: f64) -> Probe {
        let x: Vec<f64> = self
            .x0
            .iter()
            .zip(self.dir)
            .map(|(xi, di)| xi + alpha * di)
            .collect();
        let eval = self.objective.evaluate(&x);
        self.evaluations += 1;
        let slope = dot(&eval.grad, self.dir);
        Probe {
            alpha,
            x,
            eval,
            slope,
        }
    }

    fn sufficient_decrease(&self, p: &Probe) -> bool {
        p.phi() <= self.phi0 + self.params.c1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &Probe) -> bool {
        p.slope.is_finite() && p.slope.abs() <= -self.params.c2 * self.slope0
    }

    fn budget_left(&self) -> bool {
        self.evaluations < self.params.max_evals
    }

    fn zoom(&mut self, mut lo: Probe, mut hi: Probe) -> Option<Probe> {
        while self.budget_left() {
            let width = hi.alpha - lo.alpha;
            if width.abs() <= f64::EPSILON * lo.alpha.abs().max(hi.alpha.abs()) {
                return None;
            }
            let alpha = interpolate(&lo, &hi);
            let p = self.probe(alpha);
            if !self.sufficient_decrease(&p) || p.phi() >= lo.phi() {
                hi = p;
            } else {
                if self.curvature(&p) {
                    return Some(p);
                }
                if p.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = p;
            }
        }
        None
    }
}

/// Minimizer of the cubic through both end points, kept at least 10% of
/// the interval away from either end; bisection when that fails.
fn interpolate(lo: &Probe, hi: &Probe) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let mid = 0.5 * (a + b);
    if !hi.phi().is_finite() || !hi.slope.is_finite() {
        return mid;
    }
    let d1 = lo.slope + hi.slope - 3.0 * (lo.phi() - hi.phi()) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (right - left);
    if t.is_finite() && t >= left + margin && t <= right - margin {
        t
    } else {
        mid
    }
}

/// Search along `dir` from `x0` for a step satisfying the strong Wolfe
/// conditions. `slope0` must be negative.
pub(crate) fn strong_wolfe<O: Objective>(
    objective: &mut O,
    x0: &[f64],
    eval0: &Evaluation,
    dir: &[f64],
    alpha_init: f64,
    params: WolfeParams,
) -> LineSearchOutcome {
    let slope0 = dot(&eval0.grad, dir);
    debug_assert!(slope0 < 0.0, "line search needs a descent direction");
    let mut s = Search {
        objective,
        x0,
        dir,
        phi0: eval0.loss,
        slope0,
        params,
        evaluations: 0,
    };
    let mut prev = Probe {
        alpha: 0.0,
        x: x0.to_vec(),
        eval: eval0.clone(),
        slope: slope0,
    };
    let mut alpha = alpha_init;
    let mut first = true;
    let accepted = loop {
        if !s.budget_left() {
            break None;
        }
        let p = s.probe(alpha);
        if !s.sufficient_decrease(&p) || (!first && p.phi() >= prev.phi()) {
            break s.zoom(prev, p);
        }
        if s.curvature(&p) {
            break Some(p);
        }
        if p.slope >= 0.0 {
            break s.zoom(p, prev);
        }
        alpha = 2.0 * p.alpha;
        prev = p;
        first = false;
    };
    LineSearchOutcome {
        accepted,
        evaluations: s.evaluations,
    }
}
