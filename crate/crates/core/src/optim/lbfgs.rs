use std::collections::VecDeque;

use super::line_search::{strong_wolfe, WolfeParams};
use super::{
    dot, max_abs, norm, BestTracker, IterRecord, Objective, OptimError, OptimOptions,
    OptimResult, OptimTrace, StepCheck, Termination,
};

struct History {
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    capacity: usize,
}

impl History {
    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        // Skip pairs without positive curvature; they would break the
        // positive definiteness of the inverse Hessian estimate.
        if !(sy > f64::EPSILON * norm(&s) * norm(&y)) {
            return;
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
    }

    /// Two-loop recursion: returns -H g.
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

/// Limited-memory BFGS with a strong Wolfe line search.
///
/// Returns the best point seen. When the line search fails along the
/// quasi-Newton direction the history is dropped and steepest descent is
/// tried once; a second failure stops the run.
pub fn lbfgs_minimize<O: Objective>(
    mut objective: O,
    x0: &[f64],
    opts: &OptimOptions,
) -> Result<OptimResult, OptimError> {
    opts.validate()?;
    let wolfe = WolfeParams {
        c1: opts.c1,
        c2: opts.c2,
        max_evals: opts.max_line_search_evals,
    };
    let mut x = x0.to_vec();
    let mut eval = objective.evaluate(&x);
    let mut evaluations = 1;
    if !eval.is_finite() {
        return Err(OptimError::NonFiniteStart(eval.loss));
    }
    let mut best = BestTracker::new(&x, eval.loss);
    let mut records = vec![IterRecord {
        iter: 0,
        loss: eval.loss,
        best_loss: eval.loss,
        grad_norm: norm(&eval.grad),
        step: 0.0,
        terms: eval.terms.clone(),
        check: None,
    }];
    let mut history = History {
        pairs: VecDeque::with_capacity(opts.history_size),
        capacity: opts.history_size,
    };

    let termination = 'outer: loop {
        let iter = records.len();
        if max_abs(&eval.grad) < opts.grad_tol {
            break Termination::GradientTolerance;
        }
        if iter > opts.max_iters {
            break Termination::MaxIterations;
        }

        let mut dir = history.direction(&eval.grad);
        let mut slope0 = dot(&eval.grad, &dir);
        if !(slope0 < 0.0) {
            history.pairs.clear();
            dir = eval.grad.iter().map(|g| -g).collect();
            slope0 = dot(&eval.grad, &dir);
        }
        let (probe, check) = loop {
            let alpha_init = if history.pairs.is_empty() {
                (1.0 / norm(&eval.grad)).min(1.0).max(opts.initial_step)
            } else {
                1.0
            };
            let outcome = strong_wolfe(&mut objective, &x, &eval, &dir, alpha_init, wolfe);
            evaluations += outcome.evaluations;
            if let Some(p) = outcome.accepted {
                let check = StepCheck {
                    alpha: p.alpha,
                    phi0: eval.loss,
                    slope0,
                    phi: p.eval.loss,
                    slope: p.slope,
                };
                break (p, check);
            }
            if history.pairs.is_empty() {
                break 'outer Termination::LineSearchFailed;
            }
            history.pairs.clear();
            dir = eval.grad.iter().map(|g| -g).collect();
            slope0 = dot(&eval.grad, &dir);
        };

        let s: Vec<f64> = probe.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = probe.eval.grad.iter().zip(&eval.grad).map(|(a, b)| a - b).collect();
        let step = norm(&s);
        history.push(s, y);
        let old_loss = eval.loss;
        x = probe.x;
        eval = probe.eval;
        best.offer(&x, eval.loss);
        records.push(IterRecord {
            iter,
            loss: eval.loss,
            best_loss: best.loss,
            grad_norm: norm(&eval.grad),
            step,
            terms: eval.terms.clone(),
            check: Some(check),
        });

        let scale = old_loss.abs().max(eval.loss.abs()).max(1.0);
        if (old_loss - eval.loss) <= opts.loss_tol * scale {
            break Termination::LossTolerance;
        }
        if best.plateaued(opts.plateau_window, opts.plateau_tol) {
            break Termination::Plateau;
        }
    };

    Ok(OptimResult {
        loss: best.loss,
        x: best.x,
        trace: OptimTrace {
            records,
            termination,
            evaluations,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_loop_without_history_is_steepest_descent() {
        let h = History {
            pairs: VecDeque::new(),
            capacity: 3,
        };
        assert_eq!(h.direction(&[1.0, -2.0]), vec![-1.0, 2.0]);
    }

    #[test]
    fn two_loop_recovers_diagonal_hessian() {
        // f = x² + 4y²; one secant pair per axis pins down H⁻¹ exactly.
        let mut h = History {
            pairs: VecDeque::new(),
            capacity: 5,
        };
        h.push(vec![1.0, 0.0], vec![2.0, 0.0]);
        h.push(vec![0.0, 1.0], vec![0.0, 8.0]);
        let d = h.direction(&[2.0, 8.0]);
        assert!((d[0] + 1.0).abs() < 1e-15 && (d[1] + 1.0).abs() < 1e-15, "{d:?}");
    }

    #[test]
    fn negative_curvature_pair_is_dropped() {
        let mut h = History {
            pairs: VecDeque::new(),
            capacity: 2,
        };
        h.push(vec![1.0], vec![-1.0]);
        assert!(h.pairs.is_empty());
    }
}
