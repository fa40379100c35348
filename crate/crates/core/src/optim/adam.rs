use super::{
    max_abs, norm, BestTracker, IterRecord, Objective, OptimError, OptimResult, OptimTrace,
    Termination,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamOptions {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub plateau_window: usize,
    pub plateau_tol: f64,
}

impl Default for AdamOptions {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            max_iters: 10_000,
            grad_tol: 1e-10,
            plateau_window: 0,
            plateau_tol: 0.0,
        }
    }
}

/// Plain Adam with bias correction. Stops early if the loss becomes
/// non-finite and returns the best point seen.
pub fn adam_minimize<O: Objective>(
    mut objective: O,
    x0: &[f64],
    opts: &AdamOptions,
) -> Result<OptimResult, OptimError> {
    if !(opts.lr > 0.0) || !(0.0..1.0).contains(&opts.beta1) || !(0.0..1.0).contains(&opts.beta2)
    {
        return Err(OptimError::Options("need lr > 0 and betas in [0, 1)".into()));
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut eval = objective.evaluate(&x);
    if !eval.loss.is_finite() {
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
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let (mut b1t, mut b2t) = (1.0, 1.0);

    let termination = loop {
        let t = records.len();
        if max_abs(&eval.grad) < opts.grad_tol {
            break Termination::GradientTolerance;
        }
        if t > opts.max_iters {
            break Termination::MaxIterations;
        }
        b1t *= opts.beta1;
        b2t *= opts.beta2;
        let mut step2 = 0.0;
        for i in 0..n {
            let g = eval.grad[i];
            m[i] = opts.beta1 * m[i] + (1.0 - opts.beta1) * g;
            v[i] = opts.beta2 * v[i] + (1.0 - opts.beta2) * g * g;
            let mhat = m[i] / (1.0 - b1t);
            let vhat = v[i] / (1.0 - b2t);
            let dx = opts.lr * mhat / (vhat.sqrt() + opts.eps);
            x[i] -= dx;
            step2 += dx * dx;
        }
        eval = objective.evaluate(&x);
        if !eval.loss.is_finite() || eval.grad.iter().any(|g| !g.is_finite()) {
            break Termination::LineSearchFailed;
        }
        best.offer(&x, eval.loss);
        records.push(IterRecord {
            iter: t,
            loss: eval.loss,
            best_loss: best.loss,
            grad_norm: norm(&eval.grad),
            step: step2.sqrt(),
            terms: eval.terms.clone(),
            check: None,
        });
        if best.plateaued(opts.plateau_window, opts.plateau_tol) {
            break Termination::Plateau;
        }
    };

    let evaluations = records.len() + usize::from(termination == Termination::LineSearchFailed);
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
