//! Training drivers: collocation sampling, single-region runs with restarts,
//! the two-network elasto-plastic pipeline and gradient histograms.

use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::autodiff::Tape;
use crate::mlp::{init_params, Architecture, InputMap, Params};
use crate::optim::{lbfgs_minimize, Evaluation, OptimError, OptimOptions, OptimTrace};
use crate::oracle::{
    elastic_profile, linspace, metrics, EpSolution, Metrics, OracleError, Region, StressField,
    StressProfile,
};
use crate::physics::{
    CaseId, CaseSpec, Formulation, LossBreakdown, LossKind, LossProblem, LossWeights, PhysicsError,
};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error("all restarts diverged: {0}")]
    Diverged(String),
}

impl TrainError {
    /// Numerical failure, as opposed to a bad request.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            TrainError::Diverged(_) | TrainError::Oracle(_) | TrainError::Physics(PhysicsError::NonFinite(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub case: CaseId,
    pub formulation: Formulation,
    /// Collocation points per region.
    pub n_col: usize,
    /// First seed; restart `k` uses `seed + k`.
    pub seed: u64,
    pub optim: OptimOptions,
    /// Map each region's radii onto `[-1, 1]` before the first layer.
    pub normalize: bool,
    pub weights: LossWeights,
    pub bins: usize,
    /// Evaluation grid points per region.
    pub eval_points: usize,
    pub out_dir: PathBuf,
}

impl TrainConfig {
    pub fn new(case: CaseId) -> Self {
        Self {
            case,
            formulation: Formulation::C,
            n_col: 50,
            seed: 0,
            optim: OptimOptions::default(),
            normalize: false,
            weights: LossWeights::default(),
            bins: 30,
            eval_points: 100,
            out_dir: PathBuf::from("out"),
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.n_col < 2 {
            return Err(TrainError::Config("n_col must be at least 2".into()));
        }
        if self.formulation != Formulation::C && self.case != CaseId::I {
            return Err(TrainError::Config(format!(
                "formulation {} is only available for case i",
                self.formulation
            )));
        }
        if self.bins == 0 {
            return Err(TrainError::Config("bins must be at least 1".into()));
        }
        if self.eval_points < 2 {
            return Err(TrainError::Config("eval grid needs at least 2 points".into()));
        }
        if self.optim.restarts == 0 {
            return Err(TrainError::Config("restarts must be at least 1".into()));
        }
        self.optim.validate()?;
        Ok(())
    }
}

/// `n` evenly spaced points on `[lo, hi]`, both ends included.
pub fn sample_collocation(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, TrainError> {
    if n < 2 {
        return Err(TrainError::Config(format!("need at least 2 collocation points, got {n}")));
    }
    if !(lo < hi) {
        return Err(TrainError::Config(format!("empty interval [{lo}, {hi}]")));
    }
    Ok(linspace(lo, hi, n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradHistogram {
    pub layer: usize,
    /// `counts.len() + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub mean_abs: f64,
}

impl GradHistogram {
    pub fn from_values(layer: usize, values: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if values.is_empty() { (0.0, 0.0) } else { (lo, hi) };
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
        edges.push(hi);
        let mut counts = vec![0; bins];
        for &v in values {
            let k = if width > 0.0 {
                (((v - lo) / width) as usize).min(bins - 1)
            } else {
                0
            };
            counts[k] += 1;
        }
        let mean_abs = if values.is_empty() {
            0.0
        } else {
            values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64
        };
        Self {
            layer,
            edges,
            counts,
            mean_abs,
        }
    }
}

/// Histogram of the loss gradient over each hidden layer's weights.
pub fn capture_grad_histograms(
    problem: &LossProblem,
    params: &Params,
    map: Option<InputMap>,
    bins: usize,
) -> Result<Vec<GradHistogram>, TrainError> {
    let mut tape = Tape::new();
    let arch = params.arch();
    let (_, grad) = problem.value_and_grad(arch, map, params.values(), &mut tape)?;
    Ok(arch
        .layout()
        .iter()
        .take(arch.num_hidden())
        .enumerate()
        .map(|(k, l)| GradHistogram::from_values(k, &grad[l.weight_range()], bins))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartSummary {
    pub seed: u64,
    pub final_loss: f64,
    pub iterations: usize,
    pub termination: Option<&'static str>,
}

/// One trained region.
#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub case: CaseId,
    pub formulation: Formulation,
    pub region: Region,
    pub params: Params,
    pub input_map: Option<InputMap>,
    pub breakdown: LossBreakdown,
    pub term_names: Vec<&'static str>,
    pub trace: OptimTrace,
    pub predicted: StressField,
    pub exact: StressField,
    pub metrics: Metrics,
    pub histograms: Vec<GradHistogram>,
    pub wall_seconds: f64,
    pub seed: u64,
    pub restarts: Vec<RestartSummary>,
}

/// Both networks of an elasto-plastic run.
#[derive(Debug, Clone)]
pub struct EpReport {
    pub elastic: TrainingReport,
    pub plastic: TrainingReport,
    /// Elastic-net stresses at `r = c`, frozen into the plastic loss.
    pub frozen: (f64, f64),
    pub recovered_pressure: f64,
    pub exact_pressure: f64,
    /// `|σ^p(c) − σ^e(c)|` per component.
    pub continuity: (f64, f64),
}

impl EpReport {
    /// Plastic rows then elastic rows, with the shared point `r = c` kept once.
    pub fn combined(&self, f: impl Fn(&TrainingReport) -> &StressField) -> StressField {
        let (p, e) = (f(&self.plastic), f(&self.elastic));
        let skip = usize::from(p.r.last() == e.r.first());
        let mut out = StressField {
            r: p.r.clone(),
            sigma_r: p.sigma_r.clone(),
            sigma_t: p.sigma_t.clone(),
            region: Region::Whole,
        };
        out.r.extend_from_slice(&e.r[skip..]);
        out.sigma_r.extend_from_slice(&e.sigma_r[skip..]);
        out.sigma_t.extend_from_slice(&e.sigma_t[skip..]);
        out
    }

    /// Region tag of each row of [`EpReport::combined`].
    pub fn combined_regions(&self) -> Vec<Region> {
        let (p, e) = (&self.plastic.predicted, &self.elastic.predicted);
        let skip = usize::from(p.r.last() == e.r.first());
        let mut tags = vec![Region::Plastic; p.len()];
        tags.extend(std::iter::repeat(Region::Elastic).take(e.len() - skip));
        tags
    }
}

struct RegionSetup<'a> {
    cfg: &'a TrainConfig,
    problem: LossProblem,
    region: Region,
    lo: f64,
    hi: f64,
    exact: &'a dyn StressProfile,
}

struct RestartRun {
    seed: u64,
    result: Result<(Vec<f64>, f64, OptimTrace), OptimError>,
}

fn run_restart(
    problem: &LossProblem,
    arch: &Architecture,
    map: Option<InputMap>,
    seed: u64,
    opts: &OptimOptions,
) -> RestartRun {
    let theta0 = init_params(arch, seed).into_values();
    let mut tape = Tape::new();
    let objective = |x: &[f64]| match problem.value_and_grad(arch, map, x, &mut tape) {
        Ok((value, grad)) => Evaluation {
            loss: value.total,
            grad,
            terms: value.terms,
        },
        Err(_) => Evaluation::new(f64::INFINITY, vec![0.0; x.len()]),
    };
    let result = lbfgs_minimize(objective, &theta0, opts).map(|r| (r.x, r.loss, r.trace));
    RestartRun { seed, result }
}

fn train_region(setup: RegionSetup<'_>) -> Result<TrainingReport, TrainError> {
    let start = Instant::now();
    let cfg = setup.cfg;
    let problem = &setup.problem;
    let arch = Architecture::standard(problem.output_width());
    let map = cfg.normalize.then_some(InputMap {
        lo: setup.lo,
        hi: setup.hi,
    });

    // Restarts are independent, so they run on separate threads; the
    // reduction below is in seed order and therefore deterministic.
    let seeds: Vec<u64> = (0..cfg.optim.restarts as u64).map(|k| cfg.seed.wrapping_add(k)).collect();
    let runs: Vec<RestartRun> = std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let arch = &arch;
                s.spawn(move || run_restart(problem, arch, map, seed, &cfg.optim))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("restart thread panicked"))
            .collect()
    });

    let mut summaries = Vec::with_capacity(runs.len());
    let mut best: Option<(u64, Vec<f64>, f64, OptimTrace)> = None;
    let mut failures = Vec::new();
    for run in runs {
        match run.result {
            Ok((x, loss, trace)) => {
                summaries.push(RestartSummary {
                    seed: run.seed,
                    final_loss: loss,
                    iterations: trace.iterations(),
                    termination: Some(trace.termination.as_str()),
                });
                if loss.is_finite() && best.as_ref().map_or(true, |b| loss < b.2) {
                    best = Some((run.seed, x, loss, trace));
                }
            }
            Err(e) => {
                failures.push(format!("seed {}: {e}", run.seed));
                summaries.push(RestartSummary {
                    seed: run.seed,
                    final_loss: f64::NAN,
                    iterations: 0,
                    termination: None,
                });
            }
        }
    }
    let (seed, x, _, trace) = best.ok_or_else(|| TrainError::Diverged(failures.join("; ")))?;
    let params = Params::from_vec(arch, x).expect("optimizer preserves length");
    let breakdown = problem.breakdown(&params, map)?;
    let histograms = capture_grad_histograms(problem, &params, map, cfg.bins)?;

    let grid = linspace(setup.lo, setup.hi, cfg.eval_points);
    let predicted = predict(&params, map, &grid, setup.region);
    let exact = setup.exact.sample(&grid);
    let metrics = metrics(&predicted, &exact)?;

    Ok(TrainingReport {
        case: cfg.case,
        formulation: cfg.formulation,
        region: setup.region,
        term_names: problem.term_names(),
        params,
        input_map: map,
        breakdown,
        trace,
        predicted,
        exact,
        metrics,
        histograms,
        wall_seconds: start.elapsed().as_secs_f64(),
        seed,
        restarts: summaries,
    })
}

/// Network stresses (first two outputs) on a grid.
pub fn predict(params: &Params, map: Option<InputMap>, grid: &[f64], region: Region) -> StressField {
    let mut field = StressField {
        r: grid.to_vec(),
        sigma_r: Vec::with_capacity(grid.len()),
        sigma_t: Vec::with_capacity(grid.len()),
        region,
    };
    for &r in grid {
        let o = params.forward(map.map_or(r, |m| m.apply(r)));
        field.sigma_r.push(o[0]);
        field.sigma_t.push(o[1]);
    }
    field
}

/// Single-network training for cases i and ii.
pub fn train_case(cfg: &TrainConfig) -> Result<TrainingReport, TrainError> {
    cfg.validate()?;
    let kind = match cfg.case {
        CaseId::I => LossKind::Elastic(cfg.formulation),
        CaseId::II => LossKind::Anisotropic,
        other => {
            return Err(TrainError::Config(format!(
                "case {other} is elasto-plastic; use the two-stage pipeline"
            )))
        }
    };
    let spec = cfg.case.spec();
    let collocation = sample_collocation(spec.a, spec.b, cfg.n_col)?;
    let problem = LossProblem::new(kind, spec, collocation)?.with_weights(cfg.weights);
    let exact = elastic_profile(&spec)?;
    train_region(RegionSetup {
        cfg,
        problem,
        region: Region::Whole,
        lo: spec.a,
        hi: spec.b,
        exact: exact.as_ref(),
    })
}

/// Two-stage elasto-plastic pipeline: the elastic region first, then the
/// plastic region with the elastic net's stresses at `r = c` frozen.
pub fn train_elastoplastic(cfg: &TrainConfig) -> Result<EpReport, TrainError> {
    cfg.validate()?;
    if !cfg.case.is_elastoplastic() {
        return Err(TrainError::Config(format!("case {} is purely elastic", cfg.case)));
    }
    let spec: CaseSpec = cfg.case.spec();
    let c = spec.plastic_radius()?;
    let oracle = EpSolution::new(&spec)?;

    let problem = LossProblem::new(LossKind::EpElastic, spec, sample_collocation(c, spec.b, cfg.n_col)?)?
        .with_weights(cfg.weights);
    let elastic = train_region(RegionSetup {
        cfg,
        problem,
        region: Region::Elastic,
        lo: c,
        hi: spec.b,
        exact: &oracle.elastic,
    })?;

    let at_c = predict(&elastic.params, elastic.input_map, &[c], Region::Elastic);
    let frozen = (at_c.sigma_r[0], at_c.sigma_t[0]);
    let kind = LossKind::EpPlastic {
        sigma_r_c: frozen.0,
        sigma_t_c: frozen.1,
    };
    let problem = LossProblem::new(kind, spec, sample_collocation(spec.a, c, cfg.n_col)?)?
        .with_weights(cfg.weights);
    let plastic = train_region(RegionSetup {
        cfg,
        problem,
        region: Region::Plastic,
        lo: spec.a,
        hi: c,
        exact: &oracle.plastic,
    })?;

    let ends = predict(&plastic.params, plastic.input_map, &[spec.a, c], Region::Plastic);
    Ok(EpReport {
        recovered_pressure: ends.sigma_r[0],
        exact_pressure: oracle.inner_pressure(),
        continuity: (
            (ends.sigma_r[1] - frozen.0).abs(),
            (ends.sigma_t[1] - frozen.1).abs(),
        ),
        frozen,
        elastic,
        plastic,
    })
}
