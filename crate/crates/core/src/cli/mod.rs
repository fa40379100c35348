//! The `cavex` command line.
//!
//! Exit codes: 0 success, 1 bad arguments or configuration, 2 numerical
//! failure.

pub mod config;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::mlp::{InputMap, MlpError, Params};
use crate::oracle::{elastic_profile, linspace, metrics, EpSolution, Metrics, Region, StressProfile};
use crate::physics::{CaseId, Formulation, PhysicsError};
use crate::train::{predict, train_case, train_elastoplastic, EpReport, TrainConfig, TrainError, TrainingReport};

use output::{gradhist_csv, loss_history_csv, loss_svg, stress_field_csv, stress_svg, Outputs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<MlpError> for CliError {
    fn from(e: MlpError) -> Self {
        match e {
            MlpError::Io(io) => CliError::Io(io),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cavex", version, about = "Physics-informed network solver for spherical cavity expansion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train on one case and write fields, histories and weights.
    Train(TrainArgs),
    /// Train formulations A, B and C on case i with identical budgets.
    CompareFormulations(CompareArgs),
    /// Re-evaluate saved weights against the reference solution.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// i, ii, iii or iv
    #[arg(long)]
    case: Option<String>,
    /// A, B or C (A and B only for case i)
    #[arg(long)]
    formulation: Option<String>,
    /// `key = value` configuration file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Map radii onto [-1, 1] before the first layer
    #[arg(long)]
    normalize: bool,
    /// Also write SVG plots
    #[arg(long)]
    plot: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    case: String,
    /// Weights of the whole-domain net, or of the elastic net for cases iii and iv
    #[arg(long)]
    weights: PathBuf,
    /// Weights of the plastic net (cases iii and iv)
    #[arg(long)]
    plastic_weights: Option<PathBuf>,
    #[arg(long, default_value = "C")]
    formulation: String,
    /// Evaluation points per region
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// The weights were trained with normalized radii
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot: bool,
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::CompareFormulations(a) => cmd_compare(a),
        Command::Evaluate(a) => cmd_evaluate(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

fn parse_case(s: &str) -> Result<CaseId, CliError> {
    s.parse().map_err(|e: PhysicsError| CliError::Usage(e.to_string()))
}

fn parse_formulation(s: &str) -> Result<Formulation, CliError> {
    s.parse().map_err(|e: PhysicsError| CliError::Usage(e.to_string()))
}

/// Config file first, then flags.
fn resolve_config(
    config: Option<&Path>,
    case: Option<&str>,
    formulation: Option<&str>,
    seed: Option<u64>,
    out: Option<&Path>,
    normalize: bool,
    require_case: bool,
) -> Result<TrainConfig, CliError> {
    let (file_case, mut cfg) = match config {
        Some(p) => {
            let f = config::load(p)?;
            (f.case, f.train)
        }
        None => (None, TrainConfig::new(CaseId::I)),
    };
    match case.map(parse_case).transpose()?.or(file_case) {
        Some(c) => cfg.case = c,
        None if require_case => return Err(CliError::Usage("--case is required".into())),
        None => {}
    }
    if let Some(f) = formulation {
        cfg.formulation = parse_formulation(f)?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.out_dir = o.to_path_buf();
    }
    cfg.normalize |= normalize;
    cfg.validate()?;
    Ok(cfg)
}

fn config_json(cfg: &TrainConfig) -> Value {
    let o = &cfg.optim;
    json!({
        "case": cfg.case.as_str(),
        "formulation": cfg.formulation.as_str(),
        "n_col": cfg.n_col,
        "seed": cfg.seed,
        "normalize": cfg.normalize,
        "out": cfg.out_dir.display().to_string(),
        "bins": cfg.bins,
        "eval_points": cfg.eval_points,
        "w_pde": cfg.weights.pde,
        "w_boundary": cfg.weights.boundary,
        "w_data": cfg.weights.data,
        "max_iters": o.max_iters,
        "history_size": o.history_size,
        "c1": o.c1,
        "c2": o.c2,
        "grad_tol": o.grad_tol,
        "loss_tol": o.loss_tol,
        "initial_step": o.initial_step,
        "restarts": o.restarts,
        "plateau_window": o.plateau_window,
        "plateau_tol": o.plateau_tol,
        "max_line_search_evals": o.max_line_search_evals,
    })
}

fn metrics_json(m: &Metrics) -> Value {
    json!({
        "mse_r": m.mse_r,
        "mse_theta": m.mse_t,
        "r2_r": m.r2_r,
        "r2_theta": m.r2_t,
        "max_abs_error": m.max_abs_error(),
    })
}

fn report_json(rep: &TrainingReport) -> Value {
    json!({
        "region": rep.region.as_str(),
        "seed": rep.seed,
        "final_loss": rep.breakdown.total,
        "terms": rep.breakdown.terms.iter().map(|t| json!({"name": t.name, "value": t.value})).collect::<Vec<_>>(),
        "iterations": rep.trace.iterations(),
        "termination": rep.trace.termination.as_str(),
        "line_search_failed": rep.trace.line_search_failed(),
        "metrics": metrics_json(&rep.metrics),
        "mean_abs_grad": rep.histograms.iter().map(|h| h.mean_abs).collect::<Vec<_>>(),
        "wall_seconds": rep.wall_seconds,
        "restarts": rep.restarts.iter().map(|r| json!({
            "seed": r.seed,
            "final_loss": r.final_loss,
            "iterations": r.iterations,
            "termination": r.termination,
        })).collect::<Vec<_>>(),
    })
}

/// Writes `manifest.json`, which lists itself last.
fn write_manifest(mut outputs: Outputs, mut manifest: Value, started: f64) -> Result<(), CliError> {
    let path = outputs.dir.join("manifest.json");
    outputs.files.push(path.clone());
    manifest["outputs"] = json!(outputs
        .files
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>());
    manifest["exit_status"] = json!(0);
    manifest["started_unix"] = json!(started);
    manifest["finished_unix"] = json!(unix_now());
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<(), CliError> {
    let started = unix_now();
    let cfg = resolve_config(
        a.config.as_deref(),
        a.case.as_deref(),
        a.formulation.as_deref(),
        a.seed,
        a.out.as_deref(),
        a.normalize,
        true,
    )?;
    let mut manifest = json!({
        "command": "train",
        "config_path": a.config.as_ref().map(|p| p.display().to_string()),
        "config": config_json(&cfg),
    });

    if cfg.case.is_elastoplastic() {
        let ep = train_elastoplastic(&cfg)?;
        let mut out = Outputs::new(&cfg.out_dir)?;
        write_ep_outputs(&mut out, &ep, a.plot)?;
        let whole = metrics(&ep.combined(|r| &r.predicted), &ep.combined(|r| &r.exact))
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        manifest["elastic"] = report_json(&ep.elastic);
        manifest["plastic"] = report_json(&ep.plastic);
        manifest["metrics"] = metrics_json(&whole);
        manifest["frozen_boundary_stresses"] = json!([ep.frozen.0, ep.frozen.1]);
        manifest["recovered_inner_pressure"] = json!(ep.recovered_pressure);
        manifest["exact_inner_pressure"] = json!(ep.exact_pressure);
        manifest["continuity_gap"] = json!([ep.continuity.0, ep.continuity.1]);
        println!(
            "case {}: elastic mse ({:.3e}, {:.3e}), plastic mse ({:.3e}, {:.3e}), inner pressure {:.6} (exact {:.6})",
            cfg.case,
            ep.elastic.metrics.mse_r,
            ep.elastic.metrics.mse_t,
            ep.plastic.metrics.mse_r,
            ep.plastic.metrics.mse_t,
            ep.recovered_pressure,
            ep.exact_pressure
        );
        write_manifest(out, manifest, started)
    } else {
        let rep = train_case(&cfg)?;
        let mut out = Outputs::new(&cfg.out_dir)?;
        write_single_outputs(&mut out, &rep, "", a.plot)?;
        manifest["report"] = report_json(&rep);
        manifest["metrics"] = metrics_json(&rep.metrics);
        println!(
            "case {} formulation {}: loss {:.3e}, mse ({:.3e}, {:.3e}), r2 ({:.6}, {:.6})",
            cfg.case,
            cfg.formulation,
            rep.breakdown.total,
            rep.metrics.mse_r,
            rep.metrics.mse_t,
            rep.metrics.r2_r,
            rep.metrics.r2_t
        );
        write_manifest(out, manifest, started)
    }
}

fn write_single_outputs(out: &mut Outputs, rep: &TrainingReport, suffix: &str, plot: bool) -> Result<(), CliError> {
    let regions = vec![rep.region; rep.predicted.len()];
    out.write(
        &format!("stress_field{suffix}.csv"),
        &stress_field_csv(&rep.predicted, &rep.exact, &regions),
    )?;
    out.write(
        &format!("loss_history{suffix}.csv"),
        &loss_history_csv(&rep.trace, &rep.term_names),
    )?;
    out.write(&format!("gradhist{suffix}.csv"), &gradhist_csv(&rep.histograms))?;
    out.write(&format!("weights{suffix}.txt"), &rep.params.to_text())?;
    if plot {
        out.write(&format!("stress{suffix}.svg"), &stress_svg(&rep.predicted, &rep.exact))?;
        out.write(&format!("loss{suffix}.svg"), &loss_svg(&[("total", &rep.trace)]))?;
    }
    Ok(())
}

fn write_ep_outputs(out: &mut Outputs, ep: &EpReport, plot: bool) -> Result<(), CliError> {
    let pred = ep.combined(|r| &r.predicted);
    let exact = ep.combined(|r| &r.exact);
    out.write("stress_field.csv", &stress_field_csv(&pred, &exact, &ep.combined_regions()))?;
    for (rep, tag) in [(&ep.elastic, "elastic"), (&ep.plastic, "plastic")] {
        out.write(
            &format!("loss_history_{tag}.csv"),
            &loss_history_csv(&rep.trace, &rep.term_names),
        )?;
        out.write(&format!("gradhist_{tag}.csv"), &gradhist_csv(&rep.histograms))?;
        out.write(&format!("weights_{tag}.txt"), &rep.params.to_text())?;
    }
    if plot {
        out.write("stress.svg", &stress_svg(&pred, &exact))?;
        out.write(
            "loss.svg",
            &loss_svg(&[("elastic", &ep.elastic.trace), ("plastic", &ep.plastic.trace)]),
        )?;
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<(), CliError> {
    let started = unix_now();
    let base = resolve_config(
        a.config.as_deref(),
        Some("i"),
        None,
        a.seed,
        a.out.as_deref(),
        false,
        true,
    )?;
    let mut reports = Vec::new();
    for form in [Formulation::A, Formulation::B, Formulation::C] {
        let cfg = TrainConfig {
            formulation: form,
            ..base.clone()
        };
        reports.push(train_case(&cfg)?);
    }
    let mut out = Outputs::new(&base.out_dir)?;
    let layers = reports[0].histograms.len();
    let mut csv = String::from("formulation,mse_r,mse_theta");
    for k in 1..=layers {
        csv.push_str(&format!(",mean_abs_grad_{k}"));
    }
    csv.push('\n');
    for rep in &reports {
        csv.push_str(rep.formulation.as_str());
        for v in [rep.metrics.mse_r, rep.metrics.mse_t]
            .into_iter()
            .chain(rep.histograms.iter().map(|h| h.mean_abs))
        {
            csv.push(',');
            csv.push_str(&crate::mlp::fmt_f64(v));
        }
        csv.push('\n');
    }
    out.write("formulations.csv", &csv)?;
    for rep in &reports {
        let tag = rep.formulation.as_str();
        out.write(&format!("gradhist_{tag}.csv"), &gradhist_csv(&rep.histograms))?;
        out.write(
            &format!("loss_history_{tag}.csv"),
            &loss_history_csv(&rep.trace, &rep.term_names),
        )?;
        out.write(&format!("weights_{tag}.txt"), &rep.params.to_text())?;
    }
    if a.plot {
        let traces: Vec<(&str, _)> = reports
            .iter()
            .map(|r| (r.formulation.as_str(), &r.trace))
            .collect();
        out.write("loss.svg", &loss_svg(&traces))?;
    }
    for rep in &reports {
        println!(
            "formulation {}: mse ({:.3e}, {:.3e}), mean |grad| {:?}",
            rep.formulation,
            rep.metrics.mse_r,
            rep.metrics.mse_t,
            rep.histograms.iter().map(|h| h.mean_abs).collect::<Vec<_>>()
        );
    }
    let manifest = json!({
        "command": "compare-formulations",
        "config_path": a.config.as_ref().map(|p| p.display().to_string()),
        "config": config_json(&base),
        "formulations": reports.iter().map(|r| json!({
            "formulation": r.formulation.as_str(),
            "report": report_json(r),
        })).collect::<Vec<_>>(),
    });
    write_manifest(out, manifest, started)
}

fn load_weights(path: &Path, outputs: usize) -> Result<Params, CliError> {
    let params = Params::load(path).map_err(|e| match e {
        MlpError::Io(io) => CliError::Usage(format!("cannot read {}: {io}", path.display())),
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })?;
    if params.arch().outputs() != outputs {
        return Err(CliError::Usage(format!(
            "{}: network has {} outputs, expected {outputs}",
            path.display(),
            params.arch().outputs()
        )));
    }
    Ok(params)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let started = unix_now();
    let case = parse_case(&a.case)?;
    let form = parse_formulation(&a.formulation)?;
    if form != Formulation::C && case != CaseId::I {
        return Err(CliError::Usage(format!("formulation {form} is only available for case i")));
    }
    if a.grid < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let spec = case.spec();
    let numerical = |e: crate::oracle::OracleError| CliError::Numerical(e.to_string());
    let map_for = |lo: f64, hi: f64| a.normalize.then_some(InputMap { lo, hi });

    let (pred, exact, regions, mut manifest) = if case.is_elastoplastic() {
        let plastic_path = a
            .plastic_weights
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("case {case} needs --plastic-weights")))?;
        let elastic = load_weights(&a.weights, 2)?;
        let plastic = load_weights(plastic_path, 2)?;
        let oracle = EpSolution::new(&spec).map_err(numerical)?;
        let c = oracle.plastic.c;
        let pg = linspace(spec.a, c, a.grid);
        let eg = linspace(c, spec.b, a.grid);
        let pp = predict(&plastic, map_for(spec.a, c), &pg, Region::Plastic);
        let ep = predict(&elastic, map_for(c, spec.b), &eg, Region::Elastic);
        let (px, ex) = (oracle.plastic.sample(&pg), oracle.elastic.sample(&eg));
        let m_e = metrics(&ep, &ex).map_err(numerical)?;
        let m_p = metrics(&pp, &px).map_err(numerical)?;
        let join = |p: &crate::oracle::StressField, e: &crate::oracle::StressField| {
            let mut f = p.clone();
            f.region = Region::Whole;
            f.r.extend_from_slice(&e.r[1..]);
            f.sigma_r.extend_from_slice(&e.sigma_r[1..]);
            f.sigma_t.extend_from_slice(&e.sigma_t[1..]);
            f
        };
        let mut regions = vec![Region::Plastic; pp.len()];
        regions.extend(std::iter::repeat(Region::Elastic).take(ep.len() - 1));
        let manifest = json!({
            "elastic": {"metrics": metrics_json(&m_e)},
            "plastic": {"metrics": metrics_json(&m_p)},
            "recovered_inner_pressure": pp.sigma_r[0],
            "exact_inner_pressure": oracle.inner_pressure(),
        });
        (join(&pp, &ep), join(&px, &ex), regions, manifest)
    } else {
        let params = load_weights(&a.weights, form.output_width())?;
        let grid = linspace(spec.a, spec.b, a.grid);
        let pred = predict(&params, map_for(spec.a, spec.b), &grid, Region::Whole);
        let exact = elastic_profile(&spec).map_err(numerical)?.sample(&grid);
        let regions = vec![Region::Whole; grid.len()];
        (pred, exact, regions, json!({}))
    };
    let m = metrics(&pred, &exact).map_err(numerical)?;
    println!(
        "case {case}: mse ({:.3e}, {:.3e}), r2 ({:.6}, {:.6})",
        m.mse_r, m.mse_t, m.r2_r, m.r2_t
    );

    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut out = Outputs::new(&dir)?;
    out.write("stress_field.csv", &stress_field_csv(&pred, &exact, &regions))?;
    if a.plot {
        out.write("stress.svg", &stress_svg(&pred, &exact))?;
    }
    manifest["command"] = json!("evaluate");
    manifest["case"] = json!(case.as_str());
    manifest["formulation"] = json!(form.as_str());
    manifest["grid"] = json!(a.grid);
    manifest["weights"] = json!(a.weights.display().to_string());
    manifest["plastic_weights"] = json!(a.plastic_weights.as_ref().map(|p| p.display().to_string()));
    manifest["metrics"] = metrics_json(&m);
    write_manifest(out, manifest, started)
}
