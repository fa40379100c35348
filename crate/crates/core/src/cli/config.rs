//! `key = value` run configuration files.

use std::path::{Path, PathBuf};

use crate::physics::CaseId;
use crate::train::TrainConfig;

use super::CliError;

/// Settings read from a file; `case` is optional because the command line
/// may supply it.
#[derive(Debug, Clone)]
pub struct FileConfig {
    pub case: Option<CaseId>,
    pub train: TrainConfig,
}

pub const KEYS: &[&str] = &[
    "case",
    "formulation",
    "n_col",
    "seed",
    "normalize",
    "out",
    "bins",
    "eval_points",
    "w_pde",
    "w_boundary",
    "w_data",
    "max_iters",
    "history_size",
    "c1",
    "c2",
    "grad_tol",
    "loss_tol",
    "initial_step",
    "restarts",
    "plateau_window",
    "plateau_tol",
    "max_line_search_evals",
];

pub fn load(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> Result<FileConfig, CliError> {
    let mut case = None;
    let mut cfg = TrainConfig::new(CaseId::I);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let n = i + 1;
        let err = |m: String| CliError::Usage(format!("line {n}: {m}"));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| v.parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
        let int = |v: &str| v.parse::<usize>().map_err(|e| err(format!("{key}: {e}")));
        match key {
            "case" => case = Some(value.parse().map_err(|e| err(format!("{e}")))?),
            "formulation" => cfg.formulation = value.parse().map_err(|e| err(format!("{e}")))?,
            "n_col" => cfg.n_col = int(value)?,
            "seed" => cfg.seed = value.parse().map_err(|e| err(format!("seed: {e}")))?,
            "normalize" => {
                cfg.normalize = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    other => return Err(err(format!("normalize: expected true or false, got `{other}`"))),
                }
            }
            "out" => cfg.out_dir = PathBuf::from(value),
            "bins" => cfg.bins = int(value)?,
            "eval_points" => cfg.eval_points = int(value)?,
            "w_pde" => cfg.weights.pde = num(value)?,
            "w_boundary" => cfg.weights.boundary = num(value)?,
            "w_data" => cfg.weights.data = num(value)?,
            "max_iters" => cfg.optim.max_iters = int(value)?,
            "history_size" => cfg.optim.history_size = int(value)?,
            "c1" => cfg.optim.c1 = num(value)?,
            "c2" => cfg.optim.c2 = num(value)?,
            "grad_tol" => cfg.optim.grad_tol = num(value)?,
            "loss_tol" => cfg.optim.loss_tol = num(value)?,
            "initial_step" => cfg.optim.initial_step = num(value)?,
            "restarts" => cfg.optim.restarts = int(value)?,
            "plateau_window" => cfg.optim.plateau_window = int(value)?,
            "plateau_tol" => cfg.optim.plateau_tol = num(value)?,
            "max_line_search_evals" => cfg.optim.max_line_search_evals = int(value)?,
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    if let Some(c) = case {
        cfg.case = c;
    }
    Ok(FileConfig { case, train: cfg })
}
