//! Fully connected tanh network from the radius to stress (and optionally
//! strain and displacement) outputs.
//!
//! Parameters live in one flat vector ordered layer by layer, each layer's
//! weight matrix row-major followed by its bias vector. The forward pass is
//! generic over [`Scalar`], so the same code runs on `f64`, dual numbers and
//! tape variables.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::autodiff::{Dual, Scalar};

pub const WEIGHTS_MAGIC: &str = "cavex-weights v1";

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("architecture needs at least an input and an output layer, got {0:?}")]
    TooShallow(Vec<usize>),
    #[error("layer {0} has zero width")]
    ZeroWidth(usize),
    #[error("input width must be 1, got {0}")]
    InputWidth(usize),
    #[error("expected {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("weights file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Layer widths, input first. Hidden layers use tanh, the last is affine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    widths: Vec<usize>,
}

impl Architecture {
    pub fn new(widths: Vec<usize>) -> Result<Self, MlpError> {
        if widths.len() < 2 {
            return Err(MlpError::TooShallow(widths));
        }
        if let Some(i) = widths.iter().position(|&w| w == 0) {
            return Err(MlpError::ZeroWidth(i));
        }
        if widths[0] != 1 {
            return Err(MlpError::InputWidth(widths[0]));
        }
        Ok(Self { widths })
    }

    /// `1-16-16-16-outputs`.
    pub fn standard(outputs: usize) -> Self {
        Self::new(vec![1, 16, 16, 16, outputs]).expect("static architecture")
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn outputs(&self) -> usize {
        *self.widths.last().unwrap()
    }

    /// Number of affine layers (hidden layers plus the output layer).
    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn num_hidden(&self) -> usize {
        self.widths.len() - 2
    }

    pub fn num_params(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Offsets of each layer's weight block and bias block in the flat vector.
    pub fn layout(&self) -> Vec<LayerLayout> {
        let mut offset = 0;
        self.widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let layout = LayerLayout {
                    fan_in,
                    fan_out,
                    weights: offset,
                    biases: offset + fan_in * fan_out,
                };
                offset += fan_in * fan_out + fan_out;
                layout
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerLayout {
    pub fan_in: usize,
    pub fan_out: usize,
    /// Start of the row-major `fan_out × fan_in` weight block.
    pub weights: usize,
    /// Start of the `fan_out` bias block.
    pub biases: usize,
}

impl LayerLayout {
    pub fn weight_range(&self) -> std::ops::Range<usize> {
        self.weights..self.weights + self.fan_in * self.fan_out
    }
}

/// Optional affine map of the radius onto `[-1, 1]` before the first layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputMap {
    pub lo: f64,
    pub hi: f64,
}

impl InputMap {
    pub fn scale(&self) -> f64 {
        2.0 / (self.hi - self.lo)
    }

    pub fn apply(&self, r: f64) -> f64 {
        (r - self.lo) * self.scale() - 1.0
    }
}

/// Network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    arch: Architecture,
    values: Vec<f64>,
}

impl Params {
    pub fn from_vec(arch: Architecture, values: Vec<f64>) -> Result<Self, MlpError> {
        let expected = arch.num_params();
        if values.len() != expected {
            return Err(MlpError::ParamCount {
                expected,
                got: values.len(),
            });
        }
        Ok(Self { arch, values })
    }

    pub fn zeros(arch: Architecture) -> Self {
        let n = arch.num_params();
        Self {
            arch,
            values: vec![0.0; n],
        }
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Weight matrix of affine layer `layer` (0-based), row-major.
    pub fn weights(&self, layer: usize) -> &[f64] {
        let l = self.arch.layout()[layer];
        &self.values[l.weight_range()]
    }

    pub fn biases(&self, layer: usize) -> &[f64] {
        let l = self.arch.layout()[layer];
        &self.values[l.biases..l.biases + l.fan_out]
    }

    pub fn forward(&self, r: f64) -> Vec<f64> {
        forward(&self.arch, &self.values, r)
    }

    pub fn forward_with_derivative(&self, r: f64) -> (Vec<f64>, Vec<f64>) {
        let out = forward_dual(&self.arch, &self.values, None, r);
        out.iter().map(|d| (d.value, d.tangent)).unzip()
    }

    /// Serialize in the plain-text weights format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(WEIGHTS_MAGIC);
        s.push('\n');
        let widths: Vec<String> = self.arch.widths.iter().map(|w| w.to_string()).collect();
        s.push_str(&widths.join(" "));
        s.push('\n');
        for l in self.arch.layout() {
            for row in 0..l.fan_out {
                let start = l.weights + row * l.fan_in;
                write_row(&mut s, &self.values[start..start + l.fan_in]);
            }
            write_row(&mut s, &self.values[l.biases..l.biases + l.fan_out]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, MlpError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let parse_err = |line: usize, msg: &str| MlpError::Parse {
            line,
            msg: msg.to_string(),
        };
        let (n, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
        if header.trim() != WEIGHTS_MAGIC {
            return Err(parse_err(n, "missing `cavex-weights v1` header"));
        }
        let (n, widths_line) = lines
            .next()
            .ok_or_else(|| parse_err(2, "missing architecture line"))?;
        let widths = widths_line
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_err(n, &format!("bad width: {e}")))?;
        let arch = Architecture::new(widths).map_err(|e| parse_err(n, &e.to_string()))?;
        let mut values = Vec::with_capacity(arch.num_params());
        let mut last_line = n;
        for l in arch.layout() {
            let rows = std::iter::repeat(l.fan_in)
                .take(l.fan_out)
                .chain(std::iter::once(l.fan_out));
            for expected in rows {
                let (n, line) = lines
                    .next()
                    .ok_or_else(|| parse_err(last_line + 1, "unexpected end of file"))?;
                last_line = n;
                let row = line
                    .split_whitespace()
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| parse_err(n, &format!("bad number: {e}")))?;
                if row.len() != expected {
                    return Err(parse_err(
                        n,
                        &format!("expected {expected} values, found {}", row.len()),
                    ));
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(parse_err(n, "non-finite value"));
                }
                values.extend(row);
            }
        }
        if let Some((n, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            let _ = line;
            return Err(parse_err(n, "trailing content after last layer"));
        }
        Params::from_vec(arch, values)
    }

    pub fn save(&self, path: &Path) -> Result<(), MlpError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, MlpError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

fn write_row(s: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{}", fmt_f64(*v));
    }
    s.push('\n');
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Glorot-uniform weights, zero biases.
pub fn init_params(arch: &Architecture, seed: u64) -> Params {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; arch.num_params()];
    for l in arch.layout() {
        let bound = (6.0 / (l.fan_in + l.fan_out) as f64).sqrt();
        for v in &mut values[l.weight_range()] {
            *v = rng.gen_range(-bound..bound);
        }
    }
    Params {
        arch: arch.clone(),
        values,
    }
}

/// Network evaluation over any scalar type.
///
/// `theta` holds the flat parameters already lifted into `T`.
pub fn forward_generic<T: Scalar>(arch: &Architecture, theta: &[T], input: T) -> Vec<T> {
    debug_assert_eq!(theta.len(), arch.num_params());
    let layout = arch.layout();
    let last = layout.len() - 1;
    let mut z = vec![input];
    for (k, l) in layout.iter().enumerate() {
        let next: Vec<T> = (0..l.fan_out)
            .map(|row| {
                let w = &theta[l.weights + row * l.fan_in..l.weights + (row + 1) * l.fan_in];
                let a = T::dot(w, &z) + theta[l.biases + row];
                if k == last {
                    a
                } else {
                    a.tanh()
                }
            })
            .collect();
        z = next;
    }
    z
}

pub fn forward(arch: &Architecture, theta: &[f64], r: f64) -> Vec<f64> {
    forward_generic(arch, theta, r)
}

/// Outputs with exact `d/dr`, for parameters of any scalar type.
///
/// Parameters enter as dual constants; the radius is seeded with tangent 1
/// (or the input map's slope when one is supplied).
pub fn forward_dual<T: Scalar>(
    arch: &Architecture,
    theta: &[T],
    map: Option<InputMap>,
    r: f64,
) -> Vec<Dual<T>> {
    let lifted: Vec<Dual<T>> = theta.iter().map(|&t| Dual::constant(t)).collect();
    forward_dual_lifted(arch, &lifted, map, r)
}

/// As [`forward_dual`] with parameters already lifted, so callers evaluating
/// many radii lift once.
pub fn forward_dual_lifted<T: Scalar>(
    arch: &Architecture,
    theta: &[Dual<T>],
    map: Option<InputMap>,
    r: f64,
) -> Vec<Dual<T>> {
    let input = match map {
        Some(m) => Dual::new(T::from_f64(m.apply(r)), T::from_f64(m.scale())),
        None => Dual::variable(T::from_f64(r)),
    };
    forward_generic(arch, theta, input)
}
