//! Loss assembly: mean squared residuals over collocation points plus one
//! squared term per boundary condition.

use std::fmt;
use std::str::FromStr;

use crate::autodiff::{Dual, Scalar, Tape, Var};
use crate::mlp::{forward_dual_lifted, Architecture, InputMap, Params};

use super::residuals::*;
use super::{CaseSpec, PhysicsError, YieldParams};

/// Which set of governing equations the network is trained against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    /// Equilibrium, both compatibility relations, both constitutive rows.
    A,
    /// Displacement eliminated from compatibility.
    B,
    /// Stresses only.
    C,
}

impl Formulation {
    pub fn output_width(self) -> usize {
        match self {
            Formulation::A => 5,
            Formulation::B => 4,
            Formulation::C => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Formulation::A => "A",
            Formulation::B => "B",
            Formulation::C => "C",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Formulation {
    type Err = PhysicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Formulation::A),
            "B" | "b" => Ok(Formulation::B),
            "C" | "c" => Ok(Formulation::C),
            other => Err(PhysicsError::UnknownFormulation(other.to_string())),
        }
    }
}

/// The loss functional to minimize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    /// Isotropic elastic shell with the given formulation.
    Elastic(Formulation),
    /// Cross-anisotropic elastic shell (stress-only formulation).
    Anisotropic,
    /// Elastic region `[c, b]` of an elasto-plastic shell.
    EpElastic,
    /// Plastic region `[a, c]`, with the elastic net's stresses at `r = c`
    /// frozen as boundary data.
    EpPlastic { sigma_r_c: f64, sigma_t_c: f64 },
}

impl LossKind {
    pub fn output_width(&self) -> usize {
        match self {
            LossKind::Elastic(f) => f.output_width(),
            _ => 2,
        }
    }

    /// `(name, group)` of every term, in evaluation order (data term excluded).
    pub fn terms(&self) -> &'static [(&'static str, TermGroup)] {
        use TermGroup::*;
        match self {
            LossKind::Elastic(Formulation::C) => &[
                ("stress_radius", Pde),
                ("equilibrium", Pde),
                ("bc_inner", Boundary),
                ("bc_outer", Boundary),
            ],
            LossKind::Elastic(Formulation::B) => &[
                ("equilibrium", Pde),
                ("compatibility", Pde),
                ("constitutive_r", Pde),
                ("constitutive_t", Pde),
                ("bc_inner", Boundary),
                ("bc_outer", Boundary),
            ],
            LossKind::Elastic(Formulation::A) => &[
                ("equilibrium", Pde),
                ("compatibility_r", Pde),
                ("compatibility_t", Pde),
                ("constitutive_r", Pde),
                ("constitutive_t", Pde),
                ("bc_inner", Boundary),
                ("bc_outer", Boundary),
            ],
            LossKind::Anisotropic => &[
                ("aniso", Pde),
                ("equilibrium", Pde),
                ("bc_inner", Boundary),
                ("bc_outer", Boundary),
            ],
            LossKind::EpElastic => &[
                ("stress_radius", Pde),
                ("equilibrium", Pde),
                ("yield_at_c", Boundary),
                ("bc_outer", Boundary),
            ],
            LossKind::EpPlastic { .. } => &[
                ("equilibrium", Pde),
                ("yield", Pde),
                ("continuity_r", Boundary),
                ("continuity_t", Boundary),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermGroup {
    Pde,
    Boundary,
    Data,
}

/// Weights of the PDE, boundary and data groups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub pde: f64,
    pub boundary: f64,
    pub data: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            pde: 1.0,
            boundary: 1.0,
            data: 0.0,
        }
    }
}

impl LossWeights {
    pub fn of(&self, group: TermGroup) -> f64 {
        match group {
            TermGroup::Pde => self.pde,
            TermGroup::Boundary => self.boundary,
            TermGroup::Data => self.data,
        }
    }
}

/// Measured stresses at a radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub r: f64,
    pub sigma_r: f64,
    pub sigma_t: f64,
}

/// Term values and their weighted total.
#[derive(Debug, Clone)]
pub struct LossValue<S> {
    pub terms: Vec<S>,
    pub total: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTerm {
    pub name: &'static str,
    pub group: TermGroup,
    pub value: f64,
}

/// Reportable loss decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub terms: Vec<NamedTerm>,
    pub weights: LossWeights,
}

impl LossBreakdown {
    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }

    /// `Σ w_k term_k`, recomputed from the parts.
    pub fn weighted_sum(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| self.weights.of(t.group) * t.value)
            .sum()
    }
}

/// A fully specified loss: functional, case constants, collocation points.
#[derive(Debug, Clone)]
pub struct LossProblem {
    pub kind: LossKind,
    pub spec: CaseSpec,
    pub collocation: Vec<f64>,
    pub weights: LossWeights,
    pub data: Vec<DataPoint>,
    yield_params: Option<YieldParams>,
}

impl LossProblem {
    pub fn new(kind: LossKind, spec: CaseSpec, collocation: Vec<f64>) -> Result<Self, PhysicsError> {
        spec.validate()?;
        let yield_params = match kind {
            LossKind::Elastic(_) | LossKind::Anisotropic => {
                spec.inner_pressure()?;
                None
            }
            LossKind::EpElastic | LossKind::EpPlastic { .. } => {
                spec.plastic_radius()?;
                Some(spec.yield_params()?)
            }
        };
        if collocation.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(PhysicsError::Geometry("collocation radii must be positive".into()));
        }
        Ok(Self {
            kind,
            spec,
            collocation,
            weights: LossWeights::default(),
            data: Vec::new(),
            yield_params,
        })
    }

    pub fn with_weights(mut self, weights: LossWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_data(mut self, data: Vec<DataPoint>) -> Self {
        self.data = data;
        self
    }

    pub fn output_width(&self) -> usize {
        self.kind.output_width()
    }

    pub fn has_data_term(&self) -> bool {
        !self.data.is_empty()
    }

    pub fn term_names(&self) -> Vec<&'static str> {
        let mut names: Vec<_> = self.kind.terms().iter().map(|t| t.0).collect();
        if self.has_data_term() {
            names.push("data");
        }
        names
    }

    fn term_groups(&self) -> Vec<TermGroup> {
        let mut groups: Vec<_> = self.kind.terms().iter().map(|t| t.1).collect();
        if self.has_data_term() {
            groups.push(TermGroup::Data);
        }
        groups
    }

    /// Evaluate the loss for any field `r ↦ (outputs, d outputs/dr)`.
    pub fn evaluate<S, F>(&self, mut field: F) -> Result<LossValue<S>, PhysicsError>
    where
        S: Scalar,
        F: FnMut(f64) -> Vec<Dual<S>>,
    {
        if self.weights.data > 0.0 && self.data.is_empty() {
            return Err(PhysicsError::EmptyData);
        }
        let width = self.output_width();
        let mut eval = |r: f64| -> Result<Vec<Dual<S>>, PhysicsError> {
            let out = field(r);
            if out.len() != width {
                return Err(PhysicsError::WidthMismatch {
                    expected: width,
                    got: out.len(),
                });
            }
            Ok(out)
        };

        let spec = &self.spec;
        let c = S::from_f64;
        let n_pde = self
            .kind
            .terms()
            .iter()
            .filter(|t| t.1 == TermGroup::Pde)
            .count();
        let mut residuals: Vec<Vec<S>> = vec![Vec::with_capacity(self.collocation.len()); n_pde];
        for &r in &self.collocation {
            let o = eval(r)?;
            let (sr, st) = (o[0].value, o[1].value);
            let (dsr, dst) = (o[0].tangent, o[1].tangent);
            let row: Vec<S> = match self.kind {
                LossKind::Elastic(Formulation::C) | LossKind::EpElastic => vec![
                    formc_stress_residual(sr, st, dst, r),
                    equilibrium_residual(sr, st, dsr, r),
                ],
                LossKind::Elastic(Formulation::B) => {
                    let (er, et, det) = (o[2].value, o[3].value, o[3].tangent);
                    vec![
                        equilibrium_residual(sr, st, dsr, r),
                        compat_combined_residual(er, et, det, r),
                        constitutive_radial_residual(er, sr, st, spec.e, spec.nu),
                        constitutive_tangential_residual(et, sr, st, spec.e, spec.nu),
                    ]
                }
                LossKind::Elastic(Formulation::A) => {
                    let (er, et) = (o[2].value, o[3].value);
                    let (u, du) = (o[4].value, o[4].tangent);
                    vec![
                        equilibrium_residual(sr, st, dsr, r),
                        compat_radial_residual(er, du),
                        compat_tangential_residual(et, u, r),
                        constitutive_radial_residual(er, sr, st, spec.e, spec.nu),
                        constitutive_tangential_residual(et, sr, st, spec.e, spec.nu),
                    ]
                }
                // Multiplied by E so the residual is in stress units like
                // every other term; unscaled it is O(1/E) and never binds.
                LossKind::Anisotropic => vec![
                    c(spec.e) * aniso_residual(sr, st, dsr, dst, r, self.aniso_constants()),
                    equilibrium_residual(sr, st, dsr, r),
                ],
                LossKind::EpPlastic { .. } => vec![
                    equilibrium_residual(sr, st, dsr, r),
                    yield_residual(sr, st, self.yield_params.expect("resolved in new")),
                ],
            };
            for (acc, v) in residuals.iter_mut().zip(row) {
                acc.push(v);
            }
        }
        let mut terms: Vec<S> = residuals.iter().map(|res| mean_square(res)).collect();

        match self.kind {
            LossKind::Elastic(_) | LossKind::Anisotropic => {
                let p = spec.inner_pressure()?;
                let inner = eval(spec.a)?;
                let outer = eval(spec.b)?;
                terms.push((inner[0].value - c(p)).square());
                terms.push((outer[0].value - c(spec.p0)).square());
            }
            LossKind::EpElastic => {
                let yp = self.yield_params.expect("resolved in new");
                let at_c = eval(spec.plastic_radius()?)?;
                let outer = eval(spec.b)?;
                terms.push(yield_residual(at_c[0].value, at_c[1].value, yp).square());
                terms.push((outer[0].value - c(spec.p0)).square());
            }
            LossKind::EpPlastic {
                sigma_r_c,
                sigma_t_c,
            } => {
                let at_c = eval(spec.plastic_radius()?)?;
                terms.push((at_c[0].value - c(sigma_r_c)).square());
                terms.push((at_c[1].value - c(sigma_t_c)).square());
            }
        }

        if self.has_data_term() {
            let mut dr = Vec::with_capacity(self.data.len());
            let mut dt = Vec::with_capacity(self.data.len());
            for d in &self.data {
                let o = eval(d.r)?;
                dr.push(o[0].value - c(d.sigma_r));
                dt.push(o[1].value - c(d.sigma_t));
            }
            terms.push(mean_square(&dr) + mean_square(&dt));
        }

        let groups = self.term_groups();
        let mut total = c(0.0);
        for (t, g) in terms.iter().zip(&groups) {
            let w = self.weights.of(*g);
            if w != 0.0 {
                total = total + c(w) * *t;
            }
        }
        Ok(LossValue { terms, total })
    }

    fn aniso_constants(&self) -> AnisoConstants {
        let (e_radial, nu_radial) = self.spec.radial_constants();
        AnisoConstants {
            e: self.spec.e,
            e_radial,
            nu: self.spec.nu,
            nu_radial,
        }
    }

    pub fn to_breakdown(&self, value: &LossValue<f64>) -> LossBreakdown {
        let terms = self
            .term_names()
            .into_iter()
            .zip(self.term_groups())
            .zip(&value.terms)
            .map(|((name, group), &value)| NamedTerm { name, group, value })
            .collect();
        LossBreakdown {
            total: value.total,
            terms,
            weights: self.weights,
        }
    }

    /// Loss of a network, in plain floating point.
    pub fn breakdown(
        &self,
        params: &Params,
        map: Option<InputMap>,
    ) -> Result<LossBreakdown, PhysicsError> {
        let lifted: Vec<Dual<f64>> = params.values().iter().map(|&v| Dual::constant(v)).collect();
        let arch = params.arch();
        let value = self.evaluate(|r| forward_dual_lifted(arch, &lifted, map, r))?;
        Ok(self.to_breakdown(&value))
    }

    /// Loss value, per-term values and gradient with respect to the flat
    /// parameter vector. `tape` is cleared and reused.
    pub fn value_and_grad(
        &self,
        arch: &Architecture,
        map: Option<InputMap>,
        theta: &[f64],
        tape: &mut Tape,
    ) -> Result<(LossValue<f64>, Vec<f64>), PhysicsError> {
        tape.clear();
        let tape: &Tape = tape;
        let vars = tape.inputs(theta);
        let lifted: Vec<Dual<Var<'_>>> = vars.iter().map(|&v| Dual::constant(v)).collect();
        let value = self.evaluate(|r| forward_dual_lifted(arch, &lifted, map, r))?;
        let adjoints = tape
            .backward(value.total)
            .map_err(|e| PhysicsError::NonFinite(e.to_string()))?;
        let plain = LossValue {
            terms: value.terms.iter().map(|t| t.value()).collect(),
            total: value.total.value(),
        };
        Ok((plain, adjoints.wrt_all(&vars)))
    }
}

fn mean_square<S: Scalar>(res: &[S]) -> S {
    if res.is_empty() {
        return S::from_f64(0.0);
    }
    S::dot(res, res) * S::from_f64(1.0 / res.len() as f64)
}

fn network_loss(
    kind: LossKind,
    params: &Params,
    collocation: &[f64],
    spec: &CaseSpec,
) -> Result<LossBreakdown, PhysicsError> {
    LossProblem::new(kind, *spec, collocation.to_vec())?.breakdown(params, None)
}

/// Stress-only isotropic loss.
pub fn loss_case_i(
    params: &Params,
    collocation: &[f64],
    spec: &CaseSpec,
) -> Result<LossBreakdown, PhysicsError> {
    network_loss(LossKind::Elastic(Formulation::C), params, collocation, spec)
}

/// Stress-only cross-anisotropic loss.
pub fn loss_case_ii(
    params: &Params,
    collocation: &[f64],
    spec: &CaseSpec,
) -> Result<LossBreakdown, PhysicsError> {
    network_loss(LossKind::Anisotropic, params, collocation, spec)
}

pub fn loss_ep_elastic(
    params: &Params,
    collocation: &[f64],
    spec: &CaseSpec,
) -> Result<LossBreakdown, PhysicsError> {
    network_loss(LossKind::EpElastic, params, collocation, spec)
}

pub fn loss_ep_plastic(
    params: &Params,
    collocation: &[f64],
    spec: &CaseSpec,
    sigma_r_c: f64,
    sigma_t_c: f64,
) -> Result<LossBreakdown, PhysicsError> {
    network_loss(
        LossKind::EpPlastic {
            sigma_r_c,
            sigma_t_c,
        },
        params,
        collocation,
        spec,
    )
}

pub fn loss_formulation(
    form: Formulation,
    params: &Params,
    collocation: &[f64],
    spec: &CaseSpec,
) -> Result<LossBreakdown, PhysicsError> {
    if params.arch().outputs() != form.output_width() {
        return Err(PhysicsError::WidthMismatch {
            expected: form.output_width(),
            got: params.arch().outputs(),
        });
    }
    network_loss(LossKind::Elastic(form), params, collocation, spec)
}

/// Sum of the per-component mean squared errors against measured stresses.
pub fn loss_data(params: &Params, points: &[DataPoint]) -> Result<f64, PhysicsError> {
    if points.is_empty() {
        return Err(PhysicsError::EmptyData);
    }
    let n = points.len() as f64;
    let (mut er, mut et) = (0.0, 0.0);
    for d in points {
        let o = params.forward(d.r);
        er += (o[0] - d.sigma_r).powi(2);
        et += (o[1] - d.sigma_t).powi(2);
    }
    Ok(er / n + et / n)
}
