//! Reference stress fields.
//!
//! Elastic isotropic and elasto-plastic fields are closed form. The
//! cross-anisotropic field is obtained by shooting: `σ_r(b) = p0` is fixed,
//! `σ_θ(b)` is found by bisection so that integrating equilibrium and the
//! combined anisotropic equation inward hits `σ_r(a) = p`.

use crate::physics::{AnisoConstants, CaseId, CaseSpec, YieldParams};

use super::rk4::rk4_endpoint;
use super::{linspace, OracleError, Region, StressField};

/// RK4 steps across a whole region.
pub const DEFAULT_STEPS: usize = 10_000;

/// Stresses and their radial derivatives at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressState {
    pub sigma_r: f64,
    pub sigma_t: f64,
    pub dsigma_r: f64,
    pub dsigma_t: f64,
}

/// A stress profile that can be queried at any radius in its domain.
pub trait StressProfile {
    fn state(&self, r: f64) -> StressState;

    fn domain(&self) -> (f64, f64);

    fn region(&self) -> Region;

    fn sample(&self, grid: &[f64]) -> StressField {
        let (sigma_r, sigma_t) = grid
            .iter()
            .map(|&r| {
                let s = self.state(r);
                (s.sigma_r, s.sigma_t)
            })
            .unzip();
        StressField {
            r: grid.to_vec(),
            sigma_r,
            sigma_t,
            region: self.region(),
        }
    }

    /// `n` evenly spaced points over the whole domain.
    fn sample_uniform(&self, n: usize) -> StressField {
        let (lo, hi) = self.domain();
        self.sample(&linspace(lo, hi, n))
    }
}

/// `σ_r = C1 + C2/r³`, `σ_θ = C1 − C2/(2r³)` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LameSolution {
    pub c1: f64,
    pub c2: f64,
    pub lo: f64,
    pub hi: f64,
    pub region: Region,
}

impl LameSolution {
    /// Thick sphere with `σ_r(a) = p`, `σ_r(b) = p0`.
    pub fn pressurized(a: f64, b: f64, p: f64, p0: f64) -> Result<Self, OracleError> {
        let det = 1.0 / (a * a * a) - 1.0 / (b * b * b);
        if det == 0.0 || !det.is_finite() {
            return Err(OracleError::Singular);
        }
        let c2 = (p - p0) / det;
        let c1 = p0 - c2 / (b * b * b);
        Ok(Self {
            c1,
            c2,
            lo: a,
            hi: b,
            region: Region::Whole,
        })
    }
}

impl StressProfile for LameSolution {
    fn state(&self, r: f64) -> StressState {
        let r3 = r * r * r;
        StressState {
            sigma_r: self.c1 + self.c2 / r3,
            sigma_t: self.c1 - self.c2 / (2.0 * r3),
            dsigma_r: -3.0 * self.c2 / (r3 * r),
            dsigma_t: 1.5 * self.c2 / (r3 * r),
        }
    }

    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn region(&self) -> Region {
        self.region
    }
}

/// Exact field of an isotropic elastic case.
pub fn lame_solution(spec: &CaseSpec, grid: &[f64]) -> Result<StressField, OracleError> {
    if spec.e_radial.is_some() || spec.id.is_elastoplastic() {
        return Err(OracleError::WrongCase(spec.id));
    }
    let p = spec.inner_pressure()?;
    Ok(LameSolution::pressurized(spec.a, spec.b, p, spec.p0)?.sample(grid))
}

/// Right-hand side of the elastic two-stress ODE system.
pub fn elastic_rhs(k: AnisoConstants) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + Copy {
    let a = (1.0 + k.nu_radial) / k.e_radial;
    let b = (1.0 + k.nu) / k.e;
    let a_prime = k.nu_radial / k.e_radial;
    let d = (1.0 - k.nu) / k.e;
    move |r, y| {
        let (sr, st) = (y[0], y[1]);
        let dsr = -2.0 * (sr - st) / r;
        let dst = (a * sr - b * st + a_prime * r * dsr) / (d * r);
        [dsr, dst]
    }
}

/// Elastic field found by shooting from the outer boundary.
#[derive(Debug, Clone, Copy)]
pub struct ShootingSolution {
    pub constants: AnisoConstants,
    pub a: f64,
    pub b: f64,
    pub p0: f64,
    /// Converged `σ_θ(b)`.
    pub sigma_t_outer: f64,
    /// `σ_r(a) − p` at convergence.
    pub mismatch: f64,
    pub bisections: usize,
    pub steps: usize,
}

impl ShootingSolution {
    /// Shoot on `σ_θ(b)`, bracketing by sign scan over `[−10|p|, 10|p|]`.
    pub fn solve(
        constants: AnisoConstants,
        a: f64,
        b: f64,
        p: f64,
        p0: f64,
        steps: usize,
    ) -> Result<Self, OracleError> {
        if !(a > 0.0 && a < b) {
            return Err(OracleError::Singular);
        }
        let rhs = elastic_rhs(constants);
        let miss = |guess: f64| -> Result<f64, OracleError> {
            Ok(rk4_endpoint(rhs, b, [p0, guess], a, steps)?[0] - p)
        };
        let scale = 10.0 * p.abs().max(p0.abs());
        let mut out = Self {
            constants,
            a,
            b,
            p0,
            sigma_t_outer: p0,
            mismatch: 0.0,
            bisections: 0,
            steps,
        };
        if scale == 0.0 {
            return Ok(out);
        }

        const SCAN: usize = 40;
        let mut bracket = None;
        let mut prev = (-scale, miss(-scale)?);
        for i in 1..=SCAN {
            let x = -scale + 2.0 * scale * i as f64 / SCAN as f64;
            let fx = miss(x)?;
            if fx == 0.0 {
                out.sigma_t_outer = x;
                return Ok(out);
            }
            if prev.1.signum() != fx.signum() {
                bracket = Some((prev, (x, fx)));
                break;
            }
            prev = (x, fx);
        }
        let ((mut lo, mut flo), (mut hi, _)) = bracket.ok_or(OracleError::NoBracket)?;
        let mut mid = 0.5 * (lo + hi);
        let mut fmid = miss(mid)?;
        let mut n = 1;
        while n < 200 && fmid.abs() >= 1e-12 && hi - lo > f64::EPSILON * scale {
            if flo.signum() == fmid.signum() {
                lo = mid;
                flo = fmid;
            } else {
                hi = mid;
            }
            mid = 0.5 * (lo + hi);
            fmid = miss(mid)?;
            n += 1;
        }
        out.sigma_t_outer = mid;
        out.mismatch = fmid;
        out.bisections = n;
        Ok(out)
    }

    fn steps_between(&self, from: f64, to: f64) -> usize {
        let frac = (from - to).abs() / (self.b - self.a);
        ((self.steps as f64 * frac).ceil() as usize).max(1)
    }

    fn state_from(&self, r: f64, y: [f64; 2]) -> StressState {
        let d = elastic_rhs(self.constants)(r, &y);
        StressState {
            sigma_r: y[0],
            sigma_t: y[1],
            dsigma_r: d[0],
            dsigma_t: d[1],
        }
    }
}

impl StressProfile for ShootingSolution {
    fn state(&self, r: f64) -> StressState {
        let y0 = [self.p0, self.sigma_t_outer];
        let y = if r == self.b {
            y0
        } else {
            rk4_endpoint(
                elastic_rhs(self.constants),
                self.b,
                y0,
                r,
                self.steps_between(self.b, r),
            )
            .expect("shooting trajectory was finite at convergence")
        };
        self.state_from(r, y)
    }

    fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn region(&self) -> Region {
        Region::Whole
    }

    /// Integrates once, inward through the sorted grid.
    fn sample(&self, grid: &[f64]) -> StressField {
        let rhs = elastic_rhs(self.constants);
        let mut order: Vec<usize> = (0..grid.len()).collect();
        order.sort_by(|&i, &j| grid[j].total_cmp(&grid[i]));
        let mut sigma_r = vec![0.0; grid.len()];
        let mut sigma_t = vec![0.0; grid.len()];
        let mut r = self.b;
        let mut y = [self.p0, self.sigma_t_outer];
        for i in order {
            let target = grid[i];
            if target != r {
                y = rk4_endpoint(rhs, r, y, target, self.steps_between(r, target))
                    .expect("shooting trajectory was finite at convergence");
                r = target;
            }
            sigma_r[i] = y[0];
            sigma_t[i] = y[1];
        }
        StressField {
            r: grid.to_vec(),
            sigma_r,
            sigma_t,
            region: Region::Whole,
        }
    }
}

/// Reference field for case ii (or any elastic case) by RK4 shooting.
pub fn shooting_solution(spec: &CaseSpec, steps: usize) -> Result<ShootingSolution, OracleError> {
    if spec.id.is_elastoplastic() {
        return Err(OracleError::WrongCase(spec.id));
    }
    let (e_radial, nu_radial) = spec.radial_constants();
    let k = AnisoConstants {
        e: spec.e,
        e_radial,
        nu: spec.nu,
        nu_radial,
    };
    ShootingSolution::solve(k, spec.a, spec.b, spec.inner_pressure()?, spec.p0, steps)
}

/// Perfectly plastic region: equilibrium with `σ_θ = (σ_r − σ_Y)/α`,
/// integrated inward from the elastic-plastic boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasticSolution {
    pub a: f64,
    pub c: f64,
    /// `σ_r` at `r = c`.
    pub sigma_r_c: f64,
    pub yield_params: YieldParams,
}

impl PlasticSolution {
    pub fn sigma_r(&self, r: f64) -> f64 {
        let YieldParams { alpha, sigma_y } = self.yield_params;
        let log_ratio = (self.c / r).ln();
        // κ = 2(α − 1)/α; σ_r = σ_r(c)·e^{κL} + σ_Y (2/α)(e^{κL} − 1)/κ
        let kappa = 2.0 * (alpha - 1.0) / alpha;
        if kappa == 0.0 {
            self.sigma_r_c + 2.0 * sigma_y * log_ratio
        } else {
            let growth = (kappa * log_ratio).exp_m1();
            self.sigma_r_c * (1.0 + growth) + sigma_y * (2.0 / alpha) * growth / kappa
        }
    }
}

impl StressProfile for PlasticSolution {
    fn state(&self, r: f64) -> StressState {
        let YieldParams { alpha, sigma_y } = self.yield_params;
        let sigma_r = self.sigma_r(r);
        let dsigma_r = -2.0 * ((alpha - 1.0) * sigma_r + sigma_y) / (alpha * r);
        StressState {
            sigma_r,
            sigma_t: (sigma_r - sigma_y) / alpha,
            dsigma_r,
            dsigma_t: dsigma_r / alpha,
        }
    }

    fn domain(&self) -> (f64, f64) {
        (self.a, self.c)
    }

    fn region(&self) -> Region {
        Region::Plastic
    }
}

/// Both regions of an elastic-perfectly plastic shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpSolution {
    pub elastic: LameSolution,
    pub plastic: PlasticSolution,
}

impl EpSolution {
    pub fn new(spec: &CaseSpec) -> Result<Self, OracleError> {
        if !spec.id.is_elastoplastic() {
            return Err(OracleError::WrongCase(spec.id));
        }
        let yp = spec.yield_params()?;
        if yp.alpha <= 0.0 {
            return Err(OracleError::Alpha(yp.alpha));
        }
        let c = spec.plastic_radius()?;
        let (b3, c3) = (spec.b.powi(3), c.powi(3));
        // σ_r(b) = p0 and σ_r(c) − α σ_θ(c) = σ_Y
        let c2 = (yp.sigma_y + spec.p0 * (yp.alpha - 1.0))
            / ((yp.alpha - 1.0) / b3 + (1.0 + 0.5 * yp.alpha) / c3);
        let c1 = spec.p0 - c2 / b3;
        let elastic = LameSolution {
            c1,
            c2,
            lo: c,
            hi: spec.b,
            region: Region::Elastic,
        };
        let plastic = PlasticSolution {
            a: spec.a,
            c,
            sigma_r_c: elastic.state(c).sigma_r,
            yield_params: yp,
        };
        Ok(Self { elastic, plastic })
    }

    /// Stresses on the elastic side of `r = c`.
    pub fn boundary_stresses(&self) -> (f64, f64) {
        let s = self.elastic.state(self.plastic.c);
        (s.sigma_r, s.sigma_t)
    }

    /// Cavity pressure `σ_r(a)`.
    pub fn inner_pressure(&self) -> f64 {
        self.plastic.sigma_r(self.plastic.a)
    }
}

/// Elastic-region and plastic-region reference fields.
pub fn ep_solution(
    spec: &CaseSpec,
    elastic_grid: &[f64],
    plastic_grid: &[f64],
) -> Result<(StressField, StressField), OracleError> {
    let sol = EpSolution::new(spec)?;
    Ok((sol.elastic.sample(elastic_grid), sol.plastic.sample(plastic_grid)))
}

/// The reference profile of a whole-domain elastic case.
pub fn elastic_profile(spec: &CaseSpec) -> Result<Box<dyn StressProfile>, OracleError> {
    match spec.id {
        CaseId::I => Ok(Box::new(LameSolution::pressurized(
            spec.a,
            spec.b,
            spec.inner_pressure()?,
            spec.p0,
        )?)),
        CaseId::II => Ok(Box::new(shooting_solution(spec, DEFAULT_STEPS)?)),
        other => Err(OracleError::WrongCase(other)),
    }
}
