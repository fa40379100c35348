//! Ground-truth stress fields and accuracy metrics, independent of the
//! network code.

mod fields;
mod rk4;

pub use fields::{
    elastic_profile, elastic_rhs, ep_solution, lame_solution, shooting_solution, EpSolution,
    LameSolution, PlasticSolution, ShootingSolution, StressProfile, StressState, DEFAULT_STEPS,
};
pub use rk4::{rk4_endpoint, rk4_solve, Trajectory};

use std::fmt;

use thiserror::Error;

use crate::physics::{CaseId, PhysicsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("boundary radii coincide; the elastic system is singular")]
    Singular,
    #[error("RK4 needs at least one step")]
    Steps,
    #[error("RK4 state became non-finite near r = {0}")]
    NonFinite(f64),
    #[error("no sign change found while bracketing the shooting parameter")]
    NoBracket,
    #[error("yield parameter alpha = {0} must be positive")]
    Alpha(f64),
    #[error("oracle not available for case {0}")]
    WrongCase(CaseId),
    #[error("prediction and reference grids differ")]
    GridMismatch,
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Elastic,
    Plastic,
    Whole,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Elastic => "elastic",
            Region::Plastic => "plastic",
            Region::Whole => "whole",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sampled stresses over a sorted radius grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StressField {
    pub r: Vec<f64>,
    pub sigma_r: Vec<f64>,
    pub sigma_t: Vec<f64>,
    pub region: Region,
}

impl StressField {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo + h * i as f64 })
                .collect()
        }
    }
}

/// Accuracy of a prediction against a reference field.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub mse_r: f64,
    pub mse_t: f64,
    pub r2_r: f64,
    pub r2_t: f64,
    pub err_r: Vec<f64>,
    pub err_t: Vec<f64>,
}

impl Metrics {
    pub fn max_abs_error(&self) -> f64 {
        self.err_r
            .iter()
            .chain(&self.err_t)
            .fold(0.0, |m, e| m.max(e.abs()))
    }
}

pub fn metrics(pred: &StressField, exact: &StressField) -> Result<Metrics, OracleError> {
    if pred.len() != exact.len()
        || pred
            .r
            .iter()
            .zip(&exact.r)
            .any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0))
    {
        return Err(OracleError::GridMismatch);
    }
    let component = |p: &[f64], e: &[f64]| {
        let n = e.len() as f64;
        let err: Vec<f64> = p.iter().zip(e).map(|(p, e)| p - e).collect();
        let ss_res: f64 = err.iter().map(|d| d * d).sum();
        let mean = e.iter().sum::<f64>() / n;
        let ss_tot: f64 = e.iter().map(|v| (v - mean).powi(2)).sum();
        let r2 = if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else if ss_res == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        };
        (ss_res / n, r2, err)
    };
    let (mse_r, r2_r, err_r) = component(&pred.sigma_r, &exact.sigma_r);
    let (mse_t, r2_t, err_t) = component(&pred.sigma_t, &exact.sigma_t);
    Ok(Metrics {
        mse_r,
        mse_t,
        r2_r,
        r2_t,
        err_r,
        err_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{
        aniso_residual, equilibrium_residual, formc_stress_residual, yield_residual,
        AnisoConstants, CaseSpec, YieldCriterion,
    };

    #[test]
    fn lame_case_i() {
        let spec = CaseSpec::case_i();
        let sol = LameSolution::pressurized(0.4, 2.0, 5.0, 0.0).unwrap();
        assert!((sol.c2 - 0.3225806).abs() < 1e-7);
        assert!((sol.c1 + 0.0403226).abs() < 1e-7);
        let f = lame_solution(&spec, &[0.4, 2.0]).unwrap();
        assert!((f.sigma_r[0] - 5.0).abs() < 1e-14);
        assert!(f.sigma_r[1].abs() < 1e-15);
        assert!((f.sigma_t[0] + 2.5604839).abs() < 1e-7);
    }

    #[test]
    fn lame_hydrostatic_and_singular() {
        let sol = LameSolution::pressurized(0.5, 1.5, 3.0, 3.0).unwrap();
        for r in linspace(0.5, 1.5, 7) {
            let s = sol.state(r);
            assert_eq!((s.sigma_r, s.sigma_t), (3.0, 3.0));
        }
        assert_eq!(
            LameSolution::pressurized(1.0, 1.0, 1.0, 0.0),
            Err(OracleError::Singular)
        );
    }

    #[test]
    fn case_i_shooting_reproduces_lame() {
        let sol = shooting_solution(&CaseSpec::case_i(), DEFAULT_STEPS).unwrap();
        assert!(sol.mismatch.abs() < 1e-9);
        assert!(sol.bisections <= 200);
        let s = sol.state(0.4);
        assert!((s.sigma_t + 2.5604839).abs() < 1e-7);
        let exact = LameSolution::pressurized(0.4, 2.0, 5.0, 0.0).unwrap();
        let grid = linspace(0.4, 2.0, 100);
        let a = sol.sample(&grid);
        let b = exact.sample(&grid);
        let m = metrics(&a, &b).unwrap();
        assert!(m.max_abs_error() < 1e-8, "{}", m.max_abs_error());
    }

    /// Independent route for the anisotropic case: `σ_r = Σ C_i r^{k_i}` with
    /// `k_i` the roots of the characteristic quadratic of the Euler ODE
    /// obtained by substituting equilibrium into the combined equation.
    fn power_law_case_ii(spec: &CaseSpec) -> impl Fn(f64) -> (f64, f64) {
        let (er, nr) = spec.radial_constants();
        let a_coef = (1.0 + nr) / er;
        let b_coef = (1.0 + spec.nu) / spec.e;
        let ap = nr / er;
        let d = (1.0 - spec.nu) / spec.e;
        let (qa, qb, qc) = (0.5 * d, d + 0.5 * b_coef - ap, b_coef - a_coef);
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        let k1 = (-qb + disc) / (2.0 * qa);
        let k2 = (-qb - disc) / (2.0 * qa);
        let (a, b, p, p0) = (spec.a, spec.b, spec.p.unwrap(), spec.p0);
        // C1 a^k1 + C2 a^k2 = p, C1 b^k1 + C2 b^k2 = p0
        let det = a.powf(k1) * b.powf(k2) - a.powf(k2) * b.powf(k1);
        let c1 = (p * b.powf(k2) - p0 * a.powf(k2)) / det;
        let c2 = (a.powf(k1) * p0 - b.powf(k1) * p) / det;
        move |r| {
            (
                c1 * r.powf(k1) + c2 * r.powf(k2),
                c1 * (1.0 + 0.5 * k1) * r.powf(k1) + c2 * (1.0 + 0.5 * k2) * r.powf(k2),
            )
        }
    }

    #[test]
    fn case_ii_shooting_matches_power_law() {
        let spec = CaseSpec::case_ii();
        let sol = shooting_solution(&spec, DEFAULT_STEPS).unwrap();
        assert!(sol.mismatch.abs() < 1e-9, "{}", sol.mismatch);
        let exact = power_law_case_ii(&spec);
        let grid = linspace(0.4, 2.0, 100);
        let f = sol.sample(&grid);
        for (i, &r) in grid.iter().enumerate() {
            let (sr, st) = exact(r);
            assert!((f.sigma_r[i] - sr).abs() < 1e-8, "r={r}");
            assert!((f.sigma_t[i] - st).abs() < 1e-8, "r={r}");
        }
        // pointwise and sweep sampling agree
        let s = sol.state(1.0);
        let (sr, st) = exact(1.0);
        assert!((s.sigma_r - sr).abs() < 1e-8 && (s.sigma_t - st).abs() < 1e-8);
    }

    #[test]
    fn oracle_fields_satisfy_governing_equations() {
        let i = LameSolution::pressurized(0.4, 2.0, 5.0, 0.0).unwrap();
        let spec_ii = CaseSpec::case_ii();
        let ii = shooting_solution(&spec_ii, DEFAULT_STEPS).unwrap();
        let (er, nr) = spec_ii.radial_constants();
        let k = AnisoConstants {
            e: spec_ii.e,
            e_radial: er,
            nu: spec_ii.nu,
            nu_radial: nr,
        };
        for r in linspace(0.4, 2.0, 100) {
            let s = i.state(r);
            assert!(equilibrium_residual(s.sigma_r, s.sigma_t, s.dsigma_r, r).abs() < 1e-8);
            assert!(formc_stress_residual(s.sigma_r, s.sigma_t, s.dsigma_t, r).abs() < 1e-8);
            let s = ii.state(r);
            assert!(equilibrium_residual(s.sigma_r, s.sigma_t, s.dsigma_r, r).abs() < 1e-8);
            assert!(aniso_residual(s.sigma_r, s.sigma_t, s.dsigma_r, s.dsigma_t, r, k).abs() < 1e-8);
        }
        for spec in [CaseSpec::case_iii(), CaseSpec::case_iv()] {
            let ep = EpSolution::new(&spec).unwrap();
            let yp = spec.yield_params().unwrap();
            for r in linspace(0.8, 2.0, 100) {
                let s = ep.elastic.state(r);
                assert!(equilibrium_residual(s.sigma_r, s.sigma_t, s.dsigma_r, r).abs() < 1e-8);
                assert!(formc_stress_residual(s.sigma_r, s.sigma_t, s.dsigma_t, r).abs() < 1e-8);
            }
            for r in linspace(0.2, 0.8, 100) {
                let s = ep.plastic.state(r);
                assert!(equilibrium_residual(s.sigma_r, s.sigma_t, s.dsigma_r, r).abs() < 1e-8);
                assert!(yield_residual(s.sigma_r, s.sigma_t, yp).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn case_iii_closed_form_values() {
        let ep = EpSolution::new(&CaseSpec::case_iii()).unwrap();
        assert!((ep.elastic.c2 - 2.048).abs() < 1e-12);
        assert!((ep.elastic.c1 + 0.256).abs() < 1e-12);
        let (sr, st) = ep.boundary_stresses();
        assert!((sr - 3.744).abs() < 1e-12 && (st + 2.256).abs() < 1e-12);
        assert!((ep.inner_pressure() - (3.744 + 12.0 * 4.0_f64.ln())).abs() < 1e-12);
        assert!((ep.inner_pressure() - 20.3795).abs() < 1e-4);
    }

    #[test]
    fn plastic_closed_forms_match_rk4() {
        for spec in [CaseSpec::case_iii(), CaseSpec::case_iv()] {
            let ep = EpSolution::new(&spec).unwrap();
            let YieldParams { alpha, sigma_y } = ep.plastic.yield_params;
            let traj = rk4_solve(
                |r, y: &[f64; 1]| [-2.0 * ((alpha - 1.0) * y[0] + sigma_y) / (alpha * r)],
                0.8,
                [ep.plastic.sigma_r_c],
                0.2,
                DEFAULT_STEPS,
            )
            .unwrap();
            for (r, y) in traj.r.iter().zip(&traj.y).step_by(97) {
                assert!((ep.plastic.sigma_r(*r) - y[0]).abs() < 1e-8, "r={r}");
            }
        }
    }

    use crate::physics::YieldParams;

    #[test]
    fn ep_continuity_at_plastic_radius() {
        for spec in [CaseSpec::case_iii(), CaseSpec::case_iv()] {
            let ep = EpSolution::new(&spec).unwrap();
            let e = ep.elastic.state(0.8);
            let p = ep.plastic.state(0.8);
            assert!((e.sigma_r - p.sigma_r).abs() < 1e-10);
            assert!((e.sigma_t - p.sigma_t).abs() < 1e-10);
        }
    }

    #[test]
    fn frictionless_mohr_coulomb_is_tresca() {
        let tresca = EpSolution::new(&CaseSpec::case_iii()).unwrap();
        let mut spec = CaseSpec::case_iv();
        spec.yield_criterion = YieldCriterion::MohrCoulomb {
            phi_deg: 0.0,
            cohesion: 3.0,
        };
        let mc = EpSolution::new(&spec).unwrap();
        spec.yield_criterion = YieldCriterion::MohrCoulomb {
            phi_deg: 1e-10,
            cohesion: 3.0,
        };
        let mc_small = EpSolution::new(&spec).unwrap();
        for r in linspace(0.2, 0.8, 50) {
            let t = tresca.plastic.state(r);
            for m in [mc.plastic.state(r), mc_small.plastic.state(r)] {
                assert!((t.sigma_r - m.sigma_r).abs() < 1e-8);
                assert!((t.sigma_t - m.sigma_t).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn loads_scale_linearly() {
        let grid = linspace(0.2, 0.8, 20);
        for spec in [CaseSpec::case_iii(), CaseSpec::case_iv()] {
            let base = EpSolution::new(&spec).unwrap().plastic.sample(&grid);
            let big = EpSolution::new(&spec.scale_loads(10.0))
                .unwrap()
                .plastic
                .sample(&grid);
            for i in 0..grid.len() {
                assert!((big.sigma_r[i] - 10.0 * base.sigma_r[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn metrics_examples() {
        let grid = linspace(0.4, 2.0, 10);
        let exact = LameSolution::pressurized(0.4, 2.0, 5.0, 0.0)
            .unwrap()
            .sample(&grid);
        let m = metrics(&exact, &exact).unwrap();
        assert_eq!((m.mse_r, m.mse_t, m.r2_r, m.r2_t), (0.0, 0.0, 1.0, 1.0));
        let mut shifted = exact.clone();
        shifted.sigma_r.iter_mut().for_each(|v| *v += 1.0);
        let m = metrics(&shifted, &exact).unwrap();
        assert!((m.mse_r - 1.0).abs() < 1e-12);
        assert!(m.r2_r < 1.0);
        let other = LameSolution::pressurized(0.4, 2.0, 5.0, 0.0)
            .unwrap()
            .sample(&linspace(0.4, 2.0, 11));
        assert_eq!(metrics(&other, &exact), Err(OracleError::GridMismatch));
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.4, 2.0, 50);
        assert_eq!((g[0], g[49]), (0.4, 2.0));
        assert!((g[1] - g[0] - 1.6 / 49.0).abs() < 1e-15);
    }
}
