use std::fmt;
use std::str::FromStr;

use super::PhysicsError;

/// The four benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    /// Elastic, isotropic.
    I,
    /// Elastic, cross-anisotropic.
    II,
    /// Elastic-perfectly plastic, Tresca.
    III,
    /// Elastic-perfectly plastic, Mohr-Coulomb.
    IV,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [CaseId::I, CaseId::II, CaseId::III, CaseId::IV];

    pub fn is_elastoplastic(self) -> bool {
        matches!(self, CaseId::III | CaseId::IV)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::I => "i",
            CaseId::II => "ii",
            CaseId::III => "iii",
            CaseId::IV => "iv",
        }
    }

    pub fn spec(self) -> CaseSpec {
        match self {
            CaseId::I => CaseSpec::case_i(),
            CaseId::II => CaseSpec::case_ii(),
            CaseId::III => CaseSpec::case_iii(),
            CaseId::IV => CaseSpec::case_iv(),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = PhysicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(CaseId::I),
            "ii" | "2" => Ok(CaseId::II),
            "iii" | "3" => Ok(CaseId::III),
            "iv" | "4" => Ok(CaseId::IV),
            other => Err(PhysicsError::UnknownCase(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YieldCriterion {
    None,
    Tresca {
        /// Undrained strength, kPa.
        s_u: f64,
    },
    MohrCoulomb {
        /// Friction angle, degrees.
        phi_deg: f64,
        /// Cohesion, kPa.
        cohesion: f64,
    },
}

/// `σ_r − α σ_θ = σ_Y` on yield.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldParams {
    pub alpha: f64,
    pub sigma_y: f64,
}

pub fn yield_params(criterion: YieldCriterion) -> Result<YieldParams, PhysicsError> {
    match criterion {
        YieldCriterion::None => Err(PhysicsError::NoYieldCriterion),
        YieldCriterion::Tresca { s_u } => Ok(YieldParams {
            alpha: 1.0,
            sigma_y: 2.0 * s_u,
        }),
        YieldCriterion::MohrCoulomb { phi_deg, cohesion } => {
            if !(0.0..90.0).contains(&phi_deg) {
                return Err(PhysicsError::FrictionAngle(phi_deg));
            }
            let (sin, cos) = phi_deg.to_radians().sin_cos();
            Ok(YieldParams {
                alpha: (1.0 + sin) / (1.0 - sin),
                sigma_y: 2.0 * cohesion * cos / (1.0 - sin),
            })
        }
    }
}

/// Geometry, loading and material constants of one cavity problem.
///
/// Stresses in kPa, lengths in m, compression positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseSpec {
    pub id: CaseId,
    /// Cavity radius.
    pub a: f64,
    /// Outer radius.
    pub b: f64,
    /// Plastic radius (elasto-plastic cases).
    pub c: Option<f64>,
    /// Inner pressure (elastic cases).
    pub p: Option<f64>,
    /// Outer pressure.
    pub p0: f64,
    /// Modulus in the isotropic plane.
    pub e: f64,
    /// Radial modulus (anisotropic case).
    pub e_radial: Option<f64>,
    pub nu: f64,
    /// Radial Poisson ratio (anisotropic case).
    pub nu_radial: Option<f64>,
    pub yield_criterion: YieldCriterion,
}

impl CaseSpec {
    pub fn case_i() -> Self {
        CaseSpec {
            id: CaseId::I,
            a: 0.4,
            b: 2.0,
            c: None,
            p: Some(5.0),
            p0: 0.0,
            e: 1.0e5,
            e_radial: None,
            nu: 0.3,
            nu_radial: None,
            yield_criterion: YieldCriterion::None,
        }
    }

    pub fn case_ii() -> Self {
        CaseSpec {
            id: CaseId::II,
            e_radial: Some(0.8e5),
            nu_radial: Some(0.24),
            ..Self::case_i()
        }
    }

    pub fn case_iii() -> Self {
        CaseSpec {
            id: CaseId::III,
            a: 0.2,
            b: 2.0,
            c: Some(0.8),
            p: None,
            p0: 0.0,
            e: 1.0e5,
            e_radial: None,
            nu: 0.3,
            nu_radial: None,
            yield_criterion: YieldCriterion::Tresca { s_u: 3.0 },
        }
    }

    pub fn case_iv() -> Self {
        CaseSpec {
            id: CaseId::IV,
            yield_criterion: YieldCriterion::MohrCoulomb {
                phi_deg: 15.0,
                cohesion: 2.5,
            },
            ..Self::case_iii()
        }
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let geometry = |msg: &str| Err(PhysicsError::Geometry(msg.to_string()));
        if !(self.a > 0.0 && self.a < self.b) {
            return geometry("need 0 < a < b");
        }
        if self.id.is_elastoplastic() {
            match self.c {
                Some(c) if self.a < c && c < self.b => {}
                _ => return geometry("need a < c < b"),
            }
            yield_params(self.yield_criterion)?;
        } else if self.p.is_none() {
            return geometry("elastic case needs an inner pressure");
        }
        if self.e <= 0.0 || self.e_radial.is_some_and(|e| e <= 0.0) {
            return Err(PhysicsError::Modulus);
        }
        Ok(())
    }

    pub fn inner_pressure(&self) -> Result<f64, PhysicsError> {
        self.p
            .ok_or_else(|| PhysicsError::Geometry("case has no prescribed inner pressure".into()))
    }

    pub fn plastic_radius(&self) -> Result<f64, PhysicsError> {
        self.c
            .ok_or_else(|| PhysicsError::Geometry("case has no plastic radius".into()))
    }

    pub fn yield_params(&self) -> Result<YieldParams, PhysicsError> {
        yield_params(self.yield_criterion)
    }

    /// Radial modulus and Poisson ratio, falling back to the isotropic ones.
    pub fn radial_constants(&self) -> (f64, f64) {
        (
            self.e_radial.unwrap_or(self.e),
            self.nu_radial.unwrap_or(self.nu),
        )
    }

    /// Multiply every applied load and strength by `k`.
    pub fn scale_loads(&self, k: f64) -> Self {
        let mut s = *self;
        s.p = self.p.map(|p| p * k);
        s.p0 = self.p0 * k;
        s.yield_criterion = match self.yield_criterion {
            YieldCriterion::None => YieldCriterion::None,
            YieldCriterion::Tresca { s_u } => YieldCriterion::Tresca { s_u: s_u * k },
            YieldCriterion::MohrCoulomb { phi_deg, cohesion } => YieldCriterion::MohrCoulomb {
                phi_deg,
                cohesion: cohesion * k,
            },
        };
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tresca_case_iii() {
        let y = CaseSpec::case_iii().yield_params().unwrap();
        assert_eq!(y, YieldParams { alpha: 1.0, sigma_y: 6.0 });
    }

    #[test]
    fn mohr_coulomb_zero_friction_is_tresca_form() {
        let y = yield_params(YieldCriterion::MohrCoulomb {
            phi_deg: 0.0,
            cohesion: 2.5,
        })
        .unwrap();
        assert_eq!(y, YieldParams { alpha: 1.0, sigma_y: 5.0 });
    }

    #[test]
    fn mohr_coulomb_fifteen_degrees() {
        let y = CaseSpec::case_iv().yield_params().unwrap();
        // (1 + sin 15°) / (1 − sin 15°) and 2C cos 15° / (1 − sin 15°)
        assert!((y.alpha - 1.6983964).abs() < 1e-7, "{}", y.alpha);
        assert!((y.sigma_y - 6.5161269).abs() < 1e-7, "{}", y.sigma_y);
        assert!(y.alpha >= 1.0);
    }

    #[test]
    fn friction_angle_out_of_range() {
        for phi in [90.0, 120.0, -1.0] {
            assert!(matches!(
                yield_params(YieldCriterion::MohrCoulomb {
                    phi_deg: phi,
                    cohesion: 1.0
                }),
                Err(PhysicsError::FrictionAngle(_))
            ));
        }
    }

    #[test]
    fn builtin_cases_validate() {
        for id in CaseId::ALL {
            id.spec().validate().unwrap();
            assert_eq!(id.as_str().parse::<CaseId>().unwrap(), id);
        }
        assert!("v".parse::<CaseId>().is_err());
        let mut bad = CaseSpec::case_iii();
        bad.c = Some(0.1);
        assert!(bad.validate().is_err());
    }
}
