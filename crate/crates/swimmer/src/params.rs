//! Model parameters, validation, and nondimensionalization.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dimensional model constants (SI units).
///
/// All fields are optional in the JSON representation; missing fields take the
/// defaults below. `beta` and `zeta_r` are normally derived from the geometry
/// and drags but can be pinned explicitly to reproduce published values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Flagellum length `L` [m].
    #[serde(rename = "L")]
    pub l: f64,
    /// Body major axis `ell` [m].
    pub ell: f64,
    /// Body minor axis `d` [m].
    pub d: f64,
    /// Body shape parameter; derived as `d^2 / (ell^2 + d^2)` when `None`.
    pub beta: Option<f64>,
    /// Shear rate `gamma_dot` [1/s]. Quiescent runs still use it as the time scale.
    pub gamma_dot: f64,
    /// Suspending-fluid viscosity `eta0` [Pa s].
    pub eta0: f64,
    /// Propulsion force density along the flagellum `F_p` [N/m].
    #[serde(rename = "F_p")]
    pub f_p: f64,
    /// Flagellum bending stiffness `K_b` [N m^2].
    #[serde(rename = "K_b")]
    pub k_b: f64,
    /// Flagellum drag coefficient per unit length `zeta_f` [N s/m^2].
    pub zeta_f: f64,
    /// Body translational drag `zeta_h` [N s/m].
    pub zeta_h: f64,
    /// Body rotational drag `zeta_r` [N s m]; derived as `ell^2 zeta_h / 6` when `None`.
    pub zeta_r: Option<f64>,
    /// Drag anisotropy factor `alpha` (tangential over normal), >= 1.
    pub alpha: f64,
    /// Number density of swimmers `Phi` [1/m^3].
    #[serde(rename = "Phi")]
    pub phi: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            l: 1.2e-5,
            ell: 0.5e-5,
            d: 7e-7,
            beta: None,
            gamma_dot: 0.1,
            eta0: 1e-3,
            f_p: 1.5e-6,
            k_b: 3e-23,
            zeta_f: 1e-3,
            zeta_h: 1.6e-8,
            zeta_r: None,
            alpha: 2.0,
            phi: 5e15,
        }
    }
}

impl PhysicalParams {
    /// Validates positivity and shape constraints.
    pub fn validate(&self) -> Result<()> {
        let positives: [(&'static str, f64); 8] = [
            ("L", self.l),
            ("ell", self.ell),
            ("d", self.d),
            ("eta0", self.eta0),
            ("K_b", self.k_b),
            ("zeta_f", self.zeta_f),
            ("zeta_h", self.zeta_h),
            ("Phi", self.phi),
        ];
        for (name, value) in positives {
            if !(value > 0.0) {
                return Err(Error::InvalidParam {
                    name,
                    value,
                    reason: "must be strictly positive",
                });
            }
        }
        if self.alpha < 1.0 {
            return Err(Error::InvalidParam {
                name: "alpha",
                value: self.alpha,
                reason: "drag anisotropy must be >= 1",
            });
        }
        if self.d > self.ell {
            return Err(Error::InvalidParam {
                name: "d",
                value: self.d,
                reason: "minor axis exceeds major axis (prolate convention)",
            });
        }
        if let Some(beta) = self.beta {
            if !(beta > 0.0 && beta <= 0.5) {
                return Err(Error::InvalidParam {
                    name: "beta",
                    value: beta,
                    reason: "body shape parameter must lie in (0, 1/2]",
                });
            }
        }
        if let Some(zr) = self.zeta_r {
            if !(zr > 0.0) {
                return Err(Error::InvalidParam {
                    name: "zeta_r",
                    value: zr,
                    reason: "must be strictly positive",
                });
            }
        }
        Ok(())
    }

    /// Body shape parameter: supplied value or `d^2 / (ell^2 + d^2)`.
    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| body_shape_beta(self.ell, self.d).expect("validated geometry"))
    }

    /// Rotational drag: supplied value or `ell^2 zeta_h / 6`.
    pub fn zeta_r(&self) -> f64 {
        self.zeta_r.unwrap_or_else(|| rotational_drag(self.ell, self.zeta_h))
    }
}

/// Dimensionless parameter group governing the nondimensional system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    /// Drag-to-elastic ratio `eps = L^4 gamma_dot zeta_f / K_b`.
    pub eps: f64,
    /// Propulsion strength `f_p = F_p / (zeta_f gamma_dot L)`.
    pub f_p: f64,
    /// Flagellum-to-body drag ratio `k_r = L zeta_f / zeta_h`.
    pub k_r: f64,
    /// Body-to-flagellum length ratio `r = ell / L`.
    pub r: f64,
    /// Body shape parameter.
    pub beta: f64,
    /// Drag anisotropy factor.
    pub alpha: f64,
    /// `sigma = 1 + 3 alpha / 2`.
    pub sigma: f64,
}

impl DimensionlessParams {
    pub fn validate(&self) -> Result<()> {
        let positives: [(&'static str, f64); 4] = [
            ("eps", self.eps),
            ("k_r", self.k_r),
            ("r", self.r),
            ("beta", self.beta),
        ];
        for (name, value) in positives {
            if !(value > 0.0) {
                return Err(Error::InvalidParam {
                    name,
                    value,
                    reason: "must be strictly positive",
                });
            }
        }
        if self.beta > 0.5 {
            return Err(Error::InvalidParam {
                name: "beta",
                value: self.beta,
                reason: "body shape parameter must lie in (0, 1/2]",
            });
        }
        Ok(())
    }

    /// Minor-to-flagellum axis ratio `d / L`, recovered from `beta` and `r`.
    ///
    /// Used by the wall module to resolve the contact ellipse.
    pub fn minor_axis_ratio(&self) -> f64 {
        self.r * (self.beta / (1.0 - self.beta)).sqrt()
    }
}

/// Background flow the swimmer is immersed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BackgroundFlow {
    /// Planar shear `u = (-gamma_dot y, 0)`.
    PlanarShear,
    /// No flow. The nondimensionalization still uses `gamma_dot` as a reference rate.
    Quiescent,
}

impl BackgroundFlow {
    /// Relative shear switch entering the nondimensional equations.
    pub fn shear_factor(&self) -> f64 {
        match self {
            BackgroundFlow::PlanarShear => 1.0,
            BackgroundFlow::Quiescent => 0.0,
        }
    }
}

/// Maps dimensional constants onto the dimensionless group.
///
/// `gamma_dot` must be positive; quiescent runs supply a reference rate here and
/// select [`BackgroundFlow::Quiescent`] separately.
pub fn nondimensionalize(p: &PhysicalParams) -> Result<DimensionlessParams> {
    p.validate()?;
    if !(p.gamma_dot > 0.0) {
        return Err(Error::InvalidParam {
            name: "gamma_dot",
            value: p.gamma_dot,
            reason: "a positive (reference) shear rate is required for scaling",
        });
    }
    if !(p.f_p >= 0.0) {
        return Err(Error::InvalidParam {
            name: "F_p",
            value: p.f_p,
            reason: "propulsion force density must be non-negative",
        });
    }
    let dp = DimensionlessParams {
        eps: p.l.powi(4) * p.gamma_dot * p.zeta_f / p.k_b,
        f_p: p.f_p / (p.zeta_f * p.gamma_dot * p.l),
        k_r: p.l * p.zeta_f / p.zeta_h,
        r: p.ell / p.l,
        beta: p.beta(),
        alpha: p.alpha,
        sigma: 1.0 + 1.5 * p.alpha,
    };
    dp.validate()?;
    Ok(dp)
}

/// Body shape parameter `beta = d^2 / (ell^2 + d^2)` for a prolate ellipse.
pub fn body_shape_beta(ell: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidParam {
            name: "d",
            value: d,
            reason: "must be strictly positive",
        });
    }
    if d > ell {
        return Err(Error::InvalidParam {
            name: "d",
            value: d,
            reason: "minor axis exceeds major axis (prolate convention)",
        });
    }
    Ok(d * d / (ell * ell + d * d))
}

/// Rotational drag of the body, `zeta_r = ell^2 zeta_h / 6`.
pub fn rotational_drag(ell: f64, zeta_h: f64) -> f64 {
    ell * ell * zeta_h / 6.0
}
