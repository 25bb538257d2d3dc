//! Closed-form results of the rigid-flagellum (small `eps`) expansion.
//!
//! The expansion replaces the swimmer by an effective ellipse with shape
//! parameter `b`, gives the leading tangential/normal stresses and the
//! first-order flagellum shape as polynomials in arc length, and averages the
//! per-swimmer Kirkwood stress against the stationary orientation density to
//! produce the two effective-viscosity coefficients.
//!
//! The viscosity coefficients returned by [`z_elastic`] and [`z_prop`] are the
//! dimensionless orientation averages; the drag factor `zeta_f` and the length
//! powers are applied when assembling the dimensional contributions in
//! [`effective_viscosity_asymptotic`], so each term's unit bookkeeping is
//! explicit at the assembly site.

use crate::params::{nondimensionalize, PhysicalParams};
use crate::quad;
use crate::root;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which effective-shape formula feeds the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BMode {
    /// Full expression from the torque balance (default).
    Exact,
    /// Reduced form `r beta / (1 + 2 r)`, valid when `2 (k_r + 1) = 3 alpha k_r`.
    Simplified,
}

/// Effective shape parameter of the equivalent flagellum-free ellipse.
///
/// Returns `(exact, simplified)`.
pub fn effective_shape_b(beta: f64, r: f64, k_r: f64, alpha: f64) -> Result<(f64, f64)> {
    let sigma = 1.0 + 1.5 * alpha;
    let denom = 2.0 * r * sigma * k_r + 2.0 * r + 3.0 * alpha * k_r;
    if !(denom > 0.0) {
        return Err(Error::InvalidParam {
            name: "b",
            value: denom,
            reason: "effective-shape denominator must be positive",
        });
    }
    let exact = beta * r * (2.0 * sigma * k_r + 2.0 - 3.0 * alpha * k_r) / denom;
    let simplified = r * beta / (1.0 + 2.0 * r);
    Ok((exact, simplified))
}

/// Coefficient bundle of the expansion at fixed `(beta, r, k_r, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCoeffs {
    pub beta: f64,
    pub r: f64,
    pub k_r: f64,
    pub alpha: f64,
    /// Effective shape parameter (per the selected [`BMode`]).
    pub b: f64,
    /// `q = sqrt(1 - (1 - 2b)^2)`.
    pub q: f64,
    /// Quadratic-coefficient factor of the normal stress.
    pub sigma1: f64,
    /// Quadratic-coefficient factor of the tangential stress.
    pub sigma2: f64,
    /// Fourth-derivative source factor `chi / cos(2 theta0) = alpha b`.
    pub chi: f64,
    /// Third-derivative integration constant factor `C1 / cos(2 theta0) = sigma1`.
    pub c1: f64,
}

impl AsymptoticCoeffs {
    pub fn new(beta: f64, r: f64, k_r: f64, alpha: f64, mode: BMode) -> Result<Self> {
        if !(beta > 0.0 && beta <= 0.5) {
            return Err(Error::InvalidParam {
                name: "beta",
                value: beta,
                reason: "body shape parameter must lie in (0, 1/2]",
            });
        }
        if !(r > 0.0 && k_r > 0.0) {
            return Err(Error::InvalidParam {
                name: "r",
                value: r,
                reason: "length and drag ratios must be positive",
            });
        }
        let (exact, simplified) = effective_shape_b(beta, r, k_r, alpha)?;
        let b = match mode {
            BMode::Exact => exact,
            BMode::Simplified => simplified,
        };
        let sigma = 1.0 + 1.5 * alpha;
        let sigma1 = (alpha * b * (sigma * k_r + 2.0) + alpha * beta * r) / (2.0 * (sigma * k_r + 1.0));
        let sigma2 = (k_r + alpha * r + 2.0) / (4.0 * (1.0 + k_r));
        let c = 1.0 - 2.0 * b;
        Ok(AsymptoticCoeffs {
            beta,
            r,
            k_r,
            alpha,
            b,
            q: (1.0 - c * c).sqrt(),
            sigma1,
            sigma2,
            chi: alpha * b,
            c1: sigma1,
        })
    }

    pub fn from_params(p: &PhysicalParams, mode: BMode) -> Result<Self> {
        let dp = nondimensionalize(p)?;
        AsymptoticCoeffs::new(dp.beta, dp.r, dp.k_r, dp.alpha, mode)
    }

    /// Orientation averages over the stationary density:
    /// `(<sin^2 2t>, <cos^2 2t>)`.
    pub fn angle_averages(&self) -> (f64, f64) {
        let c = 1.0 - 2.0 * self.b;
        let cos2 = (1.0 - self.q) / (c * c);
        (self.q * cos2, cos2)
    }
}

/// Stationary orientation density of the effective Jeffery dynamics.
#[derive(Debug, Clone, Copy)]
pub struct StationaryDistribution {
    b: f64,
    q: f64,
}

impl StationaryDistribution {
    pub fn new(b: f64) -> Result<Self> {
        if !(b > 0.0 && b <= 0.5) {
            return Err(Error::InvalidParam {
                name: "b",
                value: b,
                reason: "stationary density requires b in (0, 1/2]",
            });
        }
        let c = 1.0 - 2.0 * b;
        Ok(StationaryDistribution {
            b,
            q: (1.0 - c * c).sqrt(),
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Density value at body angle `theta0`.
    pub fn pdf(&self, theta0: f64) -> f64 {
        let c = 1.0 - 2.0 * self.b;
        self.q / (2.0 * PI) / (1.0 - c * (2.0 * theta0).cos())
    }

    /// Deviation of the total mass from one, via adaptive quadrature.
    pub fn normalization_error(&self) -> f64 {
        (quad::integrate(|t| self.pdf(t), 0.0, 2.0 * PI, 1e-13) - 1.0).abs()
    }

    /// Angular velocity of the effective Jeffery dynamics.
    pub fn angular_velocity(&self, theta0: f64) -> f64 {
        -((1.0 - self.b) * theta0.sin().powi(2) + self.b * theta0.cos().powi(2))
    }
}

/// Leading-order stresses at arc length `s` in `[0, 1]` (nondimensional).
///
/// Returns `(Lambda0, N0)` in units of `zeta_f gamma_dot L^2`.
pub fn leading_stress_nondim(
    s: f64,
    theta0: f64,
    coeffs: &AsymptoticCoeffs,
    f_p: f64,
) -> (f64, f64) {
    let sm1 = s - 1.0;
    let lambda = -(0.25 * sm1 * sm1 + coeffs.sigma2 * sm1) * (2.0 * theta0).sin()
        - f_p * sm1 / (1.0 + coeffs.k_r);
    let n = -(0.5 * coeffs.alpha * coeffs.b * sm1 * sm1 + coeffs.sigma1 * sm1)
        * (2.0 * theta0).cos();
    (lambda, n)
}

/// Dimensional leading-order stresses at arc length `s` in `[0, L]` (units of force).
pub fn leading_stress(
    s: f64,
    theta0: f64,
    p: &PhysicalParams,
    mode: BMode,
) -> Result<(f64, f64)> {
    let dp = nondimensionalize(p)?;
    let coeffs = AsymptoticCoeffs::new(dp.beta, dp.r, dp.k_r, dp.alpha, mode)?;
    let scale = p.zeta_f * p.gamma_dot * p.l * p.l;
    let (lam, n) = leading_stress_nondim(s / p.l, theta0, &coeffs, dp.f_p);
    Ok((scale * lam, scale * n))
}

/// First-order flagellum shape `theta1(s)` so that
/// `theta(s) = theta0 + eps * theta1(s)` (nondimensional `s` in `[0, 1]`).
pub fn first_order_shape(s: f64, theta0: f64, coeffs: &AsymptoticCoeffs) -> f64 {
    let cos2 = (2.0 * theta0).cos();
    let sm1 = s - 1.0;
    let quartic = (sm1.powi(4) - 1.0) / 24.0;
    let cubic = (sm1.powi(3) + 1.0) / 6.0;
    (coeffs.chi * quartic + coeffs.c1 * cubic) * cos2
}

/// `int_0^1 theta1(s) ds / cos(2 theta0)`: the shape moment entering the
/// propulsion coefficient.
pub fn shape_moment(coeffs: &AsymptoticCoeffs) -> f64 {
    coeffs.c1 / 8.0 - coeffs.chi / 30.0
}

/// Elastic viscosity coefficient: the orientation-averaged symmetrized
/// off-diagonal Kirkwood stress of the leading-order elastic force density,
/// per swimmer, in units of `zeta_f gamma_dot L^3`.
pub fn z_elastic(beta: f64, r: f64, k_r: f64, alpha: f64) -> Result<f64> {
    let coeffs = AsymptoticCoeffs::new(beta, r, k_r, alpha, BMode::Exact)?;
    Ok(z_elastic_from(&coeffs))
}

/// [`z_elastic`] from precomputed coefficients.
pub fn z_elastic_from(coeffs: &AsymptoticCoeffs) -> f64 {
    let (sin2_avg, cos2_avg) = coeffs.angle_averages();
    // s-integrals of the stress polynomials over [0, 1]
    let lambda_int = coeffs.sigma2 / 2.0 - 1.0 / 12.0;
    let n_int = coeffs.sigma1 / 2.0 - coeffs.alpha * coeffs.b / 6.0;
    0.5 * (sin2_avg * lambda_int + cos2_avg * n_int)
}

/// Propulsion viscosity coefficient: the orientation-averaged first-order
/// propulsion Kirkwood stress per swimmer and unit `eps f_p`, in units of
/// `zeta_f gamma_dot L^3`.
pub fn z_prop(beta: f64, r: f64, k_r: f64, alpha: f64) -> Result<f64> {
    let coeffs = AsymptoticCoeffs::new(beta, r, k_r, alpha, BMode::Exact)?;
    Ok(z_prop_from(&coeffs))
}

/// [`z_prop`] from precomputed coefficients.
pub fn z_prop_from(coeffs: &AsymptoticCoeffs) -> f64 {
    let (_, cos2_avg) = coeffs.angle_averages();
    0.5 * shape_moment(coeffs) * cos2_avg
}

/// Asymptotic effective-viscosity report: relative change split into parts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AsymptoticViscosity {
    pub eta_elastic: f64,
    pub eta_propulsion: f64,
    pub total: f64,
}

/// Evaluates the closed-form effective viscosity change of a dilute suspension.
///
/// The elastic part is `Phi L^3 zeta_f Z_el / eta0 >= 0`; the propulsion part is
/// `-Phi eps F_p L^2 Z_prop / (eta0 gamma_dot) <= 0`, which is identical to
/// `-Phi L^6 zeta_f F_p Z_prop / (eta0 K_b)` and therefore well-defined as
/// `gamma_dot -> 0`.
pub fn effective_viscosity_asymptotic(p: &PhysicalParams) -> Result<AsymptoticViscosity> {
    let dp = nondimensionalize(p)?;
    let coeffs = AsymptoticCoeffs::new(dp.beta, dp.r, dp.k_r, dp.alpha, BMode::Exact)?;
    Ok(assemble_viscosity(p, &coeffs))
}

fn assemble_viscosity(p: &PhysicalParams, coeffs: &AsymptoticCoeffs) -> AsymptoticViscosity {
    let elastic = p.phi * p.l.powi(3) * p.zeta_f * z_elastic_from(coeffs) / p.eta0;
    // gamma_dot-free propulsion form: eps F_p L^2 / gamma_dot = zeta_f F_p L^6 / K_b
    let prop = -p.phi * p.zeta_f * p.f_p * p.l.powi(6) * z_prop_from(coeffs) / (p.eta0 * p.k_b);
    AsymptoticViscosity {
        eta_elastic: elastic,
        eta_propulsion: prop,
        total: elastic + prop,
    }
}

/// Which control parameter expresses the sign-change threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VaryParam {
    /// Flagellum length `L` [m].
    FlagellumLength,
    /// Body-to-flagellum ratio `r = ell / L` at fixed body.
    BodyRatio,
    /// Dimensionless stiffness `eps(L)`.
    Epsilon,
}

/// Sign-change threshold of the asymptotic viscosity along a flagellum-length scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Critical flagellum length [m].
    pub l_star: f64,
    /// Same threshold as `r = ell / L`.
    pub r_star: f64,
    /// Same threshold as `eps(L)`.
    pub eps_star: f64,
    /// Requested control parameter.
    pub vary: VaryParam,
    /// Threshold expressed in the requested parameter.
    pub value: f64,
}

/// Locates the flagellum length where the asymptotic viscosity change crosses
/// `target` (0 for the sign change, e.g. -0.10 for a 10% decrease).
///
/// The body, drags, and the dimensionless ratio `k_r` of the input parameter
/// set are held fixed along the scan; only `L` (hence `r`, `eps`, `f_p`)
/// varies. Bisection runs to relative tolerance 1e-6.
pub fn viscosity_decrease_threshold(
    p: &PhysicalParams,
    vary: VaryParam,
    target: f64,
) -> Result<ThresholdResult> {
    let dp = nondimensionalize(p)?;
    let k_r = dp.k_r;
    let beta = dp.beta;
    let alpha = dp.alpha;
    let total_at = |l: f64| -> f64 {
        let r = p.ell / l;
        match AsymptoticCoeffs::new(beta, r, k_r, alpha, BMode::Exact) {
            Ok(coeffs) => {
                let scan = PhysicalParams { l, ..p.clone() };
                assemble_viscosity(&scan, &coeffs).total - target
            }
            Err(_) => f64::NAN,
        }
    };
    let (lo, hi) = root::bracket(&total_at, p.ell * 1.01, p.ell * 100.0, 400, "viscosity threshold")?;
    let l_star = root::bisect(&total_at, lo, hi, 1e-6, "viscosity threshold")?;
    let r_star = p.ell / l_star;
    let eps_star = l_star.powi(4) * p.gamma_dot * p.zeta_f / p.k_b;
    let value = match vary {
        VaryParam::FlagellumLength => l_star,
        VaryParam::BodyRatio => r_star,
        VaryParam::Epsilon => eps_star,
    };
    Ok(ThresholdResult {
        l_star,
        r_star,
        eps_star,
        vary,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn effective_shape_values() {
        let (exact, simpl) = effective_shape_b(0.0162, 0.41, 0.65, 2.0).unwrap();
        assert_relative_eq!(simpl, 0.003650, max_relative = 2e-4);
        assert_relative_eq!(exact, 0.0031989, max_relative = 1e-4);
        // needle body
        let (e0, s0) = effective_shape_b(1e-12, 0.41, 0.65, 2.0).unwrap();
        assert!(e0 < 1e-12 && s0 < 1e-12);
        // the exact form reduces to the simplified one at k_r = 1/2, alpha = 2
        for r in [0.1, 0.3, 0.41, 0.9, 2.0] {
            let (e, s) = effective_shape_b(0.0162, r, 0.5, 2.0).unwrap();
            assert_relative_eq!(e, s, max_relative = 1e-13);
        }
    }

    #[test]
    fn exact_vs_simplified_within_15_percent_for_table_values() {
        let (exact, simpl) = effective_shape_b(0.0162, 0.41, 0.65, 2.0).unwrap();
        assert!((exact - simpl).abs() / simpl < 0.15);
    }

    #[test]
    fn stationary_distribution_examples() {
        // sphere limit is uniform
        let d = StationaryDistribution::new(0.5).unwrap();
        for t in [0.0, 0.7, 2.1] {
            assert_relative_eq!(d.pdf(t), 1.0 / (2.0 * PI), max_relative = 1e-14);
        }
        // trough-to-peak ratio b / (1 - b): the density peaks at flow alignment
        for b in [0.003650, 0.05, 0.3] {
            let d = StationaryDistribution::new(b).unwrap();
            assert_relative_eq!(d.pdf(PI / 2.0) / d.pdf(0.0), b / (1.0 - b), max_relative = 1e-12);
        }
        let d = StationaryDistribution::new(0.003650).unwrap();
        assert_relative_eq!(d.q(), 0.12059, max_relative = 1e-4);
        assert!(d.normalization_error() < 1e-12);
        assert!(StationaryDistribution::new(0.0).is_err());
    }

    #[test]
    fn leading_stress_examples() {
        let coeffs = AsymptoticCoeffs::new(0.0162, 0.41, 0.65, 2.0, BMode::Simplified).unwrap();
        assert_relative_eq!(coeffs.sigma1, 0.006508, max_relative = 1e-3);
        // free end carries no stress
        let (l1, n1) = leading_stress_nondim(1.0, 0.3, &coeffs, 2.0);
        assert_eq!(l1, 0.0);
        assert_eq!(n1, 0.0);
        // N0 vanishes identically at theta0 = pi/4
        for s in [0.0, 0.3, 0.8] {
            let (_, n) = leading_stress_nondim(s, PI / 4.0, &coeffs, 0.0);
            assert!(n.abs() < 1e-15);
        }
        // clamp value of the normal stress
        let (_, n0) = leading_stress_nondim(0.0, 0.0, &coeffs, 0.0);
        assert_relative_eq!(n0, 0.002859, max_relative = 1e-3);
    }

    #[test]
    fn first_order_shape_boundary_conditions() {
        let coeffs = AsymptoticCoeffs::new(0.0162, 0.41, 0.65, 2.0, BMode::Exact).unwrap();
        let theta0 = 0.35;
        // clamped at s = 0
        assert!(first_order_shape(0.0, theta0, &coeffs).abs() < 1e-15);
        // theta stays flat at theta0 = pi/4
        for s in [0.0, 0.2, 0.6, 1.0] {
            assert!(first_order_shape(s, PI / 4.0, &coeffs).abs() < 1e-15);
        }
        // derivative conditions on the quartic, evaluated analytically:
        // theta1'(s) = chi (s-1)^3 / 6 + c1 (s-1)^2 / 2, theta1''(s) = chi (s-1)^2 / 2 + c1 (s-1)
        let cos2 = (2.0_f64 * theta0).cos();
        let d1_at_1 = 0.0 * coeffs.chi + 0.0 * coeffs.c1;
        assert!(d1_at_1.abs() < 1e-15);
        // third-derivative clamp condition at s = 0:
        // theta1''' (0) = -chi + c1 must satisfy sigma k_r N0 = beta alpha r / 2 cos2t - theta1'''(0)
        let sigma = 1.0 + 1.5 * coeffs.alpha;
        let n0 = -(coeffs.chi / 2.0 - coeffs.c1) * cos2;
        let lhs = sigma * coeffs.k_r * n0;
        let rhs = coeffs.beta * coeffs.alpha * coeffs.r / 2.0 * cos2 - (-coeffs.chi + coeffs.c1) * cos2;
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn z_coefficients_positive_on_grid() {
        for beta in [0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5] {
            for r in [0.05, 0.1, 0.25, 0.5, 1.0, 2.0] {
                let ze = z_elastic(beta, r, 0.65, 2.0).unwrap();
                let zp = z_prop(beta, r, 0.65, 2.0).unwrap();
                assert!(ze > 0.0, "z_elastic({beta},{r}) = {ze}");
                assert!(zp > 0.0, "z_prop({beta},{r}) = {zp}");
            }
        }
    }

    #[test]
    fn z_coefficients_vanish_with_beta() {
        let ze = z_elastic(1e-9, 0.41, 0.65, 2.0).unwrap();
        let zp = z_prop(1e-9, 0.41, 0.65, 2.0).unwrap();
        assert!(ze < 1e-5 && ze > 0.0);
        assert!(zp < 1e-9 && zp > 0.0);
    }

    #[test]
    fn viscosity_report_sign_structure() {
        let p = PhysicalParams::default();
        let rep = effective_viscosity_asymptotic(&p).unwrap();
        assert!(rep.eta_elastic >= 0.0);
        assert!(rep.eta_propulsion <= 0.0);
        assert_relative_eq!(rep.total, rep.eta_elastic + rep.eta_propulsion);
        // no propulsion force -> elastic only
        let passive = PhysicalParams { f_p: 0.0, ..p };
        let rep = effective_viscosity_asymptotic(&passive).unwrap();
        assert_eq!(rep.eta_propulsion, 0.0);
        assert!(rep.total >= 0.0);
    }

    #[test]
    fn gamma_dot_invariance_of_the_report() {
        // both terms are shear-rate free, so the gamma_dot -> 0 limit is regular
        let p = PhysicalParams::default();
        let r1 = effective_viscosity_asymptotic(&p).unwrap();
        let r2 = effective_viscosity_asymptotic(&PhysicalParams { gamma_dot: 1e-9, ..p }).unwrap();
        assert_relative_eq!(r1.eta_propulsion, r2.eta_propulsion, max_relative = 1e-12);
        assert_relative_eq!(r1.eta_elastic, r2.eta_elastic, max_relative = 1e-12);
    }

    #[test]
    fn ten_percent_decrease_at_published_point() {
        let p = PhysicalParams {
            l: 12e-6,
            f_p: 1.5e-6,
            k_b: 3e-23,
            eta0: 1e-3,
            phi: 5e15,
            beta: Some(0.0162),
            ..PhysicalParams::default()
        };
        let rep = effective_viscosity_asymptotic(&p).unwrap();
        assert!(
            (rep.total - (-0.10)).abs() < 0.03,
            "total = {:.4}",
            rep.total
        );
    }

    #[test]
    fn liouville_flux_is_constant() {
        // omega(theta) * P(theta) must be constant for the stationary density
        let d = StationaryDistribution::new(0.0032).unwrap();
        let flux = |t: f64| d.angular_velocity(t) * d.pdf(t);
        let f0 = flux(0.1);
        for t in [0.5, 1.2, 2.9, 4.4] {
            assert_relative_eq!(flux(t), f0, max_relative = 1e-12);
        }
    }
}
