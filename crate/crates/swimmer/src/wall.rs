//! Rigid-wall contact, the escape-from-entrapment scenario, and stiffness scans.
//!
//! The wall is the vertical line `x = 0` with fluid in `x > 0`. Contact is a
//! stiff penalty force normal to the wall at the ellipse's extremal point, with
//! no tangential friction. The penalty force and its torque enter the body
//! balance and the junction boundary conditions of the flagellum; the
//! wall-normal body velocity is suppressed while contact is active.

use crate::dynamics::{n0_of, Grid, SolverConfig, Stepper, SwimmerState};
use crate::params::{nondimensionalize, BackgroundFlow, PhysicalParams};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Contact geometry and stiffness, in flagellum-length units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallContact {
    /// Penalty stiffness (nondimensional force per penetration depth).
    pub stiffness: f64,
    /// Body semi-major axis `r / 2`.
    pub semi_major: f64,
    /// Body semi-minor axis `d / (2 L)`.
    pub semi_minor: f64,
}

/// Penalty force and torque of one contact evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ContactForce {
    /// Normal force on the body, pointing into the fluid (+x).
    pub force_x: f64,
    /// Torque about the body center.
    pub torque: f64,
    /// Penetration depth of the extremal point past the wall (<= 0: no contact).
    pub penetration: f64,
}

impl WallContact {
    /// Extremal half-extent of the rotated ellipse along x.
    pub fn reach(&self, theta0: f64) -> f64 {
        let (a, b) = (self.semi_major, self.semi_minor);
        ((a * theta0.cos()).powi(2) + (b * theta0.sin()).powi(2)).sqrt()
    }

    /// Penalty force/torque; identically zero without contact.
    pub fn evaluate(&self, theta0: f64, center_x: f64) -> ContactForce {
        let reach = self.reach(theta0);
        let penetration = reach - center_x;
        if penetration <= 0.0 {
            return ContactForce {
                penetration,
                ..ContactForce::default()
            };
        }
        let force_x = self.stiffness * penetration;
        // contact point relative to the center: P - O = (-reach, -(a^2-b^2) sc / reach)
        let (a, b) = (self.semi_major, self.semi_minor);
        let lever_y = -(a * a - b * b) * theta0.sin() * theta0.cos() / reach;
        // torque of F = F_x e_x about O: (P-O) x F = -(P-O)_y F_x
        ContactForce {
            force_x,
            torque: -lever_y * force_x,
            penetration,
        }
    }
}

/// Entrapment scenario: swimmer initially perpendicular to the wall, pressed
/// against it by its own propulsion, flagellum slightly perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallScenario {
    /// First-bending-mode perturbation amplitude [rad]; zero gives no motion.
    pub perturbation: f64,
    /// Penalty stiffness (nondimensional).
    pub contact_stiffness: f64,
    /// Swim time to first touch; sets the initial gap.
    pub approach_time: f64,
    /// Run horizon (nondimensional time).
    pub horizon: f64,
    /// Escape distance threshold in flagellum lengths.
    pub escape_distance: f64,
    /// Orientation tolerance for the parallel/no-motion checks [rad].
    pub angle_tol: f64,
    /// Half peak-to-peak N0 threshold between the oscillating and straight
    /// trapped classes.
    pub oscillation_tol: f64,
    /// Time step for wall runs.
    pub dt: f64,
    /// Grid nodes.
    pub n: usize,
}

impl Default for WallScenario {
    fn default() -> Self {
        WallScenario {
            perturbation: 0.01,
            contact_stiffness: 4e4,
            approach_time: 0.1,
            horizon: 25.0,
            escape_distance: 5.0,
            angle_tol: 0.1,
            oscillation_tol: 0.05,
            dt: 5e-5,
            n: 101,
        }
    }
}

/// Large-time classification of a wall run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EscapeClass {
    TrappedOscillating,
    Escaped,
    TrappedStraight,
    Indeterminate,
}

/// Outcome of one entrapment run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EscapeOutcome {
    pub class: EscapeClass,
    /// Body orientation at the horizon, wrapped to `[0, 2 pi)`.
    pub theta_star: f64,
    /// First time the body touches the wall.
    pub contact_time: Option<f64>,
    /// Last time contact was active (None while still touching at the horizon).
    pub detach_time: Option<f64>,
    /// Maximum wall clearance of the body center after first contact [L].
    pub max_wall_distance: f64,
    /// Half peak-to-peak N0 over the trailing fifth of the run.
    pub n0_amplitude: f64,
    /// Largest penetration depth observed [L].
    pub max_penetration: f64,
}

/// Wall torque of a single state; exactly zero whenever the contact test fails.
pub fn wall_torque(state: &SwimmerState, scenario: &WallScenario, p: &PhysicalParams) -> Result<f64> {
    let dp = nondimensionalize(p)?;
    let contact = WallContact {
        stiffness: scenario.contact_stiffness,
        semi_major: dp.r / 2.0,
        semi_minor: dp.minor_axis_ratio() / 2.0,
    };
    Ok(contact.evaluate(state.theta0, state.center[0]).torque)
}

/// Runs the entrapment scenario at bending stiffness `k_b` and classifies the
/// large-time behaviour.
pub fn simulate_escape(
    k_b: f64,
    scenario: &WallScenario,
    p: &PhysicalParams,
) -> Result<EscapeOutcome> {
    if !(scenario.perturbation >= 0.0) {
        return Err(Error::InvalidParam {
            name: "perturbation",
            value: scenario.perturbation,
            reason: "perturbation amplitude must be non-negative",
        });
    }
    let phys = PhysicalParams { k_b, ..p.clone() };
    let dp = nondimensionalize(&phys)?;
    let grid = Grid::new(scenario.n)?;
    let contact = WallContact {
        stiffness: scenario.contact_stiffness,
        semi_major: dp.r / 2.0,
        semi_minor: dp.minor_axis_ratio() / 2.0,
    };
    let config = SolverConfig {
        dt: scenario.dt,
        ..SolverConfig::default()
    };
    let mut stepper = Stepper::new(dp, BackgroundFlow::Quiescent, grid, config, Some(contact))?;

    let speed = dp.k_r * dp.f_p / (1.0 + dp.k_r);
    let start_x = contact.reach(PI) + speed * scenario.approach_time;
    let mut state = SwimmerState::perturbed(PI, [start_x, 0.0], grid, scenario.perturbation);

    let steps = (scenario.horizon / scenario.dt).ceil() as usize;
    let late_start = 0.8 * scenario.horizon;
    let mut contact_time = None;
    let mut last_contact = None;
    let mut max_gap_after_contact = 0.0_f64;
    let mut max_pen = 0.0_f64;
    let mut n0_min = f64::INFINITY;
    let mut n0_max = f64::NEG_INFINITY;

    let pen_limit = 0.1 * dp.r;
    for _ in 0..steps {
        stepper.step(&mut state)?;
        let pen = contact.reach(state.theta0) - state.center[0];
        if pen > pen_limit {
            return Err(Error::InvalidParam {
                name: "contact_stiffness",
                value: scenario.contact_stiffness,
                reason: "penalty too soft: penetration exceeded a tenth of the body length",
            });
        }
        if pen > 0.0 {
            if contact_time.is_none() {
                contact_time = Some(state.t);
            }
            last_contact = Some(state.t);
            max_pen = max_pen.max(pen);
        } else if contact_time.is_some() {
            max_gap_after_contact = max_gap_after_contact.max(-pen);
        }
        if state.t >= late_start {
            let n0 = n0_of(&state.theta, grid.ds(), dp.eps);
            n0_min = n0_min.min(n0);
            n0_max = n0_max.max(n0);
        }
    }

    let n0_amplitude = if n0_max >= n0_min {
        0.5 * (n0_max - n0_min)
    } else {
        0.0
    };
    let theta_star = state.theta0.rem_euclid(2.0 * PI);
    let detach_time = match (last_contact, contact_time) {
        (Some(t), Some(_)) if scenario.horizon - t > 10.0 * scenario.dt => Some(t),
        _ => None,
    };

    let moved = (state.theta0 - PI).abs() > scenario.angle_tol;
    let class = if !moved {
        // symmetry never broke (e.g. zero perturbation)
        EscapeClass::Indeterminate
    } else if max_gap_after_contact >= scenario.escape_distance {
        EscapeClass::Escaped
    } else if n0_amplitude > scenario.oscillation_tol {
        EscapeClass::TrappedOscillating
    } else {
        EscapeClass::TrappedStraight
    };

    Ok(EscapeOutcome {
        class,
        theta_star,
        contact_time,
        detach_time,
        max_wall_distance: max_gap_after_contact,
        n0_amplitude,
        max_penetration: max_pen,
    })
}

/// Regime boundaries of the stiffness scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimeBoundaries {
    /// Oscillating-trapped to escaped transition, when the staircase is monotone.
    pub k_low: Option<f64>,
    /// Escaped to straight-trapped transition.
    pub k_high: Option<f64>,
    /// All class transitions found: `(k_left, k_right, class_left, class_right)`.
    pub transitions: Vec<(f64, f64, EscapeClass, EscapeClass)>,
    /// Scanned stiffnesses and their classes.
    pub scan: Vec<(f64, EscapeClass)>,
}

/// Scans `[k_min, k_max]` (log-spaced), classifies each run, and bisects every
/// class transition to the given relative tolerance in `K_b`.
pub fn regime_boundaries(
    k_range: (f64, f64),
    points: usize,
    rel_tol: f64,
    scenario: &WallScenario,
    p: &PhysicalParams,
) -> Result<RegimeBoundaries> {
    let (k_min, k_max) = k_range;
    if !(k_min > 0.0 && k_max > k_min && points >= 3) {
        return Err(Error::InvalidParam {
            name: "k_range",
            value: k_min,
            reason: "need 0 < k_min < k_max and at least 3 scan points",
        });
    }
    let ratio = (k_max / k_min).powf(1.0 / (points as f64 - 1.0));
    let mut scan = Vec::with_capacity(points);
    let mut k = k_min;
    for _ in 0..points {
        let outcome = simulate_escape(k, scenario, p)?;
        scan.push((k, outcome.class));
        k *= ratio;
    }

    let mut transitions = Vec::new();
    for w in scan.windows(2) {
        let (ka, ca) = w[0];
        let (kb, cb) = w[1];
        if ca != cb {
            // bisect the class change
            let (mut lo, mut hi) = (ka, kb);
            let (mut clo, chi) = (ca, cb);
            while hi / lo - 1.0 > rel_tol {
                let mid = (lo * hi).sqrt();
                let cm = simulate_escape(mid, scenario, p)?.class;
                if cm == clo {
                    lo = mid;
                } else if cm == chi {
                    hi = mid;
                } else {
                    // a third class appeared inside; keep the left edge
                    hi = mid;
                }
                clo = if cm == clo { clo } else { clo };
            }
            transitions.push(((lo * hi).sqrt(), hi, ca, cb));
        }
    }

    let mut k_low = None;
    let mut k_high = None;
    for t in &transitions {
        match (t.2, t.3) {
            (EscapeClass::TrappedOscillating, EscapeClass::Escaped) => k_low = Some(t.0),
            (EscapeClass::Escaped, EscapeClass::TrappedStraight) => k_high = Some(t.0),
            _ => {}
        }
    }
    Ok(RegimeBoundaries {
        k_low,
        k_high,
        transitions,
        scan,
    })
}

/// Long-time N0 behaviour of a free swimmer (no wall, no flow).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OscillationClass {
    /// Sustained oscillation with stable amplitude.
    LimitCycle,
    /// Oscillation with decaying amplitude.
    Decaying,
    /// N0 converges without oscillating.
    MonotoneDecay,
    Indeterminate,
}

/// Free-swimmer oscillation result.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OscillationOutcome {
    pub class: OscillationClass,
    /// Half peak-to-peak N0 over the trailing fifth of the horizon.
    pub amplitude: f64,
}

/// Tracks N0 of a perturbed free swimmer in quiescent flow and classifies its
/// long-time behaviour.
pub fn free_swimmer_oscillation(
    k_b: f64,
    p: &PhysicalParams,
    scenario: &WallScenario,
    horizon: f64,
) -> Result<OscillationOutcome> {
    let phys = PhysicalParams { k_b, ..p.clone() };
    let dp = nondimensionalize(&phys)?;
    let grid = Grid::new(scenario.n)?;
    let config = SolverConfig {
        dt: scenario.dt,
        ..SolverConfig::default()
    };
    let mut stepper = Stepper::new(dp, BackgroundFlow::Quiescent, grid, config, None)?;
    let mut state = SwimmerState::perturbed(0.0, [0.0, 0.0], grid, scenario.perturbation);

    let steps = (horizon / scenario.dt).ceil() as usize;
    let stride = 20.max(steps / 200_000);
    let mut times = Vec::new();
    let mut n0s = Vec::new();
    for k in 0..steps {
        stepper.step(&mut state)?;
        if k % stride == 0 {
            times.push(state.t);
            n0s.push(n0_of(&state.theta, grid.ds(), dp.eps));
        }
    }
    let window = |lo: f64, hi: f64| -> (f64, usize) {
        let mut mn = f64::INFINITY;
        let mut mx = f64::NEG_INFINITY;
        let mut extrema = 0usize;
        let idx: Vec<usize> = (0..n0s.len())
            .filter(|&i| times[i] >= lo * horizon && times[i] <= hi * horizon)
            .collect();
        for w in idx.windows(3) {
            let (a, b, c) = (n0s[w[0]], n0s[w[1]], n0s[w[2]]);
            if (b > a && b > c) || (b < a && b < c) {
                extrema += 1;
            }
        }
        for &i in &idx {
            mn = mn.min(n0s[i]);
            mx = mx.max(n0s[i]);
        }
        (0.5 * (mx - mn).max(0.0), extrema)
    };
    let (amp_late, extrema_late) = window(0.8, 1.0);
    let (amp_mid, _) = window(0.4, 0.6);
    let overall = n0s.iter().fold(0.0_f64, |a, b| a.max(b.abs()));

    let class = if overall < 1e-9 {
        // exact straight fixed point
        OscillationClass::MonotoneDecay
    } else if extrema_late <= 1 && amp_late < 0.05 * overall {
        OscillationClass::MonotoneDecay
    } else if amp_late > 1.5 * amp_mid.max(1e-12) {
        OscillationClass::Indeterminate
    } else if amp_late >= 0.7 * amp_mid {
        OscillationClass::LimitCycle
    } else {
        OscillationClass::Decaying
    };
    Ok(OscillationOutcome {
        class,
        amplitude: amp_late,
    })
}
