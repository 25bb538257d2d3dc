use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;
use swimmer::PhysicalParams;

/// Full run configuration; every field has a default so arbitrary subsets can
/// be supplied. The resolved form is embedded in every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: PhysicalParams,
    /// Reserved for randomized perturbation phases; fixed default keeps runs
    /// deterministic.
    pub seed: u64,
    pub simulate: SimulateCfg,
    pub viscosity: ViscosityCfg,
    pub wall: WallCfg,
    pub thresholds: ThresholdsCfg,
    pub oscillation: OscillationCfg,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: PhysicalParams::default(),
            seed: 0,
            simulate: SimulateCfg::default(),
            viscosity: ViscosityCfg::default(),
            wall: WallCfg::default(),
            thresholds: ThresholdsCfg::default(),
            oscillation: OscillationCfg::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateCfg {
    /// Horizon in nondimensional time.
    pub horizon: f64,
    pub dt: f64,
    pub n: usize,
    pub theta0: f64,
    /// First-bending-mode perturbation amplitude [rad].
    pub perturbation: f64,
    /// "shear" or "quiescent".
    pub flow: String,
    /// Emit a flagellum shape file every k-th sample (0 = never).
    pub shapes_every: usize,
    pub sample_every: usize,
}

impl Default for SimulateCfg {
    fn default() -> Self {
        SimulateCfg {
            horizon: 5.0,
            dt: 1e-4,
            n: 101,
            theta0: 1.0,
            perturbation: 0.0,
            flow: "shear".into(),
            shapes_every: 0,
            sample_every: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViscosityCfg {
    /// Bending stiffnesses for the ratio sweep [N m^2].
    pub k_b: Vec<f64>,
    /// Flagellum-length sweep bounds [m] (the body is fixed, so this is a
    /// sweep in r = ell / L).
    pub l_min: f64,
    pub l_max: f64,
    pub l_steps: usize,
    /// Fluid viscosities and propulsion force of the high-viscosity panel.
    pub eta0_values: Vec<f64>,
    pub eta0_panel_f_p: f64,
    /// Body-shape sweep values.
    pub beta_values: Vec<f64>,
    /// Numeric-method controls.
    pub numeric_dt: f64,
    pub numeric_n: usize,
    pub numeric_periods: u32,
}

impl Default for ViscosityCfg {
    fn default() -> Self {
        ViscosityCfg {
            k_b: vec![3e-23, 9e-23],
            l_min: 6e-6,
            l_max: 40e-6,
            l_steps: 35,
            eta0_values: vec![1e-3, 5e-3],
            eta0_panel_f_p: 1.5e-6,
            beta_values: vec![0.0162, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
            numeric_dt: 1e-4,
            numeric_n: 101,
            numeric_periods: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WallCfg {
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
    /// Relative bisection tolerance on the regime boundaries.
    pub rel_tol: f64,
    /// Propulsion force of the wall scenario [N/m].
    pub f_p: f64,
    pub perturbation: f64,
    pub contact_stiffness: f64,
    pub horizon: f64,
    pub dt: f64,
    pub n: usize,
    /// Optional single-stiffness run instead of a scan.
    pub single_k_b: Option<f64>,
}

impl Default for WallCfg {
    fn default() -> Self {
        WallCfg {
            k_min: 1e-24,
            k_max: 1e-22,
            points: 13,
            rel_tol: 0.02,
            f_p: 1e-7,
            perturbation: 0.01,
            contact_stiffness: 4e4,
            horizon: 25.0,
            dt: 5e-5,
            n: 101,
            single_k_b: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdsCfg {
    pub k_b: Vec<f64>,
    /// Relative viscosity-change targets of the table rows.
    pub targets: Vec<f64>,
    /// Propulsion force of the threshold table [N/m]. The published table does
    /// not state its value; this default reproduces the printed thresholds.
    pub f_p: f64,
    /// Number density for the -10% rows [1/m^3]; calibrated together with f_p.
    pub phi: f64,
    /// Body shape parameter of the table (the published table value).
    pub beta: f64,
    /// Also compute the simulated (PDE) columns.
    pub numeric: bool,
    pub numeric_dt: f64,
    pub numeric_n: usize,
    pub numeric_periods: u32,
    /// Relative bisection tolerance of the numeric column.
    pub numeric_rel_tol: f64,
    /// Bracket for the numeric threshold search [m].
    pub numeric_l_min: f64,
    pub numeric_l_max: f64,
}

impl Default for ThresholdsCfg {
    fn default() -> Self {
        ThresholdsCfg {
            k_b: vec![3e-23, 9e-23],
            targets: vec![0.0, -0.10],
            f_p: 4.24e-7,
            phi: 1.55e16,
            beta: 0.0162,
            numeric: true,
            numeric_dt: 1e-4,
            numeric_n: 101,
            numeric_periods: 1,
            numeric_rel_tol: 0.01,
            numeric_l_min: 6.5e-6,
            numeric_l_max: 36e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillationCfg {
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
    pub horizon: f64,
    pub f_p: f64,
    pub perturbation: f64,
    pub dt: f64,
    pub n: usize,
}

impl Default for OscillationCfg {
    fn default() -> Self {
        OscillationCfg {
            k_min: 1e-24,
            k_max: 1e-22,
            points: 9,
            horizon: 12.0,
            f_p: 1e-7,
            perturbation: 0.01,
            dt: 5e-5,
            n: 101,
        }
    }
}

/// Loads the configuration, applying `key=value` dot-path overrides.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, String> {
    let mut value: Value = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("invalid JSON in {}: {e}", p.display()))?
        }
        None => serde_json::to_value(RunConfig::default()).expect("default config serializes"),
    };
    for spec in overrides {
        apply_override(&mut value, spec)?;
    }
    serde_json::from_value(value).map_err(|e| format!("invalid configuration: {e}"))
}

fn apply_override(root: &mut Value, spec: &str) -> Result<(), String> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| format!("override `{spec}` is not KEY=VALUE"))?;
    let parsed: Value = if let Ok(b) = raw.parse::<bool>() {
        Value::Bool(b)
    } else if let Ok(i) = raw.parse::<i64>() {
        Value::from(i)
    } else if let Ok(f) = raw.parse::<f64>() {
        Value::from(f)
    } else if raw == "null" {
        Value::Null
    } else {
        Value::String(raw.to_string())
    };
    let mut cursor = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        if i + 1 == segments.len() {
            match cursor {
                Value::Object(map) => {
                    map.insert(seg.to_string(), parsed);
                    return Ok(());
                }
                _ => return Err(format!("override path `{path}` does not address an object")),
            }
        }
        cursor = match cursor {
            Value::Object(map) => map
                .entry(seg.to_string())
                .or_insert_with(|| Value::Object(Default::default())),
            _ => return Err(format!("override path `{path}` does not address an object")),
        };
    }
    Err(format!("empty override path in `{spec}`"))
}
