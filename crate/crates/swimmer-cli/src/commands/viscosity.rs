use super::{CmdError, CmdResult};
use crate::config::RunConfig;
use crate::output::{fmt, CsvFile};
use rayon::prelude::*;
use std::path::Path;
use swimmer::asymptotics::effective_viscosity_asymptotic;
use swimmer::rheology::{effective_viscosity_numeric, NumericViscosityConfig};
use swimmer::PhysicalParams;

fn l_grid(cfg: &RunConfig) -> Vec<f64> {
    let v = &cfg.viscosity;
    let steps = v.l_steps.max(2);
    (0..steps)
        .map(|i| {
            let f = i as f64 / (steps as f64 - 1.0);
            v.l_min * (v.l_max / v.l_min).powf(f)
        })
        .collect()
}

pub fn run(cfg: &RunConfig, out: &Path, method: &str) -> CmdResult {
    let (do_asym, do_num) = match method {
        "asymptotic" => (true, false),
        "numeric" => (false, true),
        "both" => (true, true),
        other => {
            return Err(CmdError::Config(format!(
                "unknown method `{other}` (use asymptotic, numeric, or both)"
            )))
        }
    };
    if do_num && cfg.params.gamma_dot == 0.0 {
        return Err(CmdError::Config(
            "numeric method needs a positive shear rate; the closed form handles gamma_dot -> 0"
                .into(),
        ));
    }

    // panel (a)/(b): viscosity change and split vs r for each K_b
    let mut rows: Vec<(f64, f64, String, f64, f64, f64)> = Vec::new();
    let grid = l_grid(cfg);
    let mut jobs: Vec<(f64, f64, bool)> = Vec::new();
    for &k_b in &cfg.viscosity.k_b {
        for &l in &grid {
            if do_asym {
                jobs.push((k_b, l, false));
            }
            if do_num {
                jobs.push((k_b, l, true));
            }
        }
    }
    let num_cfg = NumericViscosityConfig {
        dt: cfg.viscosity.numeric_dt,
        n: cfg.viscosity.numeric_n,
        periods: cfg.viscosity.numeric_periods,
        ..NumericViscosityConfig::default()
    };
    let computed: Vec<Result<(f64, f64, String, f64, f64, f64), String>> = jobs
        .par_iter()
        .map(|&(k_b, l, numeric)| {
            let p = PhysicalParams {
                k_b,
                l,
                ..cfg.params.clone()
            };
            if numeric {
                let rep = effective_viscosity_numeric(&p, &num_cfg).map_err(|e| e.to_string())?;
                Ok((k_b, l, "numeric".to_string(), rep.eta_elastic, rep.eta_propulsion, rep.total))
            } else {
                let rep = effective_viscosity_asymptotic(&p).map_err(|e| e.to_string())?;
                Ok((k_b, l, "asymptotic".to_string(), rep.eta_elastic, rep.eta_propulsion, rep.total))
            }
        })
        .collect();
    for item in computed {
        rows.push(item.map_err(CmdError::Numeric)?);
    }
    rows.sort_by(|a, b| {
        (a.0, a.1, a.2.clone())
            .partial_cmp(&(b.0, b.1, b.2.clone()))
            .unwrap()
    });
    let mut csv = CsvFile::create(
        &out.join("viscosity_vs_r.csv"),
        cfg,
        &["K_b", "L", "r", "eps", "method", "eta_elastic", "eta_propulsion", "total"],
    )?;
    for (k_b, l, method, el, pr, tot) in &rows {
        let r = cfg.params.ell / l;
        let eps = l.powi(4) * cfg.params.gamma_dot * cfg.params.zeta_f / k_b;
        csv.row(&[
            fmt(*k_b),
            fmt(*l),
            fmt(r),
            fmt(eps),
            method.clone(),
            fmt(*el),
            fmt(*pr),
            fmt(*tot),
        ])?;
    }
    csv.finish()?;

    // panel (c): sweep vs r for each eta0 at the boosted propulsion force
    let mut csv = CsvFile::create(
        &out.join("viscosity_vs_eta0.csv"),
        cfg,
        &["eta0", "L", "r", "eta_elastic", "eta_propulsion", "total"],
    )?;
    for &eta0 in &cfg.viscosity.eta0_values {
        for &l in &grid {
            let p = PhysicalParams {
                eta0,
                l,
                f_p: cfg.viscosity.eta0_panel_f_p,
                ..cfg.params.clone()
            };
            let rep = effective_viscosity_asymptotic(&p)?;
            csv.row(&[
                fmt(eta0),
                fmt(l),
                fmt(cfg.params.ell / l),
                fmt(rep.eta_elastic),
                fmt(rep.eta_propulsion),
                fmt(rep.total),
            ])?;
        }
    }
    csv.finish()?;

    // panel (d): sweep vs body shape
    let mut csv = CsvFile::create(
        &out.join("viscosity_vs_beta.csv"),
        cfg,
        &["beta", "eta_elastic", "eta_propulsion", "total"],
    )?;
    for &beta in &cfg.viscosity.beta_values {
        let p = PhysicalParams {
            beta: Some(beta),
            ..cfg.params.clone()
        };
        let rep = effective_viscosity_asymptotic(&p)?;
        csv.row(&[
            fmt(beta),
            fmt(rep.eta_elastic),
            fmt(rep.eta_propulsion),
            fmt(rep.total),
        ])?;
    }
    csv.finish()?;
    Ok(())
}
