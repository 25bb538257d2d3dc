use super::CmdResult;
use crate::config::RunConfig;
use crate::output::{fmt, CsvFile};
use rayon::prelude::*;
use std::path::Path;
use swimmer::asymptotics::{viscosity_decrease_threshold, VaryParam};
use swimmer::rheology::{numeric_viscosity_threshold, NumericViscosityConfig};
use swimmer::PhysicalParams;

pub fn run(cfg: &RunConfig, out: &Path) -> CmdResult {
    let tc = &cfg.thresholds;
    let base = PhysicalParams {
        f_p: tc.f_p,
        phi: tc.phi,
        beta: Some(tc.beta),
        ..cfg.params.clone()
    };

    let mut jobs: Vec<(f64, f64, bool)> = Vec::new();
    for &k_b in &tc.k_b {
        for &target in &tc.targets {
            jobs.push((k_b, target, false));
            if tc.numeric {
                jobs.push((k_b, target, true));
            }
        }
    }
    let num_cfg = NumericViscosityConfig {
        dt: tc.numeric_dt,
        n: tc.numeric_n,
        periods: tc.numeric_periods,
        ..NumericViscosityConfig::default()
    };
    let rows: Vec<Result<(f64, f64, &'static str, f64), String>> = jobs
        .par_iter()
        .map(|&(k_b, target, numeric)| {
            let p = PhysicalParams { k_b, ..base.clone() };
            if numeric {
                let l = numeric_viscosity_threshold(
                    &p,
                    target,
                    &num_cfg,
                    (tc.numeric_l_min, tc.numeric_l_max),
                    tc.numeric_rel_tol,
                )
                .map_err(|e| e.to_string())?;
                Ok((k_b, target, "numeric", l))
            } else {
                let t = viscosity_decrease_threshold(&p, VaryParam::FlagellumLength, target)
                    .map_err(|e| e.to_string())?;
                Ok((k_b, target, "asymptotic", t.l_star))
            }
        })
        .collect();

    let mut table: Vec<(f64, f64, &'static str, f64)> = Vec::new();
    for row in rows {
        table.push(row.map_err(super::CmdError::Numeric)?);
    }
    table.sort_by(|a, b| (a.0, a.1, a.2).partial_cmp(&(b.0, b.1, b.2)).unwrap());

    let mut csv = CsvFile::create(
        &out.join("thresholds.csv"),
        cfg,
        &["K_b", "target", "method", "L_star", "r_star", "eps_star"],
    )?;
    for (k_b, target, method, l_star) in &table {
        let r_star = base.ell / l_star;
        let eps_star = l_star.powi(4) * base.gamma_dot * base.zeta_f / k_b;
        csv.row(&[
            fmt(*k_b),
            fmt(*target),
            method.to_string(),
            fmt(*l_star),
            fmt(r_star),
            fmt(eps_star),
        ])?;
    }
    csv.finish()?;
    Ok(())
}
