use super::CmdResult;
use crate::config::RunConfig;
use crate::output::{fmt, write_json_report, CsvFile};
use rayon::prelude::*;
use std::path::Path;
use swimmer::wall::{regime_boundaries, simulate_escape, EscapeClass, WallScenario};
use swimmer::PhysicalParams;

fn class_name(c: EscapeClass) -> &'static str {
    match c {
        EscapeClass::TrappedOscillating => "trapped_oscillating",
        EscapeClass::Escaped => "escaped",
        EscapeClass::TrappedStraight => "trapped_straight",
        EscapeClass::Indeterminate => "indeterminate",
    }
}

pub fn run(cfg: &RunConfig, out: &Path) -> CmdResult {
    let wc = &cfg.wall;
    let scenario = WallScenario {
        perturbation: wc.perturbation,
        contact_stiffness: wc.contact_stiffness,
        horizon: wc.horizon,
        dt: wc.dt,
        n: wc.n,
        ..WallScenario::default()
    };
    let params = PhysicalParams {
        f_p: wc.f_p,
        ..cfg.params.clone()
    };

    if let Some(k_b) = wc.single_k_b {
        let outcome = simulate_escape(k_b, &scenario, &params)?;
        write_json_report(&out.join("wall_outcome.json"), cfg, &outcome)?;
        return Ok(());
    }

    // classify the scan points in parallel, merge in stiffness order
    let ratio = (wc.k_max / wc.k_min).powf(1.0 / (wc.points as f64 - 1.0));
    let ks: Vec<f64> = (0..wc.points)
        .map(|i| wc.k_min * ratio.powi(i as i32))
        .collect();
    let outcomes: Vec<_> = ks
        .par_iter()
        .map(|&k| simulate_escape(k, &scenario, &params).map(|o| (k, o)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut csv = CsvFile::create(
        &out.join("wall_scan.csv"),
        cfg,
        &["K_b", "class", "theta_star", "contact_time", "detach_time", "n0_amplitude", "max_wall_distance"],
    )?;
    for (k, o) in &outcomes {
        csv.row(&[
            fmt(*k),
            class_name(o.class).to_string(),
            fmt(o.theta_star),
            o.contact_time.map(fmt).unwrap_or_else(|| "".into()),
            o.detach_time.map(fmt).unwrap_or_else(|| "".into()),
            fmt(o.n0_amplitude),
            fmt(o.max_wall_distance),
        ])?;
    }
    csv.finish()?;

    let boundaries = regime_boundaries((wc.k_min, wc.k_max), wc.points, wc.rel_tol, &scenario, &params)?;
    write_json_report(&out.join("wall_boundaries.json"), cfg, &boundaries)?;
    Ok(())
}
