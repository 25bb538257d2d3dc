use super::CmdResult;
use crate::config::RunConfig;
use crate::output::{fmt, CsvFile};
use rayon::prelude::*;
use std::path::Path;
use swimmer::wall::{free_swimmer_oscillation, OscillationClass, WallScenario};
use swimmer::PhysicalParams;

fn class_name(c: OscillationClass) -> &'static str {
    match c {
        OscillationClass::LimitCycle => "limit_cycle",
        OscillationClass::Decaying => "decaying",
        OscillationClass::MonotoneDecay => "monotone_decay",
        OscillationClass::Indeterminate => "indeterminate",
    }
}

pub fn run(cfg: &RunConfig, out: &Path) -> CmdResult {
    let oc = &cfg.oscillation;
    let scenario = WallScenario {
        perturbation: oc.perturbation,
        dt: oc.dt,
        n: oc.n,
        ..WallScenario::default()
    };
    let params = PhysicalParams {
        f_p: oc.f_p,
        ..cfg.params.clone()
    };
    let ratio = (oc.k_max / oc.k_min).powf(1.0 / (oc.points as f64 - 1.0));
    let ks: Vec<f64> = (0..oc.points)
        .map(|i| oc.k_min * ratio.powi(i as i32))
        .collect();
    let outcomes: Vec<_> = ks
        .par_iter()
        .map(|&k| free_swimmer_oscillation(k, &params, &scenario, oc.horizon).map(|o| (k, o)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut csv = CsvFile::create(
        &out.join("oscillation.csv"),
        cfg,
        &["K_b", "class", "amplitude"],
    )?;
    for (k, o) in &outcomes {
        csv.row(&[fmt(*k), class_name(o.class).to_string(), fmt(o.amplitude)])?;
    }
    csv.finish()?;
    Ok(())
}
