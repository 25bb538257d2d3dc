use super::{CmdError, CmdResult};
use crate::config::RunConfig;
use crate::output::{fmt, write_json_report, CsvFile};
use std::path::Path;
use swimmer::dynamics::{self, Grid, SolverConfig, SwimmerState};
use swimmer::params::{nondimensionalize, BackgroundFlow};

pub fn run(cfg: &RunConfig, out: &Path) -> CmdResult {
    let sc = &cfg.simulate;
    let flow = match sc.flow.as_str() {
        "shear" => BackgroundFlow::PlanarShear,
        "quiescent" => BackgroundFlow::Quiescent,
        other => return Err(CmdError::Config(format!("unknown flow kind `{other}`"))),
    };
    let dp = nondimensionalize(&cfg.params)?;
    let grid = Grid::new(sc.n)?;
    let initial = if sc.perturbation > 0.0 {
        SwimmerState::perturbed(sc.theta0, [0.0, 0.0], grid, sc.perturbation)
    } else {
        SwimmerState::straight(sc.theta0, [0.0, 0.0], grid)
    };
    let solver = SolverConfig {
        dt: sc.dt,
        sample_every: sc.sample_every,
        ..SolverConfig::default()
    };
    let traj = dynamics::simulate(&initial, sc.horizon, &dp, flow, solver)?;

    let mut csv = CsvFile::create(
        &out.join("trajectory.csv"),
        cfg,
        &["t", "theta0", "x_c", "y_c", "N0", "Lambda0", "energy"],
    )?;
    for st in &traj.states {
        let energy = dynamics::bending_energy(&st.theta, &dp, grid);
        csv.row(&[
            fmt(st.t),
            fmt(st.theta0),
            fmt(st.center[0]),
            fmt(st.center[1]),
            fmt(st.n_stress[0]),
            fmt(st.lambda[0]),
            fmt(energy),
        ])?;
    }
    csv.finish()?;

    if sc.shapes_every > 0 {
        for (k, st) in traj.states.iter().enumerate() {
            if k % sc.shapes_every != 0 {
                continue;
            }
            let xs = dynamics::reconstruct_positions(st, &dp);
            let mut shape = CsvFile::create(
                &out.join(format!("shape_{k:06}.csv")),
                cfg,
                &["s", "theta", "x", "y"],
            )?;
            let ds = grid.ds();
            for (i, p) in xs.iter().enumerate() {
                shape.row(&[
                    fmt(i as f64 * ds),
                    fmt(st.theta[i]),
                    fmt(p[0]),
                    fmt(p[1]),
                ])?;
            }
            shape.finish()?;
        }
    }

    let summary = serde_json::json!({
        "samples": traj.times.len(),
        "final_t": traj.times.last(),
        "final_theta0": traj.states.last().map(|s| s.theta0),
        "dimensionless": dp,
    });
    write_json_report(&out.join("simulate_meta.json"), cfg, &summary)?;
    Ok(())
}
