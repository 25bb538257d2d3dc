use swimmer::dynamics::{simulate, Grid, SolverConfig, SwimmerState};
use swimmer::params::{nondimensionalize, BackgroundFlow, PhysicalParams};

#[test]
#[ignore]
fn diag_rigid_blowup() {
    let mut p = nondimensionalize(&PhysicalParams::default()).unwrap();
    p.eps = 1e-3;
    p.f_p = 0.0;
    let config = SolverConfig {
        dt: 1e-3,
        sample_every: 100,
        ..SolverConfig::default()
    };
    for n in [41usize, 81, 161] {
        let grid = Grid::new(n).unwrap();
        let state = SwimmerState::straight(0.8, [0.0, 0.0], grid);
        match simulate(&state, 3.0, &p, BackgroundFlow::PlanarShear, config) {
            Ok(traj) => {
                let last = traj.states.last().unwrap();
                let mut max_curv = 0.0f64;
                for st in &traj.states {
                    for w in st.theta.windows(3) {
                        let c = (w[2] - 2.0 * w[1] + w[0]) * ((n - 1) as f64).powi(2);
                        max_curv = max_curv.max(c.abs());
                    }
                }
                eprintln!("n={n}: ok, theta0(T)={:.9}, max|theta''|={max_curv:.3e}", last.theta0);
            }
            Err(e) => eprintln!("n={n}: FAILED {e}"),
        }
    }
}
