use fracsync::fractional::{abm_solve, gamma_fn, FractionalOrder, TimeGrid};
use fracsync::model::SystemParams;
use fracsync::pde::{simulate_rd, Field, Grid1D, RDConfig};
use std::f64::consts::PI;

pub fn order(d: f64) -> FractionalOrder {
    FractionalOrder::new(d).unwrap()
}

pub fn rate(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}

pub fn rd_config(p: SystemParams, orders: [f64; 3], grid: Grid1D, t_end: f64, dt: f64) -> RDConfig {
    RDConfig {
        params: p,
        orders: orders.map(order),
        grid,
        time: TimeGrid::spanning(0.0, t_end, dt).unwrap(),
        memory_window: None,
        snapshot_stride: 1,
    }
}

/// max |x(t) − t²| for D^δ x = 2t^{2−δ}/Γ(3−δ) on [0, 1].
pub fn power_law_error(delta: f64, dt: f64) -> f64 {
    let g = gamma_fn(3.0 - delta).unwrap();
    let rhs = |t: f64, _x: &[f64], out: &mut [f64]| out[0] = 2.0 * t.powf(2.0 - delta) / g;
    let grid = TimeGrid::spanning(0.0, 1.0, dt).unwrap();
    let traj = abm_solve(rhs, &[0.0], &[order(delta)], &grid).unwrap();
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, x)| (x[0] - t * t).abs())
        .fold(0.0, f64::max)
}

/// L1 error for u = t² cos(πx/L) with forcing built from the discrete
/// Neumann eigenvalue, so only the time discretization contributes.
pub fn manufactured_l1_error(delta: f64, dt: f64) -> f64 {
    let length = 20.0;
    let grid = Grid1D::new(length, 41).unwrap();
    let dx = grid.dx();
    let mu = 4.0 / (dx * dx) * (PI * dx / (2.0 * length)).sin().powi(2);
    let d = [0.1, 0.2, 0.05];
    let g = gamma_fn(3.0 - delta).unwrap();
    let mut p = SystemParams::reference();
    p.d = d;
    let cfg = rd_config(p, [delta; 3], grid, 1.0, dt);
    let shape: Vec<f64> = grid.nodes().map(|x| (PI * x / length).cos()).collect();
    let forcing = |t: f64, _u: &Field, out: &mut [Vec<f64>; 3]| {
        for (i, o) in out.iter_mut().enumerate() {
            let amp = 2.0 * t.powf(2.0 - delta) / g + d[i] * mu * t * t;
            for (v, s) in o.iter_mut().zip(&shape) {
                *v = amp * s;
            }
        }
    };
    let traj = simulate_rd(&cfg, &forcing, &Field::zeros(grid)).unwrap();
    traj.snapshots
        .iter()
        .map(|s| {
            let exact = s.t * s.t;
            (0..3)
                .flat_map(|i| s.field.u[i].iter().zip(&shape).map(move |(v, c)| (v - exact * c).abs()))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
