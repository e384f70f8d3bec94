//! Master–slave complete synchronization.
//!
//! The slave is an identical copy of the master driven by a control input
//! φ(x, t). The controller cancels every nonlinear term of the error
//! dynamics e = v − u, leaving the linear system
//!
//! D^δe₁ − d₁Δe₁ = −a·e₁ + e₂
//! D^δe₂ − d₂Δe₂ = −e₁ − 0.4e₂
//! D^δe₃ − d₃Δe₃ = −0.4e₃
//!
//! whose spectrum is checked in [`crate::stability::sync_condition_check`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{vector_field, State3, SystemParams};
use crate::pde::{simulate_rd, Field, Grid1D, L1Stepper, RDConfig, RdTrajectory};

/// Form of the second control component.
///
/// The cancellation of v₁v₃ − u₁u₃ = e₁e₃ + u₁e₃ + e₁u₃ needs the e₁e₃ term
/// ([`ControllerVariant::Consistent`]). [`ControllerVariant::CrossTerm`]
/// uses e₁e₂ in place of e₁e₃, which leaves a residual
/// 5(e₁e₃ − e₁e₂) in the second error equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerVariant {
    #[default]
    Consistent,
    CrossTerm,
}

/// φ(u, e) at one point.
pub fn control_law(p: &SystemParams, u: &State3, e: &State3, variant: ControllerVariant) -> State3 {
    let [u1, u2, u3] = u.0;
    let [e1, e2, e3] = e.0;
    let quadratic = match variant {
        ControllerVariant::Consistent => e1 * e3,
        ControllerVariant::CrossTerm => e1 * e2,
    };
    State3([
        -10.0 * (e2 * e3 + u2 * e3 + e2 * u3),
        -5.0 * (quadratic + u1 * e3 + e1 * u3),
        5.0 * (e1 * e2 + u1 * e2 + e1 * u2) - (p.alpha + 0.4) * e3,
    ])
}

/// φ on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    pub phi: [Vec<f64>; 3],
}

impl ControlSignal {
    pub fn evaluate(
        p: &SystemParams,
        master: &Field,
        error: &Field,
        variant: ControllerVariant,
    ) -> Self {
        let n = master.grid.n_nodes;
        let mut phi: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
        for j in 0..n {
            let c = control_law(p, &master.at(j), &error.at(j), variant);
            for i in 0..3 {
                phi[i][j] = c.0[i];
            }
        }
        Self { phi }
    }
}

/// Reaction of the closed-loop linear error system.
pub fn linear_error_field(p: &SystemParams, e: &State3) -> State3 {
    let [e1, e2, e3] = e.0;
    State3([-p.a * e1 + e2, -e1 - 0.4 * e2, -0.4 * e3])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncState {
    pub master: Field,
    pub slave: Field,
    /// v − u, recomputed from the two states.
    pub error: Field,
}

impl SyncState {
    pub fn new(master: Field, slave: Field) -> Result<Self> {
        let error = slave.difference(&master)?;
        Ok(Self { master, slave, error })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncConfig {
    pub rd: RDConfig,
    pub controller_enabled: bool,
    #[serde(default)]
    pub variant: ControllerVariant,
    #[serde(skip)]
    pub master_ic: Option<Field>,
    #[serde(skip)]
    pub slave_ic: Option<Field>,
    pub error_norm_stride: usize,
}

impl SyncConfig {
    pub fn new(rd: RDConfig, controller_enabled: bool, master_ic: Field, slave_ic: Field) -> Self {
        Self {
            rd,
            controller_enabled,
            variant: ControllerVariant::default(),
            master_ic: Some(master_ic),
            slave_ic: Some(slave_ic),
            error_norm_stride: 1,
        }
    }

    /// Orders differ between components, outside the commensurate setting
    /// of the synchronization theorem.
    pub fn beyond_theorem(&self) -> bool {
        let o = &self.rd.orders;
        o[0] != o[1] || o[1] != o[2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSample {
    pub step: usize,
    pub t: f64,
    pub l2: f64,
    pub sup: f64,
    pub lyapunov: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncSnapshot {
    pub step: usize,
    pub t: f64,
    pub state: SyncState,
    pub lyapunov: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncTrajectory {
    pub snapshots: Vec<SyncSnapshot>,
    pub error_norms: Vec<ErrorSample>,
    pub beyond_theorem: bool,
}

/// V = ½ ∫ (e₁² + e₂² + e₃²) dx, trapezoid rule.
pub fn lyapunov_v(e: &Field) -> f64 {
    let sq: Vec<f64> = (0..e.grid.n_nodes)
        .map(|j| e.u.iter().map(|c| c[j] * c[j]).sum())
        .collect();
    0.5 * e.grid.integrate(&sq)
}

/// ‖e‖_{L²(Ω)} with the same quadrature as [`lyapunov_v`].
pub fn error_l2(e: &Field) -> f64 {
    (2.0 * lyapunov_v(e)).sqrt()
}

/// max over nodes and components of |e|.
pub fn error_sup(e: &Field) -> f64 {
    e.max_abs()
}

/// Energy of the error in the first `n_modes` Neumann cosine modes,
/// Σᵢ ⟨eᵢ, φₖ⟩² with orthonormal φₖ on [0, L].
pub fn mode_energies(e: &Field, n_modes: usize) -> Vec<f64> {
    let g = e.grid;
    let w = g.trapezoid_weights();
    (0..n_modes)
        .map(|k| {
            let norm = if k == 0 { (1.0 / g.length).sqrt() } else { (2.0 / g.length).sqrt() };
            let basis: Vec<f64> = g
                .nodes()
                .map(|x| norm * (k as f64 * std::f64::consts::PI * x / g.length).cos())
                .collect();
            e.u.iter()
                .map(|c| {
                    let proj: f64 = c.iter().zip(&basis).zip(&w).map(|((v, b), w)| v * b * w).sum();
                    proj * proj
                })
                .sum()
        })
        .collect()
}

fn sample(step: usize, t: f64, e: &Field) -> ErrorSample {
    let lyapunov = lyapunov_v(e);
    ErrorSample { step, t, l2: (2.0 * lyapunov).sqrt(), sup: error_sup(e), lyapunov }
}

fn nl_reaction(p: &SystemParams, u: &Field, out: &mut [Vec<f64>; 3]) {
    for j in 0..u.grid.n_nodes {
        let f = vector_field(p, &u.at(j));
        for i in 0..3 {
            out[i][j] = f.0[i];
        }
    }
}

/// Co-integrate master and slave on a shared grid.
///
/// Both fields advance with the same L1/IMEX stepper. The slave's reaction
/// at each level is its own Newton–Leipnik term plus φ evaluated from the
/// previous master state and the previous error.
pub fn run_sync(cfg: &SyncConfig) -> Result<SyncTrajectory> {
    cfg.rd.validate()?;
    if cfg.error_norm_stride == 0 {
        return Err(Error::Config("error_norm_stride must be at least 1".into()));
    }
    let master_ic = cfg
        .master_ic
        .clone()
        .ok_or_else(|| Error::Config("missing master initial condition".into()))?;
    let slave_ic = cfg
        .slave_ic
        .clone()
        .ok_or_else(|| Error::Config("missing slave initial condition".into()))?;
    if master_ic.grid != cfg.rd.grid || slave_ic.grid != cfg.rd.grid {
        return Err(Error::Config("master and slave must share the configured grid".into()));
    }
    let p = cfg.rd.params;
    let n = cfg.rd.grid.n_nodes;
    let mut master = L1Stepper::new(&cfg.rd, master_ic.clone())?;
    let mut slave = L1Stepper::new(&cfg.rd, slave_ic.clone())?;

    let initial = SyncState::new(master_ic, slave_ic)?;
    let mut error_norms = vec![sample(0, cfg.rd.time.t0, &initial.error)];
    let mut snapshots = vec![SyncSnapshot {
        step: 0,
        t: cfg.rd.time.t0,
        lyapunov: lyapunov_v(&initial.error),
        state: initial,
    }];

    let mut r_master: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
    let mut r_slave: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
    let mut error = snapshots[0].state.error.clone();
    for k in 1..=cfg.rd.time.n_steps {
        let t = cfg.rd.time.time(k);
        nl_reaction(&p, master.state(), &mut r_master);
        nl_reaction(&p, slave.state(), &mut r_slave);
        if cfg.controller_enabled {
            let phi = ControlSignal::evaluate(&p, master.state(), &error, cfg.variant);
            for (r, c) in r_slave.iter_mut().zip(&phi.phi) {
                for (a, b) in r.iter_mut().zip(c) {
                    *a += b;
                }
            }
        }
        let (a, b) = rayon::join(|| master.step(&r_master), || slave.step(&r_slave));
        a?;
        b?;
        error = slave.state().difference(master.state())?;

        if k % cfg.error_norm_stride == 0 || k == cfg.rd.time.n_steps {
            error_norms.push(sample(k, t, &error));
        }
        if k % cfg.rd.snapshot_stride == 0 || k == cfg.rd.time.n_steps {
            snapshots.push(SyncSnapshot {
                step: k,
                t,
                lyapunov: lyapunov_v(&error),
                state: SyncState {
                    master: master.state().clone(),
                    slave: slave.state().clone(),
                    error: error.clone(),
                },
            });
        }
    }
    Ok(SyncTrajectory { snapshots, error_norms, beyond_theorem: cfg.beyond_theorem() })
}

/// Integrate the closed-loop linear error system directly from `e0`.
pub fn integrate_linear_error(rd: &RDConfig, e0: &Field) -> Result<RdTrajectory> {
    let p = rd.params;
    let reaction = move |_t: f64, e: &Field, out: &mut [Vec<f64>; 3]| {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            for (j, v) in o.iter_mut().enumerate() {
                *v = linear_error_field(&p, &e.at(j)).0[i];
            }
        });
    };
    simulate_rd(rd, &reaction, e0)
}

/// Slave initial condition used when none is given: 1.5 × master.
pub fn default_slave_ic(master_ic: &Field) -> Field {
    master_ic.scaled(1.5)
}

/// Check that all fields share `grid`.
pub fn same_grid(grid: &Grid1D, fields: &[&Field]) -> bool {
    fields.iter().all(|f| f.grid == *grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::{FractionalOrder, TimeGrid};
    use crate::pde::canonical_initial_conditions;
    use proptest::prelude::*;

    fn p() -> SystemParams {
        SystemParams::reference()
    }

    #[test]
    fn zero_error_means_zero_control() {
        let u = State3::new(0.3, -0.2, 0.7);
        for v in [ControllerVariant::Consistent, ControllerVariant::CrossTerm] {
            assert_eq!(control_law(&p(), &u, &State3::ZERO, v), State3::ZERO);
        }
    }

    #[test]
    fn unit_error_at_origin() {
        let phi = control_law(&p(), &State3::ZERO, &State3::new(1.0, 1.0, 1.0), ControllerVariant::Consistent);
        assert_eq!(phi.0[0], -10.0);
        assert_eq!(phi.0[1], -5.0);
        assert!((phi.0[2] - 4.425).abs() < 1e-15);
        let cross = control_law(&p(), &State3::ZERO, &State3::new(1.0, 1.0, 1.0), ControllerVariant::CrossTerm);
        assert_eq!(cross, phi);
    }

    proptest! {
        #[test]
        fn consistent_controller_cancels_nonlinearity(
            u in prop::array::uniform3(-2.0f64..2.0),
            e in prop::array::uniform3(-2.0f64..2.0),
        ) {
            let (u, e) = (State3(u), State3(e));
            let v = State3([u.0[0] + e.0[0], u.0[1] + e.0[1], u.0[2] + e.0[2]]);
            let fu = vector_field(&p(), &u);
            let fv = vector_field(&p(), &v);
            let phi = control_law(&p(), &u, &e, ControllerVariant::Consistent);
            let lin = linear_error_field(&p(), &e);
            for i in 0..3 {
                let closed = fv.0[i] + phi.0[i] - fu.0[i];
                prop_assert!((closed - lin.0[i]).abs() <= 1e-12, "component {}", i);
            }
        }

        #[test]
        fn cross_term_controller_leaves_second_equation_residual(
            u in prop::array::uniform3(-2.0f64..2.0),
            e in prop::array::uniform3(-2.0f64..2.0),
        ) {
            let (u, e) = (State3(u), State3(e));
            let v = State3([u.0[0] + e.0[0], u.0[1] + e.0[1], u.0[2] + e.0[2]]);
            let phi = control_law(&p(), &u, &e, ControllerVariant::CrossTerm);
            let closed = vector_field(&p(), &v).0[1] + phi.0[1] - vector_field(&p(), &u).0[1];
            let residual = closed - linear_error_field(&p(), &e).0[1];
            let expected = 5.0 * (e.0[0] * e.0[2] - e.0[0] * e.0[1]);
            prop_assert!((residual - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn lyapunov_and_norms() {
        let g = Grid1D::new(20.0, 201).unwrap();
        assert_eq!(lyapunov_v(&Field::zeros(g)), 0.0);
        let mut e = Field::zeros(g);
        e.u[0].fill(1.0);
        assert!((lyapunov_v(&e) - 10.0).abs() < 1e-12);
        assert_eq!(error_sup(&Field::zeros(g)), 0.0);
        let mut single = Field::zeros(g);
        single.u[2][17] = -0.7;
        assert_eq!(error_sup(&single), 0.7);
        let wavy = Field::from_fn(g, |x| State3::new(x.sin(), 0.3 * x.cos(), -0.1));
        let l2 = error_l2(&wavy);
        assert!(l2 <= error_sup(&wavy) * (3.0 * g.length).sqrt());
        assert!((lyapunov_v(&wavy) - 0.5 * l2 * l2).abs() < 1e-12);
    }

    #[test]
    fn mode_energies_of_single_cosine() {
        let g = Grid1D::new(20.0, 401).unwrap();
        let e = Field::from_fn(g, |x| State3::new((2.0 * std::f64::consts::PI * x / 20.0).cos(), 0.0, 0.0));
        let energies = mode_energies(&e, 5);
        // ∫cos² = L/2, normalized basis ⇒ energy L/2
        assert!((energies[2] - 10.0).abs() < 1e-6);
        for (k, en) in energies.iter().enumerate() {
            if k != 2 {
                assert!(*en < 1e-10);
            }
        }
    }

    fn short_config(delta: f64) -> RDConfig {
        RDConfig {
            params: p(),
            orders: [FractionalOrder::new(delta).unwrap(); 3],
            grid: Grid1D::new(20.0, 41).unwrap(),
            time: TimeGrid::new(0.0, 0.01, 300).unwrap(),
            memory_window: None,
            snapshot_stride: 10,
        }
    }

    #[test]
    fn identical_initial_conditions_stay_synchronized() {
        let rd = short_config(0.95);
        let ic = canonical_initial_conditions(rd.grid);
        for enabled in [true, false] {
            let cfg = SyncConfig::new(rd.clone(), enabled, ic.clone(), ic.clone());
            let traj = run_sync(&cfg).unwrap();
            assert!(traj.error_norms.iter().all(|s| s.sup <= 1e-12));
            if !enabled {
                for s in &traj.snapshots {
                    assert_eq!(s.state.master, s.state.slave);
                }
            }
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let rd = short_config(0.9);
        let ic = canonical_initial_conditions(rd.grid);
        let other = canonical_initial_conditions(Grid1D::new(20.0, 21).unwrap());
        let cfg = SyncConfig::new(rd, true, ic, other);
        assert!(matches!(run_sync(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn controlled_error_tracks_linear_system_on_short_run() {
        let rd = short_config(0.9);
        let ic = canonical_initial_conditions(rd.grid);
        let cfg = SyncConfig::new(rd.clone(), true, ic.clone(), default_slave_ic(&ic));
        let traj = run_sync(&cfg).unwrap();
        let lin = integrate_linear_error(&rd, &traj.snapshots[0].state.error).unwrap();
        for (s, l) in traj.snapshots.iter().zip(&lin.snapshots) {
            assert_eq!(s.step, l.step);
            assert!(s.state.error.max_abs_diff(&l.field) < 1e-10);
        }
        assert!(traj.error_norms.last().unwrap().l2 < traj.error_norms[0].l2);
    }

    #[test]
    fn incommensurate_runs_are_labelled() {
        let mut rd = short_config(0.9);
        rd.orders[2] = FractionalOrder::new(0.99).unwrap();
        let ic = canonical_initial_conditions(rd.grid);
        let cfg = SyncConfig::new(rd, true, ic.clone(), ic);
        assert!(cfg.beyond_theorem());
    }
}
