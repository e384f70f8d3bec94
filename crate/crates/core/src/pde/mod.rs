//! Time-fractional reaction–diffusion on a 1-D interval with homogeneous
//! Neumann boundaries.
//!
//! Method of lines: second-order central Laplacian with mirrored ghost
//! nodes in space, L1 discretization of each Caputo derivative in time.
//! Diffusion is implicit and the reaction is lagged one step, so every step
//! costs one tridiagonal solve per component on top of the history
//! convolution:
//!
//! (1/τᵢ − dᵢΔ) uᵢᵏ = (1/τᵢ)[uᵢᵏ⁻¹ − Σ_{j≥1} bⱼ (uᵢᵏ⁻ʲ − uᵢᵏ⁻ʲ⁻¹)] + Rᵢ(tₖ, uᵏ⁻¹),
//! τᵢ = dt^{δᵢ} Γ(2−δᵢ).

mod stepper;
mod tridiag;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{FractionalOrder, TimeGrid};
use crate::model::{vector_field, State3, SystemParams};

pub use stepper::L1Stepper;
pub use tridiag::{FactoredTridiagonal, Tridiagonal};

/// Values whose magnitude exceeds this trip the divergence detector.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// Uniform closed lattice x₀ = 0, …, x_{n−1} = L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub length: f64,
    pub n_nodes: usize,
}

impl Grid1D {
    pub fn new(length: f64, n_nodes: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Config(format!("domain length must be positive, got {length}")));
        }
        if n_nodes < 3 {
            return Err(Error::Config(format!("grid needs at least 3 nodes, got {n_nodes}")));
        }
        Ok(Self { length, n_nodes })
    }

    /// Grid on [0, L] with spacing as close to `dx` as an integral node
    /// count allows.
    pub fn with_spacing(length: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::Config(format!("grid spacing must be positive, got {dx}")));
        }
        Self::new(length, (length / dx).round() as usize + 1)
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.length / (self.n_nodes - 1) as f64
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes).map(|j| self.x(j))
    }

    /// Index of the node nearest to `x`.
    pub fn nearest(&self, x: f64) -> Result<usize> {
        if !(0.0..=self.length).contains(&x) {
            return Err(Error::Domain(format!(
                "probe {x} outside the domain [0, {}]",
                self.length
            )));
        }
        Ok(((x / self.dx()).round() as usize).min(self.n_nodes - 1))
    }

    /// Trapezoid quadrature weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut w = vec![dx; self.n_nodes];
        w[0] = 0.5 * dx;
        w[self.n_nodes - 1] = 0.5 * dx;
        w
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.trapezoid_weights().iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Three-component state u(x) sampled on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid1D,
    pub u: [Vec<f64>; 3],
}

impl Field {
    pub fn new(grid: Grid1D, u: [Vec<f64>; 3]) -> Result<Self> {
        if u.iter().any(|c| c.len() != grid.n_nodes) {
            return Err(Error::Config(format!(
                "field components must have {} nodes",
                grid.n_nodes
            )));
        }
        if u.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("field contains non-finite values".into()));
        }
        Ok(Self { grid, u })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, u: std::array::from_fn(|_| vec![0.0; grid.n_nodes]) }
    }

    pub fn uniform(grid: Grid1D, value: State3) -> Self {
        Self { grid, u: std::array::from_fn(|i| vec![value.0[i]; grid.n_nodes]) }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> State3) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.n_nodes {
            let s = f(grid.x(j));
            for i in 0..3 {
                out.u[i][j] = s.0[i];
            }
        }
        out
    }

    #[inline]
    pub fn at(&self, j: usize) -> State3 {
        State3([self.u[0][j], self.u[1][j], self.u[2][j]])
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { grid: self.grid, u: self.u.clone().map(|c| c.into_iter().map(|v| v * s).collect()) }
    }

    /// Componentwise `self − other`.
    pub fn difference(&self, other: &Field) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::Config("fields live on different grids".into()));
        }
        Ok(Field {
            grid: self.grid,
            u: std::array::from_fn(|i| {
                self.u[i].iter().zip(&other.u[i]).map(|(a, b)| a - b).collect()
            }),
        })
    }

    /// max over nodes and components of |self − other|
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        (0..3)
            .flat_map(|i| self.u[i].iter().zip(&other.u[i]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest spread max_j − min_j over the three components.
    pub fn spatial_spread(&self) -> f64 {
        self.u
            .iter()
            .map(|c| {
                let (lo, hi) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(*v), hi.max(*v))
                });
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}

/// Discrete Neumann Laplacian with mirrored ghosts (w₋₁ = w₁, wₙ = wₙ₋₂).
pub fn laplacian_neumann(w: &[f64], dx: f64) -> Vec<f64> {
    let n = w.len();
    assert!(n >= 3, "Neumann Laplacian needs at least 3 nodes");
    let inv = 1.0 / (dx * dx);
    let mut out = vec![0.0; n];
    out[0] = 2.0 * (w[1] - w[0]) * inv;
    for j in 1..n - 1 {
        out[j] = (w[j - 1] - 2.0 * w[j] + w[j + 1]) * inv;
    }
    out[n - 1] = 2.0 * (w[n - 2] - w[n - 1]) * inv;
    out
}

/// The tridiagonal matrix of `scale·I − d·Δ` for the mirrored-ghost stencil.
pub fn implicit_diffusion_matrix(n: usize, dx: f64, scale: f64, d: f64) -> Tridiagonal {
    let k = d / (dx * dx);
    let mut lower = vec![-k; n];
    let mut upper = vec![-k; n];
    lower[0] = 0.0;
    upper[n - 1] = 0.0;
    upper[0] = -2.0 * k;
    lower[n - 1] = -2.0 * k;
    Tridiagonal { lower, diag: vec![scale + 2.0 * k; n], upper }
}

/// u₁ = 0.349[1 + 0.3cos(x/2)], u₂ = 0, u₃ = −0.3[1 + 0.3cos(x/2)].
pub fn canonical_initial_conditions(grid: Grid1D) -> Field {
    Field::from_fn(grid, |x| {
        let shape = 1.0 + 0.3 * (0.5 * x).cos();
        State3([0.349 * shape, 0.0, -0.3 * shape])
    })
}

/// Pointwise reaction term R(t, u) of the reaction–diffusion system.
pub trait Reaction: Sync {
    fn eval(&self, t: f64, u: &Field, out: &mut [Vec<f64>; 3]);
}

/// The Newton–Leipnik nonlinearity applied node by node.
#[derive(Debug, Clone, Copy)]
pub struct NewtonLeipnikReaction(pub SystemParams);

impl Reaction for NewtonLeipnikReaction {
    fn eval(&self, _t: f64, u: &Field, out: &mut [Vec<f64>; 3]) {
        for j in 0..u.grid.n_nodes {
            let f = vector_field(&self.0, &u.at(j));
            for i in 0..3 {
                out[i][j] = f.0[i];
            }
        }
    }
}

impl<F> Reaction for F
where
    F: Fn(f64, &Field, &mut [Vec<f64>; 3]) + Sync,
{
    fn eval(&self, t: f64, u: &Field, out: &mut [Vec<f64>; 3]) {
        self(t, u, out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RDConfig {
    pub params: SystemParams,
    pub orders: [FractionalOrder; 3],
    pub grid: Grid1D,
    pub time: TimeGrid,
    /// Short-memory window in steps; `None` keeps the full history.
    pub memory_window: Option<usize>,
    pub snapshot_stride: usize,
}

impl RDConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.snapshot_stride == 0 {
            return Err(Error::Config("snapshot_stride must be at least 1".into()));
        }
        if self.memory_window == Some(0) {
            return Err(Error::Config("memory_window must be at least 1 when set".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub field: Field,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdTrajectory {
    pub snapshots: Vec<Snapshot>,
}

impl RdTrajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory holds the initial snapshot")
    }
}

/// Integrate the reaction–diffusion system from `ic`, recording every
/// `snapshot_stride`-th step (and always the first and last).
pub fn simulate_rd(cfg: &RDConfig, rhs: &dyn Reaction, ic: &Field) -> Result<RdTrajectory> {
    cfg.validate()?;
    if ic.grid != cfg.grid {
        return Err(Error::Config("initial condition is not on the configured grid".into()));
    }
    let mut stepper = L1Stepper::new(cfg, ic.clone())?;
    let mut reaction: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; cfg.grid.n_nodes]);
    let mut snapshots = vec![Snapshot { step: 0, t: cfg.time.t0, field: ic.clone() }];
    for k in 1..=cfg.time.n_steps {
        let t = cfg.time.time(k);
        rhs.eval(t, stepper.state(), &mut reaction);
        stepper.step(&reaction)?;
        if k % cfg.snapshot_stride == 0 || k == cfg.time.n_steps {
            snapshots.push(Snapshot { step: k, t, field: stepper.state().clone() });
        }
    }
    Ok(RdTrajectory { snapshots })
}

/// Time series of (u₁, u₂, u₃) at the node nearest `x_probe`.
pub fn probe(trajectory: &RdTrajectory, x_probe: f64) -> Result<Vec<(f64, State3)>> {
    let grid = trajectory.snapshots[0].field.grid;
    let j = grid.nearest(x_probe)?;
    Ok(trajectory.snapshots.iter().map(|s| (s.t, s.field.at(j))).collect())
}
