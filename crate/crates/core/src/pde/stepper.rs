use rayon::prelude::*;

use super::{implicit_diffusion_matrix, FactoredTridiagonal, Field, RDConfig, DIVERGENCE_BOUND};
use crate::error::{Error, Result};
use crate::fractional::{l1_weights, FractionalOrder};

/// History and factored implicit operator of one component.
#[derive(Debug, Clone)]
struct Component {
    order: FractionalOrder,
    inv_tau: f64,
    weights: Vec<f64>,
    /// Increments uᵐ − uᵐ⁻¹, one row of `n_nodes` per step, oldest first.
    increments: Vec<f64>,
    /// Number of leading increment rows already discarded (short memory).
    dropped_rows: usize,
    solver: FactoredTridiagonal,
    rhs: Vec<f64>,
}

impl Component {
    fn ensure_weights(&mut self, len: usize) {
        if self.weights.len() < len {
            self.weights = l1_weights(self.order, len.max(2 * self.weights.len()));
        }
    }

    /// Advance one component from `u` (the value at step k − 1) to step k.
    fn advance(&mut self, k: usize, u: &mut [f64], reaction: &[f64], window: Option<usize>) {
        let n = u.len();
        let terms = window.map_or(k, |w| w.min(k));
        self.ensure_weights(terms);
        let acc = &mut self.rhs;
        acc.iter_mut().for_each(|v| *v = 0.0);
        for j in 1..terms {
            let b = self.weights[j];
            // row of the increment u^{k−j} − u^{k−j−1}
            let r = k - j - 1 - self.dropped_rows;
            let row = &self.increments[r * n..(r + 1) * n];
            for (a, d) in acc.iter_mut().zip(row) {
                *a += b * d;
            }
        }
        for ((a, prev), r) in acc.iter_mut().zip(u.iter()).zip(reaction) {
            *a = self.inv_tau * (prev - *a) + r;
        }
        self.solver.solve_in_place(acc);
        for (prev, new) in u.iter_mut().zip(acc.iter()) {
            self.increments.push(new - *prev);
            *prev = *new;
        }
        if let Some(w) = window {
            // keep at least the w − 1 rows the next step reads
            let stored = self.increments.len() / n;
            if stored > 2 * w {
                let drop = stored - w;
                self.increments.drain(..drop * n);
                self.dropped_rows += drop;
            }
        }
    }
}

/// Single-field L1 / IMEX stepper. The caller supplies the reaction term
/// evaluated at the lagged state, which lets coupled systems (master and
/// slave) advance in lock-step.
#[derive(Debug, Clone)]
pub struct L1Stepper {
    components: Vec<Component>,
    state: Field,
    step: usize,
    t0: f64,
    dt: f64,
    window: Option<usize>,
}

impl L1Stepper {
    pub fn new(cfg: &RDConfig, ic: Field) -> Result<Self> {
        cfg.validate()?;
        if ic.grid != cfg.grid {
            return Err(Error::Config("initial condition is not on the configured grid".into()));
        }
        let n = cfg.grid.n_nodes;
        let dt = cfg.time.dt;
        let capacity = match cfg.memory_window {
            Some(w) => 2 * w + 1,
            None => cfg.time.n_steps,
        };
        let components = (0..3)
            .map(|i| {
                let order = cfg.orders[i];
                let inv_tau = 1.0 / order.l1_scale(dt);
                let matrix = implicit_diffusion_matrix(n, cfg.grid.dx(), inv_tau, cfg.params.d[i]);
                Ok(Component {
                    order,
                    inv_tau,
                    weights: l1_weights(order, cfg.time.n_steps + 1),
                    increments: Vec::with_capacity(capacity.saturating_mul(n)),
                    dropped_rows: 0,
                    solver: matrix.factor()?,
                    rhs: vec![0.0; n],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            components,
            state: ic,
            step: 0,
            t0: cfg.time.t0,
            dt,
            window: cfg.memory_window,
        })
    }

    pub fn state(&self) -> &Field {
        &self.state
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.t0 + self.step as f64 * self.dt
    }

    /// Advance to the next time level given R(tₖ, uᵏ⁻¹).
    pub fn step(&mut self, reaction: &[Vec<f64>; 3]) -> Result<()> {
        let k = self.step + 1;
        let last_valid_time = self.time();
        if reaction.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: k, last_valid_time });
        }
        let window = self.window;
        self.components
            .par_iter_mut()
            .zip(self.state.u.par_iter_mut())
            .zip(reaction.par_iter())
            .for_each(|((c, u), r)| c.advance(k, u, r, window));
        self.step = k;
        let bad = self
            .state
            .u
            .iter()
            .flatten()
            .any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND);
        if bad {
            return Err(Error::Divergence { step: k, last_valid_time });
        }
        Ok(())
    }
}
