//! The Newton–Leipnik vector field
//!
//! f₁ = −a·u₁ + u₂ + 10·u₂u₃
//! f₂ = −u₁ − 0.4·u₂ + 5·u₁u₃
//! f₃ = α·u₃ − 5·u₁u₂
//!
//! with bifurcation parameters (a, α). The coefficients 10, 5 and 0.4 are
//! fixed constants of the model. The field is equivariant under
//! S(u₁, u₂, u₃) = (−u₁, −u₂, u₃), so non-trivial equilibria come in pairs.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bifurcation parameters and diffusivities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub a: f64,
    pub alpha: f64,
    pub d: [f64; 3],
}

impl SystemParams {
    pub const DEFAULT_DIFFUSIVITY: [f64; 3] = [0.1, 0.1, 0.1];

    pub fn new(a: f64, alpha: f64, d: [f64; 3]) -> Result<Self> {
        let p = Self { a, alpha, d };
        p.validate()?;
        Ok(p)
    }

    /// (a, α) with the default diffusivities.
    pub fn with_defaults(a: f64, alpha: f64) -> Result<Self> {
        Self::new(a, alpha, Self::DEFAULT_DIFFUSIVITY)
    }

    /// The chaotic reference regime (a, α) = (0.4, 0.175).
    pub fn reference() -> Self {
        Self { a: 0.4, alpha: 0.175, d: Self::DEFAULT_DIFFUSIVITY }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || !self.alpha.is_finite() {
            return Err(Error::Config(format!(
                "parameters must be finite (a = {}, alpha = {})",
                self.a, self.alpha
            )));
        }
        if self.d.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::Config(format!(
                "diffusivities must be finite and non-negative, got {:?}",
                self.d
            )));
        }
        Ok(())
    }
}

/// A point (u₁, u₂, u₃) of the phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State3(pub [f64; 3]);

impl State3 {
    pub const ZERO: State3 = State3([0.0; 3]);

    pub fn new(u1: f64, u2: f64, u3: f64) -> Self {
        Self([u1, u2, u3])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// The model symmetry (u₁, u₂, u₃) ↦ (−u₁, −u₂, u₃).
    pub fn mirrored(&self) -> Self {
        Self([-self.0[0], -self.0[1], self.0[2]])
    }

    pub fn distance(&self, other: &State3) -> f64 {
        (0..3).map(|i| (self.0[i] - other.0[i]).powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &State3) -> f64 {
        (0..3).map(|i| (self.0[i] - other.0[i]).abs()).fold(0.0, f64::max)
    }
}

impl From<[f64; 3]> for State3 {
    fn from(v: [f64; 3]) -> Self {
        Self(v)
    }
}

#[inline]
pub fn vector_field(p: &SystemParams, u: &State3) -> State3 {
    let [u1, u2, u3] = u.0;
    State3([
        -p.a * u1 + u2 + 10.0 * u2 * u3,
        -u1 - 0.4 * u2 + 5.0 * u1 * u3,
        p.alpha * u3 - 5.0 * u1 * u2,
    ])
}

pub fn jacobian(p: &SystemParams, u: &State3) -> Matrix3<f64> {
    let [u1, u2, u3] = u.0;
    Matrix3::new(
        -p.a, 1.0 + 10.0 * u3, 10.0 * u2,
        -1.0 + 5.0 * u3, -0.4, 5.0 * u1,
        -5.0 * u2, -5.0 * u1, p.alpha,
    )
}

/// div f = α − a − 0.4, independent of the state.
pub fn divergence(p: &SystemParams) -> f64 {
    p.alpha - p.a - 0.4
}

/// Phase-volume ratio V(t)/V(0) = exp(div f · t).
pub fn volume_factor(p: &SystemParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("volume_factor requires t >= 0, got {t}")));
    }
    Ok((divergence(p) * t).exp())
}

/// A root of the vector field together with its residual ‖f(point)‖₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub point: State3,
    pub residual: f64,
}

impl Equilibrium {
    pub const MAX_RESIDUAL: f64 = 1e-8;

    pub fn new(p: &SystemParams, point: State3) -> Result<Self> {
        let residual = vector_field(p, &point).norm();
        if residual <= Self::MAX_RESIDUAL {
            Ok(Self { point, residual })
        } else {
            Err(Error::Domain(format!(
                "{:?} is not an equilibrium (residual {residual:e})",
                point.0
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSet {
    /// Origin first, the rest ordered by (u₃, u₁).
    pub points: Vec<Equilibrium>,
    /// Set when fewer than five roots were recovered and at least one Newton
    /// seed failed to converge.
    pub partial: bool,
}

/// Equilibrium coordinates known at (a, α) = (0.4, 0.175); used only as
/// additional Newton seeds.
pub const REFERENCE_EQUILIBRIA: [[f64; 3]; 5] = [
    [0.0, 0.0, 0.0],
    [-0.031549, 0.12238, -0.11031],
    [0.031549, -0.12238, -0.11031],
    [0.23897, 0.030803, 0.21031],
    [-0.23897, -0.030803, 0.21031],
];

const DEDUP_DISTANCE: f64 = 1e-6;
const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 100;

fn newton_seeds() -> Vec<State3> {
    let levels = [-0.3, 0.0, 0.3];
    let mut seeds = Vec::with_capacity(32);
    for &x in &levels {
        for &y in &levels {
            for &z in &levels {
                seeds.push(State3([x, y, z]));
            }
        }
    }
    seeds.extend(REFERENCE_EQUILIBRIA.iter().map(|&c| State3(c)));
    seeds
}

/// Damped Newton iteration; returns the root if the residual falls below
/// the convergence tolerance.
fn damped_newton(p: &SystemParams, seed: State3) -> Option<State3> {
    let mut x = Vector3::from(seed.0);
    let eval = |x: &Vector3<f64>| Vector3::from(vector_field(p, &State3([x[0], x[1], x[2]])).0);
    let mut fx = eval(&x);
    for _ in 0..NEWTON_MAX_ITER {
        let norm = fx.norm();
        if norm <= NEWTON_TOL {
            return Some(State3([x[0], x[1], x[2]]));
        }
        let j = jacobian(p, &State3([x[0], x[1], x[2]]));
        let step = j.lu().solve(&(-fx))?;
        let mut lambda = 1.0;
        loop {
            let trial = x + step * lambda;
            let f_trial = eval(&trial);
            if f_trial.norm() < (1.0 - 1e-4 * lambda) * norm || lambda < 1e-10 {
                x = trial;
                fx = f_trial;
                break;
            }
            lambda *= 0.5;
        }
        if !x.iter().all(|v| v.is_finite()) || x.norm() > 1e6 {
            return None;
        }
    }
    (fx.norm() <= NEWTON_TOL).then(|| State3([x[0], x[1], x[2]]))
}

/// All roots reachable by damped Newton from a fixed seed lattice.
pub fn equilibria(p: &SystemParams) -> EquilibriumSet {
    let mut found: Vec<State3> = vec![State3::ZERO];
    let mut failures = 0usize;
    for seed in newton_seeds() {
        match damped_newton(p, seed) {
            Some(root) => {
                if found.iter().all(|q| q.distance(&root) >= DEDUP_DISTANCE) {
                    found.push(root);
                }
            }
            None => failures += 1,
        }
    }
    let origin_idx = found
        .iter()
        .position(|q| q.norm() < DEDUP_DISTANCE)
        .unwrap_or(0);
    found.swap(0, origin_idx);
    found[0] = State3::ZERO;
    found[1..].sort_by(|a, b| {
        a.0[2]
            .partial_cmp(&b.0[2])
            .unwrap()
            .then(a.0[0].partial_cmp(&b.0[0]).unwrap())
    });
    let points: Vec<Equilibrium> = found
        .into_iter()
        .filter_map(|q| Equilibrium::new(p, q).ok())
        .collect();
    let partial = points.len() < 5 && failures > 0;
    EquilibriumSet { points, partial }
}
