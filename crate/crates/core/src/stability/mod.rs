//! Eigenvalue-argument stability tests for Caputo systems.
//!
//! - [`matignon_margin`]: commensurate order δ; stable iff every Jacobian
//!   eigenvalue satisfies |arg λ| > δπ/2.
//! - [`deng_stable`]: incommensurate rational orders via the roots of
//!   det(diag(λ^{mδ₁}, λ^{mδ₂}, λ^{mδ₃}) − J) = 0.
//! - [`modes`]: Neumann spectrum of the 1-D Laplacian and the per-mode
//!   conditions for the synchronization error system.
//!
//! Arguments are taken in (−π, π] and all conditions use strict inequality.

mod deng;
mod modes;
mod poly;
mod rational;

use std::f64::consts::FRAC_PI_2;

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;

pub use deng::{deng_stable, DengReport, MAX_LCM};
pub use modes::{
    neumann_spectrum, sync_condition_check, sync_mode_eigen, ModeCheck, ModeEigen,
    SyncConditionReport,
};
pub use poly::{aberth_roots, Polynomial};
pub use rational::Rational;

/// |arg z| in [0, π], with arg 0 := 0.
pub fn abs_arg(z: Complex64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        0.0
    } else {
        z.im.atan2(z.re).abs()
    }
}

/// Eigenvalues of a real 3×3 matrix.
pub fn eigenvalues(j: &Matrix3<f64>) -> Vec<Complex64> {
    j.complex_eigenvalues().iter().copied().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    #[serde(serialize_with = "serialize_complex_list")]
    pub eigenvalues: Vec<Complex64>,
    /// min |arg λᵢ|
    pub worst_arg: f64,
    /// Critical commensurate order δ* = (2/π)·worst_arg ∈ [0, 2].
    pub margin: f64,
    /// Verdicts recorded through [`StabilityReport::query`].
    pub stable_at: Vec<(f64, bool)>,
}

impl StabilityReport {
    pub fn is_stable(&self, delta: f64) -> bool {
        delta < self.margin
    }

    pub fn query(&mut self, delta: f64) -> bool {
        let stable = self.is_stable(delta);
        self.stable_at.push((delta, stable));
        stable
    }
}

pub fn matignon_margin(j: &Matrix3<f64>) -> StabilityReport {
    let eigenvalues = eigenvalues(j);
    let worst_arg = eigenvalues
        .iter()
        .map(|z| abs_arg(*z))
        .fold(f64::INFINITY, f64::min);
    StabilityReport {
        eigenvalues,
        worst_arg,
        margin: worst_arg / FRAC_PI_2,
        stable_at: Vec::new(),
    }
}

pub(crate) fn serialize_complex_list<S: serde::Serializer>(
    v: &[Complex64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}
