//! Neumann-mode analysis of the linear synchronization error system.
//!
//! With the cancelling controller the error obeys
//! D^δe₁ − d₁Δe₁ = −0.4e₁ + e₂, D^δe₂ − d₂Δe₂ = −e₁ − 0.4e₂,
//! D^δe₃ − d₃Δe₃ = −0.4e₃. Projected on the Laplacian eigenfunction with
//! eigenvalue λᵢ, the (e₁, e₂) block has eigenvalues ξ₁,₂ solving
//! ξ² + ((d₁+d₂)λᵢ + 0.8)ξ + (d₁d₂λᵢ² + 0.4(d₁+d₂)λᵢ + 1.16) = 0 with
//! discriminant (d₁−d₂)²λᵢ² − 4, and ξ₃ = −d₃λᵢ − 0.4.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::abs_arg;
use crate::error::{Error, Result};
use crate::fractional::FractionalOrder;
use crate::model::SystemParams;

/// λᵢ = (iπ/L)², i = 0…n_max, for −Δ with Neumann conditions on [0, L].
pub fn neumann_spectrum(length: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::Domain(format!("domain length must be positive, got {length}")));
    }
    if n_max < 1 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    Ok((0..=n_max).map(|i| (i as f64 * PI / length).powi(2)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeEigen {
    pub lambda_i: f64,
    /// ξ₁ (Im ≥ 0 on the complex branch), ξ₂, and the real ξ₃, as (re, im).
    #[serde(serialize_with = "serialize_triple")]
    pub xi: [Complex64; 3],
    pub discriminant: f64,
}

impl ModeEigen {
    pub fn is_complex_branch(&self) -> bool {
        self.discriminant < 0.0
    }
}

fn serialize_triple<S: serde::Serializer>(
    v: &[Complex64; 3],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    super::serialize_complex_list(v, s)
}

pub fn sync_mode_eigen(p: &SystemParams, lambda_i: f64) -> ModeEigen {
    let [d1, d2, d3] = p.d;
    let trace = -(d1 + d2) * lambda_i - 0.8;
    let discriminant = (d1 - d2).powi(2) * lambda_i * lambda_i - 4.0;
    let (xi1, xi2) = if discriminant < 0.0 {
        let im = 0.5 * (-discriminant).sqrt();
        (Complex64::new(0.5 * trace, im), Complex64::new(0.5 * trace, -im))
    } else {
        // Real roots of ξ² − trace·ξ + det; the larger-magnitude one first
        // avoids cancellation, the other follows from ξ₁ξ₂ = det.
        let det = lambda_i * lambda_i * d1 * d2 + 0.4 * (d1 + d2) * lambda_i + 1.16;
        let big = 0.5 * (trace - discriminant.sqrt());
        (Complex64::new(big, 0.0), Complex64::new(det / big, 0.0))
    };
    let xi3 = Complex64::new(-d3 * lambda_i - 0.4, 0.0);
    ModeEigen { lambda_i, xi: [xi1, xi2, xi3], discriminant }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeCheck {
    pub index: usize,
    pub eigen: ModeEigen,
    /// |arg ξ₁| (= |arg ξ₂| on the complex branch)
    pub abs_arg: f64,
    /// Whether the mode is subject to the argument condition.
    pub checked: bool,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncConditionReport {
    pub satisfied: bool,
    pub delta: f64,
    /// δπ/2
    pub threshold: f64,
    /// Modes in index order.
    pub modes: Vec<ModeCheck>,
    /// Index of the checked mode with the smallest |arg ξ₁,₂|.
    pub worst_mode: Option<usize>,
    /// Complex-branch modes may exist beyond `n_max`.
    pub truncated: bool,
    pub note: String,
}

/// Argument conditions on every complex-branch Neumann mode of [0, L].
///
/// For d₁ ≠ d₂ the complex branch is λᵢ < 2/|d₁−d₂|; for d₁ = d₂ the
/// discriminant is −4 for every mode and all modes up to `n_max` are
/// checked.
pub fn sync_condition_check(
    p: &SystemParams,
    delta: FractionalOrder,
    length: f64,
    n_max: usize,
) -> Result<SyncConditionReport> {
    let spectrum = neumann_spectrum(length, n_max)?;
    let threshold = delta.value() * FRAC_PI_2;
    let gap = (p.d[0] - p.d[1]).abs();
    let equal = gap == 0.0;
    let cutoff = if equal { f64::INFINITY } else { 2.0 / gap };

    let modes: Vec<ModeCheck> = spectrum
        .par_iter()
        .enumerate()
        .map(|(index, &lambda)| {
            let eigen = sync_mode_eigen(p, lambda);
            let checked = lambda < cutoff;
            let arg = abs_arg(eigen.xi[0]).min(abs_arg(eigen.xi[1]));
            ModeCheck { index, eigen, abs_arg: arg, checked, satisfied: !checked || arg > threshold }
        })
        .collect();

    let worst_mode = modes
        .iter()
        .filter(|m| m.checked)
        .min_by(|a, b| a.abs_arg.partial_cmp(&b.abs_arg).unwrap())
        .map(|m| m.index);
    let truncated = !equal && spectrum[n_max] < cutoff;
    let note = if equal {
        format!("d1 = d2: discriminant is -4 for every mode; all {} modes checked on the complex branch", n_max + 1)
    } else {
        format!("complex branch is lambda < {cutoff:.6}")
    };
    Ok(SyncConditionReport {
        satisfied: modes.iter().all(|m| m.satisfied),
        delta: delta.value(),
        threshold,
        modes,
        worst_mode,
        truncated,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: [f64; 3]) -> SystemParams {
        SystemParams::new(0.4, 0.175, d).unwrap()
    }

    #[test]
    fn spectrum_basics() {
        let s = neumann_spectrum(20.0, 5).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 0.024674).abs() < 1e-6);
        assert!(s.windows(2).all(|w| w[1] >= w[0]));
        assert!(neumann_spectrum(0.0, 3).is_err());
        assert!(neumann_spectrum(1.0, 0).is_err());
    }

    #[test]
    fn diffusion_free_mode_is_error_jacobian_spectrum() {
        let m = sync_mode_eigen(&params([0.3, 0.1, 0.2]), 0.0);
        assert_eq!(m.xi[0], Complex64::new(-0.4, 1.0));
        assert_eq!(m.xi[1], Complex64::new(-0.4, -1.0));
        assert_eq!(m.xi[2], Complex64::new(-0.4, 0.0));
    }

    #[test]
    fn equal_diffusivities_shift_real_part() {
        let d = 0.25;
        for &lambda in &[0.0, 0.5, 3.0, 100.0] {
            let m = sync_mode_eigen(&params([d, d, d]), lambda);
            assert_eq!(m.discriminant, -4.0);
            assert!((m.xi[0] - Complex64::new(-d * lambda - 0.4, 1.0)).norm() < 1e-14);
            assert!((m.xi[1] - Complex64::new(-d * lambda - 0.4, -1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn real_branch_roots_are_negative_and_solve_the_quadratic() {
        let p = params([2.0, 0.1, 0.5]);
        for &lambda in &[1.1, 2.0, 10.0, 1e3] {
            let m = sync_mode_eigen(&p, lambda);
            assert!(!m.is_complex_branch());
            let [d1, d2, _] = p.d;
            let b = (d1 + d2) * lambda + 0.8;
            let c = lambda * lambda * d1 * d2 + 0.4 * (d1 + d2) * lambda + 1.16;
            for xi in &m.xi[..2] {
                assert_eq!(xi.im, 0.0);
                assert!(xi.re < 0.0);
                let res = xi.re * xi.re + b * xi.re + c;
                assert!(res.abs() <= 1e-10 * c.max(1.0), "residual {res}");
            }
        }
    }

    #[test]
    fn trace_and_sign_properties() {
        for &d in &[[0.0, 0.0, 0.0], [0.1, 0.1, 0.1], [1.0, 0.2, 0.0], [0.05, 3.0, 2.0]] {
            let p = params(d);
            for k in 0..200 {
                let lambda = k as f64 * 0.37;
                let m = sync_mode_eigen(&p, lambda);
                assert!(m.xi[2].re < 0.0 && m.xi[2].im == 0.0);
                let sum = m.xi[0].re + m.xi[1].re;
                let expected = -(d[0] + d[1]) * lambda - 0.8;
                assert!((sum - expected).abs() <= 1e-12 * expected.abs().max(1.0));
                assert!(sum < 0.0);
            }
        }
    }

    #[test]
    fn equal_diffusivities_always_satisfied() {
        let p = params([0.1, 0.1, 0.1]);
        for &delta in &[0.1, 0.5, 0.9, 0.99, 1.0] {
            let r = sync_condition_check(&p, FractionalOrder::new(delta).unwrap(), 20.0, 200).unwrap();
            assert!(r.satisfied);
            assert!(!r.truncated);
            assert_eq!(r.worst_mode, Some(0));
            assert!((r.modes[0].abs_arg - 1.9513).abs() < 1e-4);
            assert!(r.modes.iter().all(|m| m.checked));
        }
    }

    #[test]
    fn unequal_diffusivities_check_only_complex_branch() {
        let p = params([1.0, 0.2, 0.1]);
        let r = sync_condition_check(&p, FractionalOrder::new(0.95).unwrap(), 20.0, 200).unwrap();
        let cutoff = 2.0 / 0.8;
        for m in &r.modes {
            assert_eq!(m.checked, m.eigen.lambda_i < cutoff);
            assert_eq!(m.checked, m.eigen.is_complex_branch());
        }
        assert!(r.satisfied);
        let short = sync_condition_check(&p, FractionalOrder::new(0.95).unwrap(), 20.0, 3).unwrap();
        assert!(short.truncated);
    }
}
