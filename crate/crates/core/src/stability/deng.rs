//! Incommensurate-order stability through the λ^{mδᵢ} characteristic equation.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;

use super::poly::{aberth_roots, Polynomial};
use super::rational::{lcm, Rational};
use super::{abs_arg, serialize_complex_list};
use crate::error::{Error, Result};

/// Largest admissible lcm of the order denominators.
pub const MAX_LCM: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DengReport {
    pub stable: bool,
    /// lcm of the order denominators
    pub m: u64,
    pub degree: usize,
    /// π/(2m)
    pub threshold: f64,
    /// Roots of the characteristic polynomial, ascending in |arg|.
    #[serde(serialize_with = "serialize_complex_list")]
    pub roots: Vec<Complex64>,
    /// max over roots of |p(root)| / (1+|root|)^degree
    pub max_scaled_residual: f64,
}

impl DengReport {
    pub fn min_abs_arg(&self) -> f64 {
        self.roots.first().map(|z| abs_arg(*z)).unwrap_or(std::f64::consts::PI)
    }
}

/// det(diag(λ^{n₁}, λ^{n₂}, λ^{n₃}) − J) as a polynomial in λ.
pub fn characteristic_polynomial(j: &Matrix3<f64>, powers: [usize; 3]) -> Polynomial {
    let entry = |r: usize, c: usize| {
        if r == c {
            Polynomial::monomial_minus(powers[r], j[(r, c)])
        } else {
            Polynomial::constant(-j[(r, c)])
        }
    };
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
        entry(r1, c1).mul(&entry(r2, c2)).add(&entry(r1, c2).mul(&entry(r2, c1)).scale(-1.0))
    };
    entry(0, 0)
        .mul(&minor(1, 2, 1, 2))
        .add(&entry(0, 1).mul(&minor(1, 2, 0, 2)).scale(-1.0))
        .add(&entry(0, 2).mul(&minor(1, 2, 0, 1)))
}

/// Stability of the equilibrium with Jacobian `j` for incommensurate
/// rational orders: every root λ must satisfy |arg λ| > π/(2m).
pub fn deng_stable(j: &Matrix3<f64>, orders: [Rational; 3]) -> Result<DengReport> {
    if let Some(bad) = orders.iter().find(|r| r.num() > r.den()) {
        return Err(Error::InvalidOrder(bad.to_f64()));
    }
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("Jacobian has non-finite entries".into()));
    }
    let m = orders.iter().fold(1u64, |acc, r| lcm(acc, r.den()));
    if m > MAX_LCM {
        return Err(Error::DegreeBound { degree: m as usize, bound: MAX_LCM as usize });
    }
    let powers = orders.map(|r| (m / r.den() * r.num()) as usize);
    let degree: usize = powers.iter().sum();
    let poly = characteristic_polynomial(j, powers);
    debug_assert_eq!(poly.degree(), degree);

    let mut roots = aberth_roots(&poly);
    roots.sort_by(|a, b| abs_arg(*a).partial_cmp(&abs_arg(*b)).unwrap());

    let mut max_scaled_residual = 0.0f64;
    for z in &roots {
        let scale = (degree as f64) * (1.0 + z.norm()).ln();
        let scaled = poly.eval(*z).norm().ln() - scale;
        max_scaled_residual = max_scaled_residual.max(scaled.exp());
    }
    if !(max_scaled_residual <= 1e-8) {
        return Err(Error::Domain(format!(
            "root refinement failed: scaled residual {max_scaled_residual:e}"
        )));
    }

    let threshold = FRAC_PI_2 / m as f64;
    let stable = roots.iter().all(|z| abs_arg(*z) > threshold);
    Ok(DengReport { stable, m, degree, threshold, roots, max_scaled_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{equilibria, jacobian, SystemParams, State3};
    use crate::stability::matignon_margin;
    use proptest::prelude::*;

    fn r(n: u64, d: u64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn polynomial_expansion_matches_direct_determinant() {
        let j = Matrix3::new(0.3, -1.2, 0.5, 2.0, -0.4, 0.1, -0.7, 0.9, 0.2);
        let poly = characteristic_polynomial(&j, [2, 3, 1]);
        assert_eq!(poly.degree(), 6);
        for &z in &[Complex64::new(0.3, 0.8), Complex64::new(-1.1, 0.2)] {
            let m = nalgebra::Matrix3::<Complex64>::new(
                z.powu(2) - j[(0, 0)], -Complex64::from(j[(0, 1)]), -Complex64::from(j[(0, 2)]),
                -Complex64::from(j[(1, 0)]), z.powu(3) - j[(1, 1)], -Complex64::from(j[(1, 2)]),
                -Complex64::from(j[(2, 0)]), -Complex64::from(j[(2, 1)]), z - j[(2, 2)],
            );
            assert!((poly.eval(z) - m.determinant()).norm() < 1e-12);
        }
    }

    #[test]
    fn reference_incommensurate_verdicts() {
        let p = SystemParams::reference();
        let set = equilibria(&p);
        let stable_orders = [r(17, 20), r(9, 10), r(4, 5)];
        let chaotic_orders = [r(1, 1), r(19, 20), r(39, 40)];
        for e in &set.points {
            let j = jacobian(&p, &e.point);
            let chaotic = deng_stable(&j, chaotic_orders).unwrap();
            assert!(!chaotic.stable, "{:?} stable at (1, .95, .975)", e.point);
            assert_eq!(chaotic.m, 40);
            assert_eq!(chaotic.degree, 117);
            if e.point != State3::ZERO {
                let report = deng_stable(&j, stable_orders).unwrap();
                assert!(report.stable, "{:?} unstable at (.85, .9, .8)", e.point);
                assert_eq!(report.m, 20);
                assert_eq!(report.degree, 51);
            }
        }
    }

    #[test]
    fn rejects_large_lcm_and_orders_above_one() {
        let j = -Matrix3::identity();
        assert!(matches!(
            deng_stable(&j, [r(1, 999), r(1, 998), r(1, 1)]),
            Err(Error::DegreeBound { .. })
        ));
        assert!(deng_stable(&j, [r(3, 2), r(1, 1), r(1, 1)]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn commensurate_case_agrees_with_matignon(
            entries in prop::array::uniform9(-2.0f64..2.0),
            l in 1u64..20,
            extra in 0u64..10,
        ) {
            let den = l + extra;
            let j = Matrix3::from_row_slice(&entries);
            let delta = r(l, den);
            let margin = matignon_margin(&j).margin;
            // skip matrices numerically on the stability boundary
            prop_assume!((margin - delta.to_f64()).abs() > 1e-6);
            let report = deng_stable(&j, [delta; 3]).unwrap();
            prop_assert_eq!(report.stable, delta.to_f64() < margin);
        }
    }
}
