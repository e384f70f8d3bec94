use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positive rational l/m in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rational {
    num: u64,
    den: u64,
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::Domain(format!("rational order {num}/{den} must be positive")));
        }
        let g = gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Best rational approximation with denominator ≤ `max_den`
    /// (continued-fraction convergents and semiconvergents).
    pub fn approximate(x: f64, max_den: u64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() || max_den == 0 {
            return Err(Error::Domain(format!("cannot rationalize {x}")));
        }
        let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
        let mut frac = x;
        loop {
            let a = frac.floor();
            if a > u32::MAX as f64 {
                break;
            }
            let a = a as u64;
            let q2 = a * q1 + q0;
            if q2 > max_den {
                // semiconvergent with the largest admissible coefficient
                let k = (max_den - q0) / q1;
                let (ps, qs) = (k * p1 + p0, k * q1 + q0);
                if closer(x, ps, qs, p1, q1) {
                    (p1, q1) = (ps, qs);
                }
                break;
            }
            let p2 = a * p1 + p0;
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
            let rem = frac - a as f64;
            if rem.abs() < 1e-12 || (p1 as f64 / q1 as f64 - x).abs() < 1e-15 {
                break;
            }
            frac = 1.0 / rem;
        }
        Self::new(p1.max(1), q1)
    }
}

fn closer(x: f64, ps: u64, qs: u64, p: u64, q: u64) -> bool {
    qs > 0 && ps > 0 && (ps as f64 / qs as f64 - x).abs() < (p as f64 / q as f64 - x).abs()
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}
