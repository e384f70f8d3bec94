//! Thomas algorithm for tridiagonal systems, factored once and reused.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// lower[i] multiplies x[i−1] in row i (lower[0] unused)
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// upper[i] multiplies x[i+1] in row i (upper[n−1] unused)
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.upper[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    pub fn factor(&self) -> Result<FactoredTridiagonal> {
        let n = self.len();
        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut pivot = self.diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = self.diag[i] - self.lower[i] * upper[i - 1];
            }
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::Domain(format!("singular tridiagonal pivot at row {i}")));
            }
            inv_pivot[i] = 1.0 / pivot;
            if i + 1 < n {
                upper[i] = self.upper[i] * inv_pivot[i];
            }
        }
        Ok(FactoredTridiagonal { lower: self.lower.clone(), upper, inv_pivot })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactoredTridiagonal {
    lower: Vec<f64>,
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl FactoredTridiagonal {
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper[i] * rhs[i + 1];
        }
    }
}
