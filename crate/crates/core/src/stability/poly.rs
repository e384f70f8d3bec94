//! Real-coefficient polynomials and simultaneous root finding (Aberth–Ehrlich).

use num_complex::Complex64;

/// Coefficients in ascending powers: c₀ + c₁x + … + cₙxⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        Self(vec![c])
    }

    /// xⁿ − c
    pub fn monomial_minus(n: usize, c: f64) -> Self {
        let mut v = vec![0.0; n + 1];
        v[n] += 1.0;
        v[0] -= c;
        Self(v)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|c| *c != 0.0).unwrap_or(0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&0.0) + other.0.get(i).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// p(z) and p'(z) by Horner.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.0.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    fn trimmed(&self) -> Self {
        Self(self.0[..=self.degree()].to_vec())
    }
}

/// All complex roots of `p` (with multiplicity).
///
/// Exact zero roots are split off first; the rest are refined together by
/// the Aberth–Ehrlich iteration from points on a circle of the geometric
/// mean root radius.
pub fn aberth_roots(p: &Polynomial) -> Vec<Complex64> {
    let p = p.trimmed();
    let n = p.degree();
    let zeros = p.0.iter().take_while(|c| **c == 0.0).count().min(n);
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let q = Polynomial(p.0[zeros..].to_vec());
    let m = q.degree();
    if m == 0 {
        return roots;
    }
    if m == 1 {
        roots.push(Complex64::new(-q.0[0] / q.0[1], 0.0));
        return roots;
    }
    let radius = (q.0[0].abs() / q.0[m].abs()).powf(1.0 / m as f64).max(1e-8);
    let mut z: Vec<Complex64> = (0..m)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; m];
    for _ in 0..2000 {
        let mut all_done = true;
        for k in 0..m {
            if done[k] {
                continue;
            }
            let (pz, dpz) = q.eval_with_derivative(z[k]);
            if pz.norm() == 0.0 {
                done[k] = true;
                continue;
            }
            let ratio = pz / dpz;
            let repulsion: Complex64 = (0..m)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !w.re.is_finite() || !w.im.is_finite() {
                continue;
            }
            z[k] -= w;
            if w.norm() <= 1e-15 * z[k].norm().max(1e-300) {
                done[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    roots.extend(z);
    roots
}
