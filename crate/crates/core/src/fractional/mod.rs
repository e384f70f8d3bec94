//! Caputo fractional-derivative numerics.
//!
//! The L1 discretization of the Caputo derivative on a uniform grid reads
//!
//! D^δ x(tₙ) ≈ 1/(dt^δ Γ(2−δ)) Σ_{k=0}^{n−1} bₖ (x_{n−k} − x_{n−k−1}),
//! bₖ = (k+1)^{1−δ} − k^{1−δ},
//!
//! with truncation error O(dt^{2−δ}) for smooth signals. It drives both
//! [`caputo_eval`] and the reaction–diffusion stepper in [`crate::pde`].

mod abm;
mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use abm::{abm_solve, OdeTrajectory};
pub use special::{gamma_fn, ln_gamma, mittag_leffler, MITTAG_LEFFLER_MAX_ABS_Z};

/// A Caputo order δ ∈ (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta <= 1.0 {
            Ok(Self(delta))
        } else {
            Err(Error::InvalidOrder(delta))
        }
    }

    pub const ONE: FractionalOrder = FractionalOrder(1.0);

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// dt^δ Γ(2−δ), the scale of the L1 difference quotient.
    pub fn l1_scale(self, dt: f64) -> f64 {
        dt.powf(self.0) * gamma_fn(2.0 - self.0).expect("2 - delta is positive")
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(order: FractionalOrder) -> f64 {
        order.0
    }
}

impl std::fmt::Display for FractionalOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Uniform time lattice t₀, t₀ + dt, …, t₀ + n_steps·dt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::Config(format!("time step must be positive and finite, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::Config("time grid needs at least one step".into()));
        }
        Ok(Self { t0, dt, n_steps })
    }

    /// Grid covering [t0, t_end] with step `dt`; the horizon is rounded to a
    /// whole number of steps.
    pub fn spanning(t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        let n = ((t_end - t0) / dt).round();
        if !(n >= 1.0) {
            return Err(Error::Config(format!(
                "horizon [{t0}, {t_end}] holds no step of size {dt}"
            )));
        }
        Self::new(t0, dt, n as usize)
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_steps)
    }
}

/// Uniformly sampled past of one scalar signal. Samples are append-only.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryBuffer {
    t0: f64,
    dt: f64,
    samples: Vec<f64>,
}

impl HistoryBuffer {
    pub fn new(t0: f64, dt: f64, initial: f64) -> Result<Self> {
        Self::from_samples(t0, dt, vec![initial])
    }

    pub fn from_samples(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("history step must be positive, got {dt}")));
        }
        if samples.is_empty() {
            return Err(Error::InsufficientHistory { needed: 1, have: 0 });
        }
        Ok(Self { t0, dt, samples })
    }

    pub fn push(&mut self, value: f64) {
        self.samples.push(value);
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Time of the most recent sample.
    pub fn last_time(&self) -> f64 {
        self.t0 + (self.samples.len() - 1) as f64 * self.dt
    }
}

/// L1 weights b₀ … b_{n−1}.
pub fn l1_weights(order: FractionalOrder, n: usize) -> Vec<f64> {
    let p = 1.0 - order.value();
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0f64; // k^{1−δ} at k = 0, taken as 0 even when δ = 1
    for k in 0..n {
        let next = ((k + 1) as f64).powf(p);
        out.push(next - prev);
        prev = next;
    }
    out
}

/// L1 estimate of the Caputo derivative at the last sample of `history`.
pub fn caputo_eval(history: &HistoryBuffer, order: FractionalOrder) -> Result<f64> {
    caputo_eval_windowed(history, order, None)
}

/// Like [`caputo_eval`], optionally keeping only the `window` most recent
/// increments of the convolution (short-memory truncation).
pub fn caputo_eval_windowed(
    history: &HistoryBuffer,
    order: FractionalOrder,
    window: Option<usize>,
) -> Result<f64> {
    let x = history.samples();
    if x.len() < 2 {
        return Err(Error::InsufficientHistory { needed: 2, have: x.len() });
    }
    let n = x.len() - 1;
    let terms = window.map_or(n, |w| w.min(n));
    let weights = l1_weights(order, terms);
    let sum: f64 = weights
        .iter()
        .enumerate()
        .map(|(k, b)| b * (x[n - k] - x[n - k - 1]))
        .sum();
    Ok(sum / order.l1_scale(history.dt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn order(d: f64) -> FractionalOrder {
        FractionalOrder::new(d).unwrap()
    }

    #[test]
    fn order_bounds() {
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(1.2).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
        assert_eq!(FractionalOrder::new(1.0).unwrap(), FractionalOrder::ONE);
        let parsed: std::result::Result<FractionalOrder, _> = serde_json::from_str("1.5");
        assert!(parsed.is_err());
    }

    #[test]
    fn weights_collapse_at_unit_order() {
        let w = l1_weights(FractionalOrder::ONE, 5);
        assert_eq!(w, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn weights_half_order() {
        let w = l1_weights(order(0.5), 3);
        let expected = [1.0, 2f64.sqrt() - 1.0, 3f64.sqrt() - 2f64.sqrt()];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((w[1] - 0.41421).abs() < 1e-5);
        assert!((w[2] - 0.31784).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn weights_positive_decreasing_and_telescoping(d in 0.001f64..0.999, n in 1usize..2000) {
            let w = l1_weights(order(d), n);
            prop_assert!(w.iter().all(|&b| b > 0.0));
            prop_assert!(w.windows(2).all(|p| p[1] < p[0]));
            let total: f64 = w.iter().sum();
            let expected = (n as f64).powf(1.0 - d);
            prop_assert!((total - expected).abs() <= 1e-12 * expected.max(1.0));
        }
    }

    fn sampled(dt: f64, n: usize, f: impl Fn(f64) -> f64) -> HistoryBuffer {
        HistoryBuffer::from_samples(0.0, dt, (0..=n).map(|k| f(k as f64 * dt)).collect()).unwrap()
    }

    #[test]
    fn constant_signal_has_zero_derivative() {
        let h = sampled(0.01, 100, |_| 3.5);
        assert_eq!(caputo_eval(&h, order(0.4)).unwrap(), 0.0);
    }

    #[test]
    fn linear_signal_matches_analytic() {
        // D^δ t = t^{1−δ}/Γ(2−δ); L1 is exact for piecewise-linear signals.
        let h = sampled(1e-3, 1000, |t| t);
        let d = caputo_eval(&h, order(0.5)).unwrap();
        let exact = 1.0 / gamma_fn(1.5).unwrap();
        assert!((exact - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-12);
        assert!((d - exact).abs() < 1e-10);
    }

    #[test]
    fn quadratic_signal_converges_at_l1_rate() {
        // D^δ t² = 2 t^{2−δ}/Γ(3−δ)
        let delta = 0.5;
        let exact = 2.0 / gamma_fn(3.0 - delta).unwrap();
        let err = |n: usize| {
            let h = sampled(1.0 / n as f64, n, |t| t * t);
            (caputo_eval(&h, order(delta)).unwrap() - exact).abs()
        };
        let (e1, e2) = (err(200), err(400));
        let rate = (e1 / e2).log2();
        assert!(rate > 2.0 - delta - 0.1, "observed rate {rate}");
    }

    #[test]
    fn unit_order_is_backward_difference() {
        let h = sampled(0.1, 10, |t| (3.0 * t).sin());
        let s = h.samples();
        let bd = (s[10] - s[9]) / 0.1;
        assert!((caputo_eval(&h, FractionalOrder::ONE).unwrap() - bd).abs() < 1e-14);
    }

    #[test]
    fn insufficient_history() {
        let h = HistoryBuffer::new(0.0, 0.1, 1.0).unwrap();
        assert!(matches!(
            caputo_eval(&h, order(0.5)),
            Err(Error::InsufficientHistory { needed: 2, have: 1 })
        ));
    }

    #[test]
    fn square_inequality_holds_for_smooth_signals() {
        // D^δ(x²) ≤ 2 x D^δ x, checked on sampled smooth signals.
        let dt = 1e-3;
        let n = 2000;
        let signals: Vec<Box<dyn Fn(f64) -> f64>> = vec![
            Box::new(|t| (2.0 * t).sin() + 0.3),
            Box::new(|t| (-t).exp()),
            Box::new(|t| 1.0 - t * t + 0.1 * t.powi(3)),
            Box::new(|t| (5.0 * t).cos() * (0.5 * t).exp()),
        ];
        for &d in &[0.2, 0.5, 0.8, 0.95] {
            for f in &signals {
                let x = sampled(dt, n, f);
                let x2 = sampled(dt, n, |t| f(t) * f(t));
                let lhs = caputo_eval(&x2, order(d)).unwrap();
                let rhs = 2.0 * x.samples()[n] * caputo_eval(&x, order(d)).unwrap();
                let tol = 10.0 * dt.powf(2.0 - d);
                assert!(lhs <= rhs + tol, "delta {d}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn memory_truncation_effect_grows_as_order_decreases() {
        let dt = 1e-2;
        let n = 1000;
        let h = sampled(dt, n, |t| (t).sin() + t);
        let mut previous = 0.0;
        for &d in &[0.9, 0.7, 0.5, 0.3, 0.1] {
            let full = caputo_eval(&h, order(d)).unwrap();
            let half = caputo_eval_windowed(&h, order(d), Some(n / 2)).unwrap();
            let gap = (full - half).abs();
            assert!(gap > 0.0 && gap.is_finite());
            assert!(gap > previous, "delta {d}: gap {gap} <= {previous}");
            previous = gap;
        }
        // A window longer than the history is the full evaluation.
        let full = caputo_eval(&h, order(0.5)).unwrap();
        assert_eq!(caputo_eval_windowed(&h, order(0.5), Some(5 * n)).unwrap(), full);
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 0.1, 0).is_err());
        let g = TimeGrid::spanning(0.0, 50.0, 0.005).unwrap();
        assert_eq!(g.n_steps, 10_000);
        assert!((g.t_end() - 50.0).abs() < 1e-9);
    }
}
