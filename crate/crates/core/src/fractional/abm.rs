//! Fractional Adams–Bashforth–Moulton predictor–corrector.
//!
//! For each component with order δ the solution satisfies the Volterra form
//! x(t) = x₀ + 1/Γ(δ) ∫₀ᵗ (t−s)^{δ−1} f(s, x(s)) ds. The predictor applies
//! the product rectangle rule to that integral, the corrector the product
//! trapezoidal rule with one evaluation at the predicted point (PECE).
//! Components may carry different orders.

use super::{gamma_fn, FractionalOrder, TimeGrid};
use crate::error::{Error, Result};

/// States on every node of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl OdeTrajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// One component as a time series.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

struct Kernel {
    predictor: Vec<f64>,
    corrector: Vec<f64>,
    corrector_scale: f64,
    delta: f64,
}

impl Kernel {
    fn new(order: FractionalOrder, dt: f64, n_steps: usize) -> Self {
        let delta = order.value();
        let hd = dt.powf(delta);
        let p_scale = hd / gamma_fn(delta + 1.0).expect("positive argument");
        let predictor = (0..n_steps)
            .map(|k| p_scale * (((k + 1) as f64).powf(delta) - (k as f64).powf(delta)))
            .collect();
        let e = delta + 1.0;
        let corrector = (0..n_steps)
            .map(|k| {
                let k = k as f64;
                (k + 2.0).powf(e) + k.powf(e) - 2.0 * (k + 1.0).powf(e)
            })
            .collect();
        Self {
            predictor,
            corrector,
            corrector_scale: hd / gamma_fn(delta + 2.0).expect("positive argument"),
            delta,
        }
    }

    /// Weight of f₀ in the corrector for step n → n+1.
    fn corrector_start(&self, n: usize) -> f64 {
        let n = n as f64;
        n.powf(self.delta + 1.0) - (n - self.delta) * (n + 1.0).powf(self.delta)
    }
}

/// Integrate D^{δᵢ} xᵢ = fᵢ(t, x) over `grid` from `x0`.
///
/// `rhs(t, x, out)` writes f(t, x) into `out`. A non-finite right-hand side
/// aborts with [`Error::Divergence`] carrying the failing step.
pub fn abm_solve<F>(
    rhs: F,
    x0: &[f64],
    orders: &[FractionalOrder],
    grid: &TimeGrid,
) -> Result<OdeTrajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let dim = x0.len();
    if orders.len() != dim {
        return Err(Error::Config(format!(
            "{} orders given for a {dim}-dimensional state",
            orders.len()
        )));
    }
    let n_steps = grid.n_steps;
    let dt = grid.dt;

    // Components sharing an order share a kernel.
    let mut kernels: Vec<(f64, Kernel)> = Vec::new();
    let kernel_of: Vec<usize> = orders
        .iter()
        .map(|o| {
            if let Some(pos) = kernels.iter().position(|(d, _)| *d == o.value()) {
                pos
            } else {
                kernels.push((o.value(), Kernel::new(*o, dt, n_steps)));
                kernels.len() - 1
            }
        })
        .collect();

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    // f history, one contiguous series per component.
    let mut f_hist: Vec<Vec<f64>> = (0..dim).map(|_| Vec::with_capacity(n_steps + 1)).collect();

    let mut f = vec![0.0; dim];
    rhs(grid.t0, x0, &mut f);
    check_finite(&f, 0, grid.t0)?;
    for (h, v) in f_hist.iter_mut().zip(&f) {
        h.push(*v);
    }
    times.push(grid.t0);
    states.push(x0.to_vec());

    let mut predicted = vec![0.0; dim];
    let mut f_pred = vec![0.0; dim];
    let mut next = vec![0.0; dim];
    for n in 0..n_steps {
        let t_next = grid.time(n + 1);
        for i in 0..dim {
            let k = &kernels[kernel_of[i]].1;
            let hist = &f_hist[i][..=n];
            let sum: f64 = hist
                .iter()
                .zip(k.predictor[..=n].iter().rev())
                .map(|(fj, w)| fj * w)
                .sum();
            predicted[i] = x0[i] + sum;
        }
        rhs(t_next, &predicted, &mut f_pred);
        check_finite(&f_pred, n + 1, grid.time(n))?;
        for i in 0..dim {
            let k = &kernels[kernel_of[i]].1;
            let hist = &f_hist[i];
            // j = 1..=n pairs with corrector[n − j]
            let tail: f64 = hist[1..=n]
                .iter()
                .zip(k.corrector[..n].iter().rev())
                .map(|(fj, w)| fj * w)
                .sum();
            next[i] = x0[i]
                + k.corrector_scale * (f_pred[i] + k.corrector_start(n) * hist[0] + tail);
        }
        rhs(t_next, &next, &mut f);
        check_finite(&f, n + 1, grid.time(n))?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: n + 1, last_valid_time: grid.time(n) });
        }
        for (h, v) in f_hist.iter_mut().zip(&f) {
            h.push(*v);
        }
        times.push(t_next);
        states.push(next.clone());
    }
    Ok(OdeTrajectory { times, states })
}

fn check_finite(values: &[f64], step: usize, last_valid_time: f64) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { step, last_valid_time })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::mittag_leffler;

    fn order(d: f64) -> FractionalOrder {
        FractionalOrder::new(d).unwrap()
    }

    #[test]
    fn zero_field_keeps_initial_state() {
        let grid = TimeGrid::new(0.0, 0.01, 200).unwrap();
        let x0 = [0.3, -1.2, 4.0];
        let traj = abm_solve(|_, _, out| out.fill(0.0), &x0, &[order(0.7); 3], &grid).unwrap();
        assert_eq!(traj.states.len(), 201);
        assert!(traj.states.iter().all(|s| s.as_slice() == x0));
    }

    #[test]
    fn relaxation_matches_mittag_leffler() {
        // D^0.8 x = −x, x(0) = 1  ⇒  x(t) = E_0.8(−t^0.8)
        let grid = TimeGrid::new(0.0, 1e-3, 1000).unwrap();
        let traj = abm_solve(|_, x, out| out[0] = -x[0], &[1.0], &[order(0.8)], &grid).unwrap();
        let exact = mittag_leffler(0.8, -1.0).unwrap();
        assert!((traj.last()[0] - exact).abs() < 1e-4);
    }

    #[test]
    fn divergence_is_reported_with_step() {
        let grid = TimeGrid::new(0.0, 0.1, 100).unwrap();
        let err = abm_solve(
            |t, _, out| out[0] = if t > 0.45 { f64::NAN } else { 1.0 },
            &[0.0],
            &[order(0.9)],
            &grid,
        )
        .unwrap_err();
        match err {
            Error::Divergence { step, .. } => assert_eq!(step, 5),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn order_count_must_match_dimension() {
        let grid = TimeGrid::new(0.0, 0.1, 10).unwrap();
        assert!(abm_solve(|_, _, _| {}, &[0.0, 1.0], &[order(0.5)], &grid).is_err());
    }
}
