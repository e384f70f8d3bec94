use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::csv::{self, fmt_f64, CsvWriter};
use super::spec::{ExperimentKind, ExperimentSpec};
use crate::error::{Error, Result};
use crate::fractional::{abm_solve, FractionalOrder};
use crate::model::{equilibria, jacobian, vector_field, State3};
use crate::pde::{canonical_initial_conditions, probe, simulate_rd, NewtonLeipnikReaction};
use crate::stability::{deng_stable, matignon_margin, sync_condition_check, Rational};
use crate::sync::{run_sync, SyncConfig};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Defaults and derived quantities the run actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedSettings {
    pub dt: f64,
    pub n_steps: usize,
    pub dx: f64,
    pub n_nodes: usize,
    pub d: [f64; 3],
    pub memory: String,
    pub master_ic_rule: String,
    pub slave_ic_rule: String,
    pub controller_variant: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rationalization {
    pub requested: [f64; 3],
    pub rational: [String; 3],
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec: ExperimentSpec,
    pub toolkit_version: String,
    pub wall_clock_seconds: f64,
    pub derived: DerivedSettings,
    #[serde(default)]
    pub rationalized_orders: Vec<Rationalization>,
    #[serde(default)]
    pub labels: Vec<String>,
    pub files: Vec<String>,
    pub status: String,
    #[serde(default)]
    pub diagnostic: Option<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Default)]
struct Outputs {
    files: Vec<String>,
    rationalized: Vec<Rationalization>,
    labels: Vec<String>,
}

impl Outputs {
    fn create(&mut self, dir: &Path, name: &str, header: &[&str]) -> Result<CsvWriter> {
        self.files.push(name.to_string());
        CsvWriter::create(&dir.join(name), header)
    }
}

/// Execute `spec`, writing its tables and one `manifest.json` into `out_dir`.
///
/// The manifest is written even when the solver diverges; the error is then
/// returned with the last valid time.
pub fn run(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunManifest> {
    spec.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let started = Instant::now();
    let mut outputs = Outputs::default();
    let result = match spec.kind {
        ExperimentKind::Equilibria => run_equilibria(spec, out_dir, &mut outputs),
        ExperimentKind::Stability => run_stability(spec, out_dir, &mut outputs),
        ExperimentKind::Ode => run_ode(spec, out_dir, &mut outputs),
        ExperimentKind::Pde => run_pde(spec, out_dir, &mut outputs),
        ExperimentKind::Sync => run_synchronization(spec, out_dir, &mut outputs),
    };
    let manifest = RunManifest {
        spec: spec.clone(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        derived: derived_settings(spec)?,
        rationalized_orders: outputs.rationalized,
        labels: outputs.labels,
        files: outputs.files,
        status: if result.is_ok() { "ok" } else { "failed" }.to_string(),
        diagnostic: result.as_ref().err().map(|e| e.to_string()),
    };
    std::fs::write(
        out_dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    result.map(|_| manifest)
}

/// Re-run the spec echoed in a manifest.
pub fn replay(manifest_path: &Path, out_dir: &Path) -> Result<RunManifest> {
    let manifest = RunManifest::load(manifest_path)?;
    run(&manifest.spec, out_dir)
}

fn derived_settings(spec: &ExperimentSpec) -> Result<DerivedSettings> {
    let time = spec.time_grid()?;
    let grid = spec.grid()?;
    Ok(DerivedSettings {
        dt: time.dt,
        n_steps: time.n_steps,
        dx: grid.dx(),
        n_nodes: grid.n_nodes,
        d: spec.d,
        memory: match spec.memory_window {
            Some(w) => format!("short memory, last {w} steps"),
            None => "full history".into(),
        },
        master_ic_rule: match spec.kind {
            ExperimentKind::Ode => format!("u(0) = {:?}", spec.ode_ic),
            _ => "u1 = 0.349(1 + 0.3 cos(x/2)), u2 = 0, u3 = -0.3(1 + 0.3 cos(x/2))".into(),
        },
        slave_ic_rule: format!("v(x, 0) = {} * u(x, 0) componentwise", spec.slave_ic_scale),
        controller_variant: match (spec.controller, spec.controller_variant) {
            (false, _) => "off".into(),
            (true, v) => serde_json::to_value(v)?.as_str().unwrap_or_default().to_string(),
        },
    })
}

fn run_equilibria(spec: &ExperimentSpec, dir: &Path, out: &mut Outputs) -> Result<()> {
    let set = equilibria(&spec.params());
    if set.partial {
        out.labels.push("partial".into());
    }
    let mut w = out.create(dir, "equilibria.csv", csv::EQUILIBRIA_HEADER)?;
    for (i, e) in set.points.iter().enumerate() {
        let [u1, u2, u3] = e.point.0;
        w.numbers(&[i as f64, u1, u2, u3, e.residual])?;
    }
    w.finish()
}

fn is_commensurate(o: &[f64; 3]) -> bool {
    o[0] == o[1] && o[1] == o[2]
}

fn run_stability(spec: &ExperimentSpec, dir: &Path, out: &mut Outputs) -> Result<()> {
    let p = spec.params();
    let set = equilibria(&p);
    if set.partial {
        out.labels.push("partial".into());
    }
    let jacobians: Vec<(State3, Matrix3<f64>)> =
        set.points.iter().map(|e| (e.point, jacobian(&p, &e.point))).collect();

    let mut w = out.create(dir, "stability.csv", csv::STABILITY_HEADER)?;
    for (i, (u, j)) in jacobians.iter().enumerate() {
        let r = matignon_margin(j);
        w.numbers(&[i as f64, u.0[0], u.0[1], u.0[2], r.worst_arg, r.margin])?;
    }
    w.finish()?;

    let mut w = out.create(dir, "verdicts.csv", csv::VERDICT_HEADER)?;
    for orders in &spec.stability_orders {
        let rational = if is_commensurate(orders) {
            None
        } else {
            let [r0, r1, r2] = orders.map(|o| Rational::approximate(o, spec.max_denominator));
            let r = [r0?, r1?, r2?];
            out.rationalized.push(Rationalization {
                requested: *orders,
                rational: r.map(|q| q.to_string()),
                max_abs_error: (0..3)
                    .map(|i| (r[i].to_f64() - orders[i]).abs())
                    .fold(0.0, f64::max),
            });
            Some(r)
        };
        for (i, (_, j)) in jacobians.iter().enumerate() {
            let (method, rational_text, stable, min_arg, threshold) = match rational {
                None => {
                    let r = matignon_margin(j);
                    let delta = orders[0];
                    ("matignon", String::new(), r.is_stable(delta), r.worst_arg, delta * std::f64::consts::FRAC_PI_2)
                }
                Some(r) => {
                    let report = deng_stable(j, r)?;
                    let text = r.map(|q| q.to_string()).join(" ");
                    ("deng", text, report.stable, report.min_abs_arg(), report.threshold)
                }
            };
            w.record(&[
                i.to_string(),
                fmt_f64(orders[0]),
                fmt_f64(orders[1]),
                fmt_f64(orders[2]),
                rational_text,
                method.to_string(),
                stable.to_string(),
                fmt_f64(min_arg),
                fmt_f64(threshold),
            ])?;
        }
    }
    w.finish()?;

    // The argument condition uses the largest order, the strictest threshold.
    let delta = FractionalOrder::new(spec.orders.iter().copied().fold(0.0, f64::max))?;
    let report = sync_condition_check(&p, delta, spec.length, spec.n_modes)?;
    if !report.satisfied {
        out.labels.push("sync-condition-violated".into());
    }
    if report.truncated {
        out.labels.push("sync-condition-truncated".into());
    }
    let mut w = out.create(dir, "sync_modes.csv", csv::MODE_HEADER)?;
    for m in &report.modes {
        let xi = m.eigen.xi;
        w.record(&[
            m.index.to_string(),
            fmt_f64(m.eigen.lambda_i),
            fmt_f64(m.eigen.discriminant),
            fmt_f64(xi[0].re),
            fmt_f64(xi[0].im),
            fmt_f64(xi[1].re),
            fmt_f64(xi[1].im),
            fmt_f64(xi[2].re),
            fmt_f64(m.abs_arg),
            m.checked.to_string(),
            m.satisfied.to_string(),
        ])?;
    }
    w.finish()
}

fn run_ode(spec: &ExperimentSpec, dir: &Path, out: &mut Outputs) -> Result<()> {
    let p = spec.params();
    let rhs = |_t: f64, x: &[f64], dx: &mut [f64]| {
        let f = vector_field(&p, &State3([x[0], x[1], x[2]]));
        dx.copy_from_slice(&f.0);
    };
    let traj = abm_solve(rhs, &spec.ode_ic, &spec.fractional_orders(), &spec.time_grid()?)?;
    let mut w = out.create(dir, "ode.csv", csv::ODE_HEADER)?;
    let last = traj.times.len() - 1;
    for (k, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        if k % spec.snapshot_stride == 0 || k == last {
            w.numbers(&[*t, x[0], x[1], x[2]])?;
        }
    }
    w.finish()
}

fn label_orders(spec: &ExperimentSpec, out: &mut Outputs) {
    if !is_commensurate(&spec.orders) {
        out.labels.push("incommensurate".into());
    }
}

fn run_pde(spec: &ExperimentSpec, dir: &Path, out: &mut Outputs) -> Result<()> {
    label_orders(spec, out);
    let cfg = spec.rd_config()?;
    let ic = canonical_initial_conditions(cfg.grid);
    let traj = simulate_rd(&cfg, &NewtonLeipnikReaction(cfg.params), &ic)?;
    let mut w = out.create(dir, "pde.csv", csv::SNAPSHOT_HEADER)?;
    for s in &traj.snapshots {
        for j in 0..cfg.grid.n_nodes {
            let u = s.field.at(j).0;
            w.numbers(&[s.t, cfg.grid.x(j), u[0], u[1], u[2]])?;
        }
    }
    w.finish()?;
    let x = cfg.grid.x(cfg.grid.nearest(spec.probe_x)?);
    let mut w = out.create(dir, "probe.csv", csv::SNAPSHOT_HEADER)?;
    for (t, u) in probe(&traj, spec.probe_x)? {
        w.numbers(&[t, x, u.0[0], u.0[1], u.0[2]])?;
    }
    w.finish()
}

fn run_synchronization(spec: &ExperimentSpec, dir: &Path, out: &mut Outputs) -> Result<()> {
    let rd = spec.rd_config()?;
    let master = canonical_initial_conditions(rd.grid);
    let slave = master.scaled(spec.slave_ic_scale);
    let mut cfg = SyncConfig::new(rd, spec.controller, master, slave);
    cfg.variant = spec.controller_variant;
    cfg.error_norm_stride = spec.error_norm_stride;
    if cfg.beyond_theorem() {
        out.labels.push("beyond-theorem".into());
    }
    let traj = run_sync(&cfg)?;
    let grid = cfg.rd.grid;
    let probe_j = grid.nearest(spec.probe_x)?;
    let mut w = out.create(dir, "sync.csv", csv::SYNC_HEADER)?;
    let mut wp = out.create(dir, "sync_probe.csv", csv::SYNC_HEADER)?;
    for s in &traj.snapshots {
        for j in 0..grid.n_nodes {
            let u = s.state.master.at(j).0;
            let v = s.state.slave.at(j).0;
            let e = s.state.error.at(j).0;
            let row = [
                s.t, grid.x(j), u[0], u[1], u[2], v[0], v[1], v[2], e[0], e[1], e[2], s.lyapunov,
            ];
            w.numbers(&row)?;
            if j == probe_j {
                wp.numbers(&row)?;
            }
        }
    }
    w.finish()?;
    wp.finish()?;
    let mut w = out.create(dir, "error_norms.csv", csv::ERROR_NORM_HEADER)?;
    for s in &traj.error_norms {
        w.numbers(&[s.t, s.l2, s.sup, s.lyapunov])?;
    }
    w.finish()
}

/// Divergence errors carry the last valid time; report it for the exit path.
pub fn diagnostic(err: &Error) -> String {
    match err {
        Error::Divergence { step, last_valid_time } => format!(
            "solver diverged at step {step}; last valid state at t = {last_valid_time}"
        ),
        other => other.to_string(),
    }
}

/// Output directory: explicit flag, then the spec, then `env_default`, then `./fracsync-out`.
pub fn resolve_output(flag: Option<PathBuf>, spec: &ExperimentSpec, env_default: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| spec.output.as_ref().map(PathBuf::from))
        .or(env_default)
        .unwrap_or_else(|| PathBuf::from("fracsync-out"))
}
