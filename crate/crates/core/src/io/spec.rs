use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fractional::{FractionalOrder, TimeGrid};
use crate::model::SystemParams;
use crate::pde::{Grid1D, RDConfig};
use crate::sync::ControllerVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Ode,
    Pde,
    Sync,
    Stability,
    Equilibria,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ode => "ode",
            Self::Pde => "pde",
            Self::Sync => "sync",
            Self::Stability => "stability",
            Self::Equilibria => "equilibria",
        }
    }
}

/// A fully resolved experiment description; every default is explicit so
/// the serialized form replays the run exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default = "defaults::a")]
    pub a: f64,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    /// Diffusivities (d₁, d₂, d₃).
    #[serde(default = "defaults::d")]
    pub d: [f64; 3],
    /// Caputo orders (δ₁, δ₂, δ₃); the shorthand `delta` sets all three.
    #[serde(default = "defaults::orders")]
    pub orders: [f64; 3],
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "defaults::t_end")]
    pub t_end: f64,
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    #[serde(default = "defaults::length")]
    pub length: f64,
    #[serde(default = "defaults::dx")]
    pub dx: f64,
    #[serde(default)]
    pub memory_window: Option<usize>,
    #[serde(default = "defaults::snapshot_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "defaults::probe_x")]
    pub probe_x: f64,
    /// Initial state of ODE runs.
    #[serde(default = "defaults::ode_ic")]
    pub ode_ic: [f64; 3],
    #[serde(default = "defaults::controller")]
    pub controller: bool,
    #[serde(default)]
    pub controller_variant: ControllerVariant,
    /// Slave initial condition = this factor × master initial condition.
    #[serde(default = "defaults::slave_ic_scale")]
    pub slave_ic_scale: f64,
    #[serde(default = "defaults::error_norm_stride")]
    pub error_norm_stride: usize,
    /// Order vectors probed by the `stability` kind.
    #[serde(default = "defaults::stability_orders")]
    pub stability_orders: Vec<[f64; 3]>,
    /// Denominator cap when rationalizing orders for the incommensurate test.
    #[serde(default = "defaults::max_denominator")]
    pub max_denominator: u64,
    /// Number of Neumann modes (beyond λ₀) in the synchronization check.
    #[serde(default = "defaults::n_modes")]
    pub n_modes: usize,
    /// Output directory; the command line takes precedence.
    #[serde(default)]
    pub output: Option<String>,
}

pub(crate) mod defaults {
    pub fn a() -> f64 {
        0.4
    }
    pub fn alpha() -> f64 {
        0.175
    }
    pub fn d() -> [f64; 3] {
        crate::model::SystemParams::DEFAULT_DIFFUSIVITY
    }
    pub fn orders() -> [f64; 3] {
        [0.99; 3]
    }
    pub fn t_end() -> f64 {
        50.0
    }
    pub fn dt() -> f64 {
        0.005
    }
    pub fn length() -> f64 {
        20.0
    }
    pub fn dx() -> f64 {
        0.1
    }
    pub fn snapshot_stride() -> usize {
        20
    }
    pub fn probe_x() -> f64 {
        10.0
    }
    pub fn ode_ic() -> [f64; 3] {
        [0.349, 0.0, -0.3]
    }
    pub fn controller() -> bool {
        true
    }
    pub fn slave_ic_scale() -> f64 {
        1.5
    }
    pub fn error_norm_stride() -> usize {
        1
    }
    pub fn stability_orders() -> Vec<[f64; 3]> {
        vec![[0.85, 0.9, 0.8], [1.0, 0.95, 0.975]]
    }
    pub fn max_denominator() -> u64 {
        100
    }
    pub fn n_modes() -> usize {
        200
    }
}

const KNOWN_KEYS: &[&str] = &[
    "kind",
    "a",
    "alpha",
    "d",
    "orders",
    "delta",
    "t0",
    "t_end",
    "dt",
    "length",
    "dx",
    "memory_window",
    "snapshot_stride",
    "probe_x",
    "ode_ic",
    "controller",
    "controller_variant",
    "slave_ic_scale",
    "error_norm_stride",
    "stability_orders",
    "max_denominator",
    "n_modes",
    "output",
];

fn parse_err(key: &str, message: impl Into<String>) -> Error {
    Error::Parse { key: key.to_string(), message: message.into() }
}

/// Parse a JSON experiment document, filling defaults and validating.
///
/// `kind_hint` supplies the kind when the document omits it; a document
/// kind that disagrees with the hint is rejected.
pub fn parse_spec(text: &str, kind_hint: Option<ExperimentKind>) -> Result<ExperimentSpec> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| parse_err("<document>", e.to_string()))?;
    let Value::Object(mut map) = value else {
        return Err(parse_err("<document>", "expected a JSON object"));
    };
    if let Some(key) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(parse_err(key, "unknown key"));
    }
    if let Some(delta) = map.remove("delta") {
        if map.contains_key("orders") {
            return Err(parse_err("delta", "give either `delta` or `orders`, not both"));
        }
        let d = delta.as_f64().ok_or_else(|| parse_err("delta", "expected a number"))?;
        map.insert("orders".into(), serde_json::json!([d, d, d]));
    }
    match (map.get("kind"), kind_hint) {
        (None, Some(hint)) => {
            map.insert("kind".into(), serde_json::to_value(hint)?);
        }
        (None, None) => return Err(parse_err("kind", "missing experiment kind")),
        (Some(k), Some(hint)) => {
            let parsed: ExperimentKind = serde_json::from_value(k.clone())
                .map_err(|e| parse_err("kind", e.to_string()))?;
            if parsed != hint {
                return Err(parse_err(
                    "kind",
                    format!("document is `{}` but the command expects `{}`", parsed.name(), hint.name()),
                ));
            }
        }
        (Some(_), None) => {}
    }
    // Deserialize field by field so type errors name their key.
    for (key, v) in &map {
        let probe = serde_json::json!({ "kind": map.get("kind").cloned().unwrap(), key.as_str(): v });
        if let Err(e) = serde_json::from_value::<ExperimentSpec>(probe) {
            return Err(parse_err(key, e.to_string()));
        }
    }
    let spec: ExperimentSpec = serde_json::from_value(Value::Object(map))
        .map_err(|e| parse_err("<document>", e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

impl ExperimentSpec {
    /// A spec of `kind` with every default.
    pub fn with_defaults(kind: ExperimentKind) -> Self {
        parse_spec("{}", Some(kind)).expect("defaults are valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(parse_err(key, "must be finite"))
            }
        };
        finite("a", self.a)?;
        finite("alpha", self.alpha)?;
        if self.d.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(parse_err("d", "diffusivities must be finite and non-negative"));
        }
        for o in &self.orders {
            FractionalOrder::new(*o).map_err(|e| parse_err("orders", e.to_string()))?;
        }
        for set in &self.stability_orders {
            for o in set {
                FractionalOrder::new(*o).map_err(|e| parse_err("stability_orders", e.to_string()))?;
            }
        }
        finite("t0", self.t0)?;
        if !(self.t_end > self.t0) {
            return Err(parse_err("t_end", "must exceed t0"));
        }
        if !(self.dt > 0.0) || self.dt > self.t_end - self.t0 {
            return Err(parse_err("dt", "must be positive and no longer than the horizon"));
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(parse_err("length", "must be positive"));
        }
        if !(self.dx > 0.0) || (self.length / self.dx).round() < 2.0 {
            return Err(parse_err("dx", "must be positive and give at least 3 nodes"));
        }
        if self.memory_window == Some(0) {
            return Err(parse_err("memory_window", "must be at least 1 when set"));
        }
        if self.snapshot_stride == 0 {
            return Err(parse_err("snapshot_stride", "must be at least 1"));
        }
        if self.error_norm_stride == 0 {
            return Err(parse_err("error_norm_stride", "must be at least 1"));
        }
        if !(0.0..=self.length).contains(&self.probe_x) {
            return Err(parse_err("probe_x", "must lie inside [0, length]"));
        }
        if self.ode_ic.iter().any(|v| !v.is_finite()) {
            return Err(parse_err("ode_ic", "must be finite"));
        }
        finite("slave_ic_scale", self.slave_ic_scale)?;
        if self.max_denominator == 0 {
            return Err(parse_err("max_denominator", "must be at least 1"));
        }
        if self.n_modes == 0 {
            return Err(parse_err("n_modes", "must be at least 1"));
        }
        Ok(())
    }

    pub fn params(&self) -> SystemParams {
        SystemParams { a: self.a, alpha: self.alpha, d: self.d }
    }

    pub fn fractional_orders(&self) -> [FractionalOrder; 3] {
        self.orders.map(|o| FractionalOrder::new(o).expect("validated"))
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::spanning(self.t0, self.t_end, self.dt)
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::with_spacing(self.length, self.dx)
    }

    pub fn rd_config(&self) -> Result<RDConfig> {
        Ok(RDConfig {
            params: self.params(),
            orders: self.fractional_orders(),
            grid: self.grid()?,
            time: self.time_grid()?,
            memory_window: self.memory_window,
            snapshot_stride: self.snapshot_stride,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_equilibria_document() {
        let spec = parse_spec(r#"{"kind": "equilibria", "a": 0.4, "alpha": 0.175}"#, None).unwrap();
        assert_eq!(spec.kind, ExperimentKind::Equilibria);
        assert_eq!(spec.d, [0.1; 3]);
        assert_eq!(spec.dt, 0.005);
        assert_eq!(spec.dx, 0.1);
        assert_eq!(spec.slave_ic_scale, 1.5);
        assert_eq!(spec.memory_window, None);
    }

    #[test]
    fn order_outside_unit_interval_is_rejected() {
        let err = parse_spec(r#"{"kind": "pde", "delta": 1.2}"#, None).unwrap_err();
        match err {
            Error::Parse { key, .. } => assert_eq!(key, "orders"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_mistyped_keys_are_named() {
        match parse_spec(r#"{"kind": "pde", "dtt": 0.1}"#, None).unwrap_err() {
            Error::Parse { key, .. } => assert_eq!(key, "dtt"),
            other => panic!("{other:?}"),
        }
        match parse_spec(r#"{"kind": "pde", "dx": "small"}"#, None).unwrap_err() {
            Error::Parse { key, .. } => assert_eq!(key, "dx"),
            other => panic!("{other:?}"),
        }
        assert!(parse_spec("[1, 2]", None).is_err());
        assert!(parse_spec("{", None).is_err());
        assert!(parse_spec(r#"{"delta": 0.5, "orders": [0.5, 0.5, 0.5], "kind": "ode"}"#, None).is_err());
    }

    #[test]
    fn kind_hint() {
        assert!(parse_spec("{}", None).is_err());
        let spec = parse_spec("{}", Some(ExperimentKind::Sync)).unwrap();
        assert_eq!(spec.kind, ExperimentKind::Sync);
        assert!(parse_spec(r#"{"kind": "ode"}"#, Some(ExperimentKind::Sync)).is_err());
    }

    #[test]
    fn synchronization_document_round_trips() {
        let text = r#"{"kind": "sync", "delta": 0.99, "controller": true, "t_end": 50}"#;
        let spec = parse_spec(text, None).unwrap();
        assert_eq!(spec.orders, [0.99; 3]);
        let again = parse_spec(&spec.to_json(), None).unwrap();
        assert_eq!(spec, again);
        let incommensurate = parse_spec(r#"{"kind": "sync", "orders": [0.97, 0.98, 0.99], "controller_variant": "cross_term"}"#, None).unwrap();
        assert_eq!(incommensurate.controller_variant, ControllerVariant::CrossTerm);
        assert_eq!(parse_spec(&incommensurate.to_json(), None).unwrap(), incommensurate);
    }

    #[test]
    fn derived_configuration() {
        let spec = ExperimentSpec::with_defaults(ExperimentKind::Pde);
        let rd = spec.rd_config().unwrap();
        assert_eq!(rd.grid.n_nodes, 201);
        assert_eq!(rd.time.n_steps, 10_000);
    }
}
