//! Experiment documents, CSV tables and run manifests.

pub mod csv;
mod run;
mod spec;

pub use run::{diagnostic, replay, resolve_output, run, DerivedSettings, Rationalization, RunManifest, MANIFEST_FILE};
pub use spec::{parse_spec, ExperimentKind, ExperimentSpec};
