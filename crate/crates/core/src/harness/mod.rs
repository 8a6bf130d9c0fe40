//! Configuration-driven runs and artifact export.

pub mod artifact;
pub mod config;
pub mod run;
pub mod svg;

pub use artifact::{emit, emit_to_string, write_artifact, ArtifactKind, Format, Payload, Provenance, RunArtifact};
pub use config::{ScenarioConfig, SCHEMA_VERSION};
pub use run::{run, Overrides, Subcommand, WORKERS_ENV};
