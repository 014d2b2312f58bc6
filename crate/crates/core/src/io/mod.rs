//! Field files, CSV diagnostics, experiment configuration, manifests and
//! plot scripts.

mod config;
mod field_file;
mod output;

pub use config::{Command, ExperimentConfig};
pub use field_file::{read_field, read_field_file, write_field, FieldFile, MAGIC};
pub use output::{plot_script, read_table, Manifest, Table};
