//! Sweep driver: configuration, presets, evaluation and output.

pub mod args;
pub mod config;
pub mod emit;
pub mod presets;
pub mod run;

pub use args::main_with_args;
pub use config::{parse_config, OutputFormat, RunConfig};
pub use emit::{emit_plot_data, Manifest};
pub use presets::preset;
pub use run::{run, Record, RunOutput};
