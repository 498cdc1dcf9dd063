//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

use crate::error::{Error, Result};
use crate::transport::SolverMode;

use super::config::{parse_config, OutputFormat, RunConfig};
use super::emit::{emit_plot_data, manifest_path, write_manifest, Manifest};
use super::presets::{preset, PRESETS};
use super::run::run;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ALL_FAILED: i32 = 2;

/// Heat transport through a qubit-resonator junction between two ohmic baths.
#[derive(Debug, Parser)]
#[command(name = "qrm-heat", version, about)]
pub struct Args {
    /// TOML run configuration.
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Built-in figure protocol.
    #[arg(long, value_name = "NAME", value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    pub preset: Option<String>,

    /// Overrides the solver of the configuration.
    #[arg(long, value_name = "fsme|psme")]
    pub mode: Option<SolverMode>,

    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Overrides the output format.
    #[arg(long, value_name = "csv|json|gnuplot")]
    pub format: Option<OutputFormat>,

    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,

    /// Accepted for pipeline compatibility; the computation is deterministic.
    #[arg(long)]
    pub seedless: bool,

    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
}

impl Args {
    /// Configuration after presets, file and overrides.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                parse_config(&text)?
            }
            (None, Some(name)) => preset(name)?,
            (None, None) => RunConfig::default(),
        };
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(args: &Args, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let cfg = args.resolve()?;
    if args.print_config {
        stdout.write_all(cfg.to_toml()?.as_bytes())?;
        return Ok(EXIT_OK);
    }
    let threads = args.threads.map(|t| t as usize);
    let start = Instant::now();
    let output = run(&cfg, threads)?;
    let mut manifest = Manifest::new(&cfg, threads, &output.records);

    match &cfg.output {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            emit_plot_data(&output.records, &manifest, cfg.format, &mut w)?;
            w.flush()?;
            manifest.wall_time_s = Some(start.elapsed().as_secs_f64());
            write_manifest(&manifest, &manifest_path(path))?;
        }
        None => emit_plot_data(&output.records, &manifest, cfg.format, &mut *stdout)?,
    }

    if output.failed_points > 0 {
        writeln!(stderr, "{} of {} points failed", output.failed_points, output.records.len())?;
    }
    Ok(if output.all_failed() { EXIT_ALL_FAILED } else { EXIT_OK })
}

/// Runs the tool on `argv` and returns the process exit code.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&args, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}
