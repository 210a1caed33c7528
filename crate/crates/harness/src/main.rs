use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pii_harness::dataset::{reconstruct_dataset, simulate_dataset};
use pii_harness::{load_config, run_experiment, ExperimentConfig, Scenario};

#[derive(Parser)]
#[command(name = "pii", version, about = "Speckle-correlation ptychography: simulate, reconstruct, run experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scan and write it as a PIID dataset.
    Simulate {
        #[command(flatten)]
        opts: Overrides,
        /// Output file.
        #[arg(long, default_value = "dataset.piid")]
        dataset: PathBuf,
    },
    /// Reconstruct a PIID dataset.
    Reconstruct {
        #[command(flatten)]
        opts: Overrides,
        /// Dataset to read.
        dataset: PathBuf,
    },
    /// Run an experiment scenario.
    Experiment {
        /// compare-algorithms, shift-error, loose-support, frames-sweep or custom.
        scenario: Option<String>,
        #[command(flatten)]
        opts: Overrides,
    },
}

/// Flags mirror configuration keys and override the file.
#[derive(Args)]
struct Overrides {
    /// Configuration file or manifest.json of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<String>,
    /// Grid side in pixels (power of two).
    #[arg(long)]
    grid: Option<String>,
    /// Speckle frames per position.
    #[arg(long)]
    frames: Option<String>,
    /// Scan positions per axis.
    #[arg(long)]
    steps: Option<String>,
    /// Scan step in pixels.
    #[arg(long = "step-px")]
    step_px: Option<String>,
    /// Probe diameter in pixels.
    #[arg(long = "probe-px")]
    probe_px: Option<String>,
    /// er, hio or pii.
    #[arg(long)]
    algorithm: Option<String>,
    /// Reconstruction iterations (PII in experiments).
    #[arg(long)]
    iters: Option<String>,
    /// HIO feedback parameter.
    #[arg(long)]
    beta: Option<String>,
    /// Comma-separated loose-support radii.
    #[arg(long)]
    loose: Option<String>,
    /// Comma-separated shift-error percentages.
    #[arg(long)]
    shift: Option<String>,
    /// glyph, two-disk, three-bar or a PGM file.
    #[arg(long)]
    object: Option<String>,
    /// Seeds per sweep point.
    #[arg(long)]
    replicates: Option<String>,
}

impl Overrides {
    fn resolve(&self, scenario: Option<&str>) -> Result<ExperimentConfig, String> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p).map_err(|e| e.to_string())?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("scenario", scenario),
            ("out", self.out.as_deref()),
            ("seed", self.seed.as_deref()),
            ("grid", self.grid.as_deref()),
            ("frames", self.frames.as_deref()),
            ("steps", self.steps.as_deref()),
            ("step_px", self.step_px.as_deref()),
            ("probe_px", self.probe_px.as_deref()),
            ("algorithm", self.algorithm.as_deref()),
            ("iters", self.iters.as_deref()),
            ("beta", self.beta.as_deref()),
            ("loose", self.loose.as_deref()),
            ("shift", self.shift.as_deref()),
            ("object", self.object.as_deref()),
            ("replicates", self.replicates.as_deref()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|m| format!("--{}: {m}", key.replace('_', "-")))?;
            }
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Simulate { opts, dataset } => {
            let cfg = opts.resolve(None)?;
            let h = simulate_dataset(&cfg, &dataset).map_err(|e| e.to_string())?;
            println!(
                "wrote {} ({} positions, {} frames each, grid {})",
                dataset.display(),
                h.n_positions,
                h.n_frames,
                h.dims
            );
        }
        Command::Reconstruct { opts, dataset } => {
            let cfg = opts.resolve(None)?;
            let out = reconstruct_dataset(&cfg, &dataset, &cfg.out).map_err(|e| e.to_string())?;
            let r = &out.reconstruction;
            println!(
                "{} iterations, final residual {:.6}, {:.2} s",
                r.residuals.len(),
                r.residuals.last().copied().unwrap_or(f64::NAN),
                r.runtime_s
            );
            if let Some(q) = out.quality {
                println!("quality against configured object: {q:.4}");
            }
            println!("wrote {}", out.image.display());
        }
        Command::Experiment { scenario, opts } => {
            if let Some(s) = &scenario {
                s.parse::<Scenario>()?;
            }
            let cfg = opts.resolve(scenario.as_deref())?;
            let result = run_experiment(&cfg).map_err(|e| e.to_string())?;
            println!("{:<32} {:>9} {:>12}", "run", "quality", "residual");
            for r in &result.records {
                println!("{:<32} {:>9.4} {:>12.6}", r.id, r.quality, r.final_residual);
            }
            println!("manifest: {}", cfg.out.join("manifest.json").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
