use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use qsl_core::par::{self, Execution};
use qsl_core::scenario::{
    list_presets, parse_config, preset_config, run_scaling, run_scenario, scaling_preset, sweep,
    write_scaling_csv, write_sweep_csv, RunReport, ScenarioConfig, SCALING_STUDY,
};

/// Worker-count override for the thread pool.
const THREADS_VAR: &str = "QSL_THREADS";

#[derive(Parser)]
#[command(name = "qsl", version, about = "Quantum speed limit scenarios: bounds versus exact dynamics")]
struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario config files.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output directory for configs that do not set `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named preset.
    Preset {
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Sweep a parameter and write one phase-diagram row per value.
    Sweep {
        config: PathBuf,
        /// `omega` or `W`.
        #[arg(long)]
        param: String,
        /// Comma-separated values in MHz.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// List the available presets.
    ListPresets,
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_VAR} must be a positive integer, got {raw:?}"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("thread pool already initialized")?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("parsing {}", path.display()))
}

fn summarize(report: &RunReport) {
    let regime = report
        .regime
        .map(|r| r.label.as_str())
        .unwrap_or("-");
    let t_perp = report
        .detected_t_perp_ns
        .map(|t| format!("{t:.4} ns"))
        .unwrap_or_else(|| "none".to_string());
    eprintln!(
        "{}: method {:?}, dim {}, regime {}, t_perp {}, violations {}",
        report.name, report.method, report.dimension, regime, t_perp, report.sandwich_violations
    );
}

/// Returns whether every scenario ran without sandwich violations.
fn run_batch(configs: &[(PathBuf, ScenarioConfig)], out: &Path, exec: Execution) -> Result<bool> {
    let results = par::map(exec, configs, |(path, cfg)| {
        let dir = cfg.output_dir.as_ref().map(PathBuf::from).unwrap_or_else(|| out.to_path_buf());
        run_scenario(cfg, &dir, exec).with_context(|| format!("running {}", path.display()))
    });
    let mut clean = true;
    let mut failed = 0;
    for result in results {
        match result {
            Ok(r) => {
                summarize(&r.report);
                clean &= r.report.sandwich_violations == 0;
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        bail!("{failed} scenario(s) failed");
    }
    Ok(clean)
}

fn dispatch(cli: Cli) -> Result<bool> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Run { configs, out } => {
            let loaded = configs
                .into_iter()
                .map(|p| load(&p).map(|cfg| (p, cfg)))
                .collect::<Result<Vec<_>>>()?;
            run_batch(&loaded, out.as_deref().unwrap_or(Path::new(".")), exec)
        }
        Command::Preset { name, out } if name == SCALING_STUDY => {
            let records = run_scaling(&scaling_preset(), exec)?;
            let path = out.join("scaling.csv");
            write_scaling_csv(&path, &records)?;
            for r in &records {
                eprintln!(
                    "{}: dE {:.6} MHz (analytic {:.6}), W* {:.4} MHz",
                    r.geometry.name(),
                    r.delta_e_numeric_mhz,
                    r.delta_e_analytic_mhz,
                    r.w_star_mhz
                );
            }
            Ok(true)
        }
        Command::Preset { name, out } => {
            let cfg = preset_config(&name)?;
            run_batch(&[(PathBuf::from(name), cfg)], &out, exec)
        }
        Command::Sweep { config, param, values, out } => {
            let cfg = load(&config)?;
            let rows = sweep(&cfg, &param, &values, exec)?;
            let path = out.join(format!("{}_sweep_{param}.csv", cfg.name));
            write_sweep_csv(&path, &rows)?;
            eprintln!("wrote {}", path.display());
            Ok(true)
        }
        Command::ListPresets => {
            for p in list_presets() {
                println!("{}\t{}", p.name, p.description);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| dispatch(cli));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("sandwich violations detected");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
