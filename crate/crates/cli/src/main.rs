use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nhpc_cli::{run_sweep, verify, CliError, RunConfig, VerifyOptions};
use nhpc_core::presets;

#[derive(Parser)]
#[command(name = "nhpc", version, about = "Persistent currents of dissipative tight-binding systems")]
struct Cli {
    /// Worker threads for φ sweeps.
    #[arg(long, global = true, env = nhpc_cli::WORKERS_ENV)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Named figure preset (see `preset-list`).
    #[arg(long)]
    preset: Option<String>,

    /// Finite-difference step in φ.
    #[arg(long)]
    delta_phi: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep φ and write CSV files plus a run manifest.
    Sweep {
        #[command(flatten)]
        source: Source,

        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the invariant suite; the fig2a and fig2b systems by default.
    Verify {
        #[command(flatten)]
        source: Source,

        /// Multiplies every threshold.
        #[arg(long, default_value_t = 1.0)]
        tol: f64,

        /// φ samples per system.
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// List the built-in presets.
    PresetList,
}

fn load(source: &Source) -> Result<Option<(String, RunConfig)>, CliError> {
    let loaded = match (&source.config, &source.preset) {
        (Some(path), _) => Some((path.display().to_string(), RunConfig::from_file(path)?)),
        (None, Some(name)) => {
            let p = presets::by_name(name)
                .ok_or_else(|| CliError::Config(format!("preset: unknown name {name:?}; try `nhpc preset-list`")))?;
            Some((p.name.to_string(), RunConfig::from_preset(&p)))
        }
        (None, None) => None,
    };
    Ok(loaded.map(|(n, mut c)| {
        if let Some(d) = source.delta_phi {
            c.delta_phi = d;
        }
        (n, c)
    }))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let workers = cli.workers.unwrap_or(1).max(1);
    nhpc_core::set_blas_threads(1);
    match cli.command {
        Command::PresetList => {
            for p in presets::all() {
                println!("{:<7} {}", p.name, p.summary);
            }
            Ok(())
        }
        Command::Sweep { source, output_dir } => {
            let (name, cfg) = load(&source)?.ok_or_else(|| CliError::Config("sweep needs --config or --preset".into()))?;
            let out = output_dir
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(if source.preset.is_some() { &name } else { "run" }));
            let preset = source.preset.as_ref().map(|_| name.as_str());
            let summary = run_sweep(&cfg, &out, preset, workers)?;
            for f in &summary.files {
                println!("{}", summary.output_dir.join(f).display());
            }
            for n in &summary.ep_nudges {
                eprintln!("note: basis defective at phi = {:.12}, evaluated at phi {:+e} ({})", n.phi, n.nudge, n.stage);
            }
            Ok(())
        }
        Command::Verify { source, tol, points } => {
            let systems = match load(&source)? {
                Some((name, cfg)) => {
                    cfg.validate()?;
                    vec![(name, cfg.system())]
                }
                None => ["fig2a", "fig2b"]
                    .iter()
                    .map(|n| (n.to_string(), presets::by_name(n).expect("built-in").system))
                    .collect(),
            };
            let delta_phi = source.delta_phi.unwrap_or(nhpc_core::observables::DEFAULT_DELTA_PHI);
            let opts = VerifyOptions { points, delta_phi, tol_scale: tol };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| CliError::Config(format!("workers: {e}")))?;
            let checks = pool.install(|| verify(&systems, &opts))?;
            for c in &checks {
                println!(
                    "{} {:<7} {:<22} residual {:.3e} threshold {:.3e}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.system,
                    c.name,
                    c.residual,
                    c.threshold
                );
            }
            match checks.iter().filter(|c| !c.pass).count() {
                0 => Ok(()),
                n => Err(CliError::Verify(n)),
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
