use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use ris_core::config::{parse_scenario_file, to_config_string};
use ris_core::experiments::{
    format_summary, preset, preset_scenarios, run_scenario_with, summarize, write_csvs, ScenarioConfig,
};
use ris_core::parallel::ExecutionMode;
use ris_core::verify::run_invariant_suite;

const MANIFEST: &str = "manifest.txt";

#[derive(Parser, Debug)]
#[command(
    name = "ris-sim",
    version,
    about = "Monte Carlo capacity experiments for RIS-aided MIMO links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a preset or a scenario file and write CSVs to <out>/<name>/.
    Run {
        /// Preset name or path to a scenario file.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of realizations.
        #[arg(long)]
        realizations: Option<usize>,
        /// Worker threads; 1 runs sequentially.
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        threads: Option<u16>,
        /// Replace an existing non-empty output directory.
        #[arg(long)]
        force: bool,
    },
    /// Print the built-in presets.
    ListPresets,
    /// Run the invariant suite on a small seeded instance.
    Verify {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        realizations: usize,
        #[arg(long, default_value_t = 123)]
        seed: u64,
    },
}

fn load_scenario(spec: &str) -> Result<ScenarioConfig> {
    if let Some(cfg) = preset(spec) {
        return Ok(cfg);
    }
    let path = Path::new(spec);
    if !path.exists() {
        let names: Vec<String> = preset_scenarios().into_iter().map(|p| p.name).collect();
        bail!(
            "`{spec}` is neither a preset ({}) nor an existing file",
            names.join(", ")
        );
    }
    parse_scenario_file(path).with_context(|| format!("invalid scenario file {}", path.display()))
}

fn is_non_empty_dir(path: &Path) -> Result<bool> {
    if !path.exists() {
        return Ok(false);
    }
    if !path.is_dir() {
        bail!("{} exists and is not a directory", path.display());
    }
    Ok(fs::read_dir(path)?.next().is_some())
}

fn execution_mode(threads: Option<u16>) -> ExecutionMode {
    match threads {
        Some(1) => ExecutionMode::Sequential,
        _ => ExecutionMode::default(),
    }
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<u16>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) if n > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.into())
                .build()
                .context("cannot start worker threads")?;
            Ok(pool.install(job))
        }
        _ => Ok(job()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_threads: Option<u16>, job: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(job())
}

fn manifest_text(cfg: &ScenarioConfig, mode: ExecutionMode, threads: Option<u16>) -> String {
    let threads = threads.map_or_else(|| "default".to_string(), |t| t.to_string());
    format!(
        "# ris-sim {} run record\n# seed {}\n# execution {:?}, threads {threads}\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.base_seed(),
        mode,
        to_config_string(cfg)
    )
}

fn run(
    scenario: &str,
    out: &Path,
    seed: Option<u64>,
    realizations: Option<usize>,
    threads: Option<u16>,
    force: bool,
) -> Result<()> {
    let mut cfg = load_scenario(scenario)?;
    if let Some(seed) = seed {
        cfg.channel.seed = seed;
    }
    if let Some(n) = realizations {
        cfg.n_realizations = n;
    }
    cfg.validate().context("invalid scenario")?;

    let target = out.join(&cfg.name);
    if !force && is_non_empty_dir(&target)? {
        bail!("{} is not empty; pass --force to replace it", target.display());
    }

    let mode = execution_mode(threads);
    let result = with_threads(threads, || run_scenario_with(&cfg, mode))?
        .with_context(|| format!("scenario `{}` failed", cfg.name))?;

    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let staging = tempfile::Builder::new()
        .prefix(".ris-sim-")
        .tempdir_in(out)
        .with_context(|| format!("cannot create a staging directory in {}", out.display()))?;
    write_csvs(&result, staging.path())?;
    let mut manifest = fs::File::create(staging.path().join(MANIFEST))?;
    manifest.write_all(manifest_text(&cfg, mode, threads).as_bytes())?;
    manifest.sync_all()?;

    if target.exists() {
        fs::remove_dir_all(&target).with_context(|| format!("cannot replace {}", target.display()))?;
    }
    let staged = staging.keep();
    fs::rename(&staged, &target).with_context(|| format!("cannot move results into {}", target.display()))?;

    print!("{}", format_summary(&summarize(&result)));
    println!("wrote {}", target.display());
    Ok(())
}

fn list_presets() {
    for p in preset_scenarios() {
        let c = &p.channel;
        println!(
            "{:<18} n_tx={} n_rx={} n_ris={} paths={}/{} los={} realizations={} seed={}",
            p.name, c.n_tx, c.n_rx, c.n_ris, c.n_paths_h, c.n_paths_g, c.los, p.n_realizations, c.seed
        );
    }
}

fn verify(n: usize, realizations: usize, seed: u64) -> Result<()> {
    if n == 0 || realizations == 0 {
        bail!("--n and --realizations must be positive");
    }
    let outcomes = run_invariant_suite(n, realizations, seed);
    let mut failed = 0;
    for o in &outcomes {
        println!("[{}] {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
        failed += usize::from(!o.passed);
    }
    if failed > 0 {
        bail!("{failed} of {} invariant checks failed", outcomes.len());
    }
    println!(
        "all {} checks passed (n = {n}, {realizations} realizations, seed {seed})",
        outcomes.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            realizations,
            threads,
            force,
        } => run(&scenario, &out, seed, realizations, threads, force),
        Command::ListPresets => {
            list_presets();
            Ok(())
        }
        Command::Verify { n, realizations, seed } => verify(n, realizations, seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
