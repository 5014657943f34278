use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::LazyLock;

use clap::{Parser, Subcommand, ValueEnum};

use qutrit_dd::experiment::config::KEYS;
use qutrit_dd::experiment::sweep::{gate_epsilon_sweep, gate_tau_dd_sweep, kappa_trace, memory_sweep, pool};
use qutrit_dd::experiment::verify::run_suite;
use qutrit_dd::experiment::{plot_script, ExperimentConfig, PulseSetting, Table};
use qutrit_dd::system::DdSet;

static CONFIG_HELP: LazyLock<String> = LazyLock::new(|| {
    let mut s = String::from("Config file keys (`key = value`, `#` comments; defaults in parentheses):\n");
    for (key, help) in KEYS {
        s.push_str(&format!("  {key:<16} {help}\n"));
    }
    s
});

#[derive(Parser)]
#[command(
    name = "qutrit-dd",
    version,
    about = "Dynamical decoupling experiments for qutrit memories and a protected two-qutrit gate",
    after_help = CONFIG_HELP.as_str()
)]
struct Cli {
    /// Experiment configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write CSV here (plus a gnuplot script alongside) instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Integrator step, ms.
    #[arg(long, global = true, value_name = "MS")]
    dt: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// DD pulse model for the gate sweeps.
    #[arg(long, global = true, value_enum)]
    pulse_mode: Option<PulseArg>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    jobs: usize,
    /// Noise spectrum cutoff, rad/ms.
    #[arg(long, global = true, value_name = "RAD_PER_MS")]
    cutoff: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PulseArg {
    Instant,
    Finite,
}

#[derive(Subcommand)]
enum Command {
    /// Check the algebraic decoupling identities over random baths.
    Verify {
        /// Number of random baths (default from config).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        baths: Option<u64>,
    },
    /// Memory protection versus coupling strength.
    Memory {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
    },
    /// Gate fidelity versus noise amplitude, bare and protected.
    GateEps,
    /// Protected gate fidelity versus DD operation duration.
    GateTaudd,
    /// The noise envelope κ(t).
    Kappa,
    /// Print the effective configuration.
    Config,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            ExperimentConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(dt) = cli.dt {
        cfg.dt = dt;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = cli.pulse_mode {
        cfg.pulse_mode = match mode {
            PulseArg::Instant => PulseSetting::Instant,
            PulseArg::Finite => PulseSetting::Finite,
        };
    }
    if let Some(cutoff) = cli.cutoff {
        cfg.spectral_cutoff = cutoff;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn emit(table: &Table, out: Option<&Path>, title: &str, log_axes: bool) -> Result<(), String> {
    let csv = table.to_csv();
    let Some(path) = out else {
        print!("{csv}");
        return Ok(());
    };
    fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let script = path.with_extension("gp");
    fs::write(&script, plot_script(table, &name, title, log_axes)).map_err(|e| format!("{}: {e}", script.display()))?;
    eprintln!("wrote {} and {}", path.display(), script.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    let cfg = load_config(cli)?;
    let out = cli.out.as_deref();
    let workers = || pool(cli.jobs).map_err(|e| e.to_string());
    match &cli.command {
        Command::Verify { baths } => {
            let n = baths.map_or(cfg.verify_baths, |b| b as usize);
            let report = run_suite(&DdSet::standard(), n, cfg.seed).map_err(|e| e.to_string())?;
            println!("{report}");
            return Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
        Command::Memory { order } => {
            let sweep = memory_sweep(&cfg, *order, &workers()?).map_err(|e| e.to_string())?;
            emit(&sweep.table, out, &format!("memory protection, order {order}"), true)?;
            eprintln!("{}", sweep.summary());
        }
        Command::GateEps => {
            let t = gate_epsilon_sweep(&cfg, &workers()?).map_err(|e| e.to_string())?;
            emit(&t, out, "gate fidelity vs noise amplitude", false)?;
        }
        Command::GateTaudd => {
            let t = gate_tau_dd_sweep(&cfg, &workers()?).map_err(|e| e.to_string())?;
            emit(&t, out, "gate fidelity vs DD duration", false)?;
        }
        Command::Kappa => {
            let t = kappa_trace(&cfg).map_err(|e| e.to_string())?;
            emit(&t, out, "noise envelope", false)?;
        }
        Command::Config => print!("{}", cfg.to_text()),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
