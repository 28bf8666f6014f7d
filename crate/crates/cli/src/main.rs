use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mimo_detect::constellation::Constellation;
use mimo_detect::hwmodel::{build_shiftadd_plan, count_coprime_classes, count_distinct_terms, FixedPointFormat};
use mimo_detect::mumimo::{count_distance_evals, PrbLayout};
use mimo_detect::sim::{
    mu_csv, parse_distance_mode, parse_mods, parse_snr_grid, run_mu, run_sweep, Detector, MuConfig, PriorsMode,
    SimConfig,
};
use mimo_detect::DetectError;

/// Monte-Carlo sweeps for the max-log-MAP MIMO detectors.
#[derive(Parser)]
#[command(name = "detect-sim", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    sweep: SweepArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Print distinct-term counts, coprime classes and shift-add plans.
    Tables,
    /// MU-MIMO interferer classification sweep.
    Mumimo(MuArgs),
    /// Dump a constellation's levels and bit labels.
    Constellation {
        /// Constellation size (2 for BPSK).
        #[arg(long = "mod")]
        order: String,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Spatial layers (defaults to the number of --mods entries).
    #[arg(long)]
    layers: Option<usize>,
    /// Per-layer constellation sizes, e.g. 64,64.
    #[arg(long, default_value = "4,4")]
    mods: String,
    /// SNR grid in dB: start:step:stop, a comma list or a single value.
    #[arg(long, default_value = "0:5:20")]
    snr: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// map2, wld, oracle or ml.
    #[arg(long, default_value = "wld")]
    detector: String,
    /// L (triangular metric) or H (rescored on the channel).
    #[arg(long, default_value = "H")]
    distance_mode: String,
    /// zero or random:<sigma>.
    #[arg(long, default_value = "zero")]
    priors: String,
    /// Fixed-point format I.F applied to the detector datapath.
    #[arg(long)]
    quant: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Compare every trial with the exhaustive oracle.
    #[arg(long)]
    shadow_oracle: bool,
}

#[derive(Args)]
struct MuArgs {
    /// Tones in the classification window.
    #[arg(long, default_value_t = 24)]
    k: usize,
    #[arg(long, default_value = "64")]
    desired: String,
    /// True interferer constellations to simulate.
    #[arg(long, default_value = "4,16,64")]
    interferers: String,
    #[arg(long, default_value = "0:10:30")]
    snr: String,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn sweep_config(a: &SweepArgs) -> Result<SimConfig, DetectError> {
    let mods = parse_mods(&a.mods)?;
    Ok(SimConfig {
        layers: a.layers.unwrap_or(mods.len()),
        mods,
        snr_db: parse_snr_grid(&a.snr)?,
        trials: a.trials,
        detector: a.detector.parse()?,
        distance_mode: parse_distance_mode(&a.distance_mode)?,
        priors: a.priors.parse::<PriorsMode>()?,
        quant: a.quant.as_deref().map(str::parse::<FixedPointFormat>).transpose()?,
        seed: a.seed,
        threads: a.threads.unwrap_or_else(default_threads),
        shadow_oracle: a.shadow_oracle,
    })
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), DetectError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| DetectError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn tables() -> Result<String, DetectError> {
    let mut s = String::from("# distinct product terms (c1 c2 c3 c4 c5)\n");
    for p in [2, 4, 8, 16] {
        let t = count_distinct_terms(p)?;
        s += &format!("P={p:<2} {} {} {} {} {}\n", t.c1, t.c2, t.c3, t.c4, t.c5);
    }
    s += &format!(
        "\n# coprime odd coefficient pairs\nP=16 {}\n",
        count_coprime_classes(16)?
    );
    for (name, targets) in [
        ("16-PAM squares", vec![9, 25, 49, 81, 121, 169, 225]),
        ("8-PAM squares", vec![9, 25, 49]),
        ("16-PAM magnitudes", vec![3, 5, 7, 9, 11, 13, 15]),
    ] {
        let plan = build_shiftadd_plan(&targets)?;
        s += &format!(
            "\n# shift-add plan: {name} {targets:?}, cost {}\n{}",
            plan.cost(),
            plan.dump()
        );
    }
    let evals = count_distance_evals(PrbLayout::LTE, 64);
    s += &format!(
        "\n# MU-MIMO distance evaluations, 64-QAM desired\nbaseline {} total {} ratio {:.6}\n",
        evals.baseline, evals.total, evals.ratio
    );
    Ok(s)
}

fn run(cli: Cli) -> Result<(), DetectError> {
    match cli.command {
        Some(Command::Tables) => emit(None, &tables()?),
        Some(Command::Constellation { order }) => {
            let m = parse_mods(&order)?;
            if m.len() != 1 {
                return Err(DetectError::Config("give a single constellation size".into()));
            }
            emit(None, &Constellation::new(m[0]).dump())
        }
        Some(Command::Mumimo(a)) => {
            let desired = parse_mods(&a.desired)?;
            if desired.len() != 1 {
                return Err(DetectError::Config("give a single desired constellation".into()));
            }
            let cfg = MuConfig {
                k: a.k,
                desired: desired[0],
                interferers: parse_mods(&a.interferers)?,
                snr_db: parse_snr_grid(&a.snr)?,
                trials: a.trials,
                seed: a.seed,
                threads: a.threads.unwrap_or_else(default_threads),
            };
            emit(a.out.as_ref(), &mu_csv(&run_mu(&cfg)?, cfg.seed))
        }
        None => {
            let cfg = sweep_config(&cli.sweep)?;
            if cfg.detector == Detector::Ml && cfg.shadow_oracle {
                eprintln!("note: the ml detector produces no LLRs; llr columns stay nan");
            }
            let result = run_sweep(&cfg)?;
            emit(cli.sweep.out.as_ref(), &result.to_csv())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("detect-sim: {e}");
            ExitCode::from(match e {
                DetectError::OracleMismatch { .. } => 3,
                DetectError::Config(_)
                | DetectError::Io(_)
                | DetectError::UnsupportedPam(_)
                | DetectError::InvalidTarget(_)
                | DetectError::BudgetExceeded { .. } => 2,
                _ => 1,
            })
        }
    }
}
