//! Monte-Carlo simulation: channel and noise generation, detection sweeps,
//! LLR fidelity against the exhaustive oracle and the MU-MIMO classifier
//! harness.

mod channel;
mod config;
mod mu;
mod rng;
mod sweep;

pub use channel::{complex_gaussian, generate_channel};
pub use config::{parse_distance_mode, parse_mods, parse_snr_grid, Detector, PriorsMode, SimConfig};
pub use mu::{mu_csv, run_mu, MuConfig, MuPoint, MU_CSV_HEADER};
pub use rng::{splitmix64, stream_rng};
pub use sweep::{llr_fidelity, run_sweep, FidelityStats, PointStats, SweepResult, CSV_HEADER};
