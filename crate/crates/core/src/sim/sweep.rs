use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::constellation::Constellation;
use crate::decomp::{ql_decompose, ql_decompose_flipped, wld, PuncturedDecomposition};
use crate::detcore::{
    compute_constants, detect_from_constants, rescore_candidates, CandidateList, DistanceScaling, SliceMode,
};
use crate::error::{DetectError, Result};
use crate::hwmodel::quantize;
use crate::linalg::CMatrix;
use crate::llrpost::{llr_two_sided_2layer, wl_combine, DistanceMode};
use crate::oracle::{exact_ml, exhaustive_map};

use super::channel::{complex_gaussian, generate_channel};
use super::config::{Detector, PriorsMode, SimConfig};
use super::rng::stream_rng;

pub const CSV_HEADER: &str = "snr_db,trials,ser,ber,llr_mae,llr_max,detector,distance_mode,n_layers,mods,seed";

/// Relative tolerance of the shadow-oracle check.
const SHADOW_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PointStats {
    pub snr_db: f64,
    pub trials: usize,
    pub vector_errors: usize,
    pub symbol_errors: usize,
    pub bit_errors: usize,
    pub symbols: usize,
    pub bits: usize,
    /// Sum, maximum and count of `|llr - llr_oracle|` when the oracle ran.
    pub llr_abs_sum: f64,
    pub llr_abs_max: f64,
    pub llr_count: usize,
}

impl PointStats {
    pub fn ser(&self) -> f64 {
        self.symbol_errors as f64 / self.symbols as f64
    }

    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits as f64
    }

    /// Fraction of trials with at least one symbol error.
    pub fn ver(&self) -> f64 {
        self.vector_errors as f64 / self.trials as f64
    }

    pub fn llr_mae(&self) -> Option<f64> {
        (self.llr_count > 0).then(|| self.llr_abs_sum / self.llr_count as f64)
    }

    pub fn llr_max(&self) -> Option<f64> {
        (self.llr_count > 0).then_some(self.llr_abs_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SimConfig,
    pub points: Vec<PointStats>,
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.11e}")
    }
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let cfg = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "{CSV_HEADER}");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                fmt_num(p.snr_db),
                p.trials,
                fmt_num(p.ser()),
                fmt_num(p.ber()),
                fmt_num(p.llr_mae().unwrap_or(f64::NAN)),
                fmt_num(p.llr_max().unwrap_or(f64::NAN)),
                cfg.detector,
                cfg.distance_mode,
                cfg.layers,
                cfg.mods_label(),
                cfg.seed
            );
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
struct TrialOutcome {
    symbol_errors: usize,
    bit_errors: usize,
    llr: Option<(f64, f64, usize)>,
}

struct Detected {
    hard: Vec<usize>,
    llr: Vec<Vec<f64>>,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// One enumerated list with optional H-rescoring and quantization.
fn one_sided(
    cfg: &SimConfig,
    d: &PuncturedDecomposition,
    h_eff: &CMatrix,
    y_tilde: &[Complex64],
    priors: &[Vec<f64>],
    cons: &[Constellation],
) -> Result<CandidateList> {
    let y = d.w.adjoint_mul_vec(y_tilde)?;
    let mut consts = compute_constants(&d.rows(), &y)?;
    if let Some(fmt) = cfg.quant {
        consts = consts.map(|v| quantize(v, fmt));
    }
    let mut list = detect_from_constants(&consts, &d.perm, priors, cons, SliceMode::SoftSlicer)?;
    if cfg.distance_mode == DistanceMode::H {
        list = rescore_candidates(&list, h_eff, y_tilde, priors, cons, DistanceScaling::Unscaled)?;
    }
    if let Some(fmt) = cfg.quant {
        list = list.map_distances(|v| quantize(v, fmt));
    }
    Ok(list)
}

fn detect(
    cfg: &SimConfig,
    h_eff: &CMatrix,
    y_tilde: &[Complex64],
    priors: &[Vec<f64>],
    cons: &[Constellation],
) -> Result<Detected> {
    let priors_q: Vec<Vec<f64>> = match cfg.quant {
        Some(fmt) => priors
            .iter()
            .map(|p| p.iter().map(|&v| quantize(v, fmt)).collect())
            .collect(),
        None => priors.to_vec(),
    };
    let r = match cfg.detector {
        Detector::Map2 => {
            let d1 = PuncturedDecomposition::from_ql(ql_decompose(h_eff)?)?;
            let d2 = PuncturedDecomposition::from_flipped(ql_decompose_flipped(h_eff)?)?;
            let l1 = one_sided(cfg, &d1, h_eff, y_tilde, &priors_q, cons)?;
            let l2 = one_sided(cfg, &d2, h_eff, y_tilde, &priors_q, cons)?;
            llr_two_sided_2layer(&l1, &l2, cons)?
        }
        Detector::Wld => {
            let lists = (0..cfg.layers)
                .map(|m| one_sided(cfg, &wld(h_eff, m)?, h_eff, y_tilde, &priors_q, cons))
                .collect::<Result<Vec<_>>>()?;
            wl_combine(&lists, cons, cfg.distance_mode)?
        }
        Detector::Oracle => {
            let o = exhaustive_map(h_eff, y_tilde, priors, cons)?;
            return Ok(Detected {
                hard: o.hard,
                llr: o.llr,
            });
        }
        Detector::Ml => {
            let (hard, _) = exact_ml(h_eff, y_tilde, cons)?;
            return Ok(Detected { hard, llr: Vec::new() });
        }
    };
    Ok(Detected {
        hard: r.hard,
        llr: r.llr,
    })
}

fn run_trial(cfg: &SimConfig, cons: &[Constellation], snr_idx: usize, trial: usize) -> Result<TrialOutcome> {
    let n = cfg.layers;
    let mut rng = stream_rng(cfg.seed, ((snr_idx as u64) << 32) | trial as u64);
    let h = generate_channel(&mut rng, n, n);
    let x: Vec<usize> = cons.iter().map(|c| rng.random_range(0..c.size())).collect();
    let sigma = (n as f64 / 10f64.powf(cfg.snr_db[snr_idx] / 10.0)).sqrt();
    let noise: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng, 1.0) * sigma).collect();
    let priors: Vec<Vec<f64>> = cons
        .iter()
        .map(|c| match cfg.priors {
            PriorsMode::Zero => vec![0.0; c.bits()],
            PriorsMode::Random(s) => (0..c.bits())
                .map(|_| s * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        })
        .collect();

    let scales: Vec<f64> = cfg.mods.iter().map(|m| m.scale()).collect();
    let h_eff = h.scale_columns(&scales);
    let points: Vec<Complex64> = x.iter().zip(cons).map(|(&s, c)| c.point(s)).collect();
    let y_tilde: Vec<Complex64> = h_eff.mul_vec(&points)?.iter().zip(&noise).map(|(a, b)| a + b).collect();

    let det = detect(cfg, &h_eff, &y_tilde, &priors, cons)?;
    let mut out = TrialOutcome::default();
    for (layer, c) in cons.iter().enumerate() {
        if det.hard[layer] != x[layer] {
            out.symbol_errors += 1;
            out.bit_errors += (0..c.bits())
                .filter(|&j| c.bit(det.hard[layer], j) != c.bit(x[layer], j))
                .count();
        }
    }

    if cfg.shadow_oracle {
        let oracle = if cfg.detector == Detector::Oracle {
            Detected {
                hard: det.hard.clone(),
                llr: det.llr.clone(),
            }
        } else {
            let o = exhaustive_map(&h_eff, &y_tilde, &priors, cons)?;
            Detected {
                hard: o.hard,
                llr: o.llr,
            }
        };
        let (mut sum, mut max, mut count) = (0.0, 0.0f64, 0);
        for (a, b) in det.llr.iter().flatten().zip(oracle.llr.iter().flatten()) {
            let dev = (a - b).abs();
            sum += dev;
            max = max.max(dev);
            count += 1;
        }
        // Only the unquantized two-layer detector claims exact equality.
        if cfg.detector == Detector::Map2 && cfg.quant.is_none() {
            let worst = det
                .llr
                .iter()
                .flatten()
                .zip(oracle.llr.iter().flatten())
                .map(|(&a, &b)| rel_diff(a, b))
                .fold(0.0, f64::max);
            if det.hard != oracle.hard || worst > SHADOW_TOL {
                return Err(DetectError::OracleMismatch {
                    snr_idx,
                    trial,
                    detail: format!(
                        "hard {:?} vs oracle {:?}, worst relative LLR deviation {worst:e}",
                        det.hard, oracle.hard
                    ),
                });
            }
        }
        out.llr = Some((sum, max, count));
    }
    Ok(out)
}

/// Runs every (SNR, trial) pair and reduces in (SNR, trial) order.
pub fn run_sweep(cfg: &SimConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let cons: Vec<Constellation> = cfg.mods.iter().map(|&m| Constellation::new(m)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| DetectError::Config(format!("cannot build thread pool: {e}")))?;
    let bits_per_vector: usize = cons.iter().map(Constellation::bits).sum();
    let mut points = Vec::with_capacity(cfg.snr_db.len());
    for (snr_idx, &snr_db) in cfg.snr_db.iter().enumerate() {
        let outcomes: Vec<Result<TrialOutcome>> = pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(cfg, &cons, snr_idx, t))
                .collect()
        });
        let mut p = PointStats {
            snr_db,
            trials: cfg.trials,
            vector_errors: 0,
            symbol_errors: 0,
            bit_errors: 0,
            symbols: cfg.trials * cfg.layers,
            bits: cfg.trials * bits_per_vector,
            llr_abs_sum: 0.0,
            llr_abs_max: 0.0,
            llr_count: 0,
        };
        for o in outcomes {
            let o = o?;
            p.vector_errors += usize::from(o.symbol_errors > 0);
            p.symbol_errors += o.symbol_errors;
            p.bit_errors += o.bit_errors;
            if let Some((sum, max, count)) = o.llr {
                p.llr_abs_sum += sum;
                p.llr_abs_max = p.llr_abs_max.max(max);
                p.llr_count += count;
            }
        }
        points.push(p);
    }
    Ok(SweepResult {
        config: cfg.clone(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityStats {
    pub mean: f64,
    pub max: f64,
    pub count: usize,
}

/// Mean and maximum `|llr - llr_oracle|` over every bit of every trial.
pub fn llr_fidelity(cfg: &SimConfig) -> Result<FidelityStats> {
    let mut cfg = cfg.clone();
    cfg.shadow_oracle = true;
    let r = run_sweep(&cfg)?;
    let count: usize = r.points.iter().map(|p| p.llr_count).sum();
    let sum: f64 = r.points.iter().map(|p| p.llr_abs_sum).sum();
    let max = r.points.iter().map(|p| p.llr_abs_max).fold(0.0, f64::max);
    Ok(FidelityStats {
        mean: sum / count as f64,
        max,
        count,
    })
}
