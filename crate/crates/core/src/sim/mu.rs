use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::constellation::{Constellation, ModScheme};
use crate::error::{DetectError, Result};
use crate::llrpost::hd_from_list;
use crate::mumimo::{classify_interferer, MuScenario, MuTone};

use super::channel::{complex_gaussian, generate_channel};
use super::rng::stream_rng;

pub const MU_CSV_HEADER: &str = "snr_db,interferer,trials,p_correct,ser_desired,seed";

#[derive(Debug, Clone, PartialEq)]
pub struct MuConfig {
    /// Tones in the classification window.
    pub k: usize,
    pub desired: ModScheme,
    /// True interferer constellations to simulate.
    pub interferers: Vec<ModScheme>,
    /// `2 / sigma^2` per receive antenna (two unit-energy users).
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub threads: usize,
}

impl MuConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(DetectError::Config(m.into()));
        if self.k == 0 {
            return err("k must be at least 1");
        }
        if self.trials == 0 || self.trials > u32::MAX as usize {
            return err("trials must be in 1..=2^32-1");
        }
        if self.interferers.is_empty() || self.interferers.contains(&ModScheme::Bpsk) {
            return err("interferers must be a non-empty list of QAM orders");
        }
        if self.desired == ModScheme::Bpsk {
            return err("the desired user must use QAM");
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|v| !v.is_finite()) {
            return err("SNR grid must be non-empty and finite");
        }
        if self.threads == 0 {
            return err("threads must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuPoint {
    pub snr_db: f64,
    pub interferer: ModScheme,
    pub trials: usize,
    pub correct: usize,
    /// Desired-symbol errors under the classified hypothesis.
    pub symbol_errors: usize,
    pub symbols: usize,
}

impl MuPoint {
    pub fn p_correct(&self) -> f64 {
        self.correct as f64 / self.trials as f64
    }

    pub fn ser(&self) -> f64 {
        self.symbol_errors as f64 / self.symbols as f64
    }
}

/// Scenario of one trial. The stream depends on the interferer and trial
/// only, so every SNR point sees the same channels, symbols and unit noise.
fn scenario(cfg: &MuConfig, interferer_idx: usize, trial: usize, snr_db: f64) -> (MuScenario, Vec<usize>) {
    let mut rng = stream_rng(cfg.seed, ((interferer_idx as u64) << 32) | trial as u64);
    let xi = cfg.interferers[interferer_idx];
    let (cs, ci) = (Constellation::new(cfg.desired), Constellation::new(xi));
    let sigma2 = 2.0 / 10f64.powf(snr_db / 10.0);
    let sigma = sigma2.sqrt();
    let mut sent = Vec::with_capacity(cfg.k);
    let tones = (0..cfg.k)
        .map(|_| {
            let h = generate_channel(&mut rng, 2, 2);
            let s1 = rng.random_range(0..cs.size());
            let s2 = rng.random_range(0..ci.size());
            let x = [cs.point(s1) * cfg.desired.scale(), ci.point(s2) * xi.scale()];
            let y: Vec<Complex64> = (0..2)
                .map(|r| h[(r, 0)] * x[0] + h[(r, 1)] * x[1] + complex_gaussian(&mut rng, 1.0) * sigma)
                .collect();
            sent.push(s1);
            MuTone { h, y }
        })
        .collect();
    (
        MuScenario {
            tones,
            desired: cfg.desired,
            sigma2,
        },
        sent,
    )
}

fn run_trial(cfg: &MuConfig, interferer_idx: usize, trial: usize, snr_db: f64) -> Result<(bool, usize)> {
    let (s, sent) = scenario(cfg, interferer_idx, trial, snr_db);
    let class = classify_interferer(&s)?;
    let mut errors = 0;
    for (list, &tx) in class.chosen().lists.iter().zip(&sent) {
        let (hard, _) = hd_from_list(list)?;
        errors += usize::from(hard[0] != tx);
    }
    Ok((class.interferer == cfg.interferers[interferer_idx], errors))
}

pub fn run_mu(cfg: &MuConfig) -> Result<Vec<MuPoint>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| DetectError::Config(format!("cannot build thread pool: {e}")))?;
    let mut points = Vec::new();
    for &snr_db in &cfg.snr_db {
        for (ii, &xi) in cfg.interferers.iter().enumerate() {
            let outcomes: Vec<Result<(bool, usize)>> = pool.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| run_trial(cfg, ii, t, snr_db))
                    .collect()
            });
            let mut p = MuPoint {
                snr_db,
                interferer: xi,
                trials: cfg.trials,
                correct: 0,
                symbol_errors: 0,
                symbols: cfg.trials * cfg.k,
            };
            for o in outcomes {
                let (ok, errors) = o?;
                p.correct += usize::from(ok);
                p.symbol_errors += errors;
            }
            points.push(p);
        }
    }
    Ok(points)
}

pub fn mu_csv(points: &[MuPoint], seed: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MU_CSV_HEADER}");
    for p in points {
        let _ = writeln!(
            out,
            "{:.11e},{},{},{:.11e},{:.11e},{}",
            p.snr_db,
            p.interferer.order(),
            p.trials,
            p.p_correct(),
            p.ser(),
            seed
        );
    }
    out
}
