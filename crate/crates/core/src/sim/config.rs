use std::fmt;
use std::str::FromStr;

use crate::constellation::ModScheme;
use crate::error::{DetectError, Result};
use crate::hwmodel::FixedPointFormat;
use crate::llrpost::DistanceMode;
use crate::oracle::ENUMERATION_BUDGET;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    /// Two one-sided lists (QL and flipped QL) of a 2-layer system.
    Map2,
    /// One punctured-decomposition list per layer, combined by minima.
    Wld,
    /// Exhaustive enumeration.
    Oracle,
    /// Exact zero-prior ML hard decisions (no LLRs).
    Ml,
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detector::Map2 => "map2",
            Detector::Wld => "wld",
            Detector::Oracle => "oracle",
            Detector::Ml => "ml",
        })
    }
}

impl FromStr for Detector {
    type Err = DetectError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "map2" => Ok(Detector::Map2),
            "wld" => Ok(Detector::Wld),
            "oracle" => Ok(Detector::Oracle),
            "ml" => Ok(Detector::Ml),
            other => Err(DetectError::Config(format!(
                "unknown detector {other:?} (expected map2, wld, oracle or ml)"
            ))),
        }
    }
}

/// Prior LLRs fed to the detector, in the detector's distance units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorsMode {
    Zero,
    /// i.i.d. N(0, sigma^2) per bit, independent of the transmitted bits.
    Random(f64),
}

impl fmt::Display for PriorsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorsMode::Zero => f.write_str("zero"),
            PriorsMode::Random(s) => write!(f, "random:{s}"),
        }
    }
}

impl FromStr for PriorsMode {
    type Err = DetectError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "zero" {
            return Ok(PriorsMode::Zero);
        }
        let bad = || DetectError::Config(format!("priors must be zero or random:<sigma>, got {s:?}"));
        let sigma: f64 = s.strip_prefix("random:").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(bad());
        }
        Ok(PriorsMode::Random(sigma))
    }
}

pub fn parse_distance_mode(s: &str) -> Result<DistanceMode> {
    match s {
        "L" | "l" => Ok(DistanceMode::L),
        "H" | "h" => Ok(DistanceMode::H),
        other => Err(DetectError::Config(format!(
            "distance mode must be L or H, got {other:?}"
        ))),
    }
}

/// `a:step:b` (inclusive), a comma list, or a single value.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || DetectError::Config(format!("cannot parse SNR grid {s:?}"));
    let num = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, step, b] => {
            let (a, step, b) = (num(a)?, num(step)?, num(b)?);
            if step <= 0.0 || b < a {
                return Err(bad());
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| a + i as f64 * step).collect())
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

/// Comma-separated constellation sizes, e.g. `64,64` (`2` is BPSK).
pub fn parse_mods(s: &str) -> Result<Vec<ModScheme>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let order = if t.eq_ignore_ascii_case("bpsk") {
                Some(2)
            } else {
                t.parse().ok()
            };
            order
                .and_then(ModScheme::from_order)
                .ok_or_else(|| DetectError::Config(format!("unknown modulation {t:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub layers: usize,
    pub mods: Vec<ModScheme>,
    /// SNR per receive antenna, `N / sigma^2` with unit-energy symbols.
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub detector: Detector,
    pub distance_mode: DistanceMode,
    pub priors: PriorsMode,
    /// Applied to detector constants, priors and candidate distances.
    pub quant: Option<FixedPointFormat>,
    pub seed: u64,
    pub threads: usize,
    /// Run the exhaustive oracle alongside the detector on every trial.
    pub shadow_oracle: bool,
}

impl SimConfig {
    /// Single-point, single-thread WLD run with zero priors.
    pub fn new(layers: usize, mods: Vec<ModScheme>) -> Self {
        Self {
            layers,
            mods,
            snr_db: vec![10.0],
            trials: 1000,
            detector: Detector::Wld,
            distance_mode: DistanceMode::H,
            priors: PriorsMode::Zero,
            quant: None,
            seed: 0,
            threads: 1,
            shadow_oracle: false,
        }
    }

    pub fn hypotheses(&self) -> u128 {
        self.mods.iter().map(|m| m.order() as u128).product()
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(DetectError::Config(m));
        if !(2..=4).contains(&self.layers) {
            return err(format!("layers must be 2..=4, got {}", self.layers));
        }
        if self.mods.len() != self.layers {
            return err(format!(
                "{} modulations given for {} layers",
                self.mods.len(),
                self.layers
            ));
        }
        if self.trials == 0 || self.trials > u32::MAX as usize {
            return err(format!("trials must be in 1..=2^32-1, got {}", self.trials));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|v| !v.is_finite()) {
            return err("SNR grid must be non-empty and finite".into());
        }
        if self.threads == 0 {
            return err("threads must be at least 1".into());
        }
        if self.detector == Detector::Map2 && self.layers != 2 {
            return err("the map2 detector handles exactly 2 layers".into());
        }
        if (self.detector == Detector::Oracle || self.shadow_oracle) && self.hypotheses() > ENUMERATION_BUDGET {
            return err(format!(
                "oracle needs {} hypotheses, above the budget of {ENUMERATION_BUDGET}",
                self.hypotheses()
            ));
        }
        if matches!(self.detector, Detector::Oracle | Detector::Ml) && self.quant.is_some() {
            return err("quantization applies to map2 and wld only".into());
        }
        if self.detector == Detector::Ml && self.priors != PriorsMode::Zero {
            return err("the ml detector ignores priors; use --priors zero".into());
        }
        if let PriorsMode::Random(s) = self.priors {
            if !s.is_finite() || s < 0.0 {
                return err(format!("prior standard deviation must be >= 0, got {s}"));
            }
        }
        Ok(())
    }

    /// `"64/64"`-style label used in CSV output.
    pub fn mods_label(&self) -> String {
        self.mods
            .iter()
            .map(|m| m.order().to_string())
            .collect::<Vec<_>>()
            .join("/")
    }
}
