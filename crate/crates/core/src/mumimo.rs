//! Two-user MU-MIMO: joint ML classification of the co-scheduled
//! interferer's constellation and desired-user LLRs.
//!
//! Every tone carries `y = h1 x1 + h2 x2 + n` with unit-energy symbols. For
//! each candidate interferer constellation the desired symbol is enumerated
//! and the interferer sliced, and the hypothesis score is
//! `K ln|X_I| + sum_k min_x ||y_k - H_k x||^2 / sigma^2`.

use num_complex::Complex64;

use crate::constellation::{Constellation, ModScheme};
use crate::decomp::{ql_decompose_relaxed, PuncturedDecomposition};
use crate::detcore::{detect_one_sided, zero_priors, CandidateList, SliceMode};
use crate::error::{DetectError, Result};
use crate::linalg::CMatrix;
use crate::llrpost::hd_from_list;

/// Interferer constellations considered by the classifier.
pub const HYPOTHESES: [ModScheme; 4] = [ModScheme::Qam4, ModScheme::Qam16, ModScheme::Qam64, ModScheme::Qam256];

#[derive(Debug, Clone, PartialEq)]
pub struct MuTone {
    /// 2x2 channel for unit-energy symbols; column 0 is the desired user.
    pub h: CMatrix,
    pub y: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuScenario {
    pub tones: Vec<MuTone>,
    pub desired: ModScheme,
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisScore {
    pub interferer: ModScheme,
    /// Sum over tones of the noise-normalized minimum distance.
    pub distance_sum: f64,
    /// `K ln |X_I|`.
    pub penalty: f64,
    /// Per-tone lists with noise-normalized absolute distances.
    pub lists: Vec<CandidateList>,
}

impl HypothesisScore {
    pub fn score(&self) -> f64 {
        self.penalty + self.distance_sum
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub interferer: ModScheme,
    /// One entry per hypothesis, in [`HYPOTHESES`] order.
    pub scores: Vec<HypothesisScore>,
}

impl Classification {
    pub fn chosen(&self) -> &HypothesisScore {
        self.scores
            .iter()
            .find(|s| s.interferer == self.interferer)
            .expect("chosen hypothesis is scored")
    }
}

fn check_scenario(s: &MuScenario) -> Result<()> {
    if s.tones.is_empty() {
        return Err(DetectError::Config("MU-MIMO scenario needs at least one tone".into()));
    }
    if s.sigma2.is_nan() || s.sigma2 <= 0.0 {
        return Err(DetectError::Config(format!(
            "noise variance must be positive, got {}",
            s.sigma2
        )));
    }
    for t in &s.tones {
        if t.h.rows() != 2 || t.h.cols() != 2 || t.y.len() != 2 {
            return Err(DetectError::Dimension("MU-MIMO tones are 2x2".into()));
        }
    }
    Ok(())
}

/// Noise-normalized candidate list of one tone under interferer `xi`.
///
/// A vanishing interferer column is allowed: the sliced layer then has a
/// zero diagonal and every interferer level scores the same.
pub fn tone_list(tone: &MuTone, desired: ModScheme, xi: ModScheme, sigma2: f64) -> Result<CandidateList> {
    let h_eff = tone.h.scale_columns(&[desired.scale(), xi.scale()]);
    let h1_norm: f64 = (0..2).map(|r| h_eff[(r, 0)].norm_sqr()).sum::<f64>().sqrt();
    if h1_norm == 0.0 {
        return Err(DetectError::SingularChannel {
            value: 0.0,
            threshold: 0.0,
        });
    }
    let d = PuncturedDecomposition::from_ql(ql_decompose_relaxed(&h_eff)?)?;
    let y = d.w.adjoint_mul_vec(&tone.y)?;
    let cons = [Constellation::new(desired), Constellation::new(xi)];
    let list = detect_one_sided(&d, &y, &zero_priors(&cons), &cons, SliceMode::SoftSlicer)?;
    Ok(list.map_distances(|v| v / sigma2))
}

pub fn score_hypothesis(s: &MuScenario, xi: ModScheme) -> Result<HypothesisScore> {
    check_scenario(s)?;
    let lists = s
        .tones
        .iter()
        .map(|t| tone_list(t, s.desired, xi, s.sigma2))
        .collect::<Result<Vec<_>>>()?;
    let mut distance_sum = 0.0;
    for list in &lists {
        distance_sum += hd_from_list(list)?.1;
    }
    Ok(HypothesisScore {
        interferer: xi,
        distance_sum,
        penalty: s.tones.len() as f64 * (xi.order() as f64).ln(),
        lists,
    })
}

/// Index of the smallest score; the earlier (smaller) constellation wins ties.
pub fn select_hypothesis(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in scores.iter().enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

pub fn classify_interferer(s: &MuScenario) -> Result<Classification> {
    let scores = HYPOTHESES
        .iter()
        .map(|&xi| score_hypothesis(s, xi))
        .collect::<Result<Vec<_>>>()?;
    let totals: Vec<f64> = scores.iter().map(HypothesisScore::score).collect();
    let best = select_hypothesis(&totals).expect("hypothesis set is non-empty");
    Ok(Classification {
        interferer: HYPOTHESES[best],
        scores,
    })
}

/// Desired-user LLRs from a noise-normalized list that enumerates layer 0.
pub fn llr_from_list(list: &CandidateList, desired: &Constellation) -> Result<Vec<f64>> {
    if list.entries.len() != desired.size() || list.detect_layer != 0 {
        return Err(DetectError::Dimension(
            "list does not enumerate the desired constellation".into(),
        ));
    }
    (0..desired.bits())
        .map(|j| {
            let mut plus = f64::INFINITY;
            let mut minus = f64::INFINITY;
            for (i, cand) in list.entries.iter().enumerate() {
                let d = list.absolute(i);
                if desired.bit(cand.symbols[0], j) > 0 {
                    plus = plus.min(d);
                } else {
                    minus = minus.min(d);
                }
            }
            if plus.is_infinite() || minus.is_infinite() {
                Err(DetectError::EmptyPartition { layer: 0, bit: j })
            } else {
                Ok(plus - minus)
            }
        })
        .collect()
}

/// LLRs of the desired symbol on tone `k` assuming interferer `xi`.
pub fn mu_llr(s: &MuScenario, xi: ModScheme, k: usize) -> Result<Vec<f64>> {
    check_scenario(s)?;
    let tone = s.tones.get(k).ok_or(DetectError::LayerIndex {
        index: k,
        layers: s.tones.len(),
    })?;
    let list = tone_list(tone, s.desired, xi, s.sigma2)?;
    llr_from_list(&list, &Constellation::new(s.desired))
}

/// Resource layout entering the distance-evaluation count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrbLayout {
    /// Data tones detected per resource block pair.
    pub data_tones: usize,
    /// Tones of the classification window.
    pub classification_tones: usize,
    /// Extra one-sided detections per classification tone.
    pub extra_per_tone: usize,
}

impl PrbLayout {
    /// 140 data tones with 12 classification tones and 5 extra runs each.
    pub const LTE: PrbLayout = PrbLayout {
        data_tones: 140,
        classification_tones: 12,
        extra_per_tone: 5,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceEvalCount {
    pub classification: usize,
    pub total: usize,
    pub baseline: usize,
    pub ratio: f64,
}

pub fn count_distance_evals(layout: PrbLayout, desired_size: usize) -> DistanceEvalCount {
    let classification = layout.classification_tones * layout.extra_per_tone * desired_size;
    let baseline = layout.data_tones * desired_size;
    let total = baseline + classification;
    DistanceEvalCount {
        classification,
        total,
        baseline,
        ratio: total as f64 / baseline as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exhaustive_map;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tone(h: [[Complex64; 2]; 2], x: [Complex64; 2], noise: [Complex64; 2]) -> MuTone {
        let h = CMatrix::from_rows(&[h[0].to_vec(), h[1].to_vec()]).unwrap();
        let y = (0..2).map(|r| h[(r, 0)] * x[0] + h[(r, 1)] * x[1] + noise[r]).collect();
        MuTone { h, y }
    }

    fn sample_h() -> [[Complex64; 2]; 2] {
        [[c(0.8, -0.3), c(0.2, 0.5)], [c(-0.4, 0.6), c(1.1, -0.2)]]
    }

    #[test]
    fn eval_counts() {
        let r = count_distance_evals(PrbLayout::LTE, 64);
        assert_eq!(r.total, 12800);
        assert_eq!(r.ratio, 200.0 / 140.0);
        assert_eq!(count_distance_evals(PrbLayout::LTE, 4).ratio, r.ratio);
        let doubled = PrbLayout {
            classification_tones: 24,
            ..PrbLayout::LTE
        };
        assert_eq!(count_distance_evals(doubled, 64).classification, 2 * r.classification);
    }

    #[test]
    fn equal_sums_prefer_smaller_constellation() {
        assert_eq!(select_hypothesis(&[3.0, 3.0, 5.0]), Some(0));
        assert_eq!(select_hypothesis(&[]), None);
    }

    #[test]
    fn llr_matches_exhaustive_oracle() {
        let desired = Constellation::new(ModScheme::Qam16);
        let interferer = Constellation::new(ModScheme::Qam4);
        let x = [
            desired.point(7) * ModScheme::Qam16.scale(),
            interferer.point(2) * ModScheme::Qam4.scale(),
        ];
        let t = tone(sample_h(), x, [c(0.05, -0.02), c(-0.03, 0.04)]);
        let sigma2 = 0.01;
        let s = MuScenario {
            tones: vec![t.clone()],
            desired: ModScheme::Qam16,
            sigma2,
        };
        let llr = mu_llr(&s, ModScheme::Qam4, 0).unwrap();
        let h_eff = t.h.scale_columns(&[ModScheme::Qam16.scale(), ModScheme::Qam4.scale()]);
        let cons = [desired.clone(), interferer];
        let oracle = exhaustive_map(&h_eff, &t.y, &zero_priors(&cons), &cons).unwrap();
        for (a, b) in llr.iter().zip(&oracle.llr[0]) {
            assert!(
                (a - b / sigma2).abs() <= 1e-9 * a.abs().max(1.0),
                "{a} vs {}",
                b / sigma2
            );
        }
    }

    #[test]
    fn vanishing_interferer_is_single_user_demapping() {
        let desired = Constellation::new(ModScheme::Qam4);
        let scale = ModScheme::Qam4.scale();
        let mut h = sample_h();
        h[0][1] = c(0.0, 0.0);
        h[1][1] = c(0.0, 0.0);
        let t = tone(h, [desired.point(1) * scale, c(0.0, 0.0)], [c(0.1, 0.0), c(0.0, -0.1)]);
        let s = MuScenario {
            tones: vec![t.clone()],
            desired: ModScheme::Qam4,
            sigma2: 0.5,
        };
        let llr = mu_llr(&s, ModScheme::Qam16, 0).unwrap();
        let single: Vec<f64> = (0..4)
            .map(|sym| {
                let x = desired.point(sym) * scale;
                (0..2).map(|r| (t.y[r] - t.h[(r, 0)] * x).norm_sqr()).sum::<f64>() / 0.5
            })
            .collect();
        for (j, v) in llr.iter().enumerate() {
            let plus = (0..4)
                .filter(|&s| desired.bit(s, j) > 0)
                .map(|s| single[s])
                .fold(f64::INFINITY, f64::min);
            let minus = (0..4)
                .filter(|&s| desired.bit(s, j) < 0)
                .map(|s| single[s])
                .fold(f64::INFINITY, f64::min);
            assert!((v - (plus - minus)).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_bits_have_matching_sign() {
        let desired = Constellation::new(ModScheme::Qam64);
        let sym = 45;
        let x = [
            desired.point(sym) * ModScheme::Qam64.scale(),
            Constellation::new(ModScheme::Qam16).point(3) * ModScheme::Qam16.scale(),
        ];
        let t = tone(sample_h(), x, [c(0.0, 0.0); 2]);
        let s = MuScenario {
            tones: vec![t],
            desired: ModScheme::Qam64,
            sigma2: 1e-3,
        };
        let llr = mu_llr(&s, ModScheme::Qam16, 0).unwrap();
        for (j, v) in llr.iter().enumerate() {
            if desired.bit(sym, j) > 0 {
                assert!(*v <= 0.0);
            } else {
                assert!(*v >= 0.0);
            }
        }
    }

    #[test]
    fn penalty_difference() {
        let desired = Constellation::new(ModScheme::Qam4);
        let t = tone(sample_h(), [desired.point(0) * 0.7, c(0.3, 0.1)], [c(0.0, 0.0); 2]);
        let s = MuScenario {
            tones: vec![t.clone(), t.clone(), t],
            desired: ModScheme::Qam4,
            sigma2: 0.1,
        };
        let a = score_hypothesis(&s, ModScheme::Qam4).unwrap();
        let b = score_hypothesis(&s, ModScheme::Qam64).unwrap();
        assert!((b.penalty - a.penalty - 3.0 * 16f64.ln()).abs() < 1e-12);
        let class = classify_interferer(&s).unwrap();
        assert_eq!(class.scores.len(), 4);
        assert!(classify_interferer(&MuScenario { tones: vec![], ..s }).is_err());
    }
}
