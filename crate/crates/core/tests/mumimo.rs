use num_complex::Complex64;
use rand::Rng;

use mimo_detect::constellation::{Constellation, ModScheme};
use mimo_detect::linalg::CMatrix;
use mimo_detect::mumimo::{
    classify_interferer, count_distance_evals, mu_llr, MuScenario, MuTone, PrbLayout, HYPOTHESES,
};
use mimo_detect::sim::{complex_gaussian, generate_channel, stream_rng};

fn scenario(seed: u64, k: usize, desired: ModScheme, xi: ModScheme, sigma2: f64) -> MuScenario {
    let mut rng = stream_rng(seed, 0);
    let (cd, ci) = (Constellation::new(desired), Constellation::new(xi));
    let tones = (0..k)
        .map(|_| {
            let h = generate_channel(&mut rng, 2, 2);
            let x = [
                cd.point(rng.random_range(0..cd.size())) * desired.scale(),
                ci.point(rng.random_range(0..ci.size())) * xi.scale(),
            ];
            let y = (0..2)
                .map(|r| h[(r, 0)] * x[0] + h[(r, 1)] * x[1] + complex_gaussian(&mut rng, sigma2))
                .collect();
            MuTone { h, y }
        })
        .collect();
    MuScenario { tones, desired, sigma2 }
}

/// Joint enumeration of both users' symbols on one tone.
fn brute_llr(tone: &MuTone, desired: ModScheme, xi: ModScheme, sigma2: f64) -> Vec<f64> {
    let (cd, ci) = (Constellation::new(desired), Constellation::new(xi));
    let mut plus = vec![f64::INFINITY; cd.bits()];
    let mut minus = vec![f64::INFINITY; cd.bits()];
    for s1 in 0..cd.size() {
        for s2 in 0..ci.size() {
            let x = [cd.point(s1) * desired.scale(), ci.point(s2) * xi.scale()];
            let d: f64 = (0..2)
                .map(|r| (tone.y[r] - tone.h[(r, 0)] * x[0] - tone.h[(r, 1)] * x[1]).norm_sqr())
                .sum::<f64>()
                / sigma2;
            for j in 0..cd.bits() {
                let slot = if cd.bit(s1, j) > 0 { &mut plus[j] } else { &mut minus[j] };
                *slot = slot.min(d);
            }
        }
    }
    plus.iter().zip(&minus).map(|(p, m)| p - m).collect()
}

#[test]
fn desired_llrs_match_joint_enumeration() {
    for (seed, (desired, xi)) in [
        (ModScheme::Qam64, ModScheme::Qam4),
        (ModScheme::Qam16, ModScheme::Qam256),
        (ModScheme::Qam4, ModScheme::Qam64),
    ]
    .into_iter()
    .enumerate()
    {
        let s = scenario(seed as u64, 12, desired, xi, 0.05);
        for hyp in HYPOTHESES {
            for k in 0..s.tones.len() {
                let got = mu_llr(&s, hyp, k).unwrap();
                let want = brute_llr(&s.tones[k], desired, hyp, s.sigma2);
                for (a, b) in got.iter().zip(&want) {
                    assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0), "{a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn noiseless_classification_over_random_channels() {
    for seed in 0..20u64 {
        for xi in HYPOTHESES {
            let s = scenario(100 + seed, 24, ModScheme::Qam64, xi, 1e-6);
            assert_eq!(classify_interferer(&s).unwrap().interferer, xi, "seed {seed}");
        }
    }
}

#[test]
fn absent_interferer_column_is_tolerated() {
    let mut s = scenario(7, 4, ModScheme::Qam16, ModScheme::Qam4, 0.1);
    for t in &mut s.tones {
        t.h = CMatrix::from_fn(2, 2, |r, c| if c == 1 { Complex64::new(0.0, 0.0) } else { t.h[(r, c)] });
    }
    let c = classify_interferer(&s).unwrap();
    // Every interferer hypothesis fits equally well, so the penalty picks 4-QAM.
    assert_eq!(c.interferer, ModScheme::Qam4);
    let sums: Vec<f64> = c.scores.iter().map(|h| h.distance_sum).collect();
    assert!(sums.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-9));
}

#[test]
fn distance_evaluation_overhead() {
    let c = count_distance_evals(PrbLayout::LTE, 64);
    assert_eq!(c.ratio, 200.0 / 140.0);
    assert!(c.total > c.baseline);
}
