use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use mimo_detect::constellation::{Constellation, ModScheme};
use mimo_detect::decomp::{ql_decompose, ql_decompose_flipped, transform_observation, wld, PuncturedDecomposition};
use mimo_detect::detcore::{
    detect_one_sided, direct_distance, rescore_candidates, zero_priors, CandidateList, DistanceScaling, SliceMode,
};
use mimo_detect::linalg::CMatrix;
use mimo_detect::llrpost::{check_list_consistency, llr_two_sided_2layer, wl_combine, DistanceMode};
use mimo_detect::oracle::{exact_ml, exhaustive_map};
use mimo_detect::sim::{complex_gaussian, generate_channel, stream_rng};
use mimo_detect::DetectError;

struct Instance {
    h: CMatrix,
    y: Vec<Complex64>,
    priors: Vec<Vec<f64>>,
    cons: Vec<Constellation>,
}

fn instance(rng: &mut ChaCha8Rng, mods: &[ModScheme], sigma2: f64, prior_sigma: f64) -> Instance {
    let n = mods.len();
    let cons: Vec<Constellation> = mods.iter().map(|&m| Constellation::new(m)).collect();
    let scales: Vec<f64> = mods.iter().map(|m| m.scale()).collect();
    let h = generate_channel(rng, n, n).scale_columns(&scales);
    let x: Vec<Complex64> = cons.iter().map(|c| c.point(rng.random_range(0..c.size()))).collect();
    let y = h
        .mul_vec(&x)
        .unwrap()
        .iter()
        .map(|v| v + complex_gaussian(rng, sigma2))
        .collect();
    let priors = cons
        .iter()
        .map(|c| {
            (0..c.bits())
                .map(|_| prior_sigma * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    Instance { h, y, priors, cons }
}

fn wld_lists(t: &Instance, mode: SliceMode) -> Vec<CandidateList> {
    (0..t.cons.len())
        .map(|m| {
            let d = wld(&t.h, m).unwrap();
            let yt = transform_observation(&d, &t.y).unwrap();
            detect_one_sided(&d, &yt, &t.priors, &t.cons, mode).unwrap()
        })
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn two_layer_list_distances_are_exact_metrics() {
    for trial in 0..300 {
        let mut rng = stream_rng(11, trial);
        let t = instance(&mut rng, &[ModScheme::Qam16, ModScheme::Qam64], 0.1, 1.0);
        let d = PuncturedDecomposition::from_ql(ql_decompose(&t.h).unwrap()).unwrap();
        let list = detect_one_sided(
            &d,
            &d.w.adjoint_mul_vec(&t.y).unwrap(),
            &t.priors,
            &t.cons,
            SliceMode::SoftSlicer,
        )
        .unwrap();
        assert_eq!(list.len(), 16);
        for (i, c) in list.entries.iter().enumerate() {
            assert_eq!(c.symbols[0], i);
            let direct = direct_distance(&t.h, &t.y, &c.symbols, &t.priors, &t.cons, DistanceScaling::Unscaled);
            assert!(
                close(list.absolute(i), direct),
                "trial {trial}: {} vs {direct}",
                list.absolute(i)
            );
        }
    }
}

#[test]
fn two_layer_lists_are_consistent_and_match_oracle_with_bpsk() {
    for trial in 0..500 {
        let mut rng = stream_rng(12, trial);
        let t = instance(&mut rng, &[ModScheme::Bpsk, ModScheme::Qam16], 0.3, 2.0);
        let d1 = PuncturedDecomposition::from_ql(ql_decompose(&t.h).unwrap()).unwrap();
        let d2 = PuncturedDecomposition::from_flipped(ql_decompose_flipped(&t.h).unwrap()).unwrap();
        let l1 = detect_one_sided(
            &d1,
            &d1.w.adjoint_mul_vec(&t.y).unwrap(),
            &t.priors,
            &t.cons,
            SliceMode::SoftSlicer,
        )
        .unwrap();
        let l2 = detect_one_sided(
            &d2,
            &d2.w.adjoint_mul_vec(&t.y).unwrap(),
            &t.priors,
            &t.cons,
            SliceMode::SoftSlicer,
        )
        .unwrap();
        check_list_consistency(&l1, &l2, 1e-9).unwrap();
        let det = llr_two_sided_2layer(&l1, &l2, &t.cons).unwrap();
        let oracle = exhaustive_map(&t.h, &t.y, &t.priors, &t.cons).unwrap();
        assert_eq!(det.hard, oracle.hard);
        for (a, b) in det.llr.iter().flatten().zip(oracle.llr.iter().flatten()) {
            assert!(close(*a, *b), "trial {trial}: {a} vs {b}");
        }
    }
}

#[test]
fn slicer_and_exhaustive_inner_minimization_agree() {
    for (trial, mods) in [
        vec![ModScheme::Qam16; 3],
        vec![ModScheme::Qam4, ModScheme::Qam64, ModScheme::Qam16, ModScheme::Bpsk],
    ]
    .iter()
    .cycle()
    .take(200)
    .enumerate()
    {
        let mut rng = stream_rng(13, trial as u64);
        let t = instance(&mut rng, mods, 0.2, 1.5);
        assert_eq!(
            wld_lists(&t, SliceMode::SoftSlicer),
            wld_lists(&t, SliceMode::ExhaustiveMin)
        );
    }
}

#[test]
fn two_layer_wld_reduces_to_ql_list() {
    for trial in 0..200 {
        let mut rng = stream_rng(14, trial);
        let t = instance(&mut rng, &[ModScheme::Qam64, ModScheme::Qam4], 0.05, 1.0);
        let d = PuncturedDecomposition::from_ql(ql_decompose(&t.h).unwrap()).unwrap();
        let ql = detect_one_sided(
            &d,
            &d.w.adjoint_mul_vec(&t.y).unwrap(),
            &t.priors,
            &t.cons,
            SliceMode::SoftSlicer,
        )
        .unwrap();
        let w = &wld_lists(&t, SliceMode::SoftSlicer)[0];
        for (a, b) in ql.entries.iter().zip(&w.entries) {
            assert_eq!(a.symbols, b.symbols);
        }
    }
}

/// Per-bit minima over the union of all entries, written independently of
/// the library's combining code.
fn union_llrs(lists: &[CandidateList], cons: &[Constellation]) -> (Vec<usize>, Vec<Vec<f64>>) {
    let mut best = (f64::INFINITY, Vec::new());
    for l in lists {
        for (i, c) in l.entries.iter().enumerate() {
            if l.absolute(i) < best.0 {
                best = (l.absolute(i), c.symbols.clone());
            }
        }
    }
    let llr = cons
        .iter()
        .enumerate()
        .map(|(n, con)| {
            (0..con.bits())
                .map(|j| {
                    let (mut plus, mut minus) = (f64::INFINITY, f64::INFINITY);
                    for l in lists {
                        for (i, c) in l.entries.iter().enumerate() {
                            let slot = if con.bit(c.symbols[n], j) > 0 {
                                &mut plus
                            } else {
                                &mut minus
                            };
                            *slot = slot.min(l.absolute(i));
                        }
                    }
                    plus - minus
                })
                .collect()
        })
        .collect();
    (best.1, llr)
}

#[test]
fn wl_combine_matches_union_minima() {
    for trial in 0..300 {
        let mut rng = stream_rng(15, trial);
        let t = instance(
            &mut rng,
            &[ModScheme::Qam16, ModScheme::Qam4, ModScheme::Qam16, ModScheme::Qam4],
            0.3,
            1.0,
        );
        let lists: Vec<CandidateList> = wld_lists(&t, SliceMode::SoftSlicer)
            .iter()
            .map(|l| rescore_candidates(l, &t.h, &t.y, &t.priors, &t.cons, DistanceScaling::Unscaled).unwrap())
            .collect();
        let det = wl_combine(&lists, &t.cons, DistanceMode::H).unwrap();
        let (hard, llr) = union_llrs(&lists, &t.cons);
        assert_eq!(det.hard, hard);
        assert_eq!(det.llr, llr);
        assert_eq!(det.decompositions, 4);
    }
}

#[test]
fn rescored_lists_hold_direct_distances() {
    let mut rng = stream_rng(16, 0);
    let t = instance(&mut rng, &[ModScheme::Qam16; 4], 0.1, 0.5);
    for l in wld_lists(&t, SliceMode::SoftSlicer) {
        let r = rescore_candidates(
            &l,
            &t.h,
            &t.y,
            &t.priors,
            &t.cons,
            DistanceScaling::NoiseNormalized(0.1),
        )
        .unwrap();
        for (i, c) in r.entries.iter().enumerate() {
            let d = direct_distance(&t.h, &t.y, &c.symbols, &t.priors, &t.cons, DistanceScaling::Unscaled);
            let prior: f64 = d - direct_distance(
                &t.h,
                &t.y,
                &c.symbols,
                &zero_priors(&t.cons),
                &t.cons,
                DistanceScaling::Unscaled,
            );
            assert!(close(r.absolute(i), (d - prior) / 0.1 + prior));
            assert_eq!(c.symbols, l.entries[i].symbols);
        }
    }
}

#[test]
fn noise_scaling_preserves_zero_prior_decisions() {
    for trial in 0..100 {
        let mut rng = stream_rng(17, trial);
        let t = instance(&mut rng, &[ModScheme::Qam4; 4], 0.5, 0.0);
        let lists = wld_lists(&t, SliceMode::SoftSlicer);
        let score = |s| {
            let rescored: Vec<CandidateList> = lists
                .iter()
                .map(|l| rescore_candidates(l, &t.h, &t.y, &t.priors, &t.cons, s).unwrap())
                .collect();
            wl_combine(&rescored, &t.cons, DistanceMode::H).unwrap()
        };
        let raw = score(DistanceScaling::Unscaled);
        let scaled = score(DistanceScaling::NoiseNormalized(0.5));
        assert_eq!(raw.hard, scaled.hard);
        for (a, b) in raw.llr.iter().flatten().zip(scaled.llr.iter().flatten()) {
            assert!(close(a / 0.5, *b));
        }
    }
}

#[test]
fn exact_ml_matches_enumeration() {
    for trial in 0..200 {
        let mut rng = stream_rng(18, trial);
        let mods = [ModScheme::Qam16, ModScheme::Qam4, ModScheme::Qam16];
        let t = instance(&mut rng, &mods, 0.4, 0.0);
        let (hard, dist) = exact_ml(&t.h, &t.y, &t.cons).unwrap();
        let oracle = exhaustive_map(&t.h, &t.y, &t.priors, &t.cons).unwrap();
        assert_eq!(hard, oracle.hard);
        assert!(close(dist, oracle.dmin));
    }
}

#[test]
fn projected_noise_keeps_its_variance() {
    // Unit-norm projection rows leave the per-layer noise variance unchanged.
    let mut rng = stream_rng(19, 0);
    let h = generate_channel(&mut rng, 4, 4);
    let sigma2 = 0.7;
    let samples = 40_000;
    for m in 0..4 {
        let d = wld(&h, m).unwrap();
        let mut acc = [0.0f64; 4];
        for _ in 0..samples {
            let n: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng, sigma2)).collect();
            for (k, v) in d.w.adjoint_mul_vec(&n).unwrap().iter().enumerate() {
                acc[k] += v.norm_sqr();
            }
        }
        for a in acc {
            // Relative standard error of the estimate is 1/sqrt(samples) = 0.5%.
            let est = a / f64::from(samples);
            assert!((est / sigma2 - 1.0).abs() < 0.03, "layer {m}: {est}");
        }
    }
}

#[test]
fn dimension_errors() {
    let mut rng = stream_rng(20, 0);
    let t = instance(&mut rng, &[ModScheme::Qam4; 2], 0.1, 0.0);
    let d = wld(&t.h, 0).unwrap();
    let yt = transform_observation(&d, &t.y).unwrap();
    let short = vec![vec![0.0]; 2];
    assert!(matches!(
        detect_one_sided(&d, &yt, &short, &t.cons, SliceMode::SoftSlicer),
        Err(DetectError::PriorLength { .. })
    ));
    assert!(matches!(wld(&t.h, 2), Err(DetectError::LayerIndex { .. })));
    let singular = CMatrix::zeros(2, 2);
    assert!(ql_decompose(&singular).is_err());
}
