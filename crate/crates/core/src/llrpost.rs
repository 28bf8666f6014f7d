//! Bit LLRs and hard decisions from candidate lists.
//!
//! LLRs follow `min over the +1 set - min over the -1 set`, so a negative
//! value favours bit `+1`. Callers wanting the conventional sign and units
//! negate and rescale by `sigma^2 / 2`.

use crate::constellation::Constellation;
use crate::detcore::CandidateList;
use crate::error::{DetectError, Result};

/// Which metric the list distances were taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    /// Distances from the triangular system (`||y - L x||^2`).
    L,
    /// Distances rescored on the channel (`||y_tilde - H x||^2`).
    H,
}

impl std::fmt::Display for DistanceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistanceMode::L => "L",
            DistanceMode::H => "H",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// Hard-decision symbol indices per layer.
    pub hard: Vec<usize>,
    pub dmin: f64,
    /// `llr[n][j]` for bit `j` of layer `n`.
    pub llr: Vec<Vec<f64>>,
    pub distance_mode: DistanceMode,
    /// Number of candidate lists that contributed.
    pub decompositions: usize,
}

/// Running `(min over +1, min over -1)` per layer and bit.
#[derive(Debug, Clone)]
struct PartitionMinima {
    plus: Vec<Vec<f64>>,
    minus: Vec<Vec<f64>>,
}

impl PartitionMinima {
    fn new(constellations: &[Constellation]) -> Self {
        let inf = |c: &Constellation| vec![f64::INFINITY; c.bits()];
        Self {
            plus: constellations.iter().map(inf).collect(),
            minus: constellations.iter().map(inf).collect(),
        }
    }

    fn absorb(&mut self, list: &CandidateList, constellations: &[Constellation], layers: &[usize]) {
        for (i, cand) in list.entries.iter().enumerate() {
            let dist = list.absolute(i);
            for &n in layers {
                let con = &constellations[n];
                let sym = cand.symbols[n];
                for j in 0..con.bits() {
                    let slot = if con.bit(sym, j) > 0 {
                        &mut self.plus[n][j]
                    } else {
                        &mut self.minus[n][j]
                    };
                    if dist < *slot {
                        *slot = dist;
                    }
                }
            }
        }
    }

    fn llrs(&self) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(self.plus.len());
        for (n, (p, m)) in self.plus.iter().zip(&self.minus).enumerate() {
            let mut layer = Vec::with_capacity(p.len());
            for (j, (&a, &b)) in p.iter().zip(m).enumerate() {
                if a == f64::INFINITY || b == f64::INFINITY {
                    return Err(DetectError::EmptyPartition { layer: n, bit: j });
                }
                layer.push(a - b);
            }
            out.push(layer);
        }
        Ok(out)
    }
}

/// Minimum of a list with the lower enumeration index winning ties.
pub fn hd_from_list(list: &CandidateList) -> Result<(Vec<usize>, f64)> {
    let (i, d) = argmin(list).ok_or(DetectError::EmptyList)?;
    Ok((list.entries[i].symbols.clone(), d))
}

fn argmin(list: &CandidateList) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..list.len() {
        let d = list.absolute(i);
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    best
}

fn check_lists(lists: &[&CandidateList], constellations: &[Constellation]) -> Result<()> {
    for list in lists {
        if list.is_empty() {
            return Err(DetectError::EmptyList);
        }
        if list.detect_layer >= constellations.len() {
            return Err(DetectError::LayerIndex {
                index: list.detect_layer,
                layers: constellations.len(),
            });
        }
        if list.entries.len() != constellations[list.detect_layer].size()
            || list.entries.iter().any(|c| {
                c.symbols.len() != constellations.len()
                    || c.symbols.iter().zip(constellations).any(|(&s, k)| s >= k.size())
            })
        {
            return Err(DetectError::Dimension(
                "candidate list does not match the constellations".into(),
            ));
        }
    }
    Ok(())
}

/// Global argmin over several lists; earlier lists win ties.
fn union_argmin(lists: &[&CandidateList]) -> (Vec<usize>, f64) {
    let mut best: Option<(usize, usize, f64)> = None;
    for (li, list) in lists.iter().enumerate() {
        if let Some((i, d)) = argmin(list) {
            if best.is_none_or(|(_, _, b)| d < b) {
                best = Some((li, i, d));
            }
        }
    }
    let (li, i, d) = best.expect("lists checked non-empty");
    (lists[li].entries[i].symbols.clone(), d)
}

/// Two-layer LLRs: layer 0 bits from `list1` (enumerating layer 0) and
/// layer 1 bits from `list2` (enumerating layer 1).
pub fn llr_two_sided_2layer(
    list1: &CandidateList,
    list2: &CandidateList,
    constellations: &[Constellation],
) -> Result<DetectionResult> {
    if constellations.len() != 2 {
        return Err(DetectError::Dimension(format!(
            "two-sided detection needs 2 layers, got {}",
            constellations.len()
        )));
    }
    if list1.detect_layer != 0 || list2.detect_layer != 1 {
        return Err(DetectError::Dimension(
            "list1 must enumerate layer 0 and list2 layer 1".into(),
        ));
    }
    check_lists(&[list1, list2], constellations)?;
    let mut first = PartitionMinima::new(constellations);
    first.absorb(list1, constellations, &[0]);
    let mut second = PartitionMinima::new(constellations);
    second.absorb(list2, constellations, &[1]);
    let llr0 = PartitionMinima {
        plus: vec![first.plus[0].clone()],
        minus: vec![first.minus[0].clone()],
    }
    .llrs()?;
    let llr1 = PartitionMinima {
        plus: vec![second.plus[1].clone()],
        minus: vec![second.minus[1].clone()],
    }
    .llrs()
    .map_err(|e| match e {
        DetectError::EmptyPartition { bit, .. } => DetectError::EmptyPartition { layer: 1, bit },
        other => other,
    })?;
    let (hard, dmin) = union_argmin(&[list1, list2]);
    Ok(DetectionResult {
        hard,
        dmin,
        llr: vec![llr0.into_iter().next().unwrap(), llr1.into_iter().next().unwrap()],
        distance_mode: DistanceMode::L,
        decompositions: 2,
    })
}

/// Checks that both lists of a two-layer detection reach the same minimum
/// (relative tolerance `rel_tol`). Exact arithmetic guarantees it; quantized
/// or perturbed metrics may not.
pub fn check_list_consistency(list1: &CandidateList, list2: &CandidateList, rel_tol: f64) -> Result<()> {
    let (_, a) = hd_from_list(list1)?;
    let (_, b) = hd_from_list(list2)?;
    if (a - b).abs() > rel_tol * a.abs().max(b.abs()).max(1.0) {
        return Err(DetectError::InconsistentLists(format!(
            "minimum {a} from layer {} against {b} from layer {}",
            list1.detect_layer, list2.detect_layer
        )));
    }
    Ok(())
}

/// Combines one list per detection layer by taking minima over all lists.
/// Ties between lists go to the lowest detection layer.
pub fn wl_combine(
    lists: &[CandidateList],
    constellations: &[Constellation],
    distance_mode: DistanceMode,
) -> Result<DetectionResult> {
    let n = constellations.len();
    if lists.len() < n {
        return Err(DetectError::ListCount {
            expected: n,
            got: lists.len(),
        });
    }
    let mut ordered: Vec<&CandidateList> = lists.iter().collect();
    ordered.sort_by_key(|l| l.detect_layer);
    check_lists(&ordered, constellations)?;
    let all_layers: Vec<usize> = (0..n).collect();
    let mut minima = PartitionMinima::new(constellations);
    for list in &ordered {
        minima.absorb(list, constellations, &all_layers);
    }
    let llr = minima.llrs()?;
    let (hard, dmin) = union_argmin(&ordered);
    Ok(DetectionResult {
        hard,
        dmin,
        llr,
        distance_mode,
        decompositions: ordered.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::ModScheme;
    use crate::detcore::Candidate;

    fn bpsk() -> Vec<Constellation> {
        vec![Constellation::new(ModScheme::Bpsk); 2]
    }

    fn list(layer: usize, entries: &[(&[usize], f64)]) -> CandidateList {
        CandidateList {
            detect_layer: layer,
            entries: entries
                .iter()
                .map(|(s, d)| Candidate {
                    symbols: s.to_vec(),
                    distance: *d,
                })
                .collect(),
            offset: 0.0,
        }
    }

    // Hypotheses of the two-layer BPSK example: (+,+) 0, (+,-) 4, (-,+) 8, (-,-) 20.
    // Symbol 0 is +1, symbol 1 is -1.
    fn bpsk_lists() -> (CandidateList, CandidateList) {
        (
            list(0, &[(&[0, 0], 0.0), (&[1, 0], 8.0)]),
            list(1, &[(&[0, 0], 0.0), (&[0, 1], 4.0)]),
        )
    }

    #[test]
    fn bpsk_two_sided() {
        let (l1, l2) = bpsk_lists();
        let r = llr_two_sided_2layer(&l1, &l2, &bpsk()).unwrap();
        assert_eq!(r.llr, vec![vec![-8.0], vec![-4.0]]);
        assert_eq!(r.hard, vec![0, 0]);
        assert_eq!(r.dmin, 0.0);
        check_list_consistency(&l1, &l2, 1e-9).unwrap();
    }

    #[test]
    fn wl_combine_reduces_to_two_sided() {
        let (l1, l2) = bpsk_lists();
        let a = llr_two_sided_2layer(&l1, &l2, &bpsk()).unwrap();
        let b = wl_combine(&[l2.clone(), l1.clone()], &bpsk(), DistanceMode::L).unwrap();
        assert_eq!(a.llr, b.llr);
        assert_eq!(a.hard, b.hard);
        assert_eq!(a.dmin, b.dmin);
    }

    #[test]
    fn hd_tie_goes_to_lower_index() {
        let l = list(0, &[(&[0, 1], 3.0), (&[1, 1], 3.0)]);
        assert_eq!(hd_from_list(&l).unwrap(), (vec![0, 1], 3.0));
        let single = list(0, &[(&[1, 0], -2.0)]);
        assert_eq!(hd_from_list(&single).unwrap(), (vec![1, 0], -2.0));
        assert_eq!(hd_from_list(&list(0, &[])), Err(DetectError::EmptyList));
    }

    #[test]
    fn wl_tie_goes_to_lowest_layer() {
        let l1 = list(0, &[(&[0, 1], 1.0), (&[1, 0], 5.0)]);
        let l2 = list(1, &[(&[1, 0], 1.0), (&[0, 1], 1.0)]);
        let r = wl_combine(&[l2, l1], &bpsk(), DistanceMode::H).unwrap();
        assert_eq!(r.hard, vec![0, 1]);
        assert_eq!(r.distance_mode, DistanceMode::H);
    }

    #[test]
    fn inconsistent_lists_are_reported() {
        let l1 = list(0, &[(&[0, 0], 0.0), (&[1, 0], 8.0)]);
        let l2 = list(1, &[(&[0, 0], 1.0), (&[0, 1], 4.0)]);
        assert!(matches!(
            check_list_consistency(&l1, &l2, 1e-9),
            Err(DetectError::InconsistentLists(_))
        ));
    }

    #[test]
    fn bad_inputs() {
        let (l1, l2) = bpsk_lists();
        assert!(matches!(
            wl_combine(std::slice::from_ref(&l1), &bpsk(), DistanceMode::L),
            Err(DetectError::ListCount { expected: 2, got: 1 })
        ));
        assert!(llr_two_sided_2layer(&l2, &l1, &bpsk()).is_err());
        // A list that never reaches bit -1 of layer 1 leaves its partition empty.
        let lonely = list(0, &[(&[0, 0], 0.0), (&[1, 0], 8.0)]);
        assert!(matches!(
            wl_combine(&[lonely.clone(), lonely], &bpsk(), DistanceMode::L),
            Err(DetectError::EmptyPartition { layer: 1, bit: 0 })
        ));
    }
}
