//! Brute-force references: full enumeration of all symbol vectors and a
//! per-axis exhaustive argmin.

use num_complex::Complex64;

use crate::constellation::{Constellation, PamAxis};
use crate::decomp::ql_decompose;
use crate::detcore::hard_slice;
use crate::error::{DetectError, Result};
use crate::linalg::CMatrix;

/// Maximum number of hypotheses [`exhaustive_map`] will enumerate.
pub const ENUMERATION_BUDGET: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub dmin: f64,
    /// Minimizing symbol vector (first in enumeration order on ties).
    pub hard: Vec<usize>,
    /// `min over b = +1` minus `min over b = -1`, per layer and bit.
    pub llr: Vec<Vec<f64>>,
    /// Minimum distance among vectors whose layer `n` carries symbol `s`.
    pub symbol_minima: Vec<Vec<f64>>,
}

fn hypothesis_count(constellations: &[Constellation]) -> u128 {
    constellations.iter().map(|c| c.size() as u128).product()
}

/// Enumerates every symbol vector of `d(x) = ||y - M x||^2 - b(x)^T lambda`
/// for an arbitrary `rows x N` matrix `M` (a channel or a triangular factor).
///
/// Enumeration is lexicographic with layer 0 outermost.
pub fn exhaustive_map(
    m: &CMatrix,
    y: &[Complex64],
    priors: &[Vec<f64>],
    constellations: &[Constellation],
) -> Result<OracleResult> {
    let n = m.cols();
    if y.len() != m.rows() || constellations.len() != n || priors.len() != n {
        return Err(DetectError::Dimension(format!(
            "{}x{} matrix, {} observations, {} constellations, {} priors",
            m.rows(),
            n,
            y.len(),
            constellations.len(),
            priors.len()
        )));
    }
    for (p, c) in priors.iter().zip(constellations) {
        if p.len() != c.bits() {
            return Err(DetectError::PriorLength {
                expected: c.bits(),
                got: p.len(),
            });
        }
    }
    let hypotheses = hypothesis_count(constellations);
    if hypotheses > ENUMERATION_BUDGET {
        return Err(DetectError::BudgetExceeded {
            hypotheses,
            budget: ENUMERATION_BUDGET,
        });
    }
    let rows = m.rows();
    // Per layer and symbol: the column contribution and the prior term.
    let contrib: Vec<Vec<Vec<Complex64>>> = (0..n)
        .map(|col| {
            (0..constellations[col].size())
                .map(|s| {
                    let x = constellations[col].point(s);
                    (0..rows).map(|r| m[(r, col)] * x).collect()
                })
                .collect()
        })
        .collect();
    let prior_terms: Vec<Vec<f64>> = (0..n)
        .map(|col| {
            let con = &constellations[col];
            (0..con.size())
                .map(|s| {
                    priors[col]
                        .iter()
                        .enumerate()
                        .map(|(j, &l)| f64::from(con.bit(s, j)) * l)
                        .sum()
                })
                .collect()
        })
        .collect();

    let mut symbol_minima: Vec<Vec<f64>> = constellations.iter().map(|c| vec![f64::INFINITY; c.size()]).collect();
    let mut best = (f64::INFINITY, vec![0; n]);
    // residual[k] / prior[k]: state after subtracting layers 0..k.
    let mut residual = vec![y.to_vec(); n + 1];
    let mut prior = vec![0.0; n + 1];
    let mut idx = vec![0usize; n];
    let mut depth = 0;
    loop {
        // Descend, filling layers depth..n with the current indices.
        while depth < n {
            let (head, tail) = residual.split_at_mut(depth + 1);
            for (r, (out, src)) in tail[0].iter_mut().zip(&head[depth]).enumerate() {
                *out = src - contrib[depth][idx[depth]][r];
            }
            prior[depth + 1] = prior[depth] + prior_terms[depth][idx[depth]];
            depth += 1;
        }
        let d = residual[n].iter().map(|v| v.norm_sqr()).sum::<f64>() - prior[n];
        for (layer, &s) in idx.iter().enumerate() {
            if d < symbol_minima[layer][s] {
                symbol_minima[layer][s] = d;
            }
        }
        if d < best.0 {
            best = (d, idx.clone());
        }
        // Advance the odometer.
        loop {
            if depth == 0 {
                let llr = partition_llrs(&symbol_minima, constellations);
                return Ok(OracleResult {
                    dmin: best.0,
                    hard: best.1,
                    llr,
                    symbol_minima,
                });
            }
            depth -= 1;
            idx[depth] += 1;
            if idx[depth] < constellations[depth].size() {
                break;
            }
            idx[depth] = 0;
        }
    }
}

fn partition_llrs(symbol_minima: &[Vec<f64>], constellations: &[Constellation]) -> Vec<Vec<f64>> {
    symbol_minima
        .iter()
        .zip(constellations)
        .map(|(minima, con)| {
            (0..con.bits())
                .map(|j| {
                    let mut plus = f64::INFINITY;
                    let mut minus = f64::INFINITY;
                    for (s, &d) in minima.iter().enumerate() {
                        if con.bit(s, j) > 0 {
                            plus = plus.min(d);
                        } else {
                            minus = minus.min(d);
                        }
                    }
                    plus - minus
                })
                .collect()
        })
        .collect()
}

/// Exact zero-prior ML decision `argmin ||y_tilde - H x||^2` for a square
/// channel: enumerates every layer but the last through a QL factorization
/// and slices the last layer, whose row is decoupled from the rest.
pub fn exact_ml(h: &CMatrix, y_tilde: &[Complex64], constellations: &[Constellation]) -> Result<(Vec<usize>, f64)> {
    let n = h.cols();
    if constellations.len() != n {
        return Err(DetectError::Dimension(format!(
            "{n} layers but {} constellations",
            constellations.len()
        )));
    }
    let ql = ql_decompose(h)?;
    let y = ql.q.adjoint_mul_vec(y_tilde)?;
    let l = &ql.l;
    let last = n - 1;
    let enumerated: u128 = constellations[..last].iter().map(|c| c.size() as u128).product();
    if enumerated > ENUMERATION_BUDGET {
        return Err(DetectError::BudgetExceeded {
            hypotheses: enumerated,
            budget: ENUMERATION_BUDGET,
        });
    }
    let points: Vec<Vec<Complex64>> = constellations
        .iter()
        .map(|c| (0..c.size()).map(|s| c.point(s)).collect())
        .collect();
    let beta = l[(last, last)].re;
    let con_last = &constellations[last];

    let mut best = (f64::INFINITY, vec![0; n]);
    let mut idx = vec![0usize; n];
    // partial[k]: sum of squared row residuals of rows 0..k.
    let mut partial = vec![0.0; n];
    let mut depth = 0;
    loop {
        while depth < last {
            let mut acc = y[depth];
            for j in 0..=depth {
                acc -= l[(depth, j)] * points[j][idx[j]];
            }
            partial[depth + 1] = partial[depth] + acc.norm_sqr();
            depth += 1;
        }
        let mut z = y[last];
        for j in 0..last {
            z -= l[(last, j)] * points[j][idx[j]];
        }
        let ri = hard_slice(con_last.real_axis(), z.re, beta);
        let ii = hard_slice(con_last.imag_axis(), z.im, beta);
        let s = con_last.symbol_from_levels(ri, ii);
        let d = partial[last] + (z - beta * points[last][s]).norm_sqr();
        if d < best.0 {
            idx[last] = s;
            best = (d, idx.clone());
        }
        loop {
            if depth == 0 {
                return Ok((best.1, best.0));
            }
            depth -= 1;
            idx[depth] += 1;
            if idx[depth] < constellations[depth].size() {
                break;
            }
            idx[depth] = 0;
        }
    }
}

/// Argmin over all levels of `B p^2 + (G + u) p - b(p)^T lambda`, lower
/// index on ties.
pub fn exhaustive_axis_argmin(axis: &PamAxis, b: f64, g: f64, u: f64, lambda: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for i in 0..axis.len() {
        let p = f64::from(axis.level(i));
        let prior: f64 = axis
            .label(i)
            .iter()
            .zip(lambda)
            .map(|(&bit, &l)| f64::from(bit) * l)
            .sum();
        let metric = b * p * p + (g + u) * p - prior;
        if metric < best.0 {
            best = (metric, i);
        }
    }
    best.1
}
