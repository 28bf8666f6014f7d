//! One-sided detection: precomputed constants, prior-aware slicers and the
//! candidate list obtained by enumerating one layer and slicing the others.
//!
//! For a punctured system `y = L x + n` with row form (alpha, beta_k, c_k) the
//! distance `||y - L x||^2 - b(x)^T lambda` separates, for a fixed enumerated
//! symbol x1, into independent per-axis minimizations over the other layers.
//! Each of them has the shape `B p^2 + (G + u) p - b(p)^T lambda` where `u`
//! depends linearly on x1 only.

use num_complex::Complex64;

use crate::constellation::{Constellation, PamAxis};
use crate::decomp::{PuncturedDecomposition, PuncturedRows};
use crate::error::{DetectError, Result};
use crate::linalg::CMatrix;

/// Constants of the multiplier-free distance form. Vectors are indexed by
/// normal-order position minus one (the sliced layers).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerConstants {
    pub a: f64,
    pub c: f64,
    pub d: f64,
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    /// `sum |y_n|^2`, the x-independent term dropped from the distance.
    pub dropped: f64,
}

impl LayerConstants {
    pub fn sliced_layers(&self) -> usize {
        self.b.len()
    }

    /// Applies `op` to every constant (used for fixed-point experiments).
    pub fn map(&self, op: impl Fn(f64) -> f64) -> Self {
        let v = |x: &[f64]| x.iter().map(|&x| op(x)).collect::<Vec<_>>();
        Self {
            a: op(self.a),
            c: op(self.c),
            d: op(self.d),
            b: v(&self.b),
            e: v(&self.e),
            f: v(&self.f),
            g: v(&self.g),
            h: v(&self.h),
            dropped: op(self.dropped),
        }
    }
}

pub fn compute_constants(rows: &PuncturedRows, y: &[Complex64]) -> Result<LayerConstants> {
    let n = rows.beta.len() + 1;
    if rows.c.len() != n - 1 || y.len() != n {
        return Err(DetectError::Dimension(format!(
            "{} rows against an observation of length {}",
            n,
            y.len()
        )));
    }
    let alpha = rows.alpha;
    let mut a = alpha * alpha;
    let mut c = -2.0 * alpha * y[0].re;
    let mut d = -2.0 * alpha * y[0].im;
    let mut out = LayerConstants {
        a: 0.0,
        c: 0.0,
        d: 0.0,
        b: Vec::with_capacity(n - 1),
        e: Vec::with_capacity(n - 1),
        f: Vec::with_capacity(n - 1),
        g: Vec::with_capacity(n - 1),
        h: Vec::with_capacity(n - 1),
        dropped: y.iter().map(|v| v.norm_sqr()).sum(),
    };
    for k in 0..n - 1 {
        let (beta, ck, yk) = (rows.beta[k], rows.c[k], y[k + 1]);
        a += ck.norm_sqr();
        c -= 2.0 * (ck.re * yk.re + ck.im * yk.im);
        d += 2.0 * (ck.im * yk.re - ck.re * yk.im);
        out.b.push(beta * beta);
        out.e.push(2.0 * beta * ck.re);
        out.f.push(-2.0 * beta * ck.im);
        out.g.push(-2.0 * beta * yk.re);
        out.h.push(-2.0 * beta * yk.im);
    }
    out.a = a;
    out.c = c;
    out.d = d;
    Ok(out)
}

/// Zero-prior nearest-level slicing of `z` against the levels scaled by `beta`.
/// Boundaries are left-closed, so a value on a midpoint goes to the upper level.
pub fn hard_slice(axis: &PamAxis, z: f64, beta: f64) -> usize {
    let levels = axis.levels();
    let mut idx = 0;
    for i in 1..levels.len() {
        let boundary = beta * f64::from(levels[i - 1] + levels[i]) / 2.0;
        if z >= boundary {
            idx = i;
        } else {
            break;
        }
    }
    idx
}

/// Decision intervals `[lo_i, hi_i)` of one axis for a fixed (B, G, lambda).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTable {
    levels: Vec<f64>,
    b: f64,
    g: f64,
    prior: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    // reachable level indices, highest first
    scan: Vec<usize>,
}

impl BoundaryTable {
    pub fn new(axis: &PamAxis, b: f64, g: f64, lambda: &[f64]) -> Self {
        let levels: Vec<f64> = axis.levels().iter().map(|&p| f64::from(p)).collect();
        let prior = axis.prior_terms(lambda);
        let p = levels.len();
        let mut lo = vec![f64::NEG_INFINITY; p];
        let mut hi = vec![f64::INFINITY; p];
        for i in 0..p {
            for k in i + 1..p {
                // Level k beats level i (k > i) iff u <= t.
                let r = b * (levels[k] + levels[i]) - (prior[k] - prior[i]) / (levels[k] - levels[i]);
                let t = -r - g;
                lo[i] = lo[i].max(t);
                hi[k] = hi[k].min(t);
            }
        }
        let scan = (0..p).rev().filter(|&i| lo[i] < hi[i]).collect();
        Self {
            levels,
            b,
            g,
            prior,
            lo,
            hi,
            scan,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn lo(&self, i: usize) -> f64 {
        self.lo[i]
    }

    pub fn hi(&self, i: usize) -> f64 {
        self.hi[i]
    }

    /// Whether level `i` owns a non-empty decision interval.
    pub fn is_reachable(&self, i: usize) -> bool {
        self.lo[i] < self.hi[i]
    }

    /// `B p_i^2 + (G + u) p_i - b(p_i)^T lambda`.
    #[inline]
    pub fn metric(&self, i: usize, u: f64) -> f64 {
        let p = self.levels[i];
        self.b * p * p + (self.g + u) * p - self.prior[i]
    }
}

/// Level index whose interval contains `u`.
///
/// Scanning reachable levels from the top, the first level with `u < hi_i` is
/// the winner: every higher level loses to some lower level at `u`.
pub fn soft_slice(table: &BoundaryTable, u: f64) -> usize {
    for &i in &table.scan {
        if u < table.hi[i] {
            return i;
        }
    }
    0
}

/// How the inner per-axis minimizations are carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceMode {
    SoftSlicer,
    ExhaustiveMin,
}

fn exhaustive_index(table: &BoundaryTable, u: f64) -> usize {
    let mut best = 0;
    let mut best_metric = table.metric(0, u);
    for i in 1..table.len() {
        let m = table.metric(i, u);
        if m < best_metric {
            best = i;
            best_metric = m;
        }
    }
    best
}

/// One enumerated hypothesis with its sliced companions.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Symbol indices in original layer order.
    pub symbols: Vec<usize>,
    pub distance: f64,
}

/// Candidates for every symbol of the detection layer, in symbol-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateList {
    pub detect_layer: usize,
    pub entries: Vec<Candidate>,
    /// Added to `distance` to recover the absolute metric.
    pub offset: f64,
}

impl CandidateList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn absolute(&self, i: usize) -> f64 {
        self.entries[i].distance + self.offset
    }

    /// Applies `op` to every distance and to the offset.
    pub fn map_distances(&self, op: impl Fn(f64) -> f64) -> Self {
        Self {
            detect_layer: self.detect_layer,
            entries: self
                .entries
                .iter()
                .map(|c| Candidate {
                    symbols: c.symbols.clone(),
                    distance: op(c.distance),
                })
                .collect(),
            offset: op(self.offset),
        }
    }
}

fn check_layer_inputs(layers: usize, priors: &[Vec<f64>], constellations: &[Constellation]) -> Result<()> {
    if constellations.len() != layers || priors.len() != layers {
        return Err(DetectError::Dimension(format!(
            "{layers} layers but {} constellations and {} prior vectors",
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
    Ok(())
}

/// Zero prior vectors matching the constellations.
pub fn zero_priors(constellations: &[Constellation]) -> Vec<Vec<f64>> {
    constellations.iter().map(|c| vec![0.0; c.bits()]).collect()
}

/// Enumerates the detection layer of `d` and slices all other layers.
///
/// `y` is the transformed observation `W^* y_tilde`; priors and
/// constellations are given in original layer order.
pub fn detect_one_sided(
    d: &PuncturedDecomposition,
    y: &[Complex64],
    priors: &[Vec<f64>],
    constellations: &[Constellation],
    mode: SliceMode,
) -> Result<CandidateList> {
    let consts = compute_constants(&d.rows(), y)?;
    detect_from_constants(&consts, &d.perm, priors, constellations, mode)
}

/// Candidate list from precomputed constants. `perm[k]` is the original
/// layer at normal-order position `k`; position 0 is enumerated.
pub fn detect_from_constants(
    consts: &LayerConstants,
    perm: &[usize],
    priors: &[Vec<f64>],
    constellations: &[Constellation],
    mode: SliceMode,
) -> Result<CandidateList> {
    let n = perm.len();
    if consts.sliced_layers() + 1 != n {
        return Err(DetectError::Dimension(format!(
            "constants for {} layers, permutation of {n}",
            consts.sliced_layers() + 1
        )));
    }
    check_layer_inputs(n, priors, constellations)?;
    let m = perm[0];
    let det = &constellations[m];
    let (lam_re, lam_im) = det.split_prior(&priors[m])?;
    let det_prior_re = det.real_axis().prior_terms(&lam_re);
    let det_prior_im = det.imag_axis().prior_terms(&lam_im);

    let mut tables = Vec::with_capacity(n - 1);
    for (kk, &layer) in perm.iter().enumerate().skip(1).map(|(k, l)| (k - 1, l)) {
        let con = &constellations[layer];
        let (pr, pi) = con.split_prior(&priors[layer])?;
        tables.push((
            BoundaryTable::new(con.real_axis(), consts.b[kk], consts.g[kk], &pr),
            BoundaryTable::new(con.imag_axis(), consts.b[kk], consts.h[kk], &pi),
        ));
    }

    let mut entries = Vec::with_capacity(det.size());
    for sym in 0..det.size() {
        let (ri, ii) = det.levels_of(sym);
        let x = det.point(sym);
        let mut g =
            consts.a * x.re * x.re + consts.c * x.re - det_prior_re[ri] + consts.a * x.im * x.im + consts.d * x.im
                - det_prior_im[ii];
        let mut symbols = vec![0; n];
        symbols[m] = sym;
        for (kk, (tre, tim)) in tables.iter().enumerate() {
            let u_re = consts.e[kk] * x.re + consts.f[kk] * x.im;
            let u_im = consts.e[kk] * x.im - consts.f[kk] * x.re;
            let (sr, si) = match mode {
                SliceMode::SoftSlicer => (soft_slice(tre, u_re), soft_slice(tim, u_im)),
                SliceMode::ExhaustiveMin => (exhaustive_index(tre, u_re), exhaustive_index(tim, u_im)),
            };
            g += tre.metric(sr, u_re) + tim.metric(si, u_im);
            let layer = perm[kk + 1];
            symbols[layer] = constellations[layer].symbol_from_levels(sr, si);
        }
        entries.push(Candidate { symbols, distance: g });
    }
    Ok(CandidateList {
        detect_layer: m,
        entries,
        offset: consts.dropped,
    })
}

/// Scaling applied to the residual norm when rescoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceScaling {
    Unscaled,
    /// Residual norm divided by the noise variance.
    NoiseNormalized(f64),
}

/// `||y_tilde - H x||^2 (scaled) - b(x)^T lambda` for a full symbol vector.
pub fn direct_distance(
    h: &CMatrix,
    y_tilde: &[Complex64],
    symbols: &[usize],
    priors: &[Vec<f64>],
    constellations: &[Constellation],
    scaling: DistanceScaling,
) -> f64 {
    let mut residual = 0.0;
    for r in 0..h.rows() {
        let mut acc = y_tilde[r];
        for (c, &s) in symbols.iter().enumerate() {
            acc -= h[(r, c)] * constellations[c].point(s);
        }
        residual += acc.norm_sqr();
    }
    if let DistanceScaling::NoiseNormalized(sigma2) = scaling {
        residual /= sigma2;
    }
    let mut prior = 0.0;
    for (layer, &s) in symbols.iter().enumerate() {
        let con = &constellations[layer];
        for (j, &l) in priors[layer].iter().enumerate() {
            prior += f64::from(con.bit(s, j)) * l;
        }
    }
    residual - prior
}

/// Replaces every candidate distance by the metric evaluated on `H` directly.
pub fn rescore_candidates(
    list: &CandidateList,
    h: &CMatrix,
    y_tilde: &[Complex64],
    priors: &[Vec<f64>],
    constellations: &[Constellation],
    scaling: DistanceScaling,
) -> Result<CandidateList> {
    if h.rows() != y_tilde.len() {
        return Err(DetectError::Dimension(format!(
            "channel has {} rows, observation has {} entries",
            h.rows(),
            y_tilde.len()
        )));
    }
    check_layer_inputs(h.cols(), priors, constellations)?;
    if list.entries.iter().any(|c| c.symbols.len() != h.cols()) {
        return Err(DetectError::Dimension(
            "candidate length differs from the channel width".into(),
        ));
    }
    Ok(CandidateList {
        detect_layer: list.detect_layer,
        entries: list
            .entries
            .iter()
            .map(|c| Candidate {
                symbols: c.symbols.clone(),
                distance: direct_distance(h, y_tilde, &c.symbols, priors, constellations, scaling),
            })
            .collect(),
        offset: 0.0,
    })
}
