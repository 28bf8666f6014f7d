//! Channel triangularizations: QL, the flipped 2x2 QL, and the punctured
//! projection decomposition that decouples every layer from one enumerated
//! layer.

use num_complex::Complex64;

use crate::error::{DetectError, Result};
use crate::linalg::{dot_conj, householder_qr, norm_sqr, CMatrix, CVector};

/// Relative threshold (times `||H||_F`) below which a channel is singular.
pub const SINGULAR_TOL: f64 = 1e-10;

/// `H = Q L`, Q unitary, L lower triangular with real positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct QlDecomp {
    pub q: CMatrix,
    pub l: CMatrix,
}

pub fn ql_decompose(h: &CMatrix) -> Result<QlDecomp> {
    ql_decompose_impl(h, false)
}

/// QL that tolerates exactly rank-deficient trailing columns, leaving a zero
/// on the corresponding diagonal entry of L.
pub(crate) fn ql_decompose_relaxed(h: &CMatrix) -> Result<QlDecomp> {
    ql_decompose_impl(h, true)
}

fn ql_decompose_impl(h: &CMatrix, allow_deficient: bool) -> Result<QlDecomp> {
    if !h.is_square() {
        return Err(DetectError::Dimension(format!(
            "QL needs a square channel, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let n = h.rows();
    let threshold = SINGULAR_TOL * h.frobenius_norm();
    // H J = Q_r R  =>  H = (Q_r J)(J R J) with J the exchange matrix.
    let reversed: Vec<usize> = (0..n).rev().collect();
    let (q_cols, _, r) = householder_qr(&h.permute_columns(&reversed));
    let mut q = CMatrix::zeros(n, n);
    let mut l = CMatrix::zeros(n, n);
    for i in 0..n {
        q.set_column(i, &q_cols[n - 1 - i]);
        for j in 0..=i {
            l[(i, j)] = r[(n - 1 - i, n - 1 - j)];
        }
    }
    for i in 0..n {
        let d = l[(i, i)];
        let mag = d.norm();
        if mag < threshold || mag == 0.0 {
            if allow_deficient {
                continue;
            }
            return Err(DetectError::SingularChannel { value: mag, threshold });
        }
        let phase = d / mag;
        for j in 0..=i {
            l[(i, j)] *= phase.conj();
        }
        l[(i, i)] = Complex64::new(mag, 0.0);
        for r in 0..n {
            q[(r, i)] *= phase;
        }
    }
    Ok(QlDecomp { q, l })
}

/// 2x2 triangularization with a zero in the upper-left corner of L':
/// `L' = [[0, a'], [b', c']]` with a', b' real positive.
pub fn ql_decompose_flipped(h: &CMatrix) -> Result<QlDecomp> {
    if h.rows() != 2 || h.cols() != 2 {
        return Err(DetectError::Dimension(format!(
            "flipped QL is defined for 2x2 channels, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let swapped = ql_decompose(&h.permute_columns(&[1, 0]))?;
    Ok(QlDecomp {
        q: swapped.q,
        l: swapped.l.permute_columns(&[1, 0]),
    })
}

/// `W^* H_perm = L` with L punctured: row 0 holds only the detection layer,
/// row n > 0 holds the detection-layer coefficient and its own diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PuncturedDecomposition {
    /// Projection matrix with unit-norm columns.
    pub w: CMatrix,
    /// Punctured lower-triangular matrix in normal (permuted) order.
    pub l: CMatrix,
    /// Original index of the enumerated layer.
    pub detect_layer: usize,
    /// `perm[k]` is the original layer at normal-order position `k`.
    pub perm: Vec<usize>,
}

/// Row form of a punctured matrix: `alpha` on (0,0), and for positions
/// k = 1..N the pair `c[k-1]` on (k,0), `beta[k-1]` on (k,k).
#[derive(Debug, Clone, PartialEq)]
pub struct PuncturedRows {
    pub alpha: f64,
    pub beta: Vec<f64>,
    pub c: Vec<Complex64>,
}

impl PuncturedDecomposition {
    /// Wraps a 2x2 QL decomposition (layer 0 enumerated).
    pub fn from_ql(ql: QlDecomp) -> Result<Self> {
        if ql.l.rows() != 2 {
            return Err(DetectError::Dimension(
                "a QL decomposition is punctured only for two layers".into(),
            ));
        }
        Ok(Self {
            w: ql.q,
            l: ql.l,
            detect_layer: 0,
            perm: vec![0, 1],
        })
    }

    /// Wraps a flipped 2x2 decomposition (layer 1 enumerated).
    pub fn from_flipped(flipped: QlDecomp) -> Result<Self> {
        if flipped.l.rows() != 2 {
            return Err(DetectError::Dimension("flipped decompositions are 2x2".into()));
        }
        Ok(Self {
            w: flipped.q,
            l: flipped.l.permute_columns(&[1, 0]),
            detect_layer: 1,
            perm: vec![1, 0],
        })
    }

    pub fn layers(&self) -> usize {
        self.perm.len()
    }

    pub fn rows(&self) -> PuncturedRows {
        let n = self.layers();
        PuncturedRows {
            alpha: self.l[(0, 0)].re,
            beta: (1..n).map(|k| self.l[(k, k)].re).collect(),
            c: (1..n).map(|k| self.l[(k, 0)]).collect(),
        }
    }
}

/// Circular column shift placing layer `m` first.
pub fn circular_shift(n: usize, m: usize) -> Vec<usize> {
    (0..n).map(|k| (m + k) % n).collect()
}

/// Punctured decomposition whose enumerated (detection) layer is `m` (0-based).
pub fn wld(h: &CMatrix, m: usize) -> Result<PuncturedDecomposition> {
    if !h.is_square() {
        return Err(DetectError::Dimension(format!(
            "WLD needs a square channel, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let n = h.rows();
    if !(2..=4).contains(&n) {
        return Err(DetectError::LayerCount(n));
    }
    if m >= n {
        return Err(DetectError::LayerIndex { index: m, layers: n });
    }
    let threshold = SINGULAR_TOL * h.frobenius_norm();
    let perm = circular_shift(n, m);
    let hp = h.permute_columns(&perm);
    let mut w = CMatrix::zeros(n, n);
    let mut l = CMatrix::zeros(n, n);
    for k in 0..n {
        let hk = hp.column(k);
        let punctured: Vec<usize> = (1..n).filter(|&j| j != k).collect();
        let mut wt = hk.clone();
        if !punctured.is_empty() {
            let (basis, diag, _) = householder_qr(&hp.permute_columns(&punctured));
            if let Some(d) = diag.iter().map(|d| d.norm()).find(|&d| d < threshold) {
                return Err(DetectError::DegenerateProjection {
                    layer: perm[k],
                    value: d,
                    threshold,
                });
            }
            for q in &basis {
                let coef = dot_conj(q, &hk);
                for (x, qi) in wt.iter_mut().zip(q) {
                    *x -= qi * coef;
                }
            }
        }
        let norm = norm_sqr(&wt).sqrt();
        if norm < threshold {
            return Err(DetectError::DegenerateProjection {
                layer: perm[k],
                value: norm,
                threshold,
            });
        }
        let wk: CVector = wt.iter().map(|x| x / norm).collect();
        w.set_column(k, &wk);
        l[(k, k)] = Complex64::new(norm, 0.0);
        if k > 0 {
            l[(k, 0)] = dot_conj(&wk, &hp.column(0));
        }
    }
    Ok(PuncturedDecomposition {
        w,
        l,
        detect_layer: m,
        perm,
    })
}

/// `y = W^* y_tilde`.
pub fn transform_observation(d: &PuncturedDecomposition, y_tilde: &[Complex64]) -> Result<CVector> {
    d.w.adjoint_mul_vec(y_tilde)
}
