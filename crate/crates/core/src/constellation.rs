//! Gray-mapped rectangular QAM constellations in the LTE bit layout.
//!
//! Levels are kept as unnormalized odd integers; unit-energy scaling is
//! applied by callers through [`ModScheme::scale`]. Bits use the bipolar
//! convention where binary 0 maps to `+1` and binary 1 maps to `-1`.
//!
//! Symbols are addressed by their *symbol index*: the q-bit label read as a
//! binary number with the first bit most significant (binary 1 for a `-1`
//! bit). Even-position bits drive the real axis, odd-position bits the
//! imaginary axis. BPSK carries a single real bit and a degenerate imaginary
//! axis holding the single point 0 with no bits.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{DetectError, Result};

/// Supported modulation schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModScheme {
    Bpsk,
    Qam4,
    Qam16,
    Qam64,
    Qam256,
}

impl ModScheme {
    pub const ALL: [ModScheme; 5] = [
        ModScheme::Bpsk,
        ModScheme::Qam4,
        ModScheme::Qam16,
        ModScheme::Qam64,
        ModScheme::Qam256,
    ];

    /// Bits per symbol.
    pub fn bits(self) -> usize {
        match self {
            ModScheme::Bpsk => 1,
            ModScheme::Qam4 => 2,
            ModScheme::Qam16 => 4,
            ModScheme::Qam64 => 6,
            ModScheme::Qam256 => 8,
        }
    }

    /// Number of constellation points.
    pub fn order(self) -> usize {
        1 << self.bits()
    }

    pub fn from_order(order: usize) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.order() == order)
    }

    /// Average energy of the unnormalized integer constellation.
    pub fn energy(self) -> f64 {
        match self {
            ModScheme::Bpsk => 1.0,
            ModScheme::Qam4 => 2.0,
            ModScheme::Qam16 => 10.0,
            ModScheme::Qam64 => 42.0,
            ModScheme::Qam256 => 170.0,
        }
    }

    /// Factor mapping integer levels to a unit-energy constellation.
    pub fn scale(self) -> f64 {
        1.0 / self.energy().sqrt()
    }

    /// PAM size of the real axis.
    pub fn pam_size(self) -> usize {
        match self {
            ModScheme::Bpsk => 2,
            m => 1 << (m.bits() / 2),
        }
    }
}

impl std::fmt::Display for ModScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModScheme::Bpsk => write!(f, "BPSK"),
            m => write!(f, "{}-QAM", m.order()),
        }
    }
}

/// One-dimensional PAM axis with its Gray labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PamAxis {
    levels: Vec<i32>,
    labels: Vec<Vec<i8>>,
}

impl PamAxis {
    /// Gray-labelled PAM axis with `bits` bits, levels in increasing order.
    pub fn gray(bits: usize) -> Self {
        let p = 1usize << bits;
        let mut pairs: Vec<(i32, Vec<i8>)> = (0..p)
            .map(|pattern| {
                let label: Vec<i8> = (0..bits)
                    .map(|j| if pattern >> (bits - 1 - j) & 1 == 0 { 1 } else { -1 })
                    .collect();
                (lte_level(&label), label)
            })
            .collect();
        pairs.sort_by_key(|(level, _)| *level);
        let (levels, labels) = pairs.into_iter().unzip();
        Self { levels, labels }
    }

    /// Single-point axis {0} carrying no bits (imaginary axis of BPSK).
    pub fn degenerate() -> Self {
        Self {
            levels: vec![0],
            labels: vec![Vec::new()],
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.bits() == 0
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn bits(&self) -> usize {
        self.labels[0].len()
    }

    pub fn levels(&self) -> &[i32] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> i32 {
        self.levels[i]
    }

    pub fn label(&self, i: usize) -> &[i8] {
        &self.labels[i]
    }

    pub fn index_of(&self, level: i32) -> Option<usize> {
        self.levels.binary_search(&level).ok()
    }

    /// `b(p_i)^T lambda` for every level.
    pub fn prior_terms(&self, lambda: &[f64]) -> Vec<f64> {
        self.labels
            .iter()
            .map(|label| label.iter().zip(lambda).map(|(&b, &l)| f64::from(b) * l).sum())
            .collect()
    }
}

/// LTE 36.211 level formula: s0 * (2^(k-1) - s1 * (2^(k-2) - s2 * (... - s_{k-1}))).
fn lte_level(label: &[i8]) -> i32 {
    let k = label.len();
    let mut inner = 1i32;
    for i in (1..k).rev() {
        inner = (1 << (k - i)) - i32::from(label[i]) * inner;
    }
    i32::from(label[0]) * inner
}

/// A rectangular QAM constellation built from two independent PAM axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    scheme: ModScheme,
    real: PamAxis,
    imag: PamAxis,
    real_bit_idx: Vec<usize>,
    imag_bit_idx: Vec<usize>,
    // per symbol index: (real level index, imag level index)
    symbol_levels: Vec<(usize, usize)>,
    // (real level index, imag level index) -> symbol index
    level_symbols: Vec<usize>,
}

impl Constellation {
    pub fn new(scheme: ModScheme) -> Self {
        let q = scheme.bits();
        let real_bit_idx: Vec<usize> = (0..q).step_by(2).collect();
        let imag_bit_idx: Vec<usize> = (1..q).step_by(2).collect();
        let real = PamAxis::gray(real_bit_idx.len());
        let imag = if imag_bit_idx.is_empty() {
            PamAxis::degenerate()
        } else {
            PamAxis::gray(imag_bit_idx.len())
        };
        let mut symbol_levels = Vec::with_capacity(scheme.order());
        let mut level_symbols = vec![0; real.len() * imag.len()];
        for sym in 0..scheme.order() {
            let bits = symbol_bits(sym, q);
            let re_label: Vec<i8> = real_bit_idx.iter().map(|&j| bits[j]).collect();
            let im_label: Vec<i8> = imag_bit_idx.iter().map(|&j| bits[j]).collect();
            let ri = find_label(&real, &re_label);
            let ii = find_label(&imag, &im_label);
            symbol_levels.push((ri, ii));
            level_symbols[ri * imag.len() + ii] = sym;
        }
        Self {
            scheme,
            real,
            imag,
            real_bit_idx,
            imag_bit_idx,
            symbol_levels,
            level_symbols,
        }
    }

    pub fn scheme(&self) -> ModScheme {
        self.scheme
    }

    pub fn size(&self) -> usize {
        self.scheme.order()
    }

    pub fn bits(&self) -> usize {
        self.scheme.bits()
    }

    pub fn real_axis(&self) -> &PamAxis {
        &self.real
    }

    pub fn imag_axis(&self) -> &PamAxis {
        &self.imag
    }

    /// Positions (0-based) of the bits carried by the real axis.
    pub fn real_bit_idx(&self) -> &[usize] {
        &self.real_bit_idx
    }

    pub fn imag_bit_idx(&self) -> &[usize] {
        &self.imag_bit_idx
    }

    /// Real and imaginary level indices of a symbol.
    pub fn levels_of(&self, sym: usize) -> (usize, usize) {
        self.symbol_levels[sym]
    }

    pub fn symbol_from_levels(&self, re_idx: usize, im_idx: usize) -> usize {
        self.level_symbols[re_idx * self.imag.len() + im_idx]
    }

    /// Integer-valued constellation point of a symbol index.
    pub fn point(&self, sym: usize) -> Complex64 {
        let (ri, ii) = self.symbol_levels[sym];
        Complex64::new(f64::from(self.real.level(ri)), f64::from(self.imag.level(ii)))
    }

    /// Bipolar bit label of a symbol index.
    pub fn bits_of(&self, sym: usize) -> Vec<i8> {
        symbol_bits(sym, self.bits())
    }

    /// Bit `j` of symbol `sym` without allocating.
    pub fn bit(&self, sym: usize, j: usize) -> i8 {
        if sym >> (self.bits() - 1 - j) & 1 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn symbol_from_bits(&self, bits: &[i8]) -> Result<usize> {
        if bits.len() != self.bits() {
            return Err(DetectError::BitLength {
                expected: self.bits(),
                got: bits.len(),
            });
        }
        bits.iter().try_fold(0usize, |acc, &b| match b {
            1 => Ok(acc << 1),
            -1 => Ok(acc << 1 | 1),
            other => Err(DetectError::InvalidBit(other)),
        })
    }

    pub fn map_bits(&self, bits: &[i8]) -> Result<Complex64> {
        Ok(self.point(self.symbol_from_bits(bits)?))
    }

    pub fn symbol_of_point(&self, x: Complex64) -> Result<usize> {
        let not_found = || DetectError::NotAConstellationPoint(x);
        if x.re.fract() != 0.0 || x.im.fract() != 0.0 {
            return Err(not_found());
        }
        let ri = self.real.index_of(x.re as i32).ok_or_else(not_found)?;
        let ii = self.imag.index_of(x.im as i32).ok_or_else(not_found)?;
        Ok(self.symbol_from_levels(ri, ii))
    }

    pub fn demap_symbol(&self, x: Complex64) -> Result<Vec<i8>> {
        Ok(self.bits_of(self.symbol_of_point(x)?))
    }

    /// Splits a q-long prior vector into its real-axis and imaginary-axis parts.
    pub fn split_prior(&self, lambda: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if lambda.len() != self.bits() {
            return Err(DetectError::PriorLength {
                expected: self.bits(),
                got: lambda.len(),
            });
        }
        Ok((
            self.real_bit_idx.iter().map(|&j| lambda[j]).collect(),
            self.imag_bit_idx.iter().map(|&j| lambda[j]).collect(),
        ))
    }

    /// Audit dump: one line per symbol, `index level_re level_im bits`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {} (q = {}), real bits {:?}, imag bits {:?}",
            self.scheme,
            self.bits(),
            self.real_bit_idx,
            self.imag_bit_idx
        );
        let _ = writeln!(out, "# index re im bits(0->+1)");
        for sym in 0..self.size() {
            let p = self.point(sym);
            let bits: String = self
                .bits_of(sym)
                .iter()
                .map(|&b| if b > 0 { '0' } else { '1' })
                .collect();
            let _ = writeln!(out, "{sym} {} {} {bits}", p.re, p.im);
        }
        out
    }
}

fn symbol_bits(sym: usize, q: usize) -> Vec<i8> {
    (0..q)
        .map(|j| if sym >> (q - 1 - j) & 1 == 0 { 1 } else { -1 })
        .collect()
}

fn find_label(axis: &PamAxis, label: &[i8]) -> usize {
    axis.labels
        .iter()
        .position(|l| l == label)
        .expect("every bit pattern labels exactly one level")
}
