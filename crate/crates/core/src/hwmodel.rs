//! Hardware cost bookkeeping: distinct product terms, shift-add constant
//! multiplication plans and a fixed-point quantizer.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{DetectError, Result};

fn odd_magnitudes(p: usize) -> Result<Vec<u64>> {
    if !matches!(p, 2 | 4 | 8 | 16) {
        return Err(DetectError::UnsupportedPam(p));
    }
    Ok((1..p as u64).step_by(2).collect())
}

/// Number of distinct products a slicer datapath has to form for P-PAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermCounts {
    /// `r |x|`
    pub c1: usize,
    /// `r |x| |y|`
    pub c2: usize,
    /// `r x^2`
    pub c3: usize,
    /// `(r |x| +- s |y|) |z|`
    pub c4: usize,
    /// `|b^T lambda|`
    pub c5: usize,
}

impl TermCounts {
    pub fn as_tuple(&self) -> (usize, usize, usize, usize, usize) {
        (self.c1, self.c2, self.c3, self.c4, self.c5)
    }
}

pub fn count_distinct_terms(p: usize) -> Result<TermCounts> {
    let mags = odd_magnitudes(p)?;
    let products: BTreeSet<u64> = mags.iter().flat_map(|&x| mags.iter().map(move |&y| x * y)).collect();
    let squares: BTreeSet<u64> = mags.iter().map(|&x| x * x).collect();
    // E and F are independent reals, so E a + F b and E a - F b only
    // coincide across triples when the integer pairs (a, b) coincide.
    let mut pairs = BTreeSet::new();
    for &x in &mags {
        for &y in &mags {
            for &z in &mags {
                pairs.insert((x * z, y * z));
            }
        }
    }
    Ok(TermCounts {
        c1: mags.len(),
        c2: products.len(),
        c3: squares.len(),
        c4: 2 * pairs.len(),
        // one prior magnitude class per odd level magnitude
        c5: mags.len(),
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Ordered pairs of odd magnitudes below P that are coprime.
pub fn count_coprime_classes(p: usize) -> Result<usize> {
    let mags = odd_magnitudes(p)?;
    Ok(mags
        .iter()
        .flat_map(|&a| mags.iter().map(move |&b| gcd(a, b)))
        .filter(|&g| g == 1)
        .count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftOp {
    Add,
    Sub,
}

/// `target = (lhs << lhs_shift) op (rhs << rhs_shift)`; operands are earlier
/// targets or the input multiple 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftAddStep {
    pub target: u64,
    pub lhs: u64,
    pub lhs_shift: u32,
    pub op: ShiftOp,
    pub rhs: u64,
    pub rhs_shift: u32,
}

impl fmt::Display for ShiftAddStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            ShiftOp::Add => '+',
            ShiftOp::Sub => '-',
        };
        write!(
            f,
            "{} = ({} << {}) {} ({} << {})",
            self.target, self.lhs, self.lhs_shift, op, self.rhs, self.rhs_shift
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftAddPlan {
    pub steps: Vec<ShiftAddStep>,
}

impl ShiftAddPlan {
    /// Number of adders/subtractors.
    pub fn cost(&self) -> usize {
        self.steps.len()
    }

    /// Runs the plan on input `v`, returning `(target, computed value)` per step.
    pub fn evaluate(&self, v: i64) -> Vec<(u64, i128)> {
        let mut known: Vec<(u64, i128)> = vec![(1, i128::from(v))];
        let lookup = |known: &[(u64, i128)], t: u64| {
            known
                .iter()
                .find(|(k, _)| *k == t)
                .map(|&(_, val)| val)
                .expect("plan operands precede their use")
        };
        let mut out = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            let a = lookup(&known, s.lhs) << s.lhs_shift;
            let b = lookup(&known, s.rhs) << s.rhs_shift;
            let val = match s.op {
                ShiftOp::Add => a + b,
                ShiftOp::Sub => a - b,
            };
            known.push((s.target, val));
            out.push((s.target, val));
        }
        out
    }

    /// One step per line.
    pub fn dump(&self) -> String {
        self.steps.iter().map(|s| format!("{s}\n")).collect()
    }
}

const MAX_TARGET: u64 = 1 << 16;
const MAX_SHIFT: u32 = 17;

/// All single-step results from the current node set (odd, positive,
/// bounded), each with one step producing it.
fn one_step(nodes: &[u64]) -> Vec<ShiftAddStep> {
    let mut out = Vec::new();
    for &u in nodes {
        for a in 1..=MAX_SHIFT {
            let shifted = u << a;
            for &w in nodes {
                out.push(ShiftAddStep {
                    target: shifted + w,
                    lhs: u,
                    lhs_shift: a,
                    op: ShiftOp::Add,
                    rhs: w,
                    rhs_shift: 0,
                });
                if shifted > w {
                    out.push(ShiftAddStep {
                        target: shifted - w,
                        lhs: u,
                        lhs_shift: a,
                        op: ShiftOp::Sub,
                        rhs: w,
                        rhs_shift: 0,
                    });
                } else if w > shifted {
                    out.push(ShiftAddStep {
                        target: w - shifted,
                        lhs: w,
                        lhs_shift: 0,
                        op: ShiftOp::Sub,
                        rhs: u,
                        rhs_shift: a,
                    });
                }
            }
        }
    }
    out.retain(|s| s.target <= 2 * MAX_TARGET);
    out
}

fn find_step(nodes: &[u64], target: u64) -> Option<ShiftAddStep> {
    one_step(nodes).into_iter().find(|s| s.target == target)
}

/// Greedy plan: repeatedly realize the smallest target reachable in one
/// step; when none is, insert the intermediate that makes the most
/// remaining targets reachable (smallest value on ties).
pub fn build_shiftadd_plan(targets: &[u64]) -> Result<ShiftAddPlan> {
    if targets.is_empty() {
        return Err(DetectError::Config("shift-add plan needs at least one target".into()));
    }
    if let Some(&bad) = targets.iter().find(|&&t| t == 0 || t % 2 == 0 || t > MAX_TARGET) {
        return Err(DetectError::InvalidTarget(bad));
    }
    let mut remaining: BTreeSet<u64> = targets.iter().copied().filter(|&t| t != 1).collect();
    let mut nodes = vec![1u64];
    let mut steps = Vec::new();
    while !remaining.is_empty() {
        if let Some(step) = remaining.iter().find_map(|&t| find_step(&nodes, t)) {
            remaining.remove(&step.target);
            nodes.push(step.target);
            steps.push(step);
            continue;
        }
        let mut candidates: Vec<ShiftAddStep> = one_step(&nodes)
            .into_iter()
            .filter(|s| s.target % 2 == 1 && !nodes.contains(&s.target))
            .collect();
        candidates.sort_by_key(|s| s.target);
        candidates.dedup_by_key(|s| s.target);
        let mut best: Option<(usize, ShiftAddStep)> = None;
        for cand in candidates {
            let mut extended = nodes.clone();
            extended.push(cand.target);
            let reach: BTreeSet<u64> = one_step(&extended).iter().map(|s| s.target).collect();
            let gain = remaining.iter().filter(|t| reach.contains(t)).count();
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, cand));
            }
        }
        let (_, step) = best.expect("1 << a + 1 is always available");
        nodes.push(step.target);
        steps.push(step);
    }
    Ok(ShiftAddPlan { steps })
}

/// Signed two's-complement fixed point with `int_bits` integer bits
/// (including sign) and `frac_bits` fractional bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedPointFormat {
    pub int_bits: u32,
    pub frac_bits: u32,
}

impl FixedPointFormat {
    pub fn new(int_bits: u32, frac_bits: u32) -> Result<Self> {
        if int_bits < 1 || int_bits + frac_bits > 62 {
            return Err(DetectError::Config(format!(
                "invalid fixed-point format {int_bits}.{frac_bits}"
            )));
        }
        Ok(Self { int_bits, frac_bits })
    }

    pub fn step(&self) -> f64 {
        (-f64::from(self.frac_bits)).exp2()
    }

    /// Largest representable magnitude, `2^(I-1) - 2^-F`.
    pub fn max_value(&self) -> f64 {
        f64::from(self.int_bits - 1).exp2() - self.step()
    }
}

impl fmt::Display for FixedPointFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.int_bits, self.frac_bits)
    }
}

impl FromStr for FixedPointFormat {
    type Err = DetectError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || DetectError::Config(format!("fixed-point format must look like I.F, got {s:?}"));
        let (i, f) = s.split_once('.').ok_or_else(bad)?;
        Self::new(i.parse().map_err(|_| bad())?, f.parse().map_err(|_| bad())?)
    }
}

/// Rounds to the nearest multiple of `2^-F` (ties away from zero) and
/// saturates to the representable range.
pub fn quantize(x: f64, fmt: FixedPointFormat) -> f64 {
    let step = fmt.step();
    let max = fmt.max_value();
    ((x / step).round() * step).clamp(-max, max)
}
