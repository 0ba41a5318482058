//! Error measurement and certification: bad-set geometry of the ramp
//! construction, deterministic L^p error estimates, convergence-rate fits,
//! and the CSV report format.
//!
//! L^p integration uses midpoint grids as the primary estimator because the
//! truncated encoding's discontinuities sit exactly on dyadic hyperplanes
//! and midpoints avoid them; a Monte Carlo cross-check lives in the tests.
//! Grid sums use a fixed pairwise reduction so results are bit-stable
//! regardless of evaluation parallelism.

use crate::outer::HolderFunction;
use crate::relunet::ReluNetwork;
use num::rational::BigRational;
use num::{BigInt, One, Zero};
use thiserror::Error;

/// Total midpoint-grid cells are capped at 2^24.
pub const GRID_CELL_BUDGET_BITS: usize = 24;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("grid of 2^{requested} cells exceeds the 2^{budget} budget")]
    GridBudget { requested: usize, budget: usize },
    #[error("rate fit needs at least 3 reports, got {0}")]
    TooFewReports(usize),
    #[error("rate fit reports must share function, dimension, and exponent")]
    MixedReports,
    #[error("rate fit is degenerate: a measured error is zero")]
    DegenerateRate,
}

/// Exact geometry of the set where some ramp within the first `k` stages is
/// undecidable: the union over j = 1..k of 2^j open intervals of length
/// 2^{-r-j} centered at the odd multiples of 2^{-j-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct BadSetReport {
    pub k: usize,
    pub r: i32,
    /// Merged open intervals, sorted, pairwise disjoint.
    pub intervals: Vec<(BigRational, BigRational)>,
    pub total_measure: BigRational,
}

impl BadSetReport {
    /// Open-interval membership; the merged list is sorted and disjoint.
    pub fn contains(&self, x: &BigRational) -> bool {
        let idx = self.intervals.partition_point(|(a, _)| a < x);
        idx > 0 && x < &self.intervals[idx - 1].1
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.contains(&BigRational::from_float(x).expect("finite"))
    }

    /// Stage-count measure bound: total ≤ K 2^{-r}.
    pub fn within_measure_bound(&self) -> bool {
        self.total_measure
            <= BigRational::from(BigInt::from(self.k as i64)) * pow2_rational(-self.r)
    }

    pub fn total_measure_f64(&self) -> f64 {
        crate::digits::ratio_to_f64(&self.total_measure)
    }
}

fn pow2_rational(e: i32) -> BigRational {
    if e >= 0 {
        BigRational::from(BigInt::from(2).pow(e as u32))
    } else {
        BigRational::new(1.into(), BigInt::from(2).pow((-e) as u32))
    }
}

/// Closed-form interval list of the bad set: 2^j open subintervals of
/// length 2^{-r-j} per stage j = 1..K. Positions derive from the tail condition
/// |frac(2^j x) - 1/2| < 2^{-r-1} and are validated against the brute-force
/// membership oracle in the tests.
pub fn bad_set_intervals(k: usize, r: i32) -> BadSetReport {
    assert!(k >= 1);
    assert!(r >= 1);
    let mut raw: Vec<(BigRational, BigRational)> = Vec::new();
    for j in 1..=k as i32 {
        let radius = pow2_rational(-r - j - 1);
        let denom = pow2_rational(-j - 1);
        for m in 0..(1u64 << j) {
            let center = BigRational::from(BigInt::from(2 * m + 1)) * denom.clone();
            raw.push((center.clone() - radius.clone(), center + radius.clone()));
        }
    }
    raw.sort();
    // Merge strictly overlapping intervals only: open intervals touching at
    // a single point stay separate, the shared endpoint is decidable.
    let mut intervals: Vec<(BigRational, BigRational)> = Vec::new();
    for (a, b) in raw {
        match intervals.last_mut() {
            Some((_, prev_b)) if *prev_b > a => {
                if b > *prev_b {
                    *prev_b = b;
                }
            }
            _ => intervals.push((a, b)),
        }
    }
    let total_measure = intervals
        .iter()
        .fold(BigRational::zero(), |acc, (a, b)| acc + (b - a));
    BadSetReport {
        k,
        r,
        intervals,
        total_measure,
    }
}

/// Whether every binary digit the K-stage extractor must decide is clear of
/// the ramp ambiguity at `x`: |frac(2^j x) - 1/2| ≥ 2^{-r-1} for
/// j = 0..K-1. This is the set on which the built network reproduces the
/// truncated encoding exactly; it shifts the interval-list stages down by
/// one to cover the first digit.
pub fn good_set_contains(x: f64, k: usize, r: i32) -> bool {
    debug_assert!((0.0..=1.0).contains(&x));
    let half_step = 2f64.powi(-r - 1);
    let mut scaled = x;
    for _ in 0..k {
        let tail = scaled.fract();
        if (tail - 0.5).abs() < half_step {
            return false;
        }
        scaled = tail * 2.0;
    }
    true
}

/// Exact measure of the set of cube points with at least one bad
/// coordinate: 1 - (1 - m)^d for the one-dimensional bad measure m.
pub fn mismatch_measure(k: usize, r: i32, d: usize) -> BigRational {
    let m = bad_set_intervals(k, r).total_measure;
    let mut good = BigRational::one();
    let complement = BigRational::one() - &m;
    for _ in 0..d {
        good *= &complement;
    }
    let mismatch = BigRational::one() - good;
    // Union bound: never exceeds d·m.
    debug_assert!(mismatch <= BigRational::from(BigInt::from(d as i64)) * &m);
    mismatch
}

fn pairwise_sum(values: &mut dyn Iterator<Item = f64>, len: usize) -> f64 {
    // Fixed binary-tree reduction: the split points depend only on `len`,
    // so the result is independent of how work would be scheduled.
    fn rec(values: &mut dyn Iterator<Item = f64>, len: usize) -> f64 {
        if len <= 64 {
            let mut acc = 0.0;
            for _ in 0..len {
                acc += values.next().expect("iterator length matches");
            }
            return acc;
        }
        let half = len / 2;
        let left = rec(values, half);
        let right = rec(values, len - half);
        left + right
    }
    rec(values, len)
}

/// Midpoint-rule estimate of ‖f - net‖_{L^p([0,1]^d)} on the regular grid
/// with 2^{grid_bits} cells per axis.
pub fn lp_error(
    f: &HolderFunction,
    net: &ReluNetwork,
    p: f64,
    grid_bits: usize,
) -> Result<f64, MeasureError> {
    let d = f.dimension();
    if grid_bits * d > GRID_CELL_BUDGET_BITS {
        return Err(MeasureError::GridBudget {
            requested: grid_bits * d,
            budget: GRID_CELL_BUDGET_BITS,
        });
    }
    let side = 1usize << grid_bits;
    let cells = side.pow(d as u32);
    let step = (side as f64).recip();
    let mut point = vec![0.0f64; d];
    let mut indices = vec![0usize; d];
    let mut iter = (0..cells).map(|flat| {
        let mut rem = flat;
        for axis in (0..d).rev() {
            indices[axis] = rem % side;
            rem /= side;
        }
        for axis in 0..d {
            point[axis] = (indices[axis] as f64 + 0.5) * step;
        }
        let diff = (f.eval(&point) - net.eval_scalar(&point).expect("assembled net is d-in-1-out")).abs();
        if p == 1.0 {
            diff
        } else if p == 2.0 {
            diff * diff
        } else {
            diff.powf(p)
        }
    });
    let total = pairwise_sum(&mut iter, cells);
    let volume = step.powi(d as i32);
    Ok((total * volume).powf(p.recip()))
}

/// Default per-axis resolution: K+2 bits, capped by the cell budget.
pub fn default_grid_bits(k: usize, d: usize) -> usize {
    (k + 2).min(GRID_CELL_BUDGET_BITS / d)
}

/// Measured and theoretical errors for one (f, d, K, p) configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub function: String,
    pub d: usize,
    pub k: usize,
    pub p: f64,
    pub beta: f64,
    pub q: f64,
    pub measured_lp: f64,
    /// (16 Q + 2 ‖f‖_∞) 2^{-βK}.
    pub bound: f64,
    pub max_weight: f64,
    pub bad_set_measure: BigRational,
    pub grid_bits: usize,
}

impl ErrorReport {
    pub fn certified(&self) -> bool {
        self.measured_lp <= self.bound
    }

    pub fn csv_header() -> &'static str {
        "function,d,K,p,beta,Q,measured_lp,bound,max_weight,bad_set_measure,grid_bits"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.function,
            self.d,
            self.k,
            self.p,
            self.beta,
            self.q,
            self.measured_lp,
            self.bound,
            self.max_weight,
            crate::digits::ratio_to_f64(&self.bad_set_measure),
            self.grid_bits
        )
    }
}

/// Theoretical L^p certification bound (16Q + 2‖f‖_∞) 2^{-βK}.
pub fn certification_bound(f: &HolderFunction, k: usize) -> f64 {
    (16.0 * f.holder_constant() + 2.0 * f.sup_norm()) * 2f64.powf(-f.beta() * k as f64)
}

/// Least-squares slope of log2(measured_lp) against K; for a β-smooth
/// function the expected slope is -β.
pub fn rate_fit(reports: &[ErrorReport]) -> Result<f64, MeasureError> {
    if reports.len() < 3 {
        return Err(MeasureError::TooFewReports(reports.len()));
    }
    let head = &reports[0];
    if reports
        .iter()
        .any(|r| r.function != head.function || r.d != head.d || r.p != head.p)
    {
        return Err(MeasureError::MixedReports);
    }
    if reports.iter().any(|r| r.measured_lp <= 0.0) {
        return Err(MeasureError::DegenerateRate);
    }
    let n = reports.len() as f64;
    let mean_k = reports.iter().map(|r| r.k as f64).sum::<f64>() / n;
    let mean_log = reports.iter().map(|r| r.measured_lp.log2()).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for r in reports {
        let dk = r.k as f64 - mean_k;
        num += dk * (r.measured_lp.log2() - mean_log);
        den += dk * dk;
    }
    Ok(num / den)
}
