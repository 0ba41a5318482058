//! Outer functions g = f ∘ Φ^{-1} (and g = f ∘ Ψ^{-1}), the truncated
//! Kolmogorov-Arnold approximation, and the piecewise-linear interpolant of
//! g at the Cantor breakpoints.
//!
//! g is only ever evaluated at Cantor points reachable as
//! [`phi_combine`](crate::encodings::phi_combine) outputs; off the Cantor
//! set the only defined extension is the interpolant [`PiecewiseLinearG`].

use crate::digits::{digits_from_real, ratio_to_f64, DigitError, GridPoint};
use crate::encodings::{phi_combine, phi_inverse, psi_deinterleave, CantorCode, EncodingError, MortonCode};
use num::Signed;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use thiserror::Error;

/// Hard cap on 2^{Kd}; above this the shallow outer layer would not fit in
/// memory or in the binary64 breakpoint grid.
pub const DEFAULT_UNIT_BUDGET: usize = 1 << 20;

/// Breakpoint separation must stay well above one ulp, which caps K·d at
/// 48 / log2(3) ternary digits.
pub const MAX_TERNARY_DIGITS: usize = 30;

#[derive(Debug, Error, PartialEq)]
pub enum OuterError {
    #[error("2^(K*d) = 2^{kd} exceeds the configured unit budget {budget}")]
    CapacityExceeded { kd: usize, budget: usize },
    #[error("dimension mismatch: function expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Digit(#[from] DigitError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

type Evaluator = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A d-variate evaluator bundled with its smoothness metadata. The
/// metadata (β, Q, sup-norm) is trusted input; [`HolderFunction::spot_check`]
/// provides a randomized audit that flags bad metadata.
#[derive(Clone)]
pub struct HolderFunction {
    name: String,
    d: usize,
    beta: f64,
    q: f64,
    sup_norm: f64,
    eval: Arc<Evaluator>,
}

impl std::fmt::Debug for HolderFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HolderFunction")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("beta", &self.beta)
            .field("q", &self.q)
            .field("sup_norm", &self.sup_norm)
            .finish()
    }
}

impl HolderFunction {
    pub fn new(
        name: impl Into<String>,
        d: usize,
        beta: f64,
        q: f64,
        sup_norm: f64,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(d >= 1);
        assert!(beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1]");
        assert!(q >= 0.0);
        HolderFunction {
            name: name.into(),
            d,
            beta,
            q,
            sup_norm,
            eval: Arc::new(eval),
        }
    }

    pub fn constant(d: usize, c: f64) -> Self {
        Self::new(format!("const{c}"), d, 1.0, 0.0, c.abs(), move |_| c)
    }

    /// Coordinate projection x ↦ x_{axis+1}.
    pub fn coordinate(d: usize, axis: usize) -> Self {
        assert!(axis < d);
        Self::new(format!("coord{}", axis + 1), d, 1.0, 1.0, 1.0, move |x| x[axis])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn holder_constant(&self) -> f64 {
        self.q
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        (self.eval)(x)
    }

    /// Randomized audit of the Hölder metadata: returns the worst violating
    /// pair, if any, over `samples` random pairs.
    pub fn spot_check(&self, samples: usize, seed: u64) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        for _ in 0..samples {
            let x: Vec<f64> = (0..self.d).map(|_| rng.random_range(0.0..1.0)).collect();
            let y: Vec<f64> = (0..self.d).map(|_| rng.random_range(0.0..1.0)).collect();
            let fx = self.eval(&x);
            let fy = self.eval(&y);
            if fx.abs() > self.sup_norm || fy.abs() > self.sup_norm {
                return Some((x, y));
            }
            let dist = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let excess = (fx - fy).abs() - self.q * dist.powf(self.beta);
            if excess > 1e-12 && worst.as_ref().is_none_or(|(e, _, _)| excess > *e) {
                worst = Some((excess, x, y));
            }
        }
        worst.map(|(_, x, y)| (x, y))
    }
}

/// Table of 2^{kd} values on the half-open dyadic cells
/// ×_j [ℓ_j 2^{-k}, (ℓ_j+1) 2^{-k}).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantFunction {
    k: u32,
    d: usize,
    values: Vec<f64>,
}

impl PiecewiseConstantFunction {
    pub fn from_values(k: u32, d: usize, values: Vec<f64>) -> Option<Self> {
        if values.len() != 1usize << (k as usize * d) {
            return None;
        }
        Some(PiecewiseConstantFunction { k, d, values })
    }

    /// Seeded table with values uniform in [-1, 1].
    pub fn random(k: u32, d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..1usize << (k as usize * d))
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        PiecewiseConstantFunction { k, d, values }
    }

    pub fn resolution(&self) -> u32 {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    fn cell_index(&self, cell: &[usize]) -> usize {
        let side = 1usize << self.k;
        cell.iter().fold(0, |acc, &l| {
            debug_assert!(l < side);
            acc * side + l
        })
    }

    pub fn cell_value(&self, cell: &[usize]) -> f64 {
        self.values[self.cell_index(cell)]
    }

    /// Half-open cell lookup; x_j = 1 falls into the top cell.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        let side = 1usize << self.k;
        let cell: Vec<usize> = x
            .iter()
            .map(|&v| ((v * side as f64).floor() as usize).min(side - 1))
            .collect();
        self.cell_value(&cell)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Wrap as an evaluable function. Across distinct cells the Cantor-set
    /// separation makes the table effectively (β=1)-Hölder with constant
    /// 2 ‖f‖_∞ 2^k, which is the metadata recorded here.
    pub fn to_holder(&self, name: impl Into<String>) -> HolderFunction {
        let sup = self.sup_norm();
        let q = 2.0 * sup * 2f64.powi(self.k as i32);
        let table = self.clone();
        HolderFunction::new(name, self.d, 1.0, q, sup, move |x| table.value_at(x))
    }
}

/// g evaluated at a Cantor code: f(Φ^{-1}(code)).
pub fn outer_g_eval(f: &HolderFunction, code: &CantorCode) -> Result<f64, OuterError> {
    let point = phi_inverse(code, f.dimension())?;
    Ok(f.eval(&point.to_f64_vec()))
}

/// g evaluated at a Morton code: f(Ψ^{-1}(code)).
pub fn morton_outer_eval(f: &HolderFunction, code: &MortonCode) -> Result<f64, OuterError> {
    let point = psi_deinterleave(code, f.dimension())?;
    Ok(f.eval(&point.to_f64_vec()))
}

/// Truncated KA approximation g(Σ_p 3^{-p} φ_K(x_p)) evaluated at a real
/// vector; equals f at the lower-left anchor of the dyadic cell of x.
pub fn ka_approx_eval(f: &HolderFunction, x: &[f64], k: usize) -> Result<f64, OuterError> {
    if x.len() != f.dimension() {
        return Err(OuterError::DimensionMismatch {
            expected: f.dimension(),
            got: x.len(),
        });
    }
    let coords = x
        .iter()
        .map(|&v| digits_from_real(v, 2, k))
        .collect::<Result<Vec<_>, _>>()?;
    let point = GridPoint::new(coords)?;
    let code = phi_combine(&point, k)?;
    outer_g_eval(f, &code)
}

/// The 2^{Kd} + 1 interpolation points
/// {Σ_{j=1}^{Kd} 2 t_j 3^{-j} : t ∈ {0,1}^{Kd}} ∪ {1}, sorted ascending.
pub fn breakpoints(k: usize, d: usize) -> Result<Vec<f64>, OuterError> {
    breakpoints_with_budget(k, d, DEFAULT_UNIT_BUDGET)
}

pub fn breakpoints_with_budget(k: usize, d: usize, budget: usize) -> Result<Vec<f64>, OuterError> {
    let kd = k * d;
    if kd > MAX_TERNARY_DIGITS || (1u64 << kd) >= budget as u64 {
        return Err(OuterError::CapacityExceeded {
            kd,
            budget: budget.min(1 << MAX_TERNARY_DIGITS),
        });
    }
    let count = 1usize << kd;
    // Enumerating the index MSB-first walks the codes in increasing value
    // order, so the list is born sorted.
    let mut points = Vec::with_capacity(count + 1);
    for m in 0..count as u64 {
        points.push(CantorCode::from_index(m, kd).value_f64());
    }
    points.push(1.0);
    Ok(points)
}

/// Piecewise-linear interpolant of the outer function at the Cantor
/// breakpoints; linear in between, clamped to the end values outside [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearG {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    sup_norm_f: f64,
}

impl PiecewiseLinearG {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, sup_norm_f: f64) -> Self {
        assert_eq!(breakpoints.len(), values.len());
        assert!(breakpoints.len() >= 2);
        debug_assert!(breakpoints.windows(2).all(|w| w[0] < w[1]));
        PiecewiseLinearG {
            breakpoints,
            values,
            sup_norm_f,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sup-norm bound inherited from the represented function.
    pub fn sup_norm_f(&self) -> f64 {
        self.sup_norm_f
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.breakpoints.len();
        if x <= self.breakpoints[0] {
            return self.values[0];
        }
        if x >= self.breakpoints[n - 1] {
            return self.values[n - 1];
        }
        // Index of the segment [x_i, x_{i+1}) containing x.
        let i = self.breakpoints.partition_point(|&b| b <= x) - 1;
        let (x0, x1) = (self.breakpoints[i], self.breakpoints[i + 1]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        v0 + (x - x0) * (v1 - v0) / (x1 - x0)
    }

    pub fn min_gap(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Interpolate g = f ∘ Φ^{-1} at the 2^{Kd} Cantor breakpoints plus the
/// point 1, whose preimage is the all-ones corner of the cube.
pub fn build_interpolant(f: &HolderFunction, k: usize) -> Result<PiecewiseLinearG, OuterError> {
    build_interpolant_with_budget(f, k, DEFAULT_UNIT_BUDGET)
}

pub fn build_interpolant_with_budget(
    f: &HolderFunction,
    k: usize,
    budget: usize,
) -> Result<PiecewiseLinearG, OuterError> {
    let d = f.dimension();
    let xs = breakpoints_with_budget(k, d, budget)?;
    let kd = k * d;
    let mut values = Vec::with_capacity(xs.len());
    for m in 0..1u64 << kd {
        let code = CantorCode::from_index(m, kd);
        values.push(outer_g_eval(f, &code)?);
    }
    values.push(f.eval(&vec![1.0; d]));
    Ok(PiecewiseLinearG::new(xs, values, f.sup_norm()))
}

/// Outcome of the piecewise-constant Lipschitz-transfer audit.
#[derive(Debug, Clone, Copy)]
pub struct LipschitzAudit {
    pub max_ratio: f64,
    pub bound: f64,
    pub samples: usize,
}

impl LipschitzAudit {
    pub fn holds(&self) -> bool {
        self.max_ratio <= self.bound
    }
}

/// Samples Cantor pairs and audits |g(x)-g(y)| / |x-y| against the
/// piecewise-constant transfer bound 2 ‖f‖_∞ 3^{kd}.
pub fn lipschitz_audit_pwc(
    f: &PiecewiseConstantFunction,
    sample_count: usize,
    seed: u64,
) -> LipschitzAudit {
    let d = f.dimension();
    let kd = f.resolution() as usize * d;
    // Codes longer than kd so that pairs can share a cell.
    let len = kd + 2 * d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio: f64 = 0.0;
    let mut used = 0;
    for _ in 0..sample_count {
        let a: u64 = rng.random_range(0..1u64 << len);
        let b: u64 = rng.random_range(0..1u64 << len);
        if a == b {
            continue;
        }
        used += 1;
        let ca = CantorCode::from_index(a, len);
        let cb = CantorCode::from_index(b, len);
        let ga = f.value_at(&phi_inverse(&ca, d).expect("length multiple of d").to_f64_vec());
        let gb = f.value_at(&phi_inverse(&cb, d).expect("length multiple of d").to_f64_vec());
        let gap = ratio_to_f64(&(ca.value_rational() - cb.value_rational()).abs());
        max_ratio = max_ratio.max((ga - gb).abs() / gap);
    }
    LipschitzAudit {
        max_ratio,
        bound: 2.0 * f.sup_norm() * 3f64.powi(kd as i32),
        samples: used,
    }
}
