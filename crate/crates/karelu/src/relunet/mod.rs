//! Explicit feedforward ReLU networks: data model, evaluator, and the
//! constructive builders that compile a Hölder function into a network with
//! pinned architecture and weight bounds.
//!
//! The builders are deterministic; every network built here is immutable
//! and safe to evaluate concurrently from shared references.

mod io;

pub use io::{load_network, save_network, NetIoError, NetworkMeta, BUILDER_VERSION};

use crate::outer::{build_interpolant_with_budget, HolderFunction, OuterError, PiecewiseLinearG, DEFAULT_UNIT_BUDGET};
use thiserror::Error;

/// Builders refuse configurations with K·max(d, pβ) above this; beyond it
/// the 2^r ramp slopes no longer coexist with unit-interval inputs in
/// binary64 without silent precision loss.
pub const PRECISION_BUDGET: f64 = 40.0;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("network needs at least one layer")]
    Empty,
    #[error("layer {layer}: row {row} has {got} weights, expected {expected}")]
    ShapeMismatch {
        layer: usize,
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("layer {layer}: {rows} weight rows but {biases} biases")]
    BiasMismatch {
        layer: usize,
        rows: usize,
        biases: usize,
    },
    #[error("input length {got} does not match network input width {expected}")]
    InputWidth { expected: usize, got: usize },
    #[error("non-finite parameter in layer {0}")]
    NonFinite(usize),
    #[error("precision budget exceeded: K*max(d, p*beta) = {value} > {budget}")]
    PrecisionBudget { value: f64, budget: f64 },
    #[error("p must be at least 1, got {0}")]
    BadExponent(f64),
    #[error("beta must lie in (0, 1], got {0}")]
    BadSmoothness(f64),
    #[error("K must be at least 1")]
    ZeroDepth,
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Outer(#[from] OuterError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

/// One affine-plus-activation layer; `weights` is row-major, one row per
/// output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn width(&self) -> usize {
        self.weights.len()
    }

    fn eval_into(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, &b) in self.weights.iter().zip(&self.bias) {
            let mut acc = 0.0;
            for (w, y) in row.iter().zip(input) {
                acc += w * y;
            }
            acc += b;
            out.push(match self.activation {
                Activation::Relu => acc.max(0.0),
                Activation::Identity => acc,
            });
        }
    }
}

/// Layer-size descriptor (p_0, ..., p_{L+1}) with L hidden layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    pub widths: Vec<usize>,
}

impl Architecture {
    pub fn hidden_layers(&self) -> usize {
        self.widths.len() - 2
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, (", self.hidden_layers())?;
        for (i, w) in self.widths.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "))")
    }
}

/// Immutable layered network with explicit weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluNetwork {
    layers: Vec<Layer>,
    input_width: usize,
}

impl ReluNetwork {
    pub fn new(input_width: usize, layers: Vec<Layer>) -> Result<Self, NetError> {
        if layers.is_empty() {
            return Err(NetError::Empty);
        }
        let mut prev = input_width;
        for (li, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.weights.len() {
                return Err(NetError::BiasMismatch {
                    layer: li,
                    rows: layer.weights.len(),
                    biases: layer.bias.len(),
                });
            }
            for (ri, row) in layer.weights.iter().enumerate() {
                if row.len() != prev {
                    return Err(NetError::ShapeMismatch {
                        layer: li,
                        row: ri,
                        expected: prev,
                        got: row.len(),
                    });
                }
                if row.iter().any(|w| !w.is_finite()) {
                    return Err(NetError::NonFinite(li));
                }
            }
            if layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(NetError::NonFinite(li));
            }
            prev = layer.width();
        }
        Ok(ReluNetwork {
            layers,
            input_width,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(self.input_width, Layer::width)
    }

    pub fn architecture(&self) -> Architecture {
        let mut widths = Vec::with_capacity(self.layers.len() + 1);
        widths.push(self.input_width);
        widths.extend(self.layers.iter().map(Layer::width));
        Architecture { widths }
    }

    /// Weight-bound audit value: max |entry| over all weights and biases.
    pub fn max_abs_weight(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| {
                l.weights
                    .iter()
                    .flatten()
                    .chain(l.bias.iter())
                    .map(|w| w.abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, input: &[f64]) -> Result<Vec<f64>, NetError> {
        if input.len() != self.input_width {
            return Err(NetError::InputWidth {
                expected: self.input_width,
                got: input.len(),
            });
        }
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.eval_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Convenience for 1-in-1-out and d-in-1-out networks.
    pub fn eval_scalar(&self, input: &[f64]) -> Result<f64, NetError> {
        Ok(self.eval(input)?[0])
    }
}

/// Parameters of the bit-extraction network: `r` is the largest integer
/// with 2^r ≤ 2K·2^{Kβp}; `d` enters through the 3^{-d(j-1)} accumulation
/// weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitExtractorPlan {
    pub k: usize,
    pub r: i32,
    pub d: usize,
}

impl BitExtractorPlan {
    pub fn new(k: usize, d: usize, beta: f64, p: f64) -> Result<Self, NetError> {
        if k == 0 {
            return Err(NetError::ZeroDepth);
        }
        if beta.is_nan() || beta <= 0.0 || beta > 1.0 {
            return Err(NetError::BadSmoothness(beta));
        }
        if p.is_nan() || p < 1.0 {
            return Err(NetError::BadExponent(p));
        }
        let load = k as f64 * (d as f64).max(p * beta);
        if load > PRECISION_BUDGET {
            return Err(NetError::PrecisionBudget {
                value: load,
                budget: PRECISION_BUDGET,
            });
        }
        let target = 2.0 * k as f64 * 2f64.powf(k as f64 * beta * p);
        let mut r = target.log2().floor() as i32;
        while 2f64.powi(r + 1) <= target {
            r += 1;
        }
        while 2f64.powi(r) > target {
            r -= 1;
        }
        debug_assert!(r >= 1);
        debug_assert!(2f64.powi(r) <= target && target < 2f64.powi(r + 1));
        Ok(BitExtractorPlan { k, r, d })
    }
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// The slope-2^r ramp S_1(x) = 2^r (x - 1/2 + 2^{-r-1})_+ - 2^r (x - 1/2 - 2^{-r-1})_+.
///
/// Equals the indicator 1(x > 1/2) whenever |x - 1/2| ≥ 2^{-r-1} and takes
/// the value 1/2 at the ramp center.
pub fn s1_reference(x: f64, r: i32) -> f64 {
    let scale = 2f64.powi(r);
    let half_step = 2f64.powi(-r - 1);
    scale * relu(x - 0.5 + half_step) - scale * relu(x - 0.5 - half_step)
}

/// Trace of the scalar bit-extraction recursion: S_j, T_j, and the
/// accumulated output Σ_j 2 S_j(x) 3^{-d(j-1)}.
#[derive(Debug, Clone, PartialEq)]
pub struct StTrace {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub phi_k: f64,
}

/// Direct evaluation of T_1 = 2x, S_1 = S_1(x),
/// T_{j+1} = (2T_j - 2S_j)_+, S_{j+1} = S_1(T_j - S_j); the oracle the
/// network builder is checked against.
pub fn st_recursion_reference(x: f64, k: usize, r: i32, d: usize) -> StTrace {
    assert!(k >= 1);
    let mut s_vals = Vec::with_capacity(k);
    let mut t_vals = Vec::with_capacity(k);
    let mut t = 2.0 * x;
    let mut s = s1_reference(x, r);
    s_vals.push(s);
    t_vals.push(t);
    let mut acc = 2.0 * s;
    for j in 2..=k {
        let diff = t - s;
        t = relu(2.0 * t - 2.0 * s);
        s = s1_reference(diff, r);
        s_vals.push(s);
        t_vals.push(t);
        acc += 2.0 * s * 3f64.powi(-((d * (j - 1)) as i32));
    }
    StTrace {
        s: s_vals,
        t: t_vals,
        phi_k: acc,
    }
}

/// Deep ReLU network with architecture (2K, (1,4,...,4,1)) computing the
/// recursion of [`st_recursion_reference`]; all weights bounded by 2^r.
///
/// Stage j spans two hidden layers. The first forms the two ramp legs with
/// the 2^r slope already applied, plus copies of the running sum U and the
/// tail D; the second folds the decoded bit into U and advances D. Carried
/// channels stay nonnegative, so every rectifier acts as the identity on
/// them.
pub fn build_bit_extractor(plan: &BitExtractorPlan) -> ReluNetwork {
    let scale = 2f64.powi(plan.r);
    let ramp_lo = 0.5 - 2f64.powi(plan.r - 1);
    let ramp_hi = -0.5 - 2f64.powi(plan.r - 1);
    let mut layers = Vec::with_capacity(2 * plan.k + 1);
    for j in 1..=plan.k {
        // Channels in: (U, D, 0, 0) for j > 1, the raw input for j = 1.
        // Channels out: (U, 2^r z+, 2^r z-, D).
        let first = if j == 1 {
            Layer {
                weights: vec![vec![0.0], vec![scale], vec![scale], vec![1.0]],
                bias: vec![0.0, ramp_lo, ramp_hi, 0.0],
                activation: Activation::Relu,
            }
        } else {
            Layer {
                weights: vec![
                    vec![1.0, 0.0, 0.0, 0.0],
                    vec![0.0, scale, 0.0, 0.0],
                    vec![0.0, scale, 0.0, 0.0],
                    vec![0.0, 1.0, 0.0, 0.0],
                ],
                bias: vec![0.0, ramp_lo, ramp_hi, 0.0],
                activation: Activation::Relu,
            }
        };
        layers.push(first);
        // S_j = (2^r z+) - (2^r z-); U_j = U + 2·3^{-d(j-1)} S_j;
        // D_j = 2 D - S_j. Two channels are padding.
        let c = 2.0 * 3f64.powi(-((plan.d * (j - 1)) as i32));
        layers.push(Layer {
            weights: vec![
                vec![1.0, c, -c, 0.0],
                vec![0.0, -1.0, 1.0, 2.0],
                vec![0.0; 4],
                vec![0.0; 4],
            ],
            bias: vec![0.0; 4],
            activation: Activation::Relu,
        });
    }
    layers.push(Layer {
        weights: vec![vec![1.0, 0.0, 0.0, 0.0]],
        bias: vec![0.0],
        activation: Activation::Identity,
    });
    ReluNetwork::new(1, layers).expect("builder emits consistent shapes")
}

/// Shallow network with 2^{Kd}+1 hidden units realizing the piecewise
/// linear interpolant via its slope-difference expansion. Each unit's
/// coefficient a is split as sign(a)·√|a| · (√|a| x - √|a| t)_+ so the
/// weight audit matches the interpolation-layer bound.
pub fn build_outer_net(g: &PiecewiseLinearG) -> ReluNetwork {
    let xs = g.breakpoints();
    let vs = g.values();
    let n = xs.len();
    let slope = |i: usize| (vs[i] - vs[i - 1]) / (xs[i] - xs[i - 1]);
    // Unit anchors and coefficients of g(x_0)(x+1)_+ + (slope_1 - g(x_0))(x)_+
    // + Σ_j (slope_{j+1} - slope_j)(x - x_j)_+.
    let mut anchors = Vec::with_capacity(n);
    let mut coefs = Vec::with_capacity(n);
    anchors.push(-1.0);
    coefs.push(vs[0]);
    anchors.push(xs[0]);
    coefs.push(slope(1) - vs[0]);
    for i in 1..n - 1 {
        anchors.push(xs[i]);
        coefs.push(slope(i + 1) - slope(i));
    }
    let mut hidden_w = Vec::with_capacity(n);
    let mut hidden_b = Vec::with_capacity(n);
    let mut out_w = Vec::with_capacity(n);
    for (&a, &t) in coefs.iter().zip(&anchors) {
        let h = a.abs().sqrt();
        hidden_w.push(vec![h]);
        hidden_b.push(-h * t);
        out_w.push(a.signum() * h);
    }
    let layers = vec![
        Layer {
            weights: hidden_w,
            bias: hidden_b,
            activation: Activation::Relu,
        },
        Layer {
            weights: vec![out_w],
            bias: vec![0.0],
            activation: Activation::Identity,
        },
    ];
    ReluNetwork::new(1, layers).expect("builder emits consistent shapes")
}

/// Expected assembled architecture (2K+3, (d, 4d, ..., 4d, d, 1, 2^{Kd}+1, 1)).
pub fn full_architecture(d: usize, k: usize) -> Architecture {
    let mut widths = vec![d];
    widths.extend(std::iter::repeat_n(4 * d, 2 * k));
    widths.extend([d, 1, (1usize << (k * d)) + 1, 1]);
    Architecture { widths }
}

/// Compile `f` into the full deep ReLU network: d parallel bit extractors,
/// a width-d collection layer, the width-1 interior sum Σ_q 3^{-q} φ̃_K(x_q)
/// (nonnegative, so rectifier-safe), and the shallow interpolation layer.
pub fn assemble_full(f: &HolderFunction, k: usize, p: f64) -> Result<ReluNetwork, NetError> {
    assemble_full_with_budget(f, k, p, DEFAULT_UNIT_BUDGET)
}

pub fn assemble_full_with_budget(
    f: &HolderFunction,
    k: usize,
    p: f64,
    unit_budget: usize,
) -> Result<ReluNetwork, NetError> {
    let d = f.dimension();
    let plan = BitExtractorPlan::new(k, d, f.beta(), p)?;
    let interp = build_interpolant_with_budget(f, k, unit_budget)?;
    let outer_net = build_outer_net(&interp);
    let extractor = build_bit_extractor(&plan);

    let mut layers = Vec::with_capacity(2 * k + 4);
    for (li, stage) in extractor.layers()[..2 * k].iter().enumerate() {
        let in_per_block = if li == 0 { 1 } else { 4 };
        let mut weights = vec![vec![0.0; d * in_per_block]; 4 * d];
        let mut bias = vec![0.0; 4 * d];
        for q in 0..d {
            for (ri, row) in stage.weights.iter().enumerate() {
                for (ci, &w) in row.iter().enumerate() {
                    weights[4 * q + ri][in_per_block * q + ci] = w;
                }
                bias[4 * q + ri] = stage.bias[ri];
            }
        }
        layers.push(Layer {
            weights,
            bias,
            activation: Activation::Relu,
        });
    }
    // Collect φ̃_K(x_q): channel 0 of each extractor block, all nonnegative.
    let mut collect = vec![vec![0.0; 4 * d]; d];
    for (q, row) in collect.iter_mut().enumerate() {
        row[4 * q] = 1.0;
    }
    layers.push(Layer {
        weights: collect,
        bias: vec![0.0; d],
        activation: Activation::Relu,
    });
    // Interior sum Σ_q 3^{-q} φ̃_K(x_q).
    layers.push(Layer {
        weights: vec![(1..=d).map(|q| 3f64.powi(-(q as i32))).collect()],
        bias: vec![0.0],
        activation: Activation::Relu,
    });
    layers.push(outer_net.layers()[0].clone());
    layers.push(outer_net.layers()[1].clone());
    ReluNetwork::new(d, layers)
}

/// Two-unit approximation of the threshold 1(x ≥ 1/2): zero up to
/// (1-ε)/2, one from (1+ε)/2, linear between.
pub fn soft_threshold(eps: f64) -> Result<ReluNetwork, NetError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(NetError::BadEpsilon(eps));
    }
    let inv = eps.recip();
    let layers = vec![
        Layer {
            weights: vec![vec![1.0], vec![1.0]],
            bias: vec![-(1.0 - eps) / 2.0, -(1.0 + eps) / 2.0],
            activation: Activation::Relu,
        },
        Layer {
            weights: vec![vec![inv, -inv]],
            bias: vec![0.0],
            activation: Activation::Identity,
        },
    ];
    ReluNetwork::new(1, layers)
}
