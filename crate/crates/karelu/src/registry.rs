//! Versioned registry of benchmark functions with documented smoothness
//! metadata, so certification runs are reproducible without user-supplied
//! code.
//!
//! The named entries are the smooth sweep set; seeded piecewise-constant
//! tables (`pwc1`..`pwc3`) are also constructible and carry the effective
//! metadata from [`PiecewiseConstantFunction::to_holder`]. Their
//! approximation error does not decay geometrically in K, so they are not
//! part of the named sweep set.

use crate::outer::{HolderFunction, PiecewiseConstantFunction};
use std::f64::consts::PI;

/// Bumping this invalidates previously written CSV rows and network files.
pub const REGISTRY_VERSION: &str = "1";

/// Names of the sweep functions. Every entry saturates its class rate: its
/// L^p approximation error really decays like 2^{-βK}, which the rate-slope
/// certifications assume.
pub const SWEEP_NAMES: [&str; 5] = ["coord1", "rough05", "dist1", "sines", "product"];

/// Instantiate a registry function in dimension `d`. `seed` only affects
/// the `pwc*` tables.
pub fn get(name: &str, d: usize, seed: u64) -> Option<HolderFunction> {
    match name {
        "coord1" => Some(HolderFunction::coordinate(d, 0)),
        "rough05" => Some(rough_half(d)),
        "dist1" => Some(center_distance(d, 1.0)),
        "sines" => Some(additive_sines(d)),
        "product" => Some(product(d)),
        "pwc1" => Some(pwc_table(1, d, seed).to_holder("pwc1")),
        "pwc2" => Some(pwc_table(2, d, seed).to_holder("pwc2")),
        "pwc3" => Some(pwc_table(3, d, seed).to_holder("pwc3")),
        _ => None,
    }
}

pub fn sweep_functions(d: usize) -> Vec<HolderFunction> {
    SWEEP_NAMES
        .iter()
        .map(|n| get(n, d, 0).expect("sweep names are registered"))
        .collect()
}

/// Seeded random table, values uniform in [-1, 1].
pub fn pwc_table(k: u32, d: usize, seed: u64) -> PiecewiseConstantFunction {
    PiecewiseConstantFunction::random(k, d, seed)
}

/// f(x) = ‖x - c‖_∞^β with c the cube center. |a^β - b^β| ≤ |a-b|^β for
/// β ≤ 1, so Q = 1; the sup-norm is (1/2)^β.
fn center_distance(d: usize, beta: f64) -> HolderFunction {
    HolderFunction::new("dist1", d, beta, 1.0, 0.5f64.powf(beta), move |x| {
        x.iter()
            .map(|v| (v - 0.5).abs())
            .fold(0.0f64, f64::max)
            .powf(beta)
    })
}

/// Coordinate average of the truncated Weierstrass-type sum
/// W(t) = Σ_{n<14} 2^{-n/2} cos(2^n π t), which is 1/2-Hölder at every
/// scale the sweeps resolve. Splitting the increment bound at 2^n ≈ 1/h
/// gives |W(s) - W(t)| ≤ (π + 2)/(1 - 2^{-1/2}) √h < 18 √h, and the
/// sup-norm is below Σ 2^{-n/2} < 3.5.
fn rough_half(d: usize) -> HolderFunction {
    const DEPTH: i32 = 14;
    HolderFunction::new("rough05", d, 0.5, 18.0, 3.5, move |x| {
        x.iter()
            .map(|&v| {
                (0..DEPTH)
                    .map(|n| 2f64.powf(-0.5 * n as f64) * (2f64.powi(n) * PI * v).cos())
                    .sum::<f64>()
            })
            .sum::<f64>()
            / d as f64
    })
}

/// f(x) = (1/d) Σ_j sin(π x_j); gradient components are π/d, so Q = π.
fn additive_sines(d: usize) -> HolderFunction {
    HolderFunction::new("sines", d, 1.0, PI, 1.0, move |x| {
        x.iter().map(|v| (PI * v).sin()).sum::<f64>() / d as f64
    })
}

/// f(x) = Π_j x_j; changing one coordinate moves the value by at most its
/// increment, so Q = d under the sup-norm.
fn product(d: usize) -> HolderFunction {
    HolderFunction::new("product", d, 1.0, d as f64, 1.0, |x| {
        x.iter().product()
    })
}
