//! Interior encodings: digit-spreading maps, the Morton interleave, the
//! Cantor-set encoding, and their exact inverses.
//!
//! Everything here operates on [`DigitSequence`] values, never on floats;
//! float entry points exist only as compositions with
//! [`digits_from_real`](crate::digits::digits_from_real). The spreading maps
//! return their result as a digit list whose 1-based position `d(j-1)+1`
//! carries the j-th input digit; the sum value of such a fragment exceeds 1,
//! so it is exposed only through the exact-fraction accessors
//! [`psi_fragment_value`] and [`phi_fragment_value`].

use crate::digits::{DigitSequence, GridPoint};
use num::rational::BigRational;
use num::BigInt;
use num::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EncodingError {
    #[error("digit {digit} at ternary position {position} is not a Cantor digit")]
    NotACantorPoint { digit: u32, position: usize },
    #[error("code length {len} is not divisible by dimension {d}")]
    LengthNotDivisible { len: usize, d: usize },
    #[error("expected a base-{expected} sequence, got base {got}")]
    WrongBase { expected: u32, got: u32 },
    #[error("codes must have equal length, got {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

/// Base-B digit-interleave code of a grid point; length is K·d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MortonCode(DigitSequence);

impl MortonCode {
    pub fn new(seq: DigitSequence) -> MortonCode {
        MortonCode(seq)
    }

    pub fn sequence(&self) -> &DigitSequence {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn value_rational(&self) -> BigRational {
        self.0.value_rational()
    }

    pub fn value_f64(&self) -> f64 {
        self.0.value_f64()
    }
}

/// Ternary sequence with digits restricted to {0, 2}; the image points of
/// the Cantor encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CantorCode(DigitSequence);

impl CantorCode {
    pub fn new(seq: DigitSequence) -> Result<Self, EncodingError> {
        if seq.base() != 3 {
            return Err(EncodingError::WrongBase {
                expected: 3,
                got: seq.base(),
            });
        }
        for (position, &digit) in seq.digits().iter().enumerate() {
            if digit == 1 {
                return Err(EncodingError::NotACantorPoint { digit, position });
            }
        }
        Ok(CantorCode(seq))
    }

    /// Code of length `len` whose ternary digits are twice the bits of
    /// `index`, most significant bit first. Enumerating `index` from 0 to
    /// 2^len - 1 enumerates all codes in increasing value order.
    pub fn from_index(index: u64, len: usize) -> CantorCode {
        assert!(len < 64, "index enumeration supports lengths below 64");
        assert!(index < (1u64 << len));
        let digits = (0..len)
            .map(|i| 2 * ((index >> (len - 1 - i)) & 1) as u32)
            .collect();
        CantorCode(DigitSequence::new(3, digits).expect("digits in {0,2}"))
    }

    pub fn sequence(&self) -> &DigitSequence {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn value_rational(&self) -> BigRational {
        self.0.value_rational()
    }

    pub fn value_f64(&self) -> f64 {
        self.0.value_f64()
    }
}

/// Digit-spreading map: the j-th digit of `x` moves to position `d(j-1)+1`,
/// every other position is zero. Output length is `d * len(x)`.
pub fn psi(x: &DigitSequence, d: usize) -> DigitSequence {
    assert!(d >= 1);
    let mut digits = vec![0u32; d * x.len()];
    for j in 1..=x.len() {
        digits[d * (j - 1)] = x.digit(j);
    }
    DigitSequence::new(x.base(), digits).expect("digits preserved")
}

/// Exact value of the spreading sum Σ_j a_j B^{-d(j-1)}; exceeds 1 whenever
/// the leading digit is nonzero, hence rational-only.
pub fn psi_fragment_value(x: &DigitSequence, d: usize) -> BigRational {
    BigRational::from(BigInt::from(x.base())) * psi(x, d).value_rational()
}

/// Morton interleave: digit `(j-1)d + p` of the output is the j-th digit of
/// coordinate p. Uses the first `k` digits of every coordinate.
pub fn psi_interleave(point: &GridPoint, k: usize) -> MortonCode {
    let d = point.dimension();
    let mut digits = vec![0u32; k * d];
    for j in 1..=k {
        for p in 1..=d {
            digits[(j - 1) * d + (p - 1)] = point.coord(p).digit(j);
        }
    }
    MortonCode(DigitSequence::new(point.base(), digits).expect("digits preserved"))
}

/// Exact inverse of [`psi_interleave`].
pub fn psi_deinterleave(code: &MortonCode, d: usize) -> Result<GridPoint, EncodingError> {
    if d == 0 {
        return Err(EncodingError::ZeroDimension);
    }
    let len = code.0.len();
    if !len.is_multiple_of(d) {
        return Err(EncodingError::LengthNotDivisible { len, d });
    }
    let k = len / d;
    let coords = (1..=d)
        .map(|p| {
            let digits = (1..=k).map(|j| code.0.digit((j - 1) * d + p)).collect();
            DigitSequence::new(code.0.base(), digits).expect("digits preserved")
        })
        .collect();
    Ok(GridPoint::new(coords).expect("uniform base and length"))
}

/// Cantor spreading map: doubles each binary digit of `x` and places it at
/// ternary position `d(j-1)+1`. Input must be a binary sequence.
pub fn phi(x: &DigitSequence, d: usize) -> Result<DigitSequence, EncodingError> {
    if x.base() != 2 {
        return Err(EncodingError::WrongBase {
            expected: 2,
            got: x.base(),
        });
    }
    assert!(d >= 1);
    let mut digits = vec![0u32; d * x.len()];
    for j in 1..=x.len() {
        digits[d * (j - 1)] = 2 * x.digit(j);
    }
    Ok(DigitSequence::new(3, digits).expect("digits in {0,2}"))
}

/// Exact value of the Cantor spreading sum Σ_j 2 a_j 3^{-d(j-1)}.
pub fn phi_fragment_value(x: &DigitSequence, d: usize) -> Result<BigRational, EncodingError> {
    Ok(BigRational::from(BigInt::from(3)) * phi(x, d)?.value_rational())
}

/// [`phi`] applied to the first `k` binary digits of `x`.
pub fn phi_k(x: &DigitSequence, d: usize, k: usize) -> Result<DigitSequence, EncodingError> {
    phi(&x.truncated(k), d)
}

/// Combined Cantor encoding of a binary grid point: ternary digit
/// `(j-1)d + p` of the output is twice the j-th binary digit of coordinate
/// p. The value equals Σ_p 3^{-p} φ_K(x_p).
pub fn phi_combine(point: &GridPoint, k: usize) -> Result<CantorCode, EncodingError> {
    if point.base() != 2 {
        return Err(EncodingError::WrongBase {
            expected: 2,
            got: point.base(),
        });
    }
    let d = point.dimension();
    let mut digits = vec![0u32; k * d];
    for j in 1..=k {
        for p in 1..=d {
            digits[(j - 1) * d + (p - 1)] = 2 * point.coord(p).digit(j);
        }
    }
    Ok(CantorCode(
        DigitSequence::new(3, digits).expect("digits in {0,2}"),
    ))
}

/// Exact inverse of [`phi_combine`]: the j-th binary digit of coordinate p
/// is half the ternary digit at position `(j-1)d + p`.
pub fn phi_inverse(code: &CantorCode, d: usize) -> Result<GridPoint, EncodingError> {
    if d == 0 {
        return Err(EncodingError::ZeroDimension);
    }
    let len = code.0.len();
    if !len.is_multiple_of(d) {
        return Err(EncodingError::LengthNotDivisible { len, d });
    }
    let k = len / d;
    let coords = (1..=d)
        .map(|p| {
            let digits = (1..=k)
                .map(|j| code.0.digit((j - 1) * d + p) / 2)
                .collect();
            DigitSequence::new(2, digits).expect("halved Cantor digits are bits")
        })
        .collect();
    Ok(GridPoint::new(coords).expect("uniform base and length"))
}

/// Both sides of the inverse-map Hölder inequality
/// ‖Φ^{-1}(x) - Φ^{-1}(y)‖_∞ ≤ 2 |x - y|^{log 2 / (d log 3)}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderAudit {
    pub lhs: f64,
    pub rhs: f64,
}

impl HolderAudit {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Hölder exponent of the inverse Cantor encoding in dimension `d`.
pub fn inverse_holder_exponent(d: usize) -> f64 {
    std::f64::consts::LN_2 / (d as f64 * 3f64.ln())
}

pub fn cantor_holder_bound(
    x: &CantorCode,
    y: &CantorCode,
    d: usize,
) -> Result<HolderAudit, EncodingError> {
    if x.len() != y.len() {
        return Err(EncodingError::LengthMismatch(x.len(), y.len()));
    }
    let px = phi_inverse(x, d)?.to_f64_vec();
    let py = phi_inverse(y, d)?.to_f64_vec();
    let lhs = px
        .iter()
        .zip(&py)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let gap = (x.value_rational() - y.value_rational()).abs();
    let rhs = if gap.is_zero() {
        0.0
    } else {
        2.0 * crate::digits::ratio_to_f64(&gap).powf(inverse_holder_exponent(d))
    };
    Ok(HolderAudit { lhs, rhs })
}
