//! Exact finite-precision digit arithmetic on the unit interval.
//!
//! A [`DigitSequence`] stores the first `len` digits of a B-adic expansion
//! x = Σ_j d_j B^{-j}; digits beyond the stored length are implicitly zero.
//! For B-adic rationals the terminating expansion is always selected, so
//! 1/2 in base 2 is `[1, 0, 0, ...]`, never `[0, 1, 1, ...]`.
//!
//! Digit extraction never iterates `x <- frac(B*x)` in floating point: the
//! input is converted to an exact rational and digits come from integer
//! multiply-and-floor, so every stored digit is exact.

use num::bigint::BigUint;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use thiserror::Error;

/// Stored digit count budget, in base-2-equivalent digits, for values that
/// must survive a round trip through binary64. Beyond this the exact
/// rational accessors are the supported path.
pub const F64_DIGIT_BUDGET_BITS: f64 = 48.0;

#[derive(Debug, Error, PartialEq)]
pub enum DigitError {
    #[error("input {0} lies outside the unit interval")]
    OutsideUnitInterval(f64),
    #[error("base must be at least 2, got {0}")]
    BadBase(u32),
    #[error("digit {digit} at position {position} is out of range for base {base}")]
    DigitOutOfRange {
        digit: u32,
        position: usize,
        base: u32,
    },
    #[error("grid point coordinates must share base and length")]
    MismatchedCoordinates,
    #[error("grid point needs at least one coordinate")]
    EmptyGridPoint,
}

/// Exact base-B digit expansion of a scalar in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitSequence {
    base: u32,
    digits: Vec<u32>,
}

impl DigitSequence {
    pub fn new(base: u32, digits: Vec<u32>) -> Result<Self, DigitError> {
        if base < 2 {
            return Err(DigitError::BadBase(base));
        }
        for (position, &digit) in digits.iter().enumerate() {
            if digit >= base {
                return Err(DigitError::DigitOutOfRange {
                    digit,
                    position,
                    base,
                });
            }
        }
        Ok(DigitSequence { base, digits })
    }

    pub fn zeros(base: u32, len: usize) -> Self {
        DigitSequence {
            base,
            digits: vec![0; len],
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Digit at 1-based position `j` (weight B^{-j}); zero beyond the stored length.
    pub fn digit(&self, j: usize) -> u32 {
        if j == 0 || j > self.digits.len() {
            0
        } else {
            self.digits[j - 1]
        }
    }

    /// First `k` digits as a new sequence.
    pub fn truncated(&self, k: usize) -> DigitSequence {
        DigitSequence {
            base: self.base,
            digits: self.digits[..k.min(self.digits.len())].to_vec(),
        }
    }

    /// Exact represented value Σ_j d_j B^{-j}.
    pub fn value_rational(&self) -> BigRational {
        let base = BigUint::from(self.base);
        let mut numer = BigUint::zero();
        for &d in &self.digits {
            numer = numer * &base + BigUint::from(d);
        }
        let denom = base.pow(self.digits.len() as u32);
        BigRational::new(numer.into(), denom.into())
    }

    /// Represented value, correctly rounded to binary64.
    pub fn value_f64(&self) -> f64 {
        // IEEE division of exact operands is correctly rounded, so stay in
        // machine integers while base^len fits.
        if self.digits.len() as f64 * (self.base as f64).log2() <= 52.0 {
            let mut numer: u64 = 0;
            for &d in &self.digits {
                numer = numer * self.base as u64 + d as u64;
            }
            let denom = (self.base as u64).pow(self.digits.len() as u32);
            return numer as f64 / denom as f64;
        }
        let base = BigUint::from(self.base);
        let mut numer = BigUint::zero();
        for &d in &self.digits {
            numer = numer * &base + BigUint::from(d);
        }
        let denom = base.pow(self.digits.len() as u32);
        biguint_ratio_to_f64(&numer, &denom)
    }

    /// Whether this length/base combination survives a binary64 round trip.
    pub fn fits_f64_budget(&self) -> bool {
        self.digits.len() as f64 * (self.base as f64).log2() <= F64_DIGIT_BUDGET_BITS
    }

    /// Value order for sequences sharing a base; coincides with
    /// lexicographic order after zero-padding to a common length.
    pub fn cmp_value(&self, other: &DigitSequence) -> Ordering {
        debug_assert_eq!(self.base, other.base);
        let n = self.digits.len().max(other.digits.len());
        for j in 1..=n {
            match self.digit(j).cmp(&other.digit(j)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

/// Exact representative of a point in `[0,1]^d`: one digit sequence per
/// coordinate, all with the same base and stored length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPoint {
    coords: Vec<DigitSequence>,
}

impl GridPoint {
    pub fn new(coords: Vec<DigitSequence>) -> Result<Self, DigitError> {
        let first = coords.first().ok_or(DigitError::EmptyGridPoint)?;
        let (base, len) = (first.base(), first.len());
        if coords.iter().any(|c| c.base() != base || c.len() != len) {
            return Err(DigitError::MismatchedCoordinates);
        }
        Ok(GridPoint { coords })
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn base(&self) -> u32 {
        self.coords[0].base()
    }

    pub fn len(&self) -> usize {
        self.coords[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate `p`, 1-based as in x = (x_1, ..., x_d).
    pub fn coord(&self, p: usize) -> &DigitSequence {
        &self.coords[p - 1]
    }

    pub fn coords(&self) -> &[DigitSequence] {
        &self.coords
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.value_f64()).collect()
    }
}

/// First `len` digits of the terminating-preferred base-B expansion of `x`.
///
/// `x = 1` saturates to the all-(B-1) sequence, the closest representable
/// grid value; everywhere else the reconstruction error is `< B^{-len}`.
pub fn digits_from_real(x: f64, base: u32, len: usize) -> Result<DigitSequence, DigitError> {
    if !x.is_finite() || !(0.0..=1.0).contains(&x) {
        return Err(DigitError::OutsideUnitInterval(x));
    }
    let exact = BigRational::from_float(x).expect("finite float converts exactly");
    digits_from_rational(&exact, base, len)
}

/// Exact-rational entry point for digit extraction; same policy as
/// [`digits_from_real`].
pub fn digits_from_rational(
    x: &BigRational,
    base: u32,
    len: usize,
) -> Result<DigitSequence, DigitError> {
    if base < 2 {
        return Err(DigitError::BadBase(base));
    }
    if x.is_negative() || x > &BigRational::one() {
        return Err(DigitError::OutsideUnitInterval(ratio_to_f64(x)));
    }
    if x == &BigRational::one() {
        return Ok(DigitSequence {
            base,
            digits: vec![base - 1; len],
        });
    }
    let mut numer = x.numer().to_biguint().expect("checked nonnegative");
    let denom = x.denom().to_biguint().expect("positive denominator");
    let big_base = BigUint::from(base);
    let mut digits = Vec::with_capacity(len);
    for _ in 0..len {
        numer *= &big_base;
        let (digit, rem) = numer.div_rem(&denom);
        digits.push(digit.to_u32().expect("digit below base"));
        numer = rem;
    }
    Ok(DigitSequence { base, digits })
}

/// Represented value of `s`, correctly rounded to binary64.
pub fn real_from_digits(s: &DigitSequence) -> f64 {
    s.value_f64()
}

/// Correctly rounded (nearest, ties to even) binary64 value of a rational.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let magnitude = biguint_ratio_to_f64(r.numer().magnitude(), r.denom().magnitude());
    if r.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// Correctly rounded n/d for nonnegative big integers, d > 0.
fn biguint_ratio_to_f64(n: &BigUint, d: &BigUint) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    // IEEE division of exactly representable operands is itself correctly
    // rounded, which covers every in-budget digit sequence.
    if n.bits() <= 53 && d.bits() <= 53 {
        return n.to_u64().unwrap() as f64 / d.to_u64().unwrap() as f64;
    }
    let shift = 55 - (n.bits() as i64 - d.bits() as i64);
    let (num, den) = if shift >= 0 {
        (n << shift as u64, d.clone())
    } else {
        (n.clone(), d << (-shift) as u64)
    };
    let (q, rem) = num.div_rem(&den);
    // q has 54..=56 bits; round to 53 with ties to even, rem as sticky bit.
    let drop = q.bits() as i64 - 53;
    debug_assert!(drop >= 1);
    let half = BigUint::one() << (drop - 1) as u64;
    let lower = &q & ((BigUint::one() << drop as u64) - BigUint::one());
    let mut keep = (&q >> drop as u64).to_u64().expect("53-bit quotient");
    let round_up = match lower.cmp(&half) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => !rem.is_zero() || keep & 1 == 1,
    };
    if round_up {
        keep += 1;
    }
    keep as f64 * 2f64.powi((drop - shift) as i32)
}
