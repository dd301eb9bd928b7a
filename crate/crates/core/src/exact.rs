//! Exact rational view of real-valued scores.
//!
//! A score is stored as `f64` but read as the shortest decimal that round-trips
//! to that `f64` (the value a CSV file spells out). So `0.3` is exactly `3/10`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Decimal digits and power-of-ten exponent: `value = mantissa * 10^exponent`.
fn decimal_parts(x: f64) -> (BigInt, i32) {
    assert!(x.is_finite(), "non-finite value has no decimal form");
    let s = format!("{x:e}");
    let (mant, exp) = s.split_once('e').expect("LowerExp always has an exponent");
    let mut exp: i32 = exp.parse().expect("integer exponent");
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant),
    };
    let digits: String = match mant.split_once('.') {
        Some((int, frac)) => {
            exp -= frac.len() as i32;
            format!("{int}{frac}")
        }
        None => mant.to_string(),
    };
    let mut m: BigInt = digits.parse().expect("decimal digits");
    if neg {
        m = -m;
    }
    (m, exp)
}

/// The shortest round-trip decimal of `x`, as an exact rational.
pub fn decimal(x: f64) -> BigRational {
    let (m, exp) = decimal_parts(x);
    let ten = BigInt::from(10u32);
    if exp >= 0 {
        BigRational::from_integer(m * num_traits::pow(ten, exp as usize))
    } else {
        BigRational::new(m, num_traits::pow(ten, (-exp) as usize))
    }
}

pub fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn abs(r: &BigRational) -> BigRational {
    r.abs()
}

/// Relative distance below which `score * k` is taken to sit on a grid point.
pub const GRID_SNAP: f64 = 1e-9;

/// `floor(score * k)`, clamped to `0..=k`, where products within
/// [`GRID_SNAP`] of an integer count as that integer (so `0.3 * 10` is 3 and
/// `(1/3) * 3` is 1).
///
/// This is the number of thresholds `u/k`, `u in 1..=k`, with `score >= u/k`.
pub fn threshold_count(score: f64, k: u64) -> u64 {
    if score <= 0.0 {
        return 0;
    }
    if score >= 1.0 {
        return k;
    }
    let p = score * k as f64;
    let nearest = p.round();
    if (p - nearest).abs() <= GRID_SNAP * nearest.max(1.0) {
        return (nearest as u64).min(k);
    }
    (p.floor() as u64).min(k)
}

/// Whether `score >= u/k`, ties included.
pub fn meets_threshold(score: f64, u: u64, k: u64) -> bool {
    u <= threshold_count(score, k)
}

pub fn zero() -> BigRational {
    BigRational::zero()
}

pub fn one() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_reading() {
        assert_eq!(decimal(0.3), ratio(3, 10));
        assert_eq!(decimal(0.25), ratio(1, 4));
        assert_eq!(decimal(-1.5), -ratio(3, 2));
        assert_eq!(decimal(1e-7), ratio(1, 10_000_000));
        assert_eq!(decimal(2500.0), ratio(2500, 1));
        assert_eq!(decimal(0.0), zero());
    }

    #[test]
    fn grid_aligned_scores_hit_their_threshold() {
        for k in 1..=50u64 {
            for u in 0..=k {
                let s = u as f64 / k as f64;
                assert_eq!(threshold_count(s, k), u, "u={u} k={k}");
            }
        }
        assert_eq!(threshold_count(0.3, 10), 3);
        assert_eq!(threshold_count(0.7, 10), 7);
    }

    #[test]
    fn misaligned_scores_floor() {
        assert_eq!(threshold_count(0.25, 10), 2);
        assert_eq!(threshold_count(0.5, 5), 2);
        assert_eq!(threshold_count(0.999, 500), 499);
        assert_eq!(threshold_count(0.2999999, 10), 2);
    }

    #[test]
    fn closed_comparison() {
        assert!(meets_threshold(0.5, 5, 10));
        assert!(!meets_threshold(0.49, 5, 10));
        assert!(meets_threshold(1.0, 10, 10));
        assert!(!meets_threshold(0.0, 1, 10));
    }
}
