//! Exact rational helpers: parsing, prime factorization, and power tests.
//!
//! Base-group classification reduces multiplicative questions about rational
//! cycle weights to additive questions about their prime exponent vectors.
//! A reduced rational p/q maps to the vector of exponents of its prime
//! factorization (negative entries for the denominator); a set of rationals
//! generates a cyclic multiplicative group exactly when their exponent
//! vectors are pairwise collinear over Q.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn big_rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses "p/q" or "p" into an exact rational. Whitespace is not tolerated;
/// the denominator must be positive.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let parse_int = |t: &str| -> Result<BigInt> {
        t.parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("invalid integer {t:?} in rational")))
    };
    let r = match s.split_once('/') {
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den <= BigInt::zero() {
                return Err(Error::Parse(format!("denominator must be positive in {s:?}")));
            }
            BigRational::new(parse_int(p)?, den)
        }
        None => BigRational::from_integer(parse_int(s)?),
    };
    Ok(r)
}

/// Formats a rational as "p" or "p/q" (reduced form).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

const TRIAL_LIMIT: u64 = 1_000_000;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64 (the standard 7-base certificate).
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard rho (Brent's variant) for composites with no factor below the
/// trial-division limit. Deterministic: the polynomial increment is stepped
/// on failure rather than re-randomized.
fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime_u64(n) && n % 2 == 1);
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn factor_u64_into(n: u64, out: &mut BTreeMap<u64, i64>, sign: i64) {
    let mut n = n;
    let mut p = 2u64;
    while p <= TRIAL_LIMIT && (p as u128) * (p as u128) <= n as u128 {
        while n.is_multiple_of(p) {
            *out.entry(p).or_insert(0) += sign;
            n /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            *out.entry(m).or_insert(0) += sign;
        } else {
            let d = pollard_rho(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
}

/// Prime exponent vector of a positive rational, as prime -> exponent.
/// Numerator and denominator must each fit in u64 (desk-scale inputs do);
/// larger factors abort with `FactorCap`.
pub fn prime_exponents(r: &BigRational) -> Result<BTreeMap<u64, i64>> {
    if !r.is_positive() {
        return Err(Error::Internal(format!(
            "prime_exponents requires a positive rational, got {r}"
        )));
    }
    let to_u64 = |x: &BigInt| -> Result<u64> {
        x.to_u64().ok_or_else(|| {
            Error::FactorCap(format!("{x} exceeds the 2^64 factorization cap"))
        })
    };
    let mut out = BTreeMap::new();
    factor_u64_into(to_u64(r.numer())?, &mut out, 1);
    factor_u64_into(to_u64(r.denom())?, &mut out, -1);
    out.retain(|_, e| *e != 0);
    Ok(out)
}

/// Integer power with i64 exponent (negative exponents invert).
pub fn rational_pow(r: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num::pow::pow(r.clone(), e as usize)
    } else {
        num::pow::pow(r.clone(), (-e) as usize).recip()
    }
}

/// If `r = base^k` for an integer k, returns k. `base` must differ from 1.
pub fn log_exact(r: &BigRational, base: &BigRational) -> Option<i64> {
    debug_assert!(base.is_positive() && !base.is_one());
    if r.is_one() {
        return Some(0);
    }
    let lr = rational_log_estimate(r);
    let lb = rational_log_estimate(base);
    let k = (lr / lb).round();
    if !k.is_finite() || k.abs() > 1e6 {
        return None;
    }
    let k = k as i64;
    if &rational_pow(base, k) == r {
        Some(k)
    } else {
        None
    }
}

/// f64 value of a positive rational, falling back to a bit-length estimate
/// when the parts overflow f64.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| rational_log_estimate(r).exp())
}

fn rational_log_estimate(r: &BigRational) -> f64 {
    // ln via bit lengths, safe for rationals far outside f64 range
    let ln2 = std::f64::consts::LN_2;
    let bits = |x: &BigInt| -> f64 {
        let b = x.bits();
        let top = if b > 52 {
            (x >> (b - 52)).to_f64().unwrap_or(1.0) / (1u64 << 52) as f64
        } else {
            x.to_f64().unwrap_or(1.0) / (1u64 << b.max(1)) as f64 * 2.0
        };
        (b as f64 - 1.0) * ln2 + top.ln() + ln2
    };
    bits(r.numer()) - bits(r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_formats() {
        let r = parse_rational("4/9").unwrap();
        assert_eq!(r, big_rational(4, 9));
        assert_eq!(format_rational(&r), "4/9");
        assert_eq!(format_rational(&big_rational(-3, 1)), "-3");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
    }

    #[test]
    fn factors_small_and_large() {
        let v = prime_exponents(&big_rational(4, 9)).unwrap();
        assert_eq!(v.get(&2), Some(&2));
        assert_eq!(v.get(&3), Some(&-2));
        // 1/81 = 3^-4
        let v = prime_exponents(&big_rational(1, 81)).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.get(&3), Some(&-4));
        // beyond the trial limit: 1000003 * 1000033 is semiprime
        let n = 1_000_003u64 * 1_000_033u64;
        let v = prime_exponents(&BigRational::from_integer(BigInt::from(n))).unwrap();
        assert_eq!(v.get(&1_000_003), Some(&1));
        assert_eq!(v.get(&1_000_033), Some(&1));
    }

    #[test]
    fn exact_log_detects_powers() {
        let base = big_rational(9, 4);
        assert_eq!(log_exact(&big_rational(81, 16), &base), Some(2));
        assert_eq!(log_exact(&big_rational(4, 9), &base), Some(-1));
        assert_eq!(log_exact(&big_rational(1, 2), &base), None);
    }

    #[test]
    fn miller_rabin_spot_checks() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(1_000_003));
        assert!(is_prime_u64(18_446_744_073_709_551_557)); // largest u64 prime
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }
}
