//! Weight and coordinate scalars in the two arithmetic modes.
//!
//! Exact mode keeps arbitrary-precision rationals end to end. Algebraic mode
//! appears only through natural-weight derivation: every weight there is a
//! Perron eigenvector ratio times an integer power of the Perron eigenvalue,
//! so a weight carries the double-precision value plus the symbolic triple
//! (numerator color, denominator color, lambda exponent). Path products of
//! such weights telescope, which is what keeps lattice exponents exact.

use num::rational::BigRational;
use num::ToPrimitive;

use crate::rational::format_rational;

/// Tolerance for numeric equality of algebraic-mode weights.
pub const ALGEBRAIC_EQ_TOL: f64 = 1e-12;

/// Symbolic part of an algebraic weight: (xi[num] / xi[den]) * lambda^exp.
/// Color indices refer to the owning substitution's alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymbolicPart {
    pub xi_num: usize,
    pub xi_den: usize,
    pub lambda_exp: i64,
}

#[derive(Clone, Debug)]
pub enum WeightValue {
    Exact(BigRational),
    Algebraic { approx: f64, sym: SymbolicPart },
}

impl WeightValue {
    pub fn exact(r: BigRational) -> Self {
        WeightValue::Exact(r)
    }

    pub fn one_like(&self) -> Self {
        match self {
            WeightValue::Exact(_) => WeightValue::Exact(BigRational::from_integer(1.into())),
            WeightValue::Algebraic { sym, .. } => WeightValue::Algebraic {
                approx: 1.0,
                sym: SymbolicPart { xi_num: sym.xi_num, xi_den: sym.xi_num, lambda_exp: 0 },
            },
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            WeightValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            WeightValue::Algebraic { approx, .. } => *approx,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            WeightValue::Exact(r) => Some(r),
            WeightValue::Algebraic { .. } => None,
        }
    }

    pub fn sym(&self) -> Option<SymbolicPart> {
        match self {
            WeightValue::Exact(_) => None,
            WeightValue::Algebraic { sym, .. } => Some(*sym),
        }
    }

    /// Weight of a two-step descent: `self` from a to b, then `next` from b
    /// to c. In algebraic mode the xi ratios must telescope (b matches).
    pub fn compose(&self, next: &WeightValue) -> WeightValue {
        match (self, next) {
            (WeightValue::Exact(a), WeightValue::Exact(b)) => WeightValue::Exact(a * b),
            (
                WeightValue::Algebraic { approx: fa, sym: sa },
                WeightValue::Algebraic { approx: fb, sym: sb },
            ) => {
                debug_assert_eq!(
                    sa.xi_num, sb.xi_den,
                    "algebraic weights composed out of path order"
                );
                WeightValue::Algebraic {
                    approx: fa * fb,
                    sym: SymbolicPart {
                        xi_num: sb.xi_num,
                        xi_den: sa.xi_den,
                        lambda_exp: sa.lambda_exp + sb.lambda_exp,
                    },
                }
            }
            _ => unreachable!("mixed weight modes in one substitution"),
        }
    }

    /// Multiplicative inverse; algebraic tags swap numerator and
    /// denominator and negate the lattice exponent.
    pub fn invert(&self) -> WeightValue {
        match self {
            WeightValue::Exact(r) => WeightValue::Exact(r.recip()),
            WeightValue::Algebraic { approx, sym } => WeightValue::Algebraic {
                approx: 1.0 / approx,
                sym: SymbolicPart {
                    xi_num: sym.xi_den,
                    xi_den: sym.xi_num,
                    lambda_exp: -sym.lambda_exp,
                },
            },
        }
    }

    /// Mode-appropriate equality: exact in Exact mode, 1e-12 otherwise.
    pub fn equivalent(&self, other: &WeightValue) -> bool {
        match (self, other) {
            (WeightValue::Exact(a), WeightValue::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= ALGEBRAIC_EQ_TOL,
        }
    }

    /// Display form; algebraic weights render their symbolic tag.
    pub fn describe(&self, alphabet: &[String]) -> String {
        match self {
            WeightValue::Exact(r) => format_rational(r),
            WeightValue::Algebraic { approx, sym } => {
                let mut s = format!("{approx:.12}");
                s.push_str(" = ");
                if sym.xi_num != sym.xi_den {
                    s.push_str(&format!(
                        "(xi[{}]/xi[{}])*",
                        alphabet[sym.xi_num], alphabet[sym.xi_den]
                    ));
                }
                s.push_str(&format!("lambda^{}", sym.lambda_exp));
                s
            }
        }
    }
}

/// Exact coordinate scalar for tile geometry: rational in exact mode, f64 in
/// algebraic mode. Arithmetic within one patch never mixes the two variants.
#[derive(Clone, Debug)]
pub enum Scalar {
    Rat(BigRational),
    F64(f64),
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a == b,
            (Scalar::F64(a), Scalar::F64(b)) => a == b,
            _ => false,
        }
    }
}

impl Scalar {
    pub fn zero_like(&self) -> Scalar {
        match self {
            Scalar::Rat(_) => Scalar::Rat(BigRational::from_integer(0.into())),
            Scalar::F64(_) => Scalar::F64(0.0),
        }
    }

    pub fn from_weight(w: &WeightValue) -> Scalar {
        match w {
            WeightValue::Exact(r) => Scalar::Rat(r.clone()),
            WeightValue::Algebraic { approx, .. } => Scalar::F64(*approx),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rat(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::F64(x) => *x,
        }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(a + b),
            _ => unreachable!("mixed scalar modes"),
        }
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a - b),
            (Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(a - b),
            _ => unreachable!("mixed scalar modes"),
        }
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(a * b),
            _ => unreachable!("mixed scalar modes"),
        }
    }

    pub fn div(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a / b),
            (Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(a / b),
            _ => unreachable!("mixed scalar modes"),
        }
    }

    /// Exact equality in exact mode; tolerance `tol` (relative to the larger
    /// magnitude, floored at 1) in float mode.
    pub fn close(&self, o: &Scalar, tol: f64) -> bool {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), o.to_f64());
                (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
            }
        }
    }

    pub fn lt(&self, o: &Scalar) -> bool {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a < b,
            _ => self.to_f64() < o.to_f64(),
        }
    }

    /// Total order for canonical sorting. Coordinates are never NaN.
    pub fn cmp_total(&self, o: &Scalar) -> std::cmp::Ordering {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a.cmp(b),
            _ => self
                .to_f64()
                .partial_cmp(&o.to_f64())
                .expect("NaN coordinate in scalar comparison"),
        }
    }

    pub fn le(&self, o: &Scalar) -> bool {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a <= b,
            _ => self.to_f64() <= o.to_f64(),
        }
    }
}
