//! Integer-coefficient polynomials in one variable, ascending coefficient
//! order. Degrees stay desk-scale (bounded by alphabet size plus a few
//! orbit exponents), so the arithmetic is direct: schoolbook products,
//! rational Euclidean gcd reduced to primitive integer parts, exact
//! division, and root isolation by rational-root extraction plus bisection.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::complex::Complex64;
use num::{Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly(pub Vec<BigInt>);

impl IntPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let mut p = IntPoly(coeffs);
        p.trim();
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly(vec![])
    }

    pub fn one() -> Self {
        IntPoly(vec![BigInt::one()])
    }

    /// x^k with unit coefficient.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![BigInt::zero(); k + 1];
        c[k] = BigInt::one();
        IntPoly(c)
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn add(&self, o: &IntPoly) -> IntPoly {
        let n = self.0.len().max(o.0.len());
        let mut c = vec![BigInt::zero(); n];
        for (i, a) in self.0.iter().enumerate() {
            c[i] += a;
        }
        for (i, b) in o.0.iter().enumerate() {
            c[i] += b;
        }
        IntPoly::new(c)
    }

    pub fn sub(&self, o: &IntPoly) -> IntPoly {
        let n = self.0.len().max(o.0.len());
        let mut c = vec![BigInt::zero(); n];
        for (i, a) in self.0.iter().enumerate() {
            c[i] += a;
        }
        for (i, b) in o.0.iter().enumerate() {
            c[i] -= b;
        }
        IntPoly::new(c)
    }

    pub fn mul(&self, o: &IntPoly) -> IntPoly {
        if self.is_zero() || o.is_zero() {
            return IntPoly::zero();
        }
        let mut c = vec![BigInt::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        IntPoly::new(c)
    }

    pub fn derivative(&self) -> IntPoly {
        if self.0.len() <= 1 {
            return IntPoly::zero();
        }
        IntPoly::new(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * BigInt::from(i + 1))
                .collect(),
        )
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| {
            acc * x + c.to_f64().unwrap_or(f64::NAN)
        })
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| {
            acc * z + Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0)
        })
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| {
            acc * x + BigRational::from_integer(c.clone())
        })
    }

    /// Exact division; errors if `d` does not divide `self` over Q.
    pub fn div_exact(&self, d: &IntPoly) -> Result<IntPoly> {
        let (q, r) = rat_divmod(&to_rat(self), &to_rat(d));
        if !r.iter().all(|c| c.is_zero()) {
            return Err(Error::Internal("inexact polynomial division".into()));
        }
        from_rat_exact(&q)
    }

    /// Primitive gcd with positive leading coefficient; gcd constant terms of
    /// interest here are units, so the result is normalized to content 1.
    pub fn gcd(&self, o: &IntPoly) -> IntPoly {
        let mut a = to_rat(self);
        let mut b = to_rat(o);
        while !b.iter().all(|c| c.is_zero()) {
            let (_, r) = rat_divmod(&a, &b);
            a = b;
            b = r;
        }
        primitive_part(&a)
    }

    /// Multiplicity of `self`'s root at rational point `x`.
    pub fn root_multiplicity(&self, x: &BigRational) -> usize {
        let mut p = self.clone();
        let mut m = 0;
        while !p.is_zero() && p.eval_rational(x).is_zero() {
            m += 1;
            p = p.derivative();
        }
        m
    }

    /// All rational roots with multiplicities, by the rational root theorem.
    pub fn rational_roots(&self) -> Vec<(BigRational, usize)> {
        if self.is_zero() || self.degree() == 0 {
            return vec![];
        }
        let mut p = self.clone();
        // strip powers of z (root at 0)
        let mut out = vec![];
        let z0 = p.0.iter().take_while(|c| c.is_zero()).count();
        if z0 > 0 {
            out.push((BigRational::zero(), z0));
            p = IntPoly::new(p.0[z0..].to_vec());
        }
        if p.degree() == 0 {
            return out;
        }
        let a0 = p.0[0].abs();
        let an = p.0.last().unwrap().abs();
        for num in divisors(&a0) {
            for den in divisors(&an) {
                for sign in [1i64, -1] {
                    let cand = BigRational::new(&num * BigInt::from(sign), den.clone());
                    if p.eval_rational(&cand).is_zero() {
                        let m = p.root_multiplicity(&cand);
                        if !out.iter().any(|(r, _)| *r == cand) {
                            out.push((cand, m));
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Human-readable form like "1 - 2*z + z^3".
    pub fn display(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let term = match i {
                0 => mag.to_string(),
                _ => {
                    let v = if i == 1 { var.to_string() } else { format!("{var}^{i}") };
                    if mag.is_one() { v } else { format!("{mag}*{v}") }
                }
            };
            if s.is_empty() {
                if c.is_negative() {
                    s.push('-');
                }
            } else {
                s.push_str(if c.is_negative() { " - " } else { " + " });
            }
            s.push_str(&term);
        }
        s
    }
}

fn to_rat(p: &IntPoly) -> Vec<BigRational> {
    p.0.iter().map(|c| BigRational::from_integer(c.clone())).collect()
}

fn from_rat_exact(p: &[BigRational]) -> Result<IntPoly> {
    let mut c = Vec::with_capacity(p.len());
    for r in p {
        if !r.denom().is_one() {
            return Err(Error::Internal("non-integer coefficient after division".into()));
        }
        c.push(r.numer().clone());
    }
    Ok(IntPoly::new(c))
}

fn rat_trim(p: &mut Vec<BigRational>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn rat_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    rat_trim(&mut r);
    let mut b = b.to_vec();
    rat_trim(&mut b);
    assert!(!b.is_empty(), "division by zero polynomial");
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() <= db {
        return (vec![], r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() > db {
        let dr = r.len() - 1;
        let f = &r[dr] / &lead;
        q[dr - db] = f.clone();
        for i in 0..=db {
            let t = &b[i] * &f;
            r[dr - db + i] -= t;
        }
        rat_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    (q, r)
}

fn primitive_part(p: &[BigRational]) -> IntPoly {
    let mut p = p.to_vec();
    rat_trim(&mut p);
    if p.is_empty() {
        return IntPoly::zero();
    }
    // clear denominators, divide by content, normalize leading sign
    let mut den_lcm = BigInt::one();
    for c in &p {
        den_lcm = den_lcm.lcm(c.denom());
    }
    let mut ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(den_lcm.clone())).numer().clone()).collect();
    let mut content = BigInt::zero();
    for c in &ints {
        content = content.gcd(c);
    }
    if content.is_zero() {
        return IntPoly::zero();
    }
    for c in &mut ints {
        *c = &*c / &content;
    }
    if ints.last().unwrap().is_negative() {
        for c in &mut ints {
            *c = -&*c;
        }
    }
    IntPoly::new(ints)
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    // small positive divisors; leading/constant coefficients here stay tiny
    let n = n.abs();
    if let Some(v) = n.to_u64() {
        let mut out = vec![];
        let mut d = 1u64;
        while d * d <= v {
            if v % d == 0 {
                out.push(BigInt::from(d));
                if d != v / d {
                    out.push(BigInt::from(v / d));
                }
            }
            d += 1;
        }
        out.sort();
        out
    } else {
        vec![BigInt::one(), n]
    }
}

/// Real roots of `p` in the open interval (lo, hi), returned with
/// multiplicities. Rational roots are found exactly; the square-free
/// remainder is scanned for sign changes and bisected.
pub fn real_roots_in(p: &IntPoly, lo: f64, hi: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = vec![];
    let mut rest = p.clone();
    for (r, m) in p.rational_roots() {
        let x = r.to_f64().unwrap();
        if x > lo && x < hi {
            out.push((x, m));
        }
        for _ in 0..m {
            let lin = IntPoly::new(vec![-r.numer().clone(), r.denom().clone()]);
            rest = rest.div_exact(&lin).expect("rational root divides");
        }
    }
    // square-free part of the remainder, scanned numerically
    if rest.degree() >= 1 {
        let sf = rest.div_exact(&rest.gcd(&rest.derivative())).unwrap_or(rest.clone());
        let n = 4096;
        let mut prev_x = lo;
        let mut prev_v = sf.eval_f64(prev_x);
        for i in 1..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let v = sf.eval_f64(x);
            if prev_v == 0.0 {
                prev_v = v;
                prev_x = x;
                continue; // root exactly on a grid point was rational-handled
            }
            if v != 0.0 && prev_v.signum() != v.signum() {
                let (mut a, mut b) = (prev_x, x);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let fm = sf.eval_f64(m);
                    if fm == 0.0 {
                        a = m;
                        b = m;
                        break;
                    }
                    if fm.signum() == prev_v.signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let root = 0.5 * (a + b);
                if root > lo && root < hi && !out.iter().any(|(r, _)| (r - root).abs() < 1e-12) {
                    // multiplicity in the original: count derivative vanishing
                    let mut m = 0;
                    let mut q = p.clone();
                    while !q.is_zero() && q.eval_f64(root).abs() < 1e-9 * coeff_scale(&q) {
                        m += 1;
                        q = q.derivative();
                    }
                    out.push((root, m.max(1)));
                }
            }
            prev_x = x;
            prev_v = v;
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn coeff_scale(p: &IntPoly) -> f64 {
    p.0.iter().map(|c| c.to_f64().unwrap_or(0.0).abs()).fold(1.0, f64::max)
}
