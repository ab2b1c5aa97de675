//! Exact arithmetic on the binary solenoid.
//!
//! Elements are bi-infinite binary digit strings Sum a_n 2^n that are
//! eventually constant upward and eventually periodic downward, taken
//! modulo the carry identification x1000... = x0111.... Addition solves the
//! carry relation 2 eta_{n+1} + gamma_n = alpha_n + beta_n + eta_n at every
//! index, seeding the carry at -infinity with the least fixed point over the
//! joint tail period. The subgroup of eventually periodic tails is closed
//! under addition, negation, and binary scaling, and it is exactly the part
//! of the group that admits finite descriptions.
//!
//! Each element meets the vertical axis of the dyadic square tiling in one
//! column of tiles per scale octave; [`to_tiling`] materializes that column
//! (with left neighbors along the axis, so both one-sided readings exist)
//! and [`read_axis_digits`] inverts it.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::substitution::Color;
use crate::tiling::{canonical_sort, ColoredTile, Patch, Tile, Window};
use crate::weight::Scalar;

/// Canonical digit string: bit `n >= head.len()` is `fill`, bit `n` of the
/// head window is `head[n]`, bit `-1-i` is `pre[i]`, and below the
/// preperiod the `period` block repeats downward forever.
///
/// Canonical means: the head does not end in `fill`, the preperiod does not
/// end in the period's last digit, the period is primitive, and no tail is
/// eventually all ones (the all-zeros representative of each carry class is
/// chosen, so equality is plain field equality).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicElement {
    fill: u8,
    head: Vec<u8>,
    pre: Vec<u8>,
    period: Vec<u8>,
}

/// Unnormalized digit description: the same layout as [`DyadicElement`]
/// except that `head[0]` sits at `exponent` instead of 0 and no invariant
/// is assumed. [`normalize_tilde`] turns one into the canonical element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawDigits {
    pub fill: u8,
    pub head: Vec<u8>,
    pub pre: Vec<u8>,
    pub period: Vec<u8>,
    pub exponent: i64,
}

impl DyadicElement {
    pub fn zero() -> DyadicElement {
        DyadicElement { fill: 0, head: Vec::new(), pre: Vec::new(), period: vec![0] }
    }

    pub fn is_zero(&self) -> bool {
        self.fill == 0 && self.head.is_empty() && self.pre.is_empty() && self.period == [0]
    }

    /// The digit at index `n` (coefficient of 2^n).
    pub fn digit(&self, n: i64) -> u8 {
        if n >= 0 {
            let i = n as usize;
            if i < self.head.len() {
                self.head[i]
            } else {
                self.fill
            }
        } else {
            let i = (-1 - n) as usize;
            if i < self.pre.len() {
                self.pre[i]
            } else {
                self.period[(i - self.pre.len()) % self.period.len()]
            }
        }
    }

    fn raw(&self) -> RawDigits {
        RawDigits {
            fill: self.fill,
            head: self.head.clone(),
            pre: self.pre.clone(),
            period: self.period.clone(),
            exponent: 0,
        }
    }
}

fn primitive_root(word: &[u8]) -> Vec<u8> {
    let p = word.len();
    for d in 1..=p {
        if p.is_multiple_of(d) && (d..p).all(|i| word[i] == word[i - d]) {
            return word[..d].to_vec();
        }
    }
    word.to_vec()
}

/// Canonicalizes a raw digit description: realigns the head to exponent 0,
/// reduces the period to its primitive root, carries away all-ones tails
/// (the tilde identification; the everywhere-ones description collapses to
/// zero), absorbs redundant preperiod digits, and trims the head against
/// the fill. Idempotent, and constant on carry-identified pairs.
pub fn normalize_tilde(raw: &RawDigits) -> DyadicElement {
    let mut fill = raw.fill & 1;
    let mut head: Vec<u8> = raw.head.iter().map(|b| b & 1).collect();
    let mut pre: Vec<u8> = raw.pre.iter().map(|b| b & 1).collect();
    let mut period: Vec<u8> = raw.period.iter().map(|b| b & 1).collect();
    if period.is_empty() {
        period.push(0);
    }
    // realign so head[0] is the coefficient of 2^0
    let e = raw.exponent;
    if e > 0 {
        let e = e as usize;
        if pre.len() < e {
            let missing = e - pre.len();
            let p = period.len();
            for j in 0..missing {
                pre.push(period[j % p]);
            }
            period.rotate_left(missing % p);
        }
        let pulled: Vec<u8> = pre.drain(..e).collect();
        let mut new_head: Vec<u8> = pulled.into_iter().rev().collect();
        new_head.extend(head);
        head = new_head;
    } else if e < 0 {
        let k = (-e) as usize;
        let take = k.min(head.len());
        let mut low: Vec<u8> = head.drain(..take).collect();
        low.extend(std::iter::repeat_n(fill, k - take));
        let mut new_pre: Vec<u8> = low.into_iter().rev().collect();
        new_pre.extend(pre);
        pre = new_pre;
    }
    period = primitive_root(&period);
    if period == [1] {
        // all-ones tail: carry one into the position just above it
        period = vec![0];
        let mut c = 1u8;
        for i in (0..pre.len()).rev() {
            let s = pre[i] + c;
            pre[i] = s & 1;
            c = s >> 1;
            if c == 0 {
                break;
            }
        }
        if c == 1 {
            let mut placed = false;
            for b in head.iter_mut() {
                let s = *b + c;
                *b = s & 1;
                c = s >> 1;
                if c == 0 {
                    placed = true;
                    break;
                }
            }
            if !placed {
                if fill == 1 {
                    // the carry ripples through the infinite ones and out:
                    // everything above flips to zero
                    fill = 0;
                } else {
                    head.push(1);
                }
            }
        }
    }
    while let Some(&last) = pre.last() {
        if last == *period.last().expect("period is nonempty") {
            pre.pop();
            period.rotate_right(1);
        } else {
            break;
        }
    }
    while head.last() == Some(&fill) {
        head.pop();
    }
    DyadicElement { fill, head, pre, period }
}

/// Carry-relation addition of canonical elements. The carry over the joint
/// tail period is iterated from the zero seed to its least fixed point
/// (the alternative fixed point produces the carry-identified
/// representative), then propagates upward through the preperiods, the
/// heads, and the fills; the result is normalized.
pub fn add(x: &DyadicElement, y: &DyadicElement) -> DyadicElement {
    let depth = x.pre.len().max(y.pre.len()) as i64;
    let block = num::integer::lcm(x.period.len(), y.period.len()) as i64;
    let carry_out = |seed: u8| -> u8 {
        let mut c = seed;
        for n in (-depth - block)..(-depth) {
            c = (x.digit(n) + y.digit(n) + c) >> 1;
        }
        c
    };
    // monotone in the seed, so two probes find the least fixed point
    let eta = if carry_out(0) == 0 { 0 } else { 1 };
    debug_assert!(carry_out(eta) == eta);
    let mut c = eta;
    let mut period_rev = Vec::with_capacity(block as usize);
    for n in (-depth - block)..(-depth) {
        let s = x.digit(n) + y.digit(n) + c;
        period_rev.push(s & 1);
        c = s >> 1;
    }
    let mut pre_rev = Vec::with_capacity(depth as usize);
    for n in -depth..0 {
        let s = x.digit(n) + y.digit(n) + c;
        pre_rev.push(s & 1);
        c = s >> 1;
    }
    let mut head = Vec::new();
    let top = x.head.len().max(y.head.len()) as i64;
    for n in 0..top {
        let s = x.digit(n) + y.digit(n) + c;
        head.push(s & 1);
        c = s >> 1;
    }
    // above both heads the digit sum is constant; emit until the carry is
    // stable, then the remaining digits are the fill
    let s_fill = x.fill + y.fill;
    let fill = loop {
        let s = s_fill + c;
        let next = s >> 1;
        if next == c {
            break s & 1;
        }
        head.push(s & 1);
        c = next;
    };
    normalize_tilde(&RawDigits {
        fill,
        head,
        pre: pre_rev.into_iter().rev().collect(),
        period: period_rev.into_iter().rev().collect(),
        exponent: 0,
    })
}

/// The additive inverse: every digit (fill, head, preperiod, and period)
/// is complemented and the description renormalized, so x + negate(x)
/// produces the all-ones string, which is the zero class.
pub fn negate(x: &DyadicElement) -> DyadicElement {
    normalize_tilde(&RawDigits {
        fill: 1 - x.fill,
        head: x.head.iter().map(|b| 1 - b).collect(),
        pre: x.pre.iter().map(|b| 1 - b).collect(),
        period: x.period.iter().map(|b| 1 - b).collect(),
        exponent: 0,
    })
}

/// Multiplication by 2^k: an index shift of the digit string.
pub fn scale_pow2(x: &DyadicElement, k: i64) -> DyadicElement {
    let mut raw = x.raw();
    raw.exponent = k;
    normalize_tilde(&raw)
}

/// Embeds a dyadic rational p / 2^v as its binary expansion (complemented
/// via [`negate`] when negative). Odd factors in the denominator would need
/// an aperiodic right side, which the digit model cannot hold.
pub fn embed_dyadic(r: &BigRational) -> Result<DyadicElement> {
    if r.is_zero() {
        return Ok(DyadicElement::zero());
    }
    if r.is_negative() {
        return Ok(negate(&embed_dyadic(&-r)?));
    }
    let d = r.denom().magnitude();
    if !(d & &(d - 1u32)).is_zero() {
        return Err(Error::Validation(format!(
            "{r} is not dyadic: denominator {} has an odd factor",
            r.denom()
        )));
    }
    let shift = d.trailing_zeros().unwrap_or(0) as i64;
    let head = r.numer().magnitude().to_radix_le(2);
    Ok(normalize_tilde(&RawDigits {
        fill: 0,
        head,
        pre: Vec::new(),
        period: vec![0],
        exponent: -shift,
    }))
}

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

impl DyadicElement {
    /// Exact sum of all digits strictly below index `n` (it converges:
    /// the tail is dominated by a geometric series).
    pub fn partial_sum(&self, n: i64) -> BigRational {
        let p = self.period.len();
        let tail_top = -(self.pre.len() as i64);
        let f = tail_top.min(n);
        // phase of the period at the position just below f
        let r = (tail_top - f).rem_euclid(p as i64) as usize;
        let mut v = BigInt::zero();
        for j in 0..p {
            v = (v << 1) + self.period[(r + j) % p];
        }
        let mut s = BigRational::new(v, (BigInt::one() << p) - 1) * pow2(f);
        for e in f..n {
            if self.digit(e) == 1 {
                s += pow2(e);
            }
        }
        s
    }
}

/// The column of the dyadic square tiling along the vertical axis: for each
/// scale octave 2^n with -depth <= n < depth, the tile whose closed span
/// touches the axis from the right (left edge at minus the partial digit
/// sum below n), plus its left neighbor when the axis is a tile boundary,
/// so that both one-sided digit readings are present in the patch.
pub fn to_tiling(x: &DyadicElement, depth: u32) -> Result<Patch> {
    if depth == 0 {
        return Err(Error::Validation("tiling depth must be at least 1".into()));
    }
    let depth = depth as i64;
    let mut tiles = Vec::new();
    for n in -depth..depth {
        let s = x.partial_sum(n);
        let width = pow2(n);
        let x1 = -s.clone();
        let tile = Tile {
            x1: Scalar::Rat(x1.clone()),
            x2: Scalar::Rat(&width - &s),
            y1: Scalar::Rat(width.clone()),
            y2: Scalar::Rat(pow2(n + 1)),
        };
        tiles.push(ColoredTile { tile, color: Color(0) });
        if s.is_zero() {
            let left = Tile {
                x1: Scalar::Rat(-width.clone()),
                x2: Scalar::Rat(BigRational::zero()),
                y1: Scalar::Rat(width),
                y2: Scalar::Rat(pow2(n + 1)),
            };
            tiles.push(ColoredTile { tile: left, color: Color(0) });
        }
    }
    let mut x0 = Scalar::Rat(BigRational::zero());
    let mut x1 = Scalar::Rat(BigRational::zero());
    for ct in &tiles {
        if ct.tile.x1.lt(&x0) {
            x0 = ct.tile.x1.clone();
        }
        if x1.lt(&ct.tile.x2) {
            x1 = ct.tile.x2.clone();
        }
    }
    canonical_sort(&mut tiles);
    let window = Window::try_new(x0, x1, Scalar::Rat(pow2(-depth)), Scalar::Rat(pow2(depth)))?;
    Ok(Patch { window, tiles })
}

/// Which side of the axis a digit reading probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisSide {
    PlusZero,
    MinusZero,
}

/// Reads the digit string back off an axis-column patch: digit n is the
/// offset jump between the level-n and level-(n+1) tiles probed on the
/// given side. Returns (level, digit) pairs for every level where both
/// tiles exist. The top level of the patch is consumed as the reference, so
/// a depth-d patch yields digits for -d <= n < d-1.
pub fn read_axis_digits(patch: &Patch, side: AxisSide) -> Result<Vec<(i64, u8)>> {
    let zero = BigRational::zero();
    let mut columns: Vec<(i64, BigRational)> = Vec::new();
    for ct in &patch.tiles {
        let (x1, y1) = match (&ct.tile.x1, &ct.tile.y1) {
            (Scalar::Rat(a), Scalar::Rat(b)) => (a.clone(), b.clone()),
            _ => return Err(Error::Validation("axis reading needs exact coordinates".into())),
        };
        let x2 = &x1 + &y1;
        let hit = match side {
            AxisSide::PlusZero => x1 <= zero && x2 > zero,
            AxisSide::MinusZero => x1 < zero && x2 >= zero,
        };
        if !hit {
            continue;
        }
        // level n from y1 = 2^n
        let mut level = 0i64;
        let mut v = y1.clone();
        let two = BigRational::from_integer(BigInt::from(2));
        while v < BigRational::one() {
            v *= &two;
            level -= 1;
        }
        while v > BigRational::one() {
            v /= &two;
            level += 1;
        }
        if v != BigRational::one() {
            return Err(Error::Validation("tile height is not a power of 2".into()));
        }
        columns.push((level, -x1));
    }
    columns.sort_by_key(|(n, _)| *n);
    columns.dedup_by_key(|(n, _)| *n);
    let mut digits = Vec::new();
    for w in columns.windows(2) {
        let (n, s) = (&w[0].0, &w[0].1);
        let (n1, s1) = (&w[1].0, &w[1].1);
        if n1 - n != 1 {
            continue;
        }
        let jump = (s1 - s) / pow2(*n);
        if jump == BigRational::zero() {
            digits.push((*n, 0));
        } else if jump == BigRational::one() {
            digits.push((*n, 1));
        } else {
            return Err(Error::Internal(format!(
                "axis offsets jump by {jump} at level {n}, not by a digit"
            )));
        }
    }
    Ok(digits)
}

impl fmt::Display for DyadicElement {
    /// Format "(period)pre.head e-marker": digits ascend in value left to
    /// right, the period group repeating leftward forever, the marker fixing
    /// the exponent of the first head digit (always e0 in canonical form),
    /// and a trailing ~ when every digit above the head is one.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for b in self.period.iter().rev() {
            write!(f, "{b}")?;
        }
        write!(f, ")")?;
        for b in self.pre.iter().rev() {
            write!(f, "{b}")?;
        }
        write!(f, ".")?;
        for b in &self.head {
            write!(f, "{b}")?;
        }
        write!(f, "e0")?;
        if self.fill == 1 {
            write!(f, "~")?;
        }
        Ok(())
    }
}

impl FromStr for DyadicElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<DyadicElement> {
        let err = |msg: &str| Error::Parse(format!("digit string {s:?}: {msg}"));
        let rest = s.strip_prefix('(').ok_or_else(|| err("expected leading '('"))?;
        let (period_str, rest) =
            rest.split_once(')').ok_or_else(|| err("missing ')' after the period"))?;
        let (pre_str, rest) =
            rest.split_once('.').ok_or_else(|| err("missing '.' before the head"))?;
        let (head_str, rest) =
            rest.split_once('e').ok_or_else(|| err("missing exponent marker 'e'"))?;
        let (exp_str, fill) = match rest.strip_suffix('~') {
            Some(e) => (e, 1u8),
            None => (rest, 0u8),
        };
        let exponent: i64 =
            exp_str.parse().map_err(|_| err("exponent is not an integer"))?;
        let bits = |text: &str| -> Result<Vec<u8>> {
            text.chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(err("digits must be 0 or 1")),
                })
                .collect()
        };
        let period: Vec<u8> = bits(period_str)?.into_iter().rev().collect();
        if period.is_empty() {
            return Err(err("period group must not be empty"));
        }
        let pre: Vec<u8> = bits(pre_str)?.into_iter().rev().collect();
        let head = bits(head_str)?;
        Ok(normalize_tilde(&RawDigits { fill, head, pre, period, exponent }))
    }
}
