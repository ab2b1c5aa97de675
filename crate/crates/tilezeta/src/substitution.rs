//! Weighted substitutions on a finite color alphabet.
//!
//! A rule sends a color `a` to a nonempty word of (color, weight) pairs with
//! weights summing to 1; iterating a rule multiplies weights along descent
//! paths. The n-th iterate obeys
//!
//! ```text
//! sigma^n(a)_k = sigma^{n-1}(sigma(a)_i)_j
//! tau^n(a)_k   = tau(a)_i * tau^{n-1}(sigma(a)_i)_j
//! k = sum_{h<i} |sigma^{n-1}(sigma(a)_h)| + j
//! ```
//!
//! with the 0-th iterate the identity: sigma^0(a) = a, tau^0(a) = (1).
//!
//! Weights come in two modes. Exact mode carries arbitrary-precision
//! rationals supplied by the caller. Algebraic mode arises from natural
//! weights: given a primitive colors-only substitution with count matrix M,
//! Perron root lambda and right eigenvector xi, the natural weight of the
//! i-th letter is xi[sigma(a)_i] / (lambda * xi[a]). Such systems admit
//! weight-1 letters exactly when a rule has length 1; canonicalization
//! composes those away and merges duplicate colors.

use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::CountMatrix;
use crate::poly::IntPoly;
use crate::weight::{SymbolicPart, WeightValue, ALGEBRAIC_EQ_TOL};

/// Index into the alphabet of a [`WeightedSubstitution`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Color(pub usize);

/// Perron data of a primitive count matrix: the dominant eigenvalue, the
/// right eigenvector normalized to xi[0] = 1, and the integer
/// characteristic polynomial the eigenvalue was refined against.
#[derive(Clone, Debug)]
pub struct PerronData {
    pub lambda: f64,
    pub xi: Vec<f64>,
    pub charpoly: IntPoly,
}

#[derive(Clone, Debug)]
pub enum Mode {
    Exact,
    /// Natural-weight systems; weights carry symbolic xi-ratio tags that
    /// resolve against this Perron data.
    Algebraic(PerronData),
}

pub type Rule = Vec<(Color, WeightValue)>;

#[derive(Clone, Debug)]
pub struct WeightedSubstitution {
    alphabet: Vec<String>,
    rules: Vec<Rule>,
    mode: Mode,
}

/// Per-rule validation messages; empty means valid.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// One letter of an iterated rule with its accumulated weight.
#[derive(Clone, Debug)]
pub struct WeightedWord {
    pub letters: Vec<(Color, WeightValue)>,
}

impl WeightedWord {
    pub fn colors(&self) -> Vec<Color> {
        self.letters.iter().map(|(c, _)| *c).collect()
    }
}

const MAX_WORD: usize = 10_000_000;

impl WeightedSubstitution {
    /// Builds and validates a system. `rules[i]` is the rule for color i.
    pub fn try_new(alphabet: Vec<String>, rules: Vec<Rule>, mode: Mode) -> Result<Self> {
        let ws = WeightedSubstitution { alphabet, rules, mode };
        let report = ws.validate();
        if report.is_valid() {
            Ok(ws)
        } else {
            Err(Error::Validation(report.violations.join("; ")))
        }
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn perron(&self) -> Option<&PerronData> {
        match &self.mode {
            Mode::Exact => None,
            Mode::Algebraic(p) => Some(p),
        }
    }

    pub fn color_count(&self) -> usize {
        self.alphabet.len()
    }

    pub fn colors(&self) -> impl Iterator<Item = Color> {
        (0..self.alphabet.len()).map(Color)
    }

    pub fn color_name(&self, c: Color) -> &str {
        &self.alphabet[c.0]
    }

    pub fn color_index(&self, name: &str) -> Option<Color> {
        self.alphabet.iter().position(|n| n == name).map(Color)
    }

    pub fn rule(&self, a: Color) -> &[(Color, WeightValue)] {
        &self.rules[a.0]
    }

    pub fn rule_len(&self, a: Color) -> usize {
        self.rules[a.0].len()
    }

    /// First letter of sigma(a); the leftmost-descendant map.
    pub fn sigma_first(&self, a: Color) -> Color {
        self.rules[a.0][0].0
    }

    /// Last letter of sigma(a); the rightmost-descendant map.
    pub fn sigma_last(&self, a: Color) -> Color {
        self.rules[a.0].last().unwrap().0
    }

    /// Validation rules: nonempty unique alphabet, nonempty rules, colors in
    /// range, positive weights strictly below 1 except on length-1 rules,
    /// per-rule weight sums equal to 1, and at least one expanding rule.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        if self.alphabet.is_empty() {
            v.push("alphabet is empty".to_string());
        }
        for (i, name) in self.alphabet.iter().enumerate() {
            if name.is_empty() {
                v.push(format!("color #{i} has an empty name"));
            }
            if self.alphabet[..i].contains(name) {
                v.push(format!("duplicate color name {name:?}"));
            }
        }
        if self.rules.len() != self.alphabet.len() {
            v.push(format!(
                "expected {} rules, found {}",
                self.alphabet.len(),
                self.rules.len()
            ));
            return ValidationReport { violations: v };
        }
        let mut all_unit = true;
        for (i, rule) in self.rules.iter().enumerate() {
            let name = &self.alphabet[i];
            if rule.is_empty() {
                v.push(format!("rule {name:?}: empty right-hand side"));
                continue;
            }
            if rule.len() > 1 {
                all_unit = false;
            }
            for (c, w) in rule {
                if c.0 >= self.alphabet.len() {
                    v.push(format!("rule {name:?}: color index {} out of range", c.0));
                }
                let wf = w.to_f64();
                let positive = match w {
                    WeightValue::Exact(r) => r.is_positive(),
                    WeightValue::Algebraic { .. } => wf > 0.0,
                };
                if !positive {
                    v.push(format!("rule {name:?}: weight {} is not positive", self.fmt_w(w)));
                    continue;
                }
                let lt_one = match w {
                    WeightValue::Exact(r) => r < &BigRational::one(),
                    WeightValue::Algebraic { .. } => wf < 1.0 - ALGEBRAIC_EQ_TOL,
                };
                if !lt_one && rule.len() > 1 {
                    v.push(format!(
                        "rule {name:?}: weight {} is not strictly below 1",
                        self.fmt_w(w)
                    ));
                }
            }
            let ok_sum = match &self.mode {
                Mode::Exact => {
                    let sum = rule.iter().fold(BigRational::zero(), |s, (_, w)| {
                        s + w.as_exact().cloned().unwrap_or_else(BigRational::zero)
                    });
                    if sum != BigRational::one() {
                        v.push(format!(
                            "rule {name:?}: weights sum to {}, expected 1",
                            crate::rational::format_rational(&sum)
                        ));
                        false
                    } else {
                        true
                    }
                }
                Mode::Algebraic(_) => {
                    let sum: f64 = rule.iter().map(|(_, w)| w.to_f64()).sum();
                    if (sum - 1.0).abs() > ALGEBRAIC_EQ_TOL {
                        v.push(format!("rule {name:?}: weights sum to {sum}, expected 1"));
                        false
                    } else {
                        true
                    }
                }
            };
            let _ = ok_sum;
        }
        if all_unit && !self.rules.is_empty() {
            v.push("non-expanding substitution: every rule has length 1".to_string());
        }
        ValidationReport { violations: v }
    }

    fn fmt_w(&self, w: &WeightValue) -> String {
        w.describe(&self.alphabet)
    }

    /// sigma^n applied letterwise to a word; n = 0 is the identity.
    pub fn apply_sigma(&self, word: &[Color], n: u32) -> Result<Vec<Color>> {
        if word.is_empty() {
            return Err(Error::Validation("apply_sigma: empty word".into()));
        }
        let mut cur = word.to_vec();
        for &a in &cur {
            if a.0 >= self.alphabet.len() {
                return Err(Error::Validation(format!(
                    "apply_sigma: color index {} out of range",
                    a.0
                )));
            }
        }
        for _ in 0..n {
            let mut out = Vec::new();
            for &a in &cur {
                out.extend(self.rules[a.0].iter().map(|(c, _)| *c));
                if out.len() > MAX_WORD {
                    return Err(Error::Unsupported(format!(
                        "sigma^{n} word exceeds {MAX_WORD} letters"
                    )));
                }
            }
            cur = out;
        }
        Ok(cur)
    }

    /// Primitivity witness for this system's count matrix: least n with
    /// M^n entrywise positive, within Wielandt's bound.
    pub fn primitivity(&self) -> Option<u32> {
        primitivity_witness(&self.associate_matrix())
    }

    /// The pair (sigma^n(a), tau^n(a)). n = 0 returns the one-letter
    /// identity with unit weight.
    pub fn tau_power(&self, a: Color, n: u32) -> Result<WeightedWord> {
        let unit = match &self.mode {
            Mode::Exact => WeightValue::Exact(BigRational::one()),
            Mode::Algebraic(_) => WeightValue::Algebraic {
                approx: 1.0,
                sym: SymbolicPart { xi_num: a.0, xi_den: a.0, lambda_exp: 0 },
            },
        };
        if n == 0 {
            return Ok(WeightedWord { letters: vec![(a, unit)] });
        }
        // memo[k][color]: iterate k, built upward
        let k_colors = self.alphabet.len();
        let mut prev: Vec<Vec<(Color, WeightValue)>> = (0..k_colors)
            .map(|c| {
                vec![(
                    Color(c),
                    match &self.mode {
                        Mode::Exact => WeightValue::Exact(BigRational::one()),
                        Mode::Algebraic(_) => WeightValue::Algebraic {
                            approx: 1.0,
                            sym: SymbolicPart { xi_num: c, xi_den: c, lambda_exp: 0 },
                        },
                    },
                )]
            })
            .collect();
        for _level in 1..=n {
            let mut next: Vec<Vec<(Color, WeightValue)>> = Vec::with_capacity(k_colors);
            for c in 0..k_colors {
                let mut word = Vec::new();
                for (b, w) in &self.rules[c] {
                    for (t, v) in &prev[b.0] {
                        word.push((*t, w.compose(v)));
                        if word.len() > MAX_WORD {
                            return Err(Error::Unsupported(format!(
                                "sigma^{n} word exceeds {MAX_WORD} letters"
                            )));
                        }
                    }
                }
                next.push(word);
            }
            prev = next;
        }
        Ok(WeightedWord { letters: prev[a.0].clone() })
    }

    /// Occurrence-count matrix: entry (a, b) counts b in sigma(a).
    pub fn associate_matrix(&self) -> CountMatrix {
        let n = self.alphabet.len();
        let mut m = vec![vec![0u64; n]; n];
        for (a, rule) in self.rules.iter().enumerate() {
            for (c, _) in rule {
                m[a][c.0] += 1;
            }
        }
        CountMatrix(m)
    }

    /// Replaces this system's rules and alphabet wholesale; internal helper
    /// for canonicalization.
    fn with_parts(&self, alphabet: Vec<String>, rules: Vec<Rule>, mode: Mode) -> Self {
        WeightedSubstitution { alphabet, rules, mode }
    }

    /// Composes away length-1 rules, merges duplicate colors, and errors on
    /// systems that would canonicalize to nothing (pure renaming cycles).
    pub fn canonicalize(&self) -> Result<WeightedSubstitution> {
        let mut alphabet = self.alphabet.clone();
        let mut rules = self.rules.clone();
        let mut mode = self.mode.clone();
        loop {
            if rules.iter().all(|r| r.len() == 1) {
                return Err(Error::Degenerate(
                    "pure renaming cycle: every rule has length 1".into(),
                ));
            }
            // inline one unit rule
            if let Some(c) = rules.iter().position(|r| r.len() == 1) {
                let (t, w_unit) = rules[c][0].clone();
                if t.0 == c {
                    return Err(Error::Degenerate(format!(
                        "self-unit rule {} -> {}",
                        alphabet[c], alphabet[c]
                    )));
                }
                for rule in rules.iter_mut() {
                    for entry in rule.iter_mut() {
                        if entry.0 .0 == c {
                            let composed = entry.1.compose(&w_unit);
                            *entry = (t, composed);
                        }
                    }
                }
                remove_color(&mut alphabet, &mut rules, &mut mode, c);
                continue;
            }
            // merge one duplicate pair
            let mut merged = false;
            'outer: for c in 0..rules.len() {
                for d in c + 1..rules.len() {
                    if rules_equal(&rules[c], &rules[d]) {
                        for rule in rules.iter_mut() {
                            for entry in rule.iter_mut() {
                                if entry.0 .0 == d {
                                    entry.0 = Color(c);
                                }
                                if let WeightValue::Algebraic { sym, .. } = &mut entry.1 {
                                    if sym.xi_num == d {
                                        sym.xi_num = c;
                                    }
                                    if sym.xi_den == d {
                                        sym.xi_den = c;
                                    }
                                }
                            }
                        }
                        remove_color(&mut alphabet, &mut rules, &mut mode, d);
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if !merged {
                break;
            }
        }
        let out = self.with_parts(alphabet, rules, mode);
        let report = out.validate();
        if !report.is_valid() {
            return Err(Error::Internal(format!(
                "canonicalization produced an invalid system: {}",
                report.violations.join("; ")
            )));
        }
        Ok(out)
    }
}

fn rules_equal(a: &Rule, b: &Rule) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b.iter())
            .all(|((ca, wa), (cb, wb))| ca == cb && wa.equivalent(wb))
}

/// Drops color `idx` from the alphabet, reindexing rule targets, symbolic
/// tags, and Perron data.
fn remove_color(alphabet: &mut Vec<String>, rules: &mut Vec<Rule>, mode: &mut Mode, idx: usize) {
    alphabet.remove(idx);
    rules.remove(idx);
    let fix = |i: &mut usize| {
        debug_assert_ne!(*i, idx, "dangling reference to removed color");
        if *i > idx {
            *i -= 1;
        }
    };
    for rule in rules.iter_mut() {
        for (c, w) in rule.iter_mut() {
            fix(&mut c.0);
            if let WeightValue::Algebraic { sym, .. } = w {
                fix(&mut sym.xi_num);
                fix(&mut sym.xi_den);
            }
        }
    }
    if let Mode::Algebraic(p) = mode {
        p.xi.remove(idx);
        // renormalize so xi[0] = 1 survives removals of color 0
        let base = p.xi[0];
        if base != 1.0 {
            for x in p.xi.iter_mut() {
                *x /= base;
            }
        }
    }
}

/// Primitivity witness: the least n <= (k-1)^2 + 1 with M^n entrywise
/// positive, if one exists (Wielandt's bound makes the cut-off sound).
pub fn primitivity_witness(m: &CountMatrix) -> Option<u32> {
    let k = m.dim();
    if k == 0 {
        return None;
    }
    let bound = ((k - 1) * (k - 1) + 1) as u32;
    let b: Vec<Vec<bool>> = m.0.iter().map(|r| r.iter().map(|&e| e > 0).collect()).collect();
    let mut p = b.clone();
    for n in 1..=bound {
        if p.iter().all(|row| row.iter().all(|&x| x)) {
            return Some(n);
        }
        // boolean product p * b
        let mut q = vec![vec![false; k]; k];
        for i in 0..k {
            for l in 0..k {
                if p[i][l] {
                    for j in 0..k {
                        if b[l][j] {
                            q[i][j] = true;
                        }
                    }
                }
            }
        }
        p = q;
    }
    if p.iter().all(|row| row.iter().all(|&x| x)) {
        return Some(bound + 1);
    }
    None
}

pub const POWER_TOL: f64 = 1e-15;
const POWER_MAX_ITERS: usize = 100_000;
pub const PERRON_RESIDUAL_TOL: f64 = 1e-12;

/// Perron eigendata of a primitive count matrix: power iteration from the
/// all-ones vector until the successive delta drops below `tol`, then one
/// Newton step against the exact characteristic polynomial. Errors on
/// non-primitive input.
pub fn perron_eigen(m: &CountMatrix, tol: f64) -> Result<PerronData> {
    if primitivity_witness(m).is_none() {
        return Err(Error::NotPrimitive(
            "no power of the count matrix is entrywise positive".into(),
        ));
    }
    let n = m.dim();
    let mut v = vec![1.0f64; n];
    let mut lambda = 0.0f64;
    for _ in 0..POWER_MAX_ITERS {
        let w: Vec<f64> = m
            .0
            .iter()
            .map(|row| row.iter().zip(&v).map(|(&c, x)| c as f64 * x).sum())
            .collect();
        let norm = w.iter().cloned().fold(0.0f64, f64::max);
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let delta = next
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - b).abs())
            .fold((norm - lambda).abs(), f64::max);
        v = next;
        lambda = norm;
        if delta < tol {
            break;
        }
    }
    let charpoly = m.charpoly();
    let dp = charpoly.derivative();
    let denom = dp.eval_f64(lambda);
    if denom != 0.0 {
        lambda -= charpoly.eval_f64(lambda) / denom;
    }
    let xi: Vec<f64> = v.iter().map(|x| x / v[0]).collect();
    // residual check: ||M xi - lambda xi||_inf
    let mut resid = 0.0f64;
    let scale = xi.iter().cloned().fold(0.0f64, f64::max);
    for (row, x) in m.0.iter().zip(&xi) {
        let s: f64 = row.iter().zip(&xi).map(|(&c, y)| c as f64 * y).sum();
        resid = resid.max((s - lambda * x).abs());
    }
    if resid > PERRON_RESIDUAL_TOL * scale {
        return Err(Error::Internal(format!(
            "power iteration residual {resid:.3e} exceeds tolerance"
        )));
    }
    Ok(PerronData { lambda, xi, charpoly })
}

/// Builds the natural-weight system for a colors-only substitution: weight
/// of the i-th letter of sigma(a) is xi[sigma(a)_i] / (lambda * xi[a]).
/// The input must be primitive.
pub fn natural_weights(
    alphabet: Vec<String>,
    color_rules: Vec<Vec<Color>>,
) -> Result<WeightedSubstitution> {
    if color_rules.iter().any(|r| r.is_empty()) {
        return Err(Error::Validation("empty right-hand side".into()));
    }
    let n = alphabet.len();
    let mut counts = vec![vec![0u64; n]; n];
    for (a, rule) in color_rules.iter().enumerate() {
        for c in rule {
            if c.0 >= n {
                return Err(Error::Validation(format!(
                    "rule for color #{a} references color index {} out of range",
                    c.0
                )));
            }
            counts[a][c.0] += 1;
        }
    }
    if color_rules.iter().all(|r| r.len() == 1) {
        return Err(Error::Validation(
            "non-expanding substitution: every rule has length 1".into(),
        ));
    }
    let m = CountMatrix(counts);
    let perron = perron_eigen(&m, POWER_TOL)?;
    let mut rules = Vec::with_capacity(n);
    for (a, rule) in color_rules.iter().enumerate() {
        let mut out = Vec::with_capacity(rule.len());
        for b in rule {
            let approx = perron.xi[b.0] / (perron.lambda * perron.xi[a]);
            out.push((
                *b,
                WeightValue::Algebraic {
                    approx,
                    sym: SymbolicPart { xi_num: b.0, xi_den: a, lambda_exp: -1 },
                },
            ));
        }
        rules.push(out);
    }
    WeightedSubstitution::try_new(alphabet, rules, Mode::Algebraic(perron))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::big_rational;

    fn exact(n: i64, d: i64) -> WeightValue {
        WeightValue::Exact(big_rational(n, d))
    }

    /// The two-color mirror system: + -> (+,4/9)(-,1/9)(+,4/9) and the
    /// mirrored rule for -.
    pub(crate) fn plus_minus() -> WeightedSubstitution {
        WeightedSubstitution::try_new(
            vec!["+".into(), "-".into()],
            vec![
                vec![(Color(0), exact(4, 9)), (Color(1), exact(1, 9)), (Color(0), exact(4, 9))],
                vec![(Color(1), exact(4, 9)), (Color(0), exact(1, 9)), (Color(1), exact(4, 9))],
            ],
            Mode::Exact,
        )
        .unwrap()
    }

    #[test]
    fn validate_flags_bad_sum_and_reports_rule() {
        let ws = WeightedSubstitution {
            alphabet: vec!["a".into()],
            rules: vec![vec![(Color(0), exact(1, 2)), (Color(0), exact(1, 3))]],
            mode: Mode::Exact,
        };
        let report = ws.validate();
        assert!(!report.is_valid());
        assert!(report.violations[0].contains("\"a\""));
        assert!(report.violations[0].contains("5/6"));
    }

    #[test]
    fn validate_rejects_non_expanding() {
        let ws = WeightedSubstitution {
            alphabet: vec!["a".into(), "b".into()],
            rules: vec![vec![(Color(1), exact(1, 1))], vec![(Color(0), exact(1, 1))]],
            mode: Mode::Exact,
        };
        let report = ws.validate();
        assert!(report.violations.iter().any(|v| v.contains("non-expanding")));
    }

    #[test]
    fn tau_square_of_plus_minus() {
        // sigma^2(+) = + - + - + - + - +  with middle weight products
        let ws = plus_minus();
        let ww = ws.tau_power(Color(0), 2).unwrap();
        let names: String = ww
            .letters
            .iter()
            .map(|(c, _)| ws.color_name(*c))
            .collect::<Vec<_>>()
            .join("");
        assert_eq!(names, "+-+-+-+-+");
        // k = 4 decomposes as i = 1, j = 1: weight (1/9)*(1/9) = 1/81
        assert_eq!(ww.letters[4].1.as_exact().unwrap(), &big_rational(1, 81));
        // weights sum to 1 exactly
        let sum = ww
            .letters
            .iter()
            .fold(BigRational::zero(), |s, (_, w)| s + w.as_exact().unwrap());
        assert_eq!(sum, BigRational::one());
    }

    #[test]
    fn tau_power_zero_is_identity() {
        let ws = plus_minus();
        let ww = ws.tau_power(Color(1), 0).unwrap();
        assert_eq!(ww.letters.len(), 1);
        assert_eq!(ww.letters[0].0, Color(1));
        assert!(ww.letters[0].1.as_exact().unwrap().is_one());
    }

    #[test]
    fn thue_morse_square() {
        // 1 -> 12, 2 -> 21 with weights 1/2: sigma^2(1) = 1221
        let ws = WeightedSubstitution::try_new(
            vec!["1".into(), "2".into()],
            vec![
                vec![(Color(0), exact(1, 2)), (Color(1), exact(1, 2))],
                vec![(Color(1), exact(1, 2)), (Color(0), exact(1, 2))],
            ],
            Mode::Exact,
        )
        .unwrap();
        let ww = ws.tau_power(Color(0), 2).unwrap();
        let names: Vec<&str> = ww.letters.iter().map(|(c, _)| ws.color_name(*c)).collect();
        assert_eq!(names.join(""), "1221");
        assert!(ww.letters.iter().all(|(_, w)| w.as_exact().unwrap() == &big_rational(1, 4)));
    }

    #[test]
    fn primitivity_witness_bounds() {
        // Thue-Morse counts: positive at n = 1? M = [[1,1],[1,1]] yes
        let m = CountMatrix(vec![vec![1, 1], vec![1, 1]]);
        assert_eq!(primitivity_witness(&m), Some(1));
        // Fibonacci: M = [[1,1],[1,0]]: M^2 = [[2,1],[1,1]] positive
        let m = CountMatrix(vec![vec![1, 1], vec![1, 0]]);
        assert_eq!(primitivity_witness(&m), Some(2));
        // reducible: [[2,0],[2,0]] never positive
        let m = CountMatrix(vec![vec![2, 0], vec![2, 0]]);
        assert_eq!(primitivity_witness(&m), None);
        // periodic (irreducible, not primitive): [[0,1],[1,0]]
        let m = CountMatrix(vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(primitivity_witness(&m), None);
    }

    #[test]
    fn apply_sigma_iterates_homomorphically() {
        let ws = plus_minus();
        let sq = ws.apply_sigma(&[Color(0)], 2).unwrap();
        let names: String = sq.iter().map(|c| ws.color_name(*c)).collect::<Vec<_>>().join("");
        assert_eq!(names, "+-+-+-+-+");
        // sigma^2([a]) = sigma(sigma(a)) as words
        let once = ws.apply_sigma(&[Color(0)], 1).unwrap();
        assert_eq!(sq, ws.apply_sigma(&once, 1).unwrap());
        assert!(ws.apply_sigma(&[], 1).is_err());
    }

    #[test]
    fn perron_of_fibonacci_counts() {
        let m = CountMatrix(vec![vec![1, 1], vec![1, 0]]);
        let p = perron_eigen(&m, POWER_TOL).unwrap();
        let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((p.lambda - golden).abs() < 1e-14);
        assert!((p.xi[0] - 1.0).abs() == 0.0);
        assert!((p.xi[1] - 1.0 / golden).abs() < 1e-12);
        assert_eq!(p.charpoly, IntPoly::from_i64(&[-1, -1, 1]));
    }

    #[test]
    fn natural_weights_of_thue_morse_are_halves() {
        let ws = natural_weights(
            vec!["1".into(), "2".into()],
            vec![vec![Color(0), Color(1)], vec![Color(1), Color(0)]],
        )
        .unwrap();
        for a in ws.colors() {
            for (_, w) in ws.rule(a) {
                assert_eq!(w.to_f64(), 0.5);
            }
        }
    }

    #[test]
    fn canonicalize_fibonacci_inlines_unit_rule() {
        let ws = natural_weights(
            vec!["1".into(), "2".into()],
            vec![vec![Color(0), Color(1)], vec![Color(0)]],
        )
        .unwrap();
        let canon = ws.canonicalize().unwrap();
        assert_eq!(canon.alphabet(), &["1".to_string()]);
        let rule = canon.rule(Color(0));
        assert_eq!(rule.len(), 2);
        let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((rule[0].1.to_f64() - 1.0 / golden).abs() < 1e-12);
        assert!((rule[1].1.to_f64() - 1.0 / (golden * golden)).abs() < 1e-12);
        let s0 = rule[0].1.sym().unwrap();
        let s1 = rule[1].1.sym().unwrap();
        assert_eq!((s0.xi_num, s0.xi_den, s0.lambda_exp), (0, 0, -1));
        assert_eq!((s1.xi_num, s1.xi_den, s1.lambda_exp), (0, 0, -2));
    }

    #[test]
    fn canonicalize_merges_duplicate_colors() {
        // 1 -> 12, 2 -> 12 natural: merges to a single color with halves
        let ws = natural_weights(
            vec!["1".into(), "2".into()],
            vec![vec![Color(0), Color(1)], vec![Color(0), Color(1)]],
        )
        .unwrap();
        let canon = ws.canonicalize().unwrap();
        assert_eq!(canon.color_count(), 1);
        let rule = canon.rule(Color(0));
        assert_eq!(rule.len(), 2);
        assert_eq!(rule[0].1.to_f64(), 0.5);
        assert_eq!(rule[1].1.to_f64(), 0.5);
    }

    #[test]
    fn canonicalize_rejects_renaming_cycle() {
        let ws = WeightedSubstitution {
            alphabet: vec!["a".into(), "b".into()],
            rules: vec![vec![(Color(1), exact(1, 1))], vec![(Color(0), exact(1, 1))]],
            mode: Mode::Exact,
        };
        assert!(matches!(ws.canonicalize(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn cocycle_consistency_on_splits() {
        // tau^(m+n)(a) equals the composition of tau^m over tau^n letterwise
        let ws = plus_minus();
        for (mm, nn) in [(1u32, 1u32), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (2, 3), (3, 2), (1, 4), (4, 1)] {
            let full = ws.tau_power(Color(0), mm + nn).unwrap();
            let outer = ws.tau_power(Color(0), mm).unwrap();
            let mut recomposed = Vec::new();
            for (b, w) in &outer.letters {
                let inner = ws.tau_power(*b, nn).unwrap();
                for (c, v) in &inner.letters {
                    recomposed.push((*c, w.compose(v)));
                }
            }
            assert_eq!(full.letters.len(), recomposed.len());
            for ((c1, w1), (c2, w2)) in full.letters.iter().zip(recomposed.iter()) {
                assert_eq!(c1, c2);
                assert!(w1.equivalent(w2));
            }
        }
    }
}
