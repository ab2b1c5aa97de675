//! Zeta function of the suspension flow: determinant formula, exact
//! rational form for lattice systems, Euler-product oracle, pole search.
//!
//! With M_alpha the matrix of weight powers (entry (a,b) sums tau(a)_i^alpha
//! over letters i with sigma(a)_i = b) and M_+/M_- its first/last-letter
//! masks, the zeta function is
//!
//! ```text
//! zeta(alpha) = det(I - M_+) det(I - M_-) / det(I - M_alpha)
//!               * prod over commensurable separating orbits (1 - c^-alpha)^-1
//! ```
//!
//! The numerator masks cancel the pure-boundary cycles that the full
//! determinant counts but the flow identifies; the separating-orbit factors
//! restore the glued boundary points that remain genuinely periodic.
//!
//! For lattice systems, substituting z = lambda^-alpha turns every entry
//! into an integer power of z, and the whole function into a ratio of
//! integer polynomials. The exponents come from the g-function and are
//! invariant content; a per-color shift (diagonal conjugation) makes them
//! nonnegative without changing any determinant.

use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::base_group::{
    child_graph, edge_exponent, g_function, BaseGroupReport, Classification, GFunction,
    LatticeBase,
};
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, PolyMatrix, RatMatrix};
use crate::orbit::{primitive_cycles, SeparatingOrbit, SideScale};
use crate::poly::{real_roots_in, IntPoly};
use crate::rational::{log_exact, rational_pow, rational_to_f64};
use crate::substitution::{Color, Mode, WeightedSubstitution};

/// Which letters of each rule contribute to a weight matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mask {
    All,
    First,
    Last,
}

impl Mask {
    fn admits(self, i: usize, len: usize) -> bool {
        match self {
            Mask::All => true,
            Mask::First => i == 0,
            Mask::Last => i == len - 1,
        }
    }
}

/// Weight-power matrix at complex alpha: entry (a, b) sums tau(a)_i^alpha
/// over admitted letters with sigma(a)_i = b.
pub fn weight_matrix(ws: &WeightedSubstitution, alpha: Complex64, mask: Mask) -> CMatrix {
    let k = ws.color_count();
    let mut m = CMatrix::zero(k);
    for a in ws.colors() {
        let rule = ws.rule(a);
        for (i, (b, w)) in rule.iter().enumerate() {
            if mask.admits(i, rule.len()) {
                let lw = w.to_f64().ln();
                m.0[a.0][b.0] += (alpha * lw).exp();
            }
        }
    }
    m
}

/// Exact weight-power matrix at a nonnegative integer alpha (exact mode
/// only).
pub fn weight_matrix_exact(
    ws: &WeightedSubstitution,
    alpha: u32,
    mask: Mask,
) -> Result<RatMatrix> {
    let k = ws.color_count();
    let mut m = vec![vec![BigRational::zero(); k]; k];
    for a in ws.colors() {
        let rule = ws.rule(a);
        for (i, (b, w)) in rule.iter().enumerate() {
            if mask.admits(i, rule.len()) {
                let r = w.as_exact().ok_or_else(|| {
                    Error::Unsupported("exact weight matrix requires exact mode".into())
                })?;
                let mut p = BigRational::one();
                for _ in 0..alpha {
                    p *= r;
                }
                m[a.0][b.0] += p;
            }
        }
    }
    Ok(RatMatrix(m))
}

/// The three matrices entering the determinant formula at one alpha.
#[derive(Clone, Debug)]
pub struct ZetaMatrices {
    pub m_alpha: CMatrix,
    pub m_plus: CMatrix,
    pub m_minus: CMatrix,
}

pub fn zeta_matrices(ws: &WeightedSubstitution, alpha: Complex64) -> ZetaMatrices {
    ZetaMatrices {
        m_alpha: weight_matrix(ws, alpha, Mask::All),
        m_plus: weight_matrix(ws, alpha, Mask::First),
        m_minus: weight_matrix(ws, alpha, Mask::Last),
    }
}

fn scale_f64(ws: &WeightedSubstitution) -> f64 {
    match ws.mode() {
        Mode::Exact => 0.0,
        Mode::Algebraic(p) => p.lambda,
    }
}

fn orbit_scale_ln(ws: &WeightedSubstitution, s: &SideScale) -> f64 {
    match s {
        SideScale::Rational(r) => rational_to_f64(r).ln(),
        SideScale::LambdaPow(e) => *e as f64 * scale_f64(ws).ln(),
    }
}

/// A zeta evaluation: the value, the raw denominator pieces, and a pole
/// indicator (some denominator factor vanished to working precision).
#[derive(Clone, Debug)]
pub struct ZetaEval {
    pub value: Complex64,
    pub is_pole: bool,
}

const POLE_EPS: f64 = 1e-13;

/// Evaluates the determinant formula at complex alpha. Incommensurable
/// separating orbits contribute no factor.
pub fn zeta_eval(
    ws: &WeightedSubstitution,
    orbits: &[SeparatingOrbit],
    alpha: Complex64,
) -> Result<ZetaEval> {
    let det_all = weight_matrix(ws, alpha, Mask::All).det_one_minus();
    let det_first = weight_matrix(ws, alpha, Mask::First).det_one_minus();
    let det_last = weight_matrix(ws, alpha, Mask::Last).det_one_minus();
    let mut value = det_first * det_last;
    let mut is_pole = det_all.norm() < POLE_EPS;
    value /= det_all;
    for o in orbits {
        if let Some(c) = &o.joint_scale {
            let f = Complex64::new(1.0, 0.0) - (-alpha * orbit_scale_ln(ws, c)).exp();
            if f.norm() < POLE_EPS {
                is_pole = true;
            }
            value /= f;
        }
    }
    Ok(ZetaEval { value, is_pole })
}

/// The zeta function of a lattice system as a ratio of integer polynomials
/// in z = base^-alpha, with the common factors cancelled.
#[derive(Clone, Debug)]
pub struct RationalZeta {
    pub numerator: IntPoly,
    pub denominator: IntPoly,
    pub base: LatticeBase,
}

/// Integer exponent table: m(a, i) with g(a) tau(a)_i / g(sigma(a)_i) =
/// base^(-m), shifted by shortest-path potentials so every exponent is
/// nonnegative. The shift is a diagonal conjugation: determinants are
/// unchanged.
fn exponent_table(
    ws: &WeightedSubstitution,
    g: &GFunction,
    base: &LatticeBase,
) -> Result<Vec<Vec<i64>>> {
    let k = ws.color_count();
    let mut m: Vec<Vec<i64>> = Vec::with_capacity(k);
    for a in ws.colors() {
        let mut row = Vec::with_capacity(ws.rule_len(a));
        for i in 0..ws.rule_len(a) {
            row.push(edge_exponent(ws, g, base, a, i)?);
        }
        m.push(row);
    }
    // Bellman-Ford potentials from color 0; cycle sums are strictly
    // positive (cycle weights are below 1), so this terminates
    let mut dist = vec![i64::MAX; k];
    dist[0] = 0;
    for round in 0..=k {
        let mut changed = false;
        for a in 0..k {
            if dist[a] == i64::MAX {
                continue;
            }
            for (i, (b, _)) in ws.rule(Color(a)).iter().enumerate() {
                let cand = dist[a] + m[a][i];
                if cand < dist[b.0] {
                    dist[b.0] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        if round == k {
            return Err(Error::Internal(
                "negative cycle in exponent table; weights not below 1".into(),
            ));
        }
    }
    if dist.contains(&i64::MAX) {
        return Err(Error::NotPrimitive("child graph is not strongly connected".into()));
    }
    for a in 0..k {
        for (i, (b, _)) in ws.rule(Color(a)).iter().enumerate() {
            m[a][i] += dist[a] - dist[b.0];
            debug_assert!(m[a][i] >= 0, "potential shift left a negative exponent");
        }
    }
    Ok(m)
}

fn poly_matrix(ws: &WeightedSubstitution, m: &[Vec<i64>], mask: Mask) -> PolyMatrix {
    let k = ws.color_count();
    let mut out = vec![vec![IntPoly::zero(); k]; k];
    for a in ws.colors() {
        let rule = ws.rule(a);
        for (i, (b, _)) in rule.iter().enumerate() {
            if mask.admits(i, rule.len()) {
                out[a.0][b.0] = out[a.0][b.0].add(&IntPoly::monomial(m[a.0][i] as usize));
            }
        }
    }
    PolyMatrix(out)
}

/// Lattice exponent of a separating-orbit scale: c = base^e.
fn orbit_exponent(base: &LatticeBase, c: &SideScale) -> Result<i64> {
    match (base, c) {
        (LatticeBase::Rational(lam), SideScale::Rational(r)) => log_exact(r, lam)
            .ok_or_else(|| {
                Error::Internal("separating orbit scale is not a lattice power".into())
            }),
        (LatticeBase::Perron(_), SideScale::LambdaPow(e)) => Ok(*e),
        _ => Err(Error::Internal("mixed lattice base and orbit scale modes".into())),
    }
}

/// Computes the exact rational form. Errors on dense systems.
pub fn zeta_rational(
    ws: &WeightedSubstitution,
    report: &BaseGroupReport,
    orbits: &[SeparatingOrbit],
) -> Result<RationalZeta> {
    let base = match &report.classification {
        Classification::Dense => {
            return Err(Error::Unsupported(
                "dense weight group: no rational form in a single variable".into(),
            ))
        }
        Classification::Lattice(b) => b.clone(),
    };
    let g = g_function(ws, report)?;
    let m = exponent_table(ws, &g, &base)?;
    let det_all = poly_matrix(ws, &m, Mask::All).det_one_minus()?;
    let det_first = poly_matrix(ws, &m, Mask::First).det_one_minus()?;
    let det_last = poly_matrix(ws, &m, Mask::Last).det_one_minus()?;
    let mut num = det_first.mul(&det_last);
    let mut den = det_all;
    for o in orbits {
        match &o.joint_scale {
            Some(c) => {
                let e = orbit_exponent(&base, c)?;
                debug_assert!(e > 0);
                // factor (1 - z^e) joins the denominator
                den = den.mul(&IntPoly::one().sub(&IntPoly::monomial(e as usize)));
            }
            None => {
                return Err(Error::Internal(
                    "incommensurable separating orbit in a lattice system".into(),
                ))
            }
        }
    }
    let common = num.gcd(&den);
    num = num.div_exact(&common)?;
    den = den.div_exact(&common)?;
    // both constant terms are 1 before cancellation; keep them positive
    if den.0.first().map(|c| c.is_negative()).unwrap_or(false) {
        num = IntPoly::zero().sub(&num);
        den = IntPoly::zero().sub(&den);
    }
    Ok(RationalZeta { numerator: num, denominator: den, base })
}

impl RationalZeta {
    /// Evaluates the rational form at real alpha via z = base^-alpha.
    pub fn eval_alpha(&self, alpha: f64) -> f64 {
        let z = self.base.to_f64().powf(-alpha);
        self.numerator.eval_f64(z) / self.denominator.eval_f64(z)
    }

    /// Evaluates the rational form at complex alpha.
    pub fn eval_complex(&self, alpha: Complex64) -> Complex64 {
        let z = (-alpha * self.base.to_f64().ln()).exp();
        self.numerator.eval_complex(z) / self.denominator.eval_complex(z)
    }

    pub fn describe(&self) -> String {
        format!(
            "({}) / ({})  with z = {}^-alpha",
            self.numerator.display("z"),
            self.denominator.display("z"),
            self.base.describe()
        )
    }
}

/// Euler-product estimate with a certified tail bound.
#[derive(Clone, Debug)]
pub struct EulerEstimate {
    pub value: Complex64,
    /// Upper bound on |true - value| from interior cycles beyond max_len.
    pub tail_bound: f64,
    pub cycles_used: usize,
    pub max_len: usize,
}

/// Brute-force zeta: the product over interior primitive cycles of
/// (1 - w^alpha)^-1 up to length max_len, excluding pure-boundary cycles,
/// times the separating-orbit factors. Requires Re(alpha) > 1, where the
/// product converges absolutely. The remainder of the log-product is
/// bounded by trace sums of the weight matrix at Re(alpha): every closed
/// walk is a power of a rotated primitive cycle, and |w^alpha| = w^Re(alpha).
pub fn zeta_euler_oracle(
    ws: &WeightedSubstitution,
    orbits: &[SeparatingOrbit],
    alpha: Complex64,
    max_len: usize,
) -> Result<EulerEstimate> {
    if alpha.re.is_nan() || alpha.re <= 1.0 {
        return Err(Error::Validation(format!(
            "Euler product needs Re(alpha) > 1, got {}",
            alpha.re
        )));
    }
    let graph = child_graph(ws);
    let all = primitive_cycles(&graph, max_len)?;
    // sequential fold in canonical enumeration order: deterministic bytes
    let one = Complex64::new(1.0, 0.0);
    let mut log_sum = Complex64::new(0.0, 0.0);
    let mut used = 0usize;
    for n in &all {
        if n.pure_left(&graph) || n.pure_right(&graph) {
            continue;
        }
        let lw = n.weight.to_f64().ln();
        log_sum -= (one - (alpha * lw).exp()).ln();
        used += 1;
    }
    for o in orbits {
        if let Some(c) = &o.joint_scale {
            log_sum -= (one - (-alpha * orbit_scale_ln(ws, c)).exp()).ln();
        }
    }
    let value = log_sum.exp();
    // tail: sum over n in (L, 2L] of tr(A^n)/n exactly at Re(alpha), then a
    // geometric extrapolation with the observed growth ratio
    let k = ws.color_count();
    let mut a_mat = vec![vec![0.0f64; k]; k];
    for e in &graph.edges {
        a_mat[e.from.0][e.to.0] += e.weight.to_f64().powf(alpha.re);
    }
    let mut traces = vec![0.0f64; 2 * max_len + 1];
    let mut power = a_mat.clone();
    for (n, tr) in traces.iter_mut().enumerate().skip(1) {
        if n > 1 {
            let mut next = vec![vec![0.0f64; k]; k];
            for i in 0..k {
                for l in 0..k {
                    if power[i][l] != 0.0 {
                        for j in 0..k {
                            next[i][j] += power[i][l] * a_mat[l][j];
                        }
                    }
                }
            }
            power = next;
        }
        *tr = (0..k).map(|i| power[i][i]).sum();
    }
    let t: f64 = traces
        .iter()
        .enumerate()
        .skip(max_len + 1)
        .map(|(n, &tr)| tr / n as f64)
        .sum();
    let ratio = if traces[max_len] > 0.0 {
        (traces[2 * max_len] / traces[max_len]).powf(1.0 / max_len as f64)
    } else {
        0.0
    };
    // remainder r of the log-product: trace sums are exact on (L, 2L], the
    // geometric extrapolation beyond 2L gets a 3x cushion against a ratio
    // read low; |log(1-z)| <= |z|/(1-|z|) and every |z| <= r turn r into
    // |value| * expm1(r / (1 - r)), and a final 4x absorbs the slack lost
    // to rounding the traces themselves
    let tail_bound = if ratio < 1.0 {
        let beyond = traces[2 * max_len] * ratio / ((1.0 - ratio) * (2 * max_len) as f64);
        let r = t + 3.0 * beyond;
        if r < 0.5 {
            value.norm() * (r / (1.0 - r)).exp_m1() * 4.0
        } else {
            f64::INFINITY
        }
    } else {
        f64::INFINITY
    };
    Ok(EulerEstimate { value, tail_bound, cycles_used: used, max_len })
}

/// Certifies that alpha = 1 is a pole: the full weight matrix at alpha = 1
/// is row-stochastic, so det(I - M_1) vanishes identically.
pub fn alpha_one_certificate(ws: &WeightedSubstitution) -> Result<String> {
    match ws.mode() {
        Mode::Exact => {
            let m = weight_matrix_exact(ws, 1, Mask::All)?;
            for (a, row) in m.0.iter().enumerate() {
                let sum: BigRational = row.iter().cloned().sum();
                if !sum.is_one() {
                    return Err(Error::Internal(format!(
                        "row {} of M_1 sums to {}, not 1",
                        ws.color_name(Color(a)),
                        crate::rational::format_rational(&sum)
                    )));
                }
            }
            Ok("det(I - M_1) = 0: every row of M_1 sums to exactly 1, so \
                (I - M_1) annihilates the all-ones vector"
                .into())
        }
        Mode::Algebraic(p) => {
            // M_1 entries are xi[b]/(lambda xi[a]) summed over letters; rows
            // sum to (M xi)_a / (lambda xi_a) = 1 by the eigenvector
            // identity, with lambda a root of the exact characteristic
            // polynomial
            let resid = p.charpoly.eval_f64(p.lambda).abs();
            let dp = p.charpoly.derivative().eval_f64(p.lambda).abs().max(1.0);
            if resid > 1e-9 * dp {
                return Err(Error::Internal(format!(
                    "characteristic polynomial residual {resid:.3e} too large at lambda"
                )));
            }
            Ok(format!(
                "det(I - M_1) = 0: rows of M_1 sum to (M xi)_a / (lambda xi_a) = 1 \
                 because xi is the Perron eigenvector; lambda is a root of {}",
                p.charpoly.display("x")
            ))
        }
    }
}

/// Real poles of zeta in the open interval (lo, hi), with multiplicities.
/// Lattice systems use exact roots of the cancelled denominator; dense
/// systems scan 1/zeta for sign changes and tangencies.
pub fn find_real_poles(
    ws: &WeightedSubstitution,
    report: &BaseGroupReport,
    orbits: &[SeparatingOrbit],
    lo: f64,
    hi: f64,
) -> Result<Vec<(f64, usize)>> {
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::Validation(format!("empty interval ({lo}, {hi})")));
    }
    match &report.classification {
        Classification::Lattice(_) => {
            let rz = zeta_rational(ws, report, orbits)?;
            let lam = rz.base.to_f64();
            // z = lam^-alpha maps (lo, hi) to (lam^-hi, lam^-lo), reversed
            let z_lo = lam.powf(-hi);
            let z_hi = lam.powf(-lo);
            let mut poles: Vec<(f64, usize)> = real_roots_in(&rz.denominator, z_lo, z_hi)
                .into_iter()
                .filter(|(z, _)| *z > 0.0)
                .map(|(z, mult)| (-(z.ln()) / lam.ln(), mult))
                .collect();
            poles.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            poles.retain(|(a, _)| *a > lo && *a < hi);
            Ok(poles)
        }
        Classification::Dense => {
            let f = |alpha: f64| -> f64 {
                let e = zeta_eval(ws, orbits, Complex64::new(alpha, 0.0)).unwrap();
                1.0 / e.value.re
            };
            Ok(scan_zeros(&f, lo, hi))
        }
    }
}

const GRID: usize = 2048;

/// Zeros of a real function on an open interval: sign-change bisection plus
/// a tangency pass for even-order zeros. Bisection points are kept only
/// when the function value is small there, so poles of f (sign changes with
/// diverging magnitude) are discarded.
fn scan_zeros(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<(f64, usize)> {
    let step = (hi - lo) / (GRID as f64 + 1.0);
    let xs: Vec<f64> = (1..=GRID).map(|i| lo + step * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out: Vec<(f64, usize)> = Vec::new();
    for i in 1..xs.len() {
        if ys[i - 1] == 0.0 {
            out.push((xs[i - 1], 1));
            continue;
        }
        if ys[i - 1] * ys[i] < 0.0 {
            let (mut a, mut b) = (xs[i - 1], xs[i]);
            let mut fa = ys[i - 1];
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let fm = f(mid);
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            let root = 0.5 * (a + b);
            // a pole of f also changes sign; keep genuine zeros only
            let spread = (f(root - step * 0.5).abs()).min(f(root + step * 0.5).abs());
            if f(root).abs() <= spread {
                out.push((root, 1));
            }
        }
    }
    // tangency pass: local minima of |f| that reach ~0 without sign change
    for i in 1..xs.len() - 1 {
        let m = ys[i].abs();
        if m < 1e-10 && m <= ys[i - 1].abs() && m <= ys[i + 1].abs() {
            let near = out.iter().any(|(r, _)| (r - xs[i]).abs() < 2.0 * step);
            if !near {
                out.push((xs[i], 2));
            }
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9);
    out
}

/// Exact rational evaluation of the lattice zeta at z = base^-alpha for
/// integer alpha when the base itself is rational; used for cross-route
/// checks.
pub fn rational_zeta_at_integer_alpha(rz: &RationalZeta, alpha: i64) -> Option<BigRational> {
    let LatticeBase::Rational(lam) = &rz.base else { return None };
    let z = rational_pow(lam, -alpha);
    let den = rz.denominator.eval_rational(&z);
    if den.is_zero() {
        return None;
    }
    Some(rz.numerator.eval_rational(&z) / den)
}
