//! Periodic orbits of the boundary maps and the interior subshift.
//!
//! Two kinds of cycle data feed the zeta function. Interior periodic points
//! correspond to aperiodic closed edge-walks of the child graph up to
//! rotation (necklaces); these drive the Euler-product oracle. Separating
//! orbits arise from adjacent letter pairs: following the rightmost
//! descendant of the left letter and the leftmost descendant of the right
//! letter drives the pair into a cycle of the product functional graph, and
//! the expansion factors of the two sides determine whether the glued
//! boundary point is genuinely periodic (commensurable case) or not.

use num::rational::BigRational;
use num::One;
use std::collections::BTreeMap;

use crate::base_group::{child_graph, ChildGraph};
use crate::error::{Error, Result};
use crate::exec::{par_map, seq_map};
use crate::rational::{prime_exponents, rational_pow};
use crate::substitution::{Color, WeightedSubstitution};
use crate::weight::WeightValue;

/// The first-letter and last-letter maps with their edge weights: color a
/// goes to sigma(a)_0 (resp. the final letter) carrying that letter's
/// weight. Their cycles scale the two sides of a separating line.
#[derive(Clone, Debug)]
pub struct BoundaryMaps {
    pub first: Vec<(Color, WeightValue)>,
    pub last: Vec<(Color, WeightValue)>,
}

pub fn boundary_maps(ws: &WeightedSubstitution) -> BoundaryMaps {
    let mut first = Vec::with_capacity(ws.color_count());
    let mut last = Vec::with_capacity(ws.color_count());
    for a in ws.colors() {
        let rule = ws.rule(a);
        first.push((rule[0].0, rule[0].1.clone()));
        let end = rule.last().unwrap();
        last.push((end.0, end.1.clone()));
    }
    BoundaryMaps { first, last }
}

/// An aperiodic closed edge-walk up to rotation, stored as its
/// lexicographically minimal rotation, with the weight product around it.
#[derive(Clone, Debug)]
pub struct PrimitiveCycle {
    pub edge_ids: Vec<usize>,
    pub weight: WeightValue,
}

impl PrimitiveCycle {
    pub fn len(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_ids.is_empty()
    }

    /// True when every edge is the leftmost letter of its rule.
    pub fn pure_left(&self, graph: &ChildGraph) -> bool {
        self.edge_ids.iter().all(|&e| graph.edges[e].index == 0)
    }

    /// True when every edge is the rightmost letter of its rule. Meaningful
    /// on the full child graph, where out-degree equals rule length.
    pub fn pure_right(&self, graph: &ChildGraph) -> bool {
        let degree = graph.adjacency().iter().map(Vec::len).collect::<Vec<_>>();
        self.edge_ids
            .iter()
            .all(|&e| graph.edges[e].index == degree[graph.edges[e].from.0] - 1)
    }
}

/// Hard cap on walks explored per enumeration shard.
pub const WALK_CAP: u64 = 10_000_000;
/// Default cap on the number of cycles returned.
pub const CYCLE_COUNT_CAP: usize = 1_000_000;

fn is_lex_min_rotation(seq: &[usize]) -> bool {
    let n = seq.len();
    for r in 1..n {
        for j in 0..n {
            let a = seq[j];
            let b = seq[(r + j) % n];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => break,
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Equal => {
                    if j == n - 1 {
                        // equal to a proper rotation: periodic, not a
                        // canonical representative
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Enumerates the necklaces with first edge `first` and length at most
/// `max_len`, in lexicographic order of their canonical rotations. Every
/// edge of such a walk has id >= `first`.
fn necklaces_from(
    graph: &ChildGraph,
    first: usize,
    max_len: usize,
) -> std::result::Result<Vec<PrimitiveCycle>, u64> {
    let start = graph.edges[first].from;
    // per-node outgoing edge ids >= first, in id order
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); graph.node_count];
    for (id, e) in graph.edges.iter().enumerate() {
        if id >= first {
            adj[e.from.0].push(id);
        }
    }
    let mut out = Vec::new();
    let mut walk = vec![first];
    // stack of iterator positions into adj of the current endpoint
    let mut pos = vec![0usize];
    let mut explored: u64 = 0;
    while let Some(&cursor) = pos.last() {
        let here = graph.edges[*walk.last().unwrap()].to;
        // cursor == 0 marks the first visit to this walk state
        if here == start && cursor == 0 && is_lex_min_rotation(&walk) {
            let mut w = graph.edges[walk[0]].weight.clone();
            for &e in &walk[1..] {
                w = w.compose(&graph.edges[e].weight);
            }
            out.push(PrimitiveCycle { edge_ids: walk.clone(), weight: w });
        }
        if walk.len() >= max_len {
            pos.pop();
            walk.pop();
            if let Some(c) = pos.last_mut() {
                *c += 1;
            }
            continue;
        }
        let options = &adj[here.0];
        if cursor >= options.len() {
            pos.pop();
            walk.pop();
            if let Some(c) = pos.last_mut() {
                *c += 1;
            }
            continue;
        }
        let next = options[cursor];
        explored += 1;
        if explored > WALK_CAP {
            return Err(explored);
        }
        walk.push(next);
        pos.push(0);
    }
    Ok(out)
}

/// All primitive cycles of length at most `max_len`, grouped by first edge
/// and concatenated in first-edge order. The shards are independent, so
/// they run in parallel when the feature is enabled; the merge order is
/// fixed either way.
pub fn primitive_cycles(graph: &ChildGraph, max_len: usize) -> Result<Vec<PrimitiveCycle>> {
    let firsts = shard_ids(graph, max_len)?;
    let shards = par_map(firsts, |f| necklaces_from(graph, f, max_len));
    merge_shards(shards)
}

/// Sequential twin of [`primitive_cycles`] for benchmarking; identical
/// output.
pub fn primitive_cycles_seq(
    graph: &ChildGraph,
    max_len: usize,
) -> Result<Vec<PrimitiveCycle>> {
    let firsts = shard_ids(graph, max_len)?;
    let shards = seq_map(firsts, |f| necklaces_from(graph, f, max_len));
    merge_shards(shards)
}

fn shard_ids(graph: &ChildGraph, max_len: usize) -> Result<Vec<usize>> {
    if max_len == 0 {
        return Err(Error::Validation("max_len must be at least 1".into()));
    }
    Ok((0..graph.edges.len()).collect())
}

fn merge_shards(
    shards: Vec<std::result::Result<Vec<PrimitiveCycle>, u64>>,
) -> Result<Vec<PrimitiveCycle>> {
    let mut out = Vec::new();
    for s in shards {
        match s {
            Ok(mut v) => out.append(&mut v),
            Err(n) => {
                return Err(Error::CycleCap(format!(
                    "cycle enumeration explored more than {n} walks"
                )))
            }
        }
    }
    if out.len() > CYCLE_COUNT_CAP {
        return Err(Error::CycleCap(format!(
            "more than {CYCLE_COUNT_CAP} primitive cycles; raise the cap to proceed"
        )));
    }
    Ok(out)
}

/// Cycles of the full child graph of a system.
pub fn system_cycles(
    ws: &WeightedSubstitution,
    max_len: usize,
) -> Result<Vec<PrimitiveCycle>> {
    primitive_cycles(&child_graph(ws), max_len)
}

/// Cycle counts by length, from the enumerator.
pub fn cycle_counts(ws: &WeightedSubstitution, max_len: usize) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; max_len + 1];
    for n in system_cycles(ws, max_len)? {
        counts[n.len()] += 1;
    }
    Ok(counts)
}

fn mobius(mut n: u64) -> i64 {
    let mut mu = 1i64;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            mu = -mu;
        }
        p += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Independent count of aperiodic necklaces per length from traces of count
/// matrix powers: n * N(n) = sum over d | n of mu(n/d) tr(M^d).
pub fn mobius_cycle_counts(ws: &WeightedSubstitution, max_len: usize) -> Result<Vec<u64>> {
    let m = ws.associate_matrix();
    let mut traces = vec![0u64; max_len + 1];
    let mut power = crate::matrix::CountMatrix::identity(m.dim());
    for t in traces.iter_mut().skip(1) {
        power = power.mul(&m);
        *t = power.trace();
    }
    let mut counts = vec![0u64; max_len + 1];
    for (n, count) in counts.iter_mut().enumerate().skip(1) {
        let s: i128 = (1..=n)
            .filter(|&d| n.is_multiple_of(d))
            .map(|d| i128::from(mobius((n / d) as u64)) * i128::from(traces[d]))
            .sum();
        debug_assert!(s >= 0 && s % n as i128 == 0);
        *count = (s / n as i128) as u64;
    }
    Ok(counts)
}

/// Scale factor of one side of a separating orbit: either an exact rational
/// or an integer power of the Perron root.
#[derive(Clone, Debug)]
pub enum SideScale {
    Rational(BigRational),
    LambdaPow(i64),
}

impl SideScale {
    pub fn to_f64(&self, lambda: f64) -> f64 {
        match self {
            SideScale::Rational(r) => crate::rational::rational_to_f64(r),
            SideScale::LambdaPow(e) => lambda.powi(*e as i32),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SideScale::Rational(r) => crate::rational::format_rational(r),
            SideScale::LambdaPow(e) => format!("lambda^{e}"),
        }
    }
}

/// A separating orbit: the cycle reached by the two-sided descent of an
/// adjacent letter pair, with the per-side expansion factors.
#[derive(Clone, Debug)]
pub struct SeparatingOrbit {
    /// All (color, letter index) pairs whose descent lands on this cycle,
    /// in scan order.
    pub seeds: Vec<(Color, usize)>,
    /// Steps before the cycle, for the first seed.
    pub preperiod: Vec<(Color, Color)>,
    /// The cycle, rotated to its lexicographically minimal form.
    pub cycle: Vec<(Color, Color)>,
    /// Expansion of the left column per its own period (inverse of the
    /// rightmost-letter weight product).
    pub lambda_minus: SideScale,
    /// Expansion of the right column per its own period.
    pub lambda_plus: SideScale,
    /// Joint scale c, the smallest value > 1 that is simultaneously a
    /// positive power of both side scales; None marks the orbit as
    /// incommensurable (flagged, excluded from the zeta correction set).
    pub joint_scale: Option<SideScale>,
    /// True when the two side scales are equal.
    pub balanced: bool,
}

impl SeparatingOrbit {
    pub fn commensurable(&self) -> bool {
        self.joint_scale.is_some()
    }

    /// Numeric value of the joint scale, when commensurable.
    pub fn c_value(&self, lambda: f64) -> Option<f64> {
        self.joint_scale.as_ref().map(|s| s.to_f64(lambda))
    }
}

fn minimal_period<T: PartialEq>(seq: &[T]) -> usize {
    let n = seq.len();
    'cand: for p in 1..=n {
        if !n.is_multiple_of(p) {
            continue;
        }
        for i in p..n {
            if seq[i] != seq[i - p] {
                continue 'cand;
            }
        }
        return p;
    }
    n
}

fn lex_min_rotation(cycle: &[(Color, Color)]) -> Vec<(Color, Color)> {
    let n = cycle.len();
    let key = |rot: usize| (0..n).map(move |j| cycle[(rot + j) % n]);
    let mut best = 0;
    for r in 1..n {
        if key(r).lt(key(best)) {
            best = r;
        }
    }
    key(best).collect()
}

/// Weight product of the rightmost letters around the left column's cycle,
/// inverted; and likewise for leftmost letters on the right. The sides use
/// their own minimal periods, not the joint one.
fn side_scales(
    ws: &WeightedSubstitution,
    cycle: &[(Color, Color)],
) -> Result<(SideScale, SideScale)> {
    let lefts: Vec<Color> = cycle.iter().map(|(l, _)| *l).collect();
    let rights: Vec<Color> = cycle.iter().map(|(_, r)| *r).collect();
    let pl = minimal_period(&lefts);
    let pr = minimal_period(&rights);
    let prod = |colors: &[Color], last: bool| -> WeightValue {
        let pick = |c: Color| -> WeightValue {
            let rule = ws.rule(c);
            if last { rule[rule.len() - 1].1.clone() } else { rule[0].1.clone() }
        };
        let mut w = pick(colors[0]);
        for &c in &colors[1..] {
            w = w.compose(&pick(c));
        }
        w
    };
    let to_scale = |w: WeightValue| -> Result<SideScale> {
        match w.invert() {
            WeightValue::Exact(r) => {
                if r <= BigRational::one() {
                    return Err(Error::Degenerate(
                        "separating cycle does not expand; canonicalize first".into(),
                    ));
                }
                Ok(SideScale::Rational(r))
            }
            WeightValue::Algebraic { sym, .. } => {
                if sym.xi_num != sym.xi_den {
                    return Err(Error::Internal(
                        "cycle weight did not telescope to a lattice power".into(),
                    ));
                }
                if sym.lambda_exp <= 0 {
                    return Err(Error::Degenerate(
                        "separating cycle does not expand; canonicalize first".into(),
                    ));
                }
                Ok(SideScale::LambdaPow(sym.lambda_exp))
            }
        }
    };
    Ok((to_scale(prod(&lefts[..pl], true))?, to_scale(prod(&rights[..pr], false))?))
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Joint scale of the two sides: the generator of the intersection of the
/// two cyclic groups, when it is nontrivial.
fn joint_scale(minus: &SideScale, plus: &SideScale) -> Result<Option<SideScale>> {
    match (minus, plus) {
        (SideScale::LambdaPow(q), SideScale::LambdaPow(p)) => {
            let l = (p / gcd_i64(*p, *q)) * q;
            Ok(Some(SideScale::LambdaPow(l)))
        }
        (SideScale::Rational(rm), SideScale::Rational(rp)) => {
            let vm = prime_exponents(rm)?;
            let vp = prime_exponents(rp)?;
            // collinear integer vectors iff a common base exists
            for (p, &e) in &vm {
                for (q, &f) in &vp {
                    let ep = *vp.get(p).unwrap_or(&0);
                    let fq = *vm.get(q).unwrap_or(&0);
                    if (e as i128) * (f as i128) != (ep as i128) * (fq as i128) {
                        return Ok(None);
                    }
                }
            }
            // primitive direction from the union
            let mut dir: BTreeMap<u64, i64> = vm.clone();
            for (p, e) in &vp {
                dir.entry(*p).or_insert(*e);
            }
            let mut g = 0i64;
            for &e in dir.values() {
                g = gcd_i64(g, e);
            }
            let d: BTreeMap<u64, i64> = dir.iter().map(|(&p, &e)| (p, e / g)).collect();
            let sign: f64 = d.iter().map(|(&p, &e)| e as f64 * (p as f64).ln()).sum();
            let d: BTreeMap<u64, i64> = if sign < 0.0 {
                d.into_iter().map(|(p, e)| (p, -e)).collect()
            } else {
                d
            };
            let (&p0, &d0) = d.iter().find(|(_, &e)| e != 0).unwrap();
            let proj = |v: &BTreeMap<u64, i64>| v.get(&p0).unwrap_or(&0) / d0;
            let (cp, cq) = (proj(&vp), proj(&vm));
            let l = (cp / gcd_i64(cp, cq)) * cq;
            let mut base = BigRational::one();
            for (&p, &e) in &d {
                base *= rational_pow(&BigRational::from_integer(num::BigInt::from(p)), e);
            }
            Ok(Some(SideScale::Rational(rational_pow(&base, l.abs()))))
        }
        _ => Err(Error::Internal("mixed side-scale modes".into())),
    }
}

fn scales_equal(a: &SideScale, b: &SideScale) -> bool {
    match (a, b) {
        (SideScale::Rational(x), SideScale::Rational(y)) => x == y,
        (SideScale::LambdaPow(x), SideScale::LambdaPow(y)) => x == y,
        _ => false,
    }
}

/// Finds the cycle reached from every adjacent letter pair and groups the
/// pairs by cycle. Orbits are listed in order of first discovery. The
/// iteration must cycle within |alphabet|^2 steps (the pair space).
pub fn separating_orbits(ws: &WeightedSubstitution) -> Result<Vec<SeparatingOrbit>> {
    let pair_bound = ws.color_count() * ws.color_count() + 1;
    let mut orbits: Vec<SeparatingOrbit> = Vec::new();
    for a in ws.colors() {
        for i in 0..ws.rule_len(a).saturating_sub(1) {
            let rule = ws.rule(a);
            let mut pair = (rule[i].0, rule[i + 1].0);
            let mut path: Vec<(Color, Color)> = Vec::new();
            let (pre, cycle) = loop {
                if let Some(at) = path.iter().position(|&p| p == pair) {
                    break (path[..at].to_vec(), path[at..].to_vec());
                }
                if path.len() > pair_bound {
                    return Err(Error::Internal(
                        "pair descent failed to cycle within the pair-space bound".into(),
                    ));
                }
                path.push(pair);
                pair = (ws.sigma_last(pair.0), ws.sigma_first(pair.1));
            };
            let canon = lex_min_rotation(&cycle);
            if let Some(existing) = orbits.iter_mut().find(|o| o.cycle == canon) {
                existing.seeds.push((a, i));
                continue;
            }
            let (minus, plus) = side_scales(ws, &canon)?;
            let joint = joint_scale(&minus, &plus)?;
            orbits.push(SeparatingOrbit {
                seeds: vec![(a, i)],
                preperiod: pre,
                cycle: canon,
                balanced: scales_equal(&minus, &plus),
                lambda_minus: minus,
                lambda_plus: plus,
                joint_scale: joint,
            });
        }
    }
    Ok(orbits)
}
