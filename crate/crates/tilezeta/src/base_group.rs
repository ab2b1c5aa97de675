//! Multiplicative weight group of a substitution and the lattice/dense
//! dichotomy.
//!
//! The child graph has one node per color and one edge per rule letter.
//! Weight products around directed cycles generate a subgroup of the
//! positive reals; it is either a lattice lambda^Z or dense. For lattice
//! systems a per-color scaling function g with
//!
//! ```text
//! g(sigma(a)_i) / (g(a) * tau(a)_i)  in  lambda^Z   for every edge
//! ```
//!
//! exists; g is unique only up to per-color lattice powers and a global
//! constant, so callers must treat the exponents it induces, not the raw
//! values, as the invariant content.

use num::rational::BigRational;
use num::One;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rational::{format_rational, log_exact, prime_exponents, rational_pow};
use crate::substitution::{Color, Mode, WeightedSubstitution};
use crate::weight::{SymbolicPart, WeightValue};

/// A directed edge of the child graph: the letter `sigma(from)_index`,
/// pointing at the color it produces, carrying that letter's weight.
#[derive(Clone, Debug)]
pub struct ChildEdge {
    pub from: Color,
    pub index: usize,
    pub to: Color,
    pub weight: WeightValue,
}

/// One node per color, one edge per rule letter, in alphabet-then-index
/// order. Edge ids are positions in `edges`.
#[derive(Clone, Debug)]
pub struct ChildGraph {
    pub node_count: usize,
    pub edges: Vec<ChildEdge>,
}

impl ChildGraph {
    /// Edge ids leaving each node, in rule order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for (id, e) in self.edges.iter().enumerate() {
            adj[e.from.0].push(id);
        }
        adj
    }
}

/// Builds the child graph of a system.
pub fn child_graph(ws: &WeightedSubstitution) -> ChildGraph {
    let mut edges = Vec::new();
    for a in ws.colors() {
        for (i, (b, w)) in ws.rule(a).iter().enumerate() {
            edges.push(ChildEdge { from: a, index: i, to: *b, weight: w.clone() });
        }
    }
    ChildGraph { node_count: ws.color_count(), edges }
}

/// A node-simple directed cycle recorded as its edge list, with the weight
/// product around it. Parallel edges are distinct cycles.
#[derive(Clone, Debug)]
pub struct CycleGen {
    pub edges: Vec<ChildEdge>,
    pub weight: WeightValue,
}

#[derive(Clone, Debug)]
pub enum LatticeBase {
    /// Exact-mode lattice: base is a rational number > 1.
    Rational(BigRational),
    /// Natural-weight lattice: base is the Perron root.
    Perron(f64),
}

impl LatticeBase {
    pub fn to_f64(&self) -> f64 {
        match self {
            LatticeBase::Rational(r) => crate::rational::rational_to_f64(r),
            LatticeBase::Perron(l) => *l,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            LatticeBase::Rational(r) => format_rational(r),
            LatticeBase::Perron(l) => format!("{l} (Perron root)"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Classification {
    Dense,
    Lattice(LatticeBase),
}

#[derive(Clone, Debug)]
pub struct BaseGroupReport {
    pub generators: Vec<CycleGen>,
    pub classification: Classification,
}

const CYCLE_CAP: usize = 1_000_000;

/// Enumerates node-simple directed cycles of the child graph. Each cycle is
/// reported once, rooted at its smallest node; edges out of a node are
/// explored in rule order, so the listing is deterministic. Every closed
/// walk's weight factors into these, so they generate the full weight group.
pub fn cycle_generators(graph: &ChildGraph) -> Result<Vec<CycleGen>> {
    let k = graph.node_count;
    let adj = graph.adjacency();
    let mut out = Vec::new();
    for s in 0..k {
        // DFS restricted to nodes >= s; a cycle closes when an edge returns
        // to s.
        let mut path: Vec<(usize, usize)> = Vec::new(); // (node, next out slot)
        let mut edge_path: Vec<usize> = Vec::new();
        let mut on_path = vec![false; k];
        path.push((s, 0));
        on_path[s] = true;
        while let Some((node, ei)) = path.last().copied() {
            if ei >= adj[node].len() {
                path.pop();
                on_path[node] = false;
                edge_path.pop();
                continue;
            }
            path.last_mut().unwrap().1 += 1;
            let id = adj[node][ei];
            let to = graph.edges[id].to;
            if to.0 == s {
                let mut ids = edge_path.clone();
                ids.push(id);
                let mut w = graph.edges[ids[0]].weight.clone();
                for e in &ids[1..] {
                    w = w.compose(&graph.edges[*e].weight);
                }
                let edges = ids.iter().map(|&e| graph.edges[e].clone()).collect();
                out.push(CycleGen { edges, weight: w });
                if out.len() > CYCLE_CAP {
                    return Err(Error::CycleCap(format!(
                        "more than {CYCLE_CAP} simple cycles; raise the cap to proceed"
                    )));
                }
            } else if to.0 > s && !on_path[to.0] {
                edge_path.push(id);
                on_path[to.0] = true;
                path.push((to.0, 0));
            }
        }
    }
    Ok(out)
}

/// Classifies the group generated by the cycle weights. Natural-weight
/// systems are always lattice with the Perron root as base (cycle weights
/// telescope to pure powers of it); exact systems are lattice exactly when
/// the prime-exponent vectors of all generators are collinear.
pub fn base_group(ws: &WeightedSubstitution) -> Result<BaseGroupReport> {
    let generators = cycle_generators(&child_graph(ws))?;
    if generators.is_empty() {
        return Err(Error::Degenerate("child graph has no cycles".into()));
    }
    let classification = match ws.mode() {
        Mode::Algebraic(p) => {
            for g in &generators {
                let sym = g.weight.sym().ok_or_else(|| {
                    Error::Internal("algebraic cycle weight lost its symbolic tag".into())
                })?;
                if sym.xi_num != sym.xi_den {
                    return Err(Error::Internal(
                        "cycle weight did not telescope to a pure lattice power".into(),
                    ));
                }
            }
            Classification::Lattice(LatticeBase::Perron(p.lambda))
        }
        Mode::Exact => classify_exact(&generators)?,
    };
    Ok(BaseGroupReport { generators, classification })
}

fn classify_exact(generators: &[CycleGen]) -> Result<Classification> {
    let mut vectors: Vec<BTreeMap<u64, i64>> = Vec::with_capacity(generators.len());
    for g in generators {
        let r = g
            .weight
            .as_exact()
            .ok_or_else(|| Error::Internal("exact system produced a non-exact weight".into()))?;
        vectors.push(prime_exponents(r)?);
    }
    let Some(u) = vectors.iter().find(|v| !v.is_empty()) else {
        return Err(Error::Degenerate("all cycle weights equal 1".into()));
    };
    // collinearity: cross products of every vector against the reference
    for v in &vectors {
        for (p, &up) in u {
            for (q, &vq) in v {
                let uq = *u.get(q).unwrap_or(&0);
                let vp = *v.get(p).unwrap_or(&0);
                if (up as i128) * (vq as i128) != (uq as i128) * (vp as i128) {
                    return Ok(Classification::Dense);
                }
            }
        }
    }
    // primitive direction d = u / gcd, oriented so its value exceeds 1
    let mut g = 0i64;
    for &e in u.values() {
        g = gcd_i64(g, e);
    }
    let mut d: BTreeMap<u64, i64> = u.iter().map(|(&p, &e)| (p, e / g)).collect();
    if log_value_sign(&d) < 0 {
        for e in d.values_mut() {
            *e = -*e;
        }
    }
    // projections: v = c * d; group is d-value ^ gcd(c)
    let (&p0, &d0) = d.iter().find(|(_, &e)| e != 0).unwrap();
    let mut proj_gcd = 0i64;
    for v in &vectors {
        let c = v.get(&p0).unwrap_or(&0) / d0;
        proj_gcd = gcd_i64(proj_gcd, c);
    }
    debug_assert!(proj_gcd != 0);
    let base = rational_from_primes(&d);
    let lambda = rational_pow(&base, proj_gcd.abs());
    debug_assert!(lambda > BigRational::one());
    Ok(Classification::Lattice(LatticeBase::Rational(lambda)))
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

/// Sign of sum(e_p * ln p): positive iff the encoded rational exceeds 1.
fn log_value_sign(v: &BTreeMap<u64, i64>) -> i32 {
    let s: f64 = v.iter().map(|(&p, &e)| e as f64 * (p as f64).ln()).sum();
    // exponent vectors of rationals != 1 are bounded well away from 0
    if s > 0.0 {
        1
    } else if s < 0.0 {
        -1
    } else {
        0
    }
}

fn rational_from_primes(v: &BTreeMap<u64, i64>) -> BigRational {
    let mut r = BigRational::one();
    for (&p, &e) in v {
        let pr = BigRational::from_integer(num::BigInt::from(p));
        r *= rational_pow(&pr, e);
    }
    r
}

/// Per-color scaling function for lattice systems; identically 1 for dense
/// ones. Values are path weights along a breadth-first tree from color 0.
#[derive(Clone, Debug)]
pub struct GFunction {
    pub values: Vec<WeightValue>,
}

/// Computes g and verifies the defining identity on every edge of the child
/// graph. Requires a strongly connected (primitive) system so the tree
/// reaches every color.
pub fn g_function(ws: &WeightedSubstitution, report: &BaseGroupReport) -> Result<GFunction> {
    let k = ws.color_count();
    let one_at = |c: usize| match ws.mode() {
        Mode::Exact => WeightValue::Exact(BigRational::one()),
        Mode::Algebraic(_) => WeightValue::Algebraic {
            approx: 1.0,
            sym: SymbolicPart { xi_num: c, xi_den: c, lambda_exp: 0 },
        },
    };
    let base = match &report.classification {
        Classification::Dense => {
            return Ok(GFunction { values: (0..k).map(one_at).collect() });
        }
        Classification::Lattice(b) => b,
    };
    let mut values: Vec<Option<WeightValue>> = vec![None; k];
    values[0] = Some(one_at(0));
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(a) = queue.pop_front() {
        let ga = values[a].clone().unwrap();
        for (b, w) in ws.rule(Color(a)) {
            if values[b.0].is_none() {
                values[b.0] = Some(ga.compose(w));
                queue.push_back(b.0);
            }
        }
    }
    let values: Vec<WeightValue> = values
        .into_iter()
        .enumerate()
        .map(|(c, v)| {
            v.ok_or_else(|| {
                Error::NotPrimitive(format!(
                    "color {} unreachable from {}",
                    ws.color_name(Color(c)),
                    ws.color_name(Color(0))
                ))
            })
        })
        .collect::<Result<_>>()?;
    let g = GFunction { values };
    // verify on every edge, not just tree edges
    for a in ws.colors() {
        for i in 0..ws.rule_len(a) {
            edge_exponent(ws, &g, base, a, i)?;
        }
    }
    Ok(g)
}

/// The integer m with g(a) * tau(a)_i / g(sigma(a)_i) = lambda^(-m).
/// Exponents may be zero or negative; only membership in lambda^Z is
/// structural.
pub fn edge_exponent(
    ws: &WeightedSubstitution,
    g: &GFunction,
    base: &LatticeBase,
    a: Color,
    i: usize,
) -> Result<i64> {
    let (b, w) = &ws.rule(a)[i];
    match (&g.values[a.0], &g.values[b.0], base) {
        (WeightValue::Exact(ga), WeightValue::Exact(gb), LatticeBase::Rational(lam)) => {
            let ratio = ga * w.as_exact().unwrap() / gb;
            log_exact(&ratio, lam)
                .map(|e| -e)
                .ok_or_else(|| edge_err(ws, a, i))
        }
        (
            WeightValue::Algebraic { sym: sa, .. },
            WeightValue::Algebraic { sym: sb, .. },
            LatticeBase::Perron(_),
        ) => {
            let sw = w.sym().ok_or_else(|| edge_err(ws, a, i))?;
            // g(a) * w has tag (xi[b]/xi[0]) lambda^(ea + ew); dividing by
            // g(b) = (xi[b]/xi[0]) lambda^(eb) leaves a pure power
            if sa.xi_num != sw.xi_den || sw.xi_num != sb.xi_num || sa.xi_den != sb.xi_den {
                return Err(edge_err(ws, a, i));
            }
            Ok(sb.lambda_exp - sa.lambda_exp - sw.lambda_exp)
        }
        _ => Err(Error::Internal("mixed arithmetic modes in g-function".into())),
    }
}

fn edge_err(ws: &WeightedSubstitution, a: Color, i: usize) -> Error {
    Error::Internal(format!(
        "edge {} -> {} (letter {}) violates the lattice identity",
        ws.color_name(a),
        ws.color_name(ws.rule(a)[i].0),
        i
    ))
}
