//! Colored tilings of the upper half-plane.
//!
//! A tile is an open rectangle (x1, x2) x (y1, y2) whose width equals its
//! lower edge height (admissibility), and a colored tile carries an alphabet
//! color. The substitution refines a tile into children that sit in the
//! horizontal band directly below it, with widths proportional to the rule
//! weights; iterating in both directions yields a partition of the half-plane
//! in which every tile's lower edge satisfies condition (I): y1 lies in
//! g(color) times the weight group.
//!
//! Finite windows of such a partition are produced by [`expand_patch`] from a
//! phase specification: an anchor cycle in the child graph pinned at its
//! geometric fixed point, a pair of boundary cycles glued along a vertical
//! separating line, or a seeded random ancestor chain. Exact-mode systems get
//! exact rational geometry end to end.

use num::rational::BigRational;
use num::{BigUint, FromPrimitive, One, Signed, Zero};

use crate::base_group::{child_graph, ChildEdge, ChildGraph, Classification, GFunction, LatticeBase};
use crate::error::{Error, Result};
use crate::exec::par_map;
use crate::orbit::primitive_cycles;
use crate::rational::{log_exact, rational_to_f64};
use crate::substitution::{Color, Mode, WeightedSubstitution};
use crate::weight::Scalar;

/// Relative tolerance for float-mode geometry checks; exact mode compares
/// exactly.
pub const GEOMETRY_TOL: f64 = 1e-9;

/// Hard ceiling on tiles in one patch.
pub const TILE_CAP: usize = 2_000_000;

/// Open rectangle in the upper half-plane with the admissibility constraint
/// x2 - x1 = y1.
#[derive(Clone, Debug, PartialEq)]
pub struct Tile {
    pub x1: Scalar,
    pub x2: Scalar,
    pub y1: Scalar,
    pub y2: Scalar,
}

impl Tile {
    pub fn try_new(x1: Scalar, x2: Scalar, y1: Scalar, y2: Scalar) -> Result<Tile> {
        let t = Tile { x1, x2, y1, y2 };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<()> {
        if !self.x1.lt(&self.x2) {
            return Err(Error::Validation("tile has empty horizontal extent".into()));
        }
        let zero = self.y1.zero_like();
        // y1 == y2 is allowed: a weight-one edge collapses the band between
        // a cylinder and its mother to an empty strip that still subdivides
        if !zero.lt(&self.y1) || self.y2.lt(&self.y1) {
            return Err(Error::Validation(
                "tile vertical extent must satisfy 0 < y1 <= y2".into(),
            ));
        }
        if !self.width().close(&self.y1, GEOMETRY_TOL) {
            return Err(Error::Validation(
                "tile is not admissible: width differs from lower edge height".into(),
            ));
        }
        Ok(())
    }

    pub fn width(&self) -> Scalar {
        self.x2.sub(&self.x1)
    }

    /// Vertical size S(R) = y2 / y1.
    pub fn vertical_size(&self) -> f64 {
        self.y2.to_f64() / self.y1.to_f64()
    }

    /// Open-rectangle intersection with the window. Empty strips from
    /// weight-one edges meet nothing.
    pub fn meets(&self, w: &Window) -> bool {
        self.y1.lt(&self.y2)
            && self.x1.lt(&w.x1)
            && w.x0.lt(&self.x2)
            && self.y1.lt(&w.y1)
            && w.y0.lt(&self.y2)
    }

    /// Area of the intersection with the window (zero if disjoint).
    pub fn clipped_area(&self, w: &Window) -> Scalar {
        let lo_x = if self.x1.lt(&w.x0) { &w.x0 } else { &self.x1 };
        let hi_x = if w.x1.lt(&self.x2) { &w.x1 } else { &self.x2 };
        let lo_y = if self.y1.lt(&w.y0) { &w.y0 } else { &self.y1 };
        let hi_y = if w.y1.lt(&self.y2) { &w.y1 } else { &self.y2 };
        if !lo_x.lt(hi_x) || !lo_y.lt(hi_y) {
            return self.x1.zero_like();
        }
        hi_x.sub(lo_x).mul(&hi_y.sub(lo_y))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColoredTile {
    pub tile: Tile,
    pub color: Color,
}

/// Open query window (x0, x1) x (y0, y1), entirely above the real line.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub x0: Scalar,
    pub x1: Scalar,
    pub y0: Scalar,
    pub y1: Scalar,
}

impl Window {
    pub fn try_new(x0: Scalar, x1: Scalar, y0: Scalar, y1: Scalar) -> Result<Window> {
        if !x0.lt(&x1) {
            return Err(Error::Validation("window needs x0 < x1".into()));
        }
        let zero = y0.zero_like();
        if !zero.lt(&y0) || !y0.lt(&y1) {
            return Err(Error::Validation("window needs 0 < y0 < y1".into()));
        }
        Ok(Window { x0, x1, y0, y1 })
    }

    pub fn rational(x0: BigRational, x1: BigRational, y0: BigRational, y1: BigRational) -> Result<Window> {
        Window::try_new(Scalar::Rat(x0), Scalar::Rat(x1), Scalar::Rat(y0), Scalar::Rat(y1))
    }

    pub fn floats(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Window> {
        Window::try_new(Scalar::F64(x0), Scalar::F64(x1), Scalar::F64(y0), Scalar::F64(y1))
    }

    pub fn area(&self) -> Scalar {
        self.x1.sub(&self.x0).mul(&self.y1.sub(&self.y0))
    }

    /// Converts coordinates to the arithmetic mode of the target system.
    pub fn to_mode(&self, exact: bool) -> Result<Window> {
        let conv = |s: &Scalar| -> Result<Scalar> {
            match (s, exact) {
                (Scalar::Rat(_), true) | (Scalar::F64(_), false) => Ok(s.clone()),
                (Scalar::Rat(r), false) => Ok(Scalar::F64(rational_to_f64(r))),
                (Scalar::F64(x), true) => BigRational::from_float(*x)
                    .map(Scalar::Rat)
                    .ok_or_else(|| Error::Validation("window coordinate is not finite".into())),
            }
        };
        Window::try_new(conv(&self.x0)?, conv(&self.x1)?, conv(&self.y0)?, conv(&self.y1)?)
    }
}

/// Finite window of a tiling: the full (unclipped) tiles whose open
/// rectangles meet the open window, in canonical order (y1 descending, then
/// x1 ascending).
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub window: Window,
    pub tiles: Vec<ColoredTile>,
}

pub(crate) fn canonical_sort(tiles: &mut [ColoredTile]) {
    tiles.sort_by(|a, b| {
        b.tile
            .y1
            .cmp_total(&a.tile.y1)
            .then_with(|| a.tile.x1.cmp_total(&b.tile.x1))
            .then_with(|| a.color.0.cmp(&b.color.0))
    });
}

/// Renders a rule weight in the arithmetic of the surrounding geometry:
/// exact tiles of exact systems keep exact weights, float tiles (sampled
/// patches, natural-weight systems) take the float value.
fn weight_in_mode(exact_geometry: bool, wv: &crate::weight::WeightValue) -> Scalar {
    match (exact_geometry, wv.as_exact()) {
        (true, Some(r)) => Scalar::Rat(r.clone()),
        _ => Scalar::F64(wv.to_f64()),
    }
}

/// The children of an admissible colored tile: the i-th child occupies the
/// horizontal slice of width tau(a)_i * W in the band directly below the
/// mother, where W is the mother's width. Children abut exactly (each x2 is
/// reused as the next x1) and the last child ends at the mother's x2.
pub fn children(ct: &ColoredTile, ws: &WeightedSubstitution) -> Vec<ColoredTile> {
    let exact = matches!(ct.tile.x1, Scalar::Rat(_));
    let rule = ws.rule(ct.color);
    let w = ct.tile.width();
    let mut out = Vec::with_capacity(rule.len());
    let mut offset = ct.tile.x1.clone();
    for (i, (b, tau)) in rule.iter().enumerate() {
        let t = weight_in_mode(exact, tau);
        let x1 = offset.clone();
        let x2 = if i + 1 == rule.len() {
            ct.tile.x2.clone()
        } else {
            offset.add(&w.mul(&t))
        };
        out.push(ColoredTile {
            tile: Tile {
                x1,
                x2: x2.clone(),
                y1: ct.tile.y1.mul(&t),
                y2: ct.tile.y1.clone(),
            },
            color: *b,
        });
        offset = x2;
    }
    out
}

/// The i-th (left-to-right) tile of the k-fold refinement of `ct`, located
/// without expanding the other branches. Block sizes are word lengths of
/// sigma^(k-1), so its lower edge is tau^k(a)_i times the mother's.
pub fn descendant(
    ct: &ColoredTile,
    ws: &WeightedSubstitution,
    k: u32,
    index: u64,
) -> Result<ColoredTile> {
    let k = k as usize;
    let n = ws.color_count();
    // lengths[m][b] = |sigma^m(b)|
    let mut lengths: Vec<Vec<BigUint>> = vec![vec![BigUint::one(); n]];
    for m in 1..=k {
        let prev = &lengths[m - 1];
        let row: Vec<BigUint> = ws
            .colors()
            .map(|a| ws.rule(a).iter().map(|(b, _)| prev[b.0].clone()).sum())
            .collect();
        lengths.push(row);
    }
    let mut rem = BigUint::from_u64(index).expect("u64 fits");
    if rem >= lengths[k][ct.color.0] {
        return Err(Error::Validation(format!(
            "descendant index {index} out of range: |sigma^{k}({})| = {}",
            ws.color_name(ct.color),
            lengths[k][ct.color.0]
        )));
    }
    let mut cur = ct.clone();
    for level in (1..=k).rev() {
        let kids = children(&cur, ws);
        let mut acc = BigUint::zero();
        for (j, (b, _)) in ws.rule(cur.color).iter().enumerate() {
            let block = &lengths[level - 1][b.0];
            if &acc + block > rem {
                cur = kids[j].clone();
                rem -= acc;
                break;
            }
            acc += block;
        }
    }
    Ok(cur)
}

/// Where an expansion is anchored. `FixedPointCycle` pins a child-graph
/// cycle at its self-similar position; `SeparatingPair` glues a rightmost
/// chain left of a vertical line to a leftmost chain right of it; `Random`
/// draws the ancestor chain from the equilibrium reversal kernel.
#[derive(Clone, Debug, PartialEq)]
pub enum SeedKind {
    FixedPointCycle { cycle: Vec<usize>, descent: usize },
    SeparatingPair { left: Vec<usize>, right: Vec<usize> },
    Random { seed: u64 },
}

/// Seed kind plus the group action carrying it around: `translate` shifts
/// the whole tiling horizontally and `scale` dilates it about the origin, so
/// the expansion of a moved window from a moved phase reproduces the moved
/// patch. `scale` must lie in the weight group when that group is a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpec {
    pub kind: SeedKind,
    pub translate: BigRational,
    pub scale: BigRational,
}

impl PhaseSpec {
    pub fn new(kind: SeedKind) -> PhaseSpec {
        PhaseSpec { kind, translate: BigRational::zero(), scale: BigRational::one() }
    }

    pub fn fixed(cycle: Vec<usize>, descent: usize) -> PhaseSpec {
        PhaseSpec::new(SeedKind::FixedPointCycle { cycle, descent })
    }

    pub fn separating(left: Vec<usize>, right: Vec<usize>) -> PhaseSpec {
        PhaseSpec::new(SeedKind::SeparatingPair { left, right })
    }

    pub fn random(seed: u64) -> PhaseSpec {
        PhaseSpec::new(SeedKind::Random { seed })
    }

    pub fn translated(mut self, t: BigRational) -> PhaseSpec {
        self.translate += t;
        self
    }

    pub fn scaled(mut self, c: BigRational) -> PhaseSpec {
        self.translate *= &c;
        self.scale *= c;
        self
    }
}

/// The default anchor: the shortest interior cycle of the child graph (ties
/// broken by edge ids), searched up to length 6. Interior means neither all
/// first letters nor all last letters, so the fixed point grows to both
/// sides. Boundary-only graphs must use a separating pair instead.
pub fn default_interior_cycle(graph: &ChildGraph) -> Result<Vec<usize>> {
    let cycles = primitive_cycles(graph, 6)?;
    cycles
        .into_iter()
        .filter(|c| !c.pure_left(graph) && !c.pure_right(graph))
        .map(|c| c.edge_ids)
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
        .ok_or_else(|| {
            Error::Unsupported(
                "no interior anchor cycle of length <= 6; use a separating-pair phase".into(),
            )
        })
}

fn scalar_from_rational(exact: bool, r: &BigRational) -> Scalar {
    if exact {
        Scalar::Rat(r.clone())
    } else {
        Scalar::F64(rational_to_f64(r))
    }
}

fn validate_cycle_path(graph: &ChildGraph, cycle: &[usize], what: &str) -> Result<()> {
    if cycle.is_empty() {
        return Err(Error::Validation(format!("{what} cycle is empty")));
    }
    for &id in cycle {
        if id >= graph.edges.len() {
            return Err(Error::Validation(format!(
                "{what} cycle references edge {id}, but the child graph has {} edges",
                graph.edges.len()
            )));
        }
    }
    for j in 0..cycle.len() {
        let here = &graph.edges[cycle[j]];
        let next = &graph.edges[cycle[(j + 1) % cycle.len()]];
        if here.to != next.from {
            return Err(Error::Validation(format!(
                "{what} cycle breaks between edges {} and {}: child color does not match the next mother",
                cycle[j],
                cycle[(j + 1) % cycle.len()]
            )));
        }
    }
    Ok(())
}

fn cycle_scalar_weight(exact: bool, graph: &ChildGraph, cycle: &[usize]) -> Scalar {
    let mut acc = weight_in_mode(exact, &graph.edges[cycle[0]].weight);
    for &id in &cycle[1..] {
        acc = acc.mul(&weight_in_mode(exact, &graph.edges[id].weight));
    }
    acc
}

/// Partial weight sum of the rule of `e.from` before `e.index`.
fn partial_sum_before(exact: bool, ws: &WeightedSubstitution, e: &ChildEdge) -> Scalar {
    let rule = ws.rule(e.from);
    let mut s = weight_in_mode(exact, &rule[0].1).zero_like();
    for (_, tau) in &rule[..e.index] {
        s = s.add(&weight_in_mode(exact, tau));
    }
    s
}

pub(crate) const GROWTH_CAP: usize = 20_000;

/// Expands a finite window of the tiling selected by `phase`.
///
/// The anchor chain grows upward until the window is inside the anchor's
/// subtree, then the subtree is expanded down to the window's floor. Output
/// is deterministic for every phase kind (Random is deterministic in its
/// seed) and exact in Exact mode.
pub fn expand_patch(
    ws: &WeightedSubstitution,
    g: &GFunction,
    base: &Classification,
    window: &Window,
    phase: &PhaseSpec,
) -> Result<Patch> {
    let exact = matches!(ws.mode(), Mode::Exact);
    let window = window.to_mode(exact)?;
    if !phase.scale.is_positive() {
        return Err(Error::Validation("phase scale must be positive".into()));
    }
    match base {
        Classification::Lattice(LatticeBase::Rational(lam)) => {
            if log_exact(&phase.scale, lam).is_none() {
                return Err(Error::Validation(
                    "phase scale must be a power of the lattice base".into(),
                ));
            }
        }
        Classification::Lattice(LatticeBase::Perron(_)) => {
            if !phase.scale.is_one() {
                return Err(Error::Unsupported(
                    "phase scaling of a natural-weight lattice is not exactly representable"
                        .into(),
                ));
            }
        }
        Classification::Dense => {}
    }
    let translate = scalar_from_rational(exact, &phase.translate);
    let scale = scalar_from_rational(exact, &phase.scale);
    let mut tiles = match &phase.kind {
        SeedKind::Random { seed } => {
            if !phase.translate.is_zero() || !phase.scale.is_one() {
                return Err(Error::Unsupported(
                    "random phases do not take translate/scale transforms".into(),
                ));
            }
            return crate::sampler::sample_equilibrium(ws, &window, *seed);
        }
        SeedKind::FixedPointCycle { cycle, descent } => {
            expand_fixed(ws, g, &window, cycle, *descent, &translate, &scale)?
        }
        SeedKind::SeparatingPair { left, right } => {
            expand_separating(ws, g, &window, left, right, &translate, &scale)?
        }
    };
    canonical_sort(&mut tiles);
    Ok(Patch { window, tiles })
}

fn expand_fixed(
    ws: &WeightedSubstitution,
    g: &GFunction,
    window: &Window,
    cycle: &[usize],
    descent: usize,
    translate: &Scalar,
    scale: &Scalar,
) -> Result<Vec<ColoredTile>> {
    let exact = matches!(translate, Scalar::Rat(_));
    let graph = child_graph(ws);
    validate_cycle_path(&graph, cycle, "anchor")?;
    let p = cycle.len();
    if descent >= p {
        return Err(Error::Validation(format!(
            "descent index {descent} out of range for a cycle of length {p}"
        )));
    }
    let w = cycle_scalar_weight(exact, &graph, cycle);
    let one = w.div(&w);
    if !w.lt(&one) {
        return Err(Error::Validation(
            "anchor cycle does not contract (weight is not below 1); canonicalize the system first"
                .into(),
        ));
    }
    let pure_left = cycle.iter().all(|&id| graph.edges[id].index == 0);
    let pure_right = cycle
        .iter()
        .all(|&id| graph.edges[id].index + 1 == ws.rule_len(graph.edges[id].from));
    if pure_left && window.x0.lt(translate) {
        return Err(Error::WindowUnreachable(
            "anchor cycle descends along first letters only, so every tile lies right of the \
             anchor line; use an interior cycle or a separating pair"
                .into(),
        ));
    }
    if pure_right && translate.lt(&window.x1) {
        return Err(Error::WindowUnreachable(
            "anchor cycle descends along last letters only, so every tile lies left of the \
             anchor line; use an interior cycle or a separating pair"
                .into(),
        ));
    }
    // upward edge for step m is cycle[(descent - m) mod p]
    let up_edge = |m: usize| -> &ChildEdge { &graph.edges[cycle[(descent + p - (m % p)) % p]] };
    let a0 = up_edge(0).to;
    let w0 = weight_in_mode(exact, &g.values[a0.0]).mul(scale);
    // fixed point of the one-period upward affine map: x1 = x1/w + C
    let mut width = w0.clone();
    let mut c_sum = w0.zero_like();
    for m in 0..p {
        let f = up_edge(m);
        width = width.div(&weight_in_mode(exact, &f.weight));
        c_sum = c_sum.add(&width.mul(&partial_sum_before(exact, ws, f)));
    }
    let fp = c_sum.mul(&w).div(&w.sub(&one)); // = -C w / (1 - w) <= 0
    let x1_0 = translate.add(&fp);
    let mut cur = ColoredTile {
        tile: Tile {
            x1: x1_0.clone(),
            x2: x1_0.add(&w0),
            y1: w0.clone(),
            y2: w0.div(&weight_in_mode(exact, &up_edge(0).weight)),
        },
        color: a0,
    };
    for m in 0.. {
        let covered = cur.tile.x1.le(&window.x0)
            && window.x1.le(&cur.tile.x2)
            && window.y1.le(&cur.tile.y1);
        if covered {
            break;
        }
        if m >= GROWTH_CAP {
            return Err(Error::Internal(
                "anchor chain failed to cover the window within the growth cap".into(),
            ));
        }
        let f = up_edge(m);
        let mother_width = cur.tile.width().div(&weight_in_mode(exact, &f.weight));
        let x1 = cur.tile.x1.sub(&mother_width.mul(&partial_sum_before(exact, ws, f)));
        let next_tau = weight_in_mode(exact, &up_edge(m + 1).weight);
        cur = ColoredTile {
            tile: Tile {
                x1: x1.clone(),
                x2: x1.add(&mother_width),
                y1: mother_width.clone(),
                y2: mother_width.div(&next_tau),
            },
            color: f.from,
        };
    }
    descend_collect(ws, &cur, window)
}

fn expand_separating(
    ws: &WeightedSubstitution,
    g: &GFunction,
    window: &Window,
    left: &[usize],
    right: &[usize],
    translate: &Scalar,
    scale: &Scalar,
) -> Result<Vec<ColoredTile>> {
    let graph = child_graph(ws);
    validate_cycle_path(&graph, left, "left")?;
    validate_cycle_path(&graph, right, "right")?;
    for &id in left {
        let e = &graph.edges[id];
        if e.index + 1 != ws.rule_len(e.from) {
            return Err(Error::Validation(
                "left tower must descend along last letters so its tiles end at the separating \
                 line"
                    .into(),
            ));
        }
    }
    for &id in right {
        if graph.edges[id].index != 0 {
            return Err(Error::Validation(
                "right tower must descend along first letters so its tiles start at the \
                 separating line"
                    .into(),
            ));
        }
    }
    let exact = matches!(translate, Scalar::Rat(_));
    for (cycle, side) in [(left, "left"), (right, "right")] {
        let w = cycle_scalar_weight(exact, &graph, cycle);
        let one = w.div(&w);
        if !w.lt(&one) {
            return Err(Error::Validation(format!(
                "{side} tower cycle does not contract (weight is not below 1)"
            )));
        }
    }
    let mut tiles = Vec::new();
    if window.x0.lt(translate) {
        let anchor = grow_tower(g, window, &graph, left, translate, scale, true)?;
        tiles.extend(descend_collect(ws, &anchor, window)?);
    }
    if translate.lt(&window.x1) {
        let anchor = grow_tower(g, window, &graph, right, translate, scale, false)?;
        tiles.extend(descend_collect(ws, &anchor, window)?);
    }
    if tiles.len() > TILE_CAP {
        return Err(Error::FactorCap(format!("patch exceeds {TILE_CAP} tiles")));
    }
    Ok(tiles)
}

#[allow(clippy::too_many_arguments)]
fn grow_tower(
    g: &GFunction,
    window: &Window,
    graph: &ChildGraph,
    cycle: &[usize],
    axis: &Scalar,
    scale: &Scalar,
    left_side: bool,
) -> Result<ColoredTile> {
    let exact = matches!(axis, Scalar::Rat(_));
    let p = cycle.len();
    // upward edge for step m is cycle[p - 1 - (m mod p)]: the root is the
    // child end of the cycle's last edge
    let up_edge = |m: usize| -> &ChildEdge { &graph.edges[cycle[p - 1 - (m % p)]] };
    let a0 = graph.edges[cycle[0]].from;
    let w0 = weight_in_mode(exact, &g.values[a0.0]).mul(scale);
    let tile_at = |width: &Scalar, y2: Scalar| -> Tile {
        if left_side {
            Tile { x1: axis.sub(width), x2: axis.clone(), y1: width.clone(), y2 }
        } else {
            Tile { x1: axis.clone(), x2: axis.add(width), y1: width.clone(), y2 }
        }
    };
    let mut cur = ColoredTile {
        tile: tile_at(&w0, w0.div(&weight_in_mode(exact, &up_edge(0).weight))),
        color: a0,
    };
    for m in 0.. {
        let x_done = if left_side {
            cur.tile.x1.le(&window.x0)
        } else {
            window.x1.le(&cur.tile.x2)
        };
        if x_done && window.y1.le(&cur.tile.y1) {
            break;
        }
        if m >= GROWTH_CAP {
            return Err(Error::Internal(
                "tower failed to cover the window within the growth cap".into(),
            ));
        }
        let f = up_edge(m);
        let mother_width = cur.tile.width().div(&weight_in_mode(exact, &f.weight));
        let next_tau = weight_in_mode(exact, &up_edge(m + 1).weight);
        cur = ColoredTile {
            tile: tile_at(&mother_width, mother_width.div(&next_tau)),
            color: f.from,
        };
    }
    Ok(cur)
}

/// Collects every tile of the anchor's subtree (anchor included) whose open
/// rectangle meets the window. Top-level child subtrees are expanded in
/// parallel and merged in rule order; within a subtree the walk is an
/// explicit stack, so deep descents cannot overflow the call stack.
pub(crate) fn descend_collect(
    ws: &WeightedSubstitution,
    anchor: &ColoredTile,
    window: &Window,
) -> Result<Vec<ColoredTile>> {
    let mut out = Vec::new();
    if anchor.tile.meets(window) {
        out.push(anchor.clone());
    }
    if !window.y0.lt(&anchor.tile.y1) {
        return Ok(out);
    }
    let top: Vec<ColoredTile> = children(anchor, ws)
        .into_iter()
        .filter(|c| x_overlaps(&c.tile, window))
        .collect();
    let shards = par_map(top, |kid| -> Result<Vec<ColoredTile>> {
        let mut acc = Vec::new();
        let mut stack = vec![kid];
        while let Some(ct) = stack.pop() {
            if ct.tile.meets(window) {
                acc.push(ct.clone());
                if acc.len() > TILE_CAP {
                    return Err(Error::FactorCap(format!(
                        "patch exceeds {TILE_CAP} tiles; shrink the window"
                    )));
                }
            }
            if window.y0.lt(&ct.tile.y1) {
                for kid in children(&ct, ws) {
                    if x_overlaps(&kid.tile, window) {
                        stack.push(kid);
                    }
                }
            }
        }
        Ok(acc)
    });
    for shard in shards {
        out.extend(shard?);
    }
    if out.len() > TILE_CAP {
        return Err(Error::FactorCap(format!("patch exceeds {TILE_CAP} tiles")));
    }
    Ok(out)
}

fn x_overlaps(t: &Tile, w: &Window) -> bool {
    t.x1.lt(&w.x1) && w.x0.lt(&t.x2)
}

/// Checks every patch invariant: per-tile admissibility, pairwise
/// disjointness, exact window coverage by clipped areas, and condition (I)
/// against the g-function and base group. Exact-mode patches are checked
/// with exact arithmetic.
pub fn verify_patch(
    ws: &WeightedSubstitution,
    g: &GFunction,
    base: &Classification,
    patch: &Patch,
) -> Result<()> {
    verify_patch_inner(ws, g, base, patch, false)
}

/// `allow_common_phase` relaxes condition (I) to hold modulo one shared
/// vertical dilation, the form sampled equilibrium patches satisfy.
pub(crate) fn verify_patch_inner(
    ws: &WeightedSubstitution,
    g: &GFunction,
    base: &Classification,
    patch: &Patch,
    allow_common_phase: bool,
) -> Result<()> {
    for ct in &patch.tiles {
        ct.tile.check()?;
        if ct.color.0 >= ws.color_count() {
            return Err(Error::Internal(format!(
                "patch tile colored {} but the alphabet has {} colors",
                ct.color.0,
                ws.color_count()
            )));
        }
    }
    // pairwise disjointness: sweep by x1, compare against tiles whose
    // x-interval is still open
    let mut order: Vec<usize> = (0..patch.tiles.len()).collect();
    order.sort_by(|&a, &b| patch.tiles[a].tile.x1.cmp_total(&patch.tiles[b].tile.x1));
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let ti = &patch.tiles[i].tile;
        active.retain(|&j| ti.x1.lt(&patch.tiles[j].tile.x2));
        for &j in &active {
            let tj = &patch.tiles[j].tile;
            // strict-beyond-tolerance: algebraic weights place abutting bands
            // an ulp apart depending on multiplication order, and such hairline
            // gaps or laps are boundary contact, not overlap
            let below = |a: &Scalar, b: &Scalar| a.lt(b) && !a.close(b, GEOMETRY_TOL);
            if below(&ti.y1, &tj.y2) && below(&tj.y1, &ti.y2) {
                return Err(Error::Internal(format!(
                    "tiles {i} and {j} overlap as open rectangles"
                )));
            }
        }
        active.push(i);
    }
    // coverage: clipped areas sum to the window area
    let mut covered = patch.window.area().zero_like();
    for ct in &patch.tiles {
        covered = covered.add(&ct.tile.clipped_area(&patch.window));
    }
    if !covered.close(&patch.window.area(), GEOMETRY_TOL) {
        return Err(Error::Internal(format!(
            "clipped tile areas cover {} of window area {}",
            covered.to_f64(),
            patch.window.area().to_f64()
        )));
    }
    // condition (I)
    match base {
        Classification::Dense => {}
        Classification::Lattice(LatticeBase::Rational(lam)) => {
            let mut reference: Option<BigRational> = None;
            let mut float_reference: Option<f64> = None;
            for ct in &patch.tiles {
                let y1 = match &ct.tile.y1 {
                    Scalar::Rat(r) => r.clone(),
                    // sampled patches carry a real-valued vertical phase, so
                    // the lattice check runs in logs relative to it
                    Scalar::F64(y) => {
                        check_log_lattice(
                            *y / g.values[ct.color.0].to_f64(),
                            rational_to_f64(lam),
                            allow_common_phase,
                            &mut float_reference,
                        )?;
                        continue;
                    }
                };
                let gv = g.values[ct.color.0]
                    .as_exact()
                    .ok_or_else(|| Error::Internal("exact system without exact g".into()))?;
                let mut ratio = y1 / gv;
                if allow_common_phase {
                    match &reference {
                        None => {
                            reference = Some(ratio.clone());
                            continue;
                        }
                        Some(r) => ratio /= r,
                    }
                }
                if log_exact(&ratio, lam).is_none() {
                    return Err(Error::Internal(format!(
                        "condition (I) violated: y1/g = {} is not a power of {}",
                        crate::rational::format_rational(&ratio),
                        crate::rational::format_rational(lam)
                    )));
                }
            }
        }
        Classification::Lattice(LatticeBase::Perron(lam)) => {
            let mut reference: Option<f64> = None;
            for ct in &patch.tiles {
                check_log_lattice(
                    ct.tile.y1.to_f64() / g.values[ct.color.0].to_f64(),
                    *lam,
                    allow_common_phase,
                    &mut reference,
                )?;
            }
        }
    }
    Ok(())
}

fn check_log_lattice(
    ratio: f64,
    lam: f64,
    allow_common_phase: bool,
    reference: &mut Option<f64>,
) -> Result<()> {
    let u = ratio.ln() / lam.ln();
    let u = match (allow_common_phase, &reference) {
        (true, None) => {
            *reference = Some(u);
            return Ok(());
        }
        (true, Some(r)) => u - *r,
        (false, _) => u,
    };
    if (u - u.round()).abs() > GEOMETRY_TOL {
        return Err(Error::Internal(format!(
            "condition (I) violated: log-lattice coordinate {u} is not an integer"
        )));
    }
    Ok(())
}

/// Horizontal translation of a patch (window and tiles).
pub fn translate_patch(patch: &Patch, t: &Scalar) -> Patch {
    let mv = |tile: &Tile| Tile {
        x1: tile.x1.add(t),
        x2: tile.x2.add(t),
        y1: tile.y1.clone(),
        y2: tile.y2.clone(),
    };
    Patch {
        window: Window {
            x0: patch.window.x0.add(t),
            x1: patch.window.x1.add(t),
            y0: patch.window.y0.clone(),
            y1: patch.window.y1.clone(),
        },
        tiles: patch
            .tiles
            .iter()
            .map(|ct| ColoredTile { tile: mv(&ct.tile), color: ct.color })
            .collect(),
    }
}

/// Dilation of a patch about the origin by a positive factor.
pub fn scale_patch(patch: &Patch, c: &Scalar) -> Patch {
    let mv = |tile: &Tile| Tile {
        x1: tile.x1.mul(c),
        x2: tile.x2.mul(c),
        y1: tile.y1.mul(c),
        y2: tile.y2.mul(c),
    };
    Patch {
        window: Window {
            x0: patch.window.x0.mul(c),
            x1: patch.window.x1.mul(c),
            y0: patch.window.y0.mul(c),
            y1: patch.window.y1.mul(c),
        },
        tiles: patch
            .tiles
            .iter()
            .map(|ct| ColoredTile { tile: mv(&ct.tile), color: ct.color })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_group::base_group;
    use crate::rational::big_rational;
    use crate::substitution::natural_weights;
    use crate::weight::WeightValue;

    fn exact(n: i64, d: i64) -> WeightValue {
        WeightValue::Exact(big_rational(n, d))
    }

    fn rat(n: i64, d: i64) -> Scalar {
        Scalar::Rat(big_rational(n, d))
    }

    fn doubling() -> WeightedSubstitution {
        WeightedSubstitution::try_new(
            vec!["1".into()],
            vec![vec![(Color(0), exact(1, 2)), (Color(0), exact(1, 2))]],
            Mode::Exact,
        )
        .unwrap()
    }

    fn mirror() -> WeightedSubstitution {
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

    fn thue_morse() -> WeightedSubstitution {
        WeightedSubstitution::try_new(
            vec!["1".into(), "2".into()],
            vec![
                vec![(Color(0), exact(1, 2)), (Color(1), exact(1, 2))],
                vec![(Color(1), exact(1, 2)), (Color(0), exact(1, 2))],
            ],
            Mode::Exact,
        )
        .unwrap()
    }

    fn setting(ws: &WeightedSubstitution) -> (GFunction, Classification) {
        let report = base_group(ws).unwrap();
        let g = crate::base_group::g_function(ws, &report).unwrap();
        (g, report.classification)
    }

    fn tile(x1: Scalar, x2: Scalar, y1: Scalar, y2: Scalar) -> Tile {
        Tile::try_new(x1, x2, y1, y2).unwrap()
    }

    #[test]
    fn doubling_children_halve_the_unit_square() {
        let ws = doubling();
        let mother = ColoredTile {
            tile: tile(rat(0, 1), rat(1, 1), rat(1, 1), rat(2, 1)),
            color: Color(0),
        };
        let kids = children(&mother, &ws);
        assert_eq!(kids.len(), 2);
        assert_eq!(kids[0].tile, tile(rat(0, 1), rat(1, 2), rat(1, 2), rat(1, 1)));
        assert_eq!(kids[1].tile, tile(rat(1, 2), rat(1, 1), rat(1, 2), rat(1, 1)));
    }

    #[test]
    fn mirror_children_split_four_one_four() {
        let ws = mirror();
        let mother = ColoredTile {
            tile: tile(rat(0, 1), rat(9, 1), rat(9, 1), rat(81, 1)),
            color: Color(0),
        };
        let kids = children(&mother, &ws);
        assert_eq!(kids.len(), 3);
        assert_eq!(kids[0].tile, tile(rat(0, 1), rat(4, 1), rat(4, 1), rat(9, 1)));
        assert_eq!(kids[0].color, Color(0));
        assert_eq!(kids[1].tile, tile(rat(4, 1), rat(5, 1), rat(1, 1), rat(9, 1)));
        assert_eq!(kids[1].color, Color(1));
        assert_eq!(kids[2].tile, tile(rat(5, 1), rat(9, 1), rat(4, 1), rat(9, 1)));
        assert_eq!(kids[2].color, Color(0));
    }

    #[test]
    fn descendant_matches_iterated_children_and_weights() {
        let ws = mirror();
        let mother = ColoredTile {
            tile: tile(rat(0, 1), rat(81, 1), rat(81, 1), rat(729, 1)),
            color: Color(0),
        };
        // two-step refinement, fifth tile: weight 1/81 of the mother edge
        let d = descendant(&mother, &ws, 2, 4).unwrap();
        assert_eq!(d.color, Color(0));
        assert_eq!(d.tile.y1, rat(1, 1));
        // spot-check against the brute-force expansion
        let mut level2 = Vec::new();
        for kid in children(&mother, &ws) {
            level2.extend(children(&kid, &ws));
        }
        assert_eq!(descendant(&mother, &ws, 2, 7).unwrap(), level2[7]);
        assert_eq!(descendant(&mother, &ws, 0, 0).unwrap(), mother);
        assert!(descendant(&mother, &ws, 2, 9).is_err());
    }

    #[test]
    fn default_anchor_cycles_are_shortest_interior() {
        assert_eq!(default_interior_cycle(&child_graph(&doubling())).unwrap(), vec![0, 1]);
        assert_eq!(default_interior_cycle(&child_graph(&mirror())).unwrap(), vec![0, 2]);
        assert_eq!(default_interior_cycle(&child_graph(&thue_morse())).unwrap(), vec![0, 1, 3]);
    }

    #[test]
    fn doubling_fixed_point_sits_at_minus_two_thirds() {
        let ws = doubling();
        let (g, base) = setting(&ws);
        let window = Window::rational(
            big_rational(-1, 1),
            big_rational(1, 1),
            big_rational(1, 2),
            big_rational(3, 2),
        )
        .unwrap();
        let phase = PhaseSpec::fixed(vec![0, 1], 0);
        let patch = expand_patch(&ws, &g, &base, &window, &phase).unwrap();
        verify_patch(&ws, &g, &base, &patch).unwrap();
        let root = tile(rat(-2, 3), rat(1, 3), rat(1, 1), rat(2, 1));
        assert!(patch.tiles.iter().any(|ct| ct.tile == root));
    }

    #[test]
    fn separating_pair_reproduces_the_square_pattern() {
        let ws = doubling();
        let (g, base) = setting(&ws);
        let window = Window::rational(
            big_rational(-2, 1),
            big_rational(2, 1),
            big_rational(1, 4),
            big_rational(4, 1),
        )
        .unwrap();
        let phase = PhaseSpec::separating(vec![1], vec![0]);
        let patch = expand_patch(&ws, &g, &base, &window, &phase).unwrap();
        verify_patch(&ws, &g, &base, &patch).unwrap();
        // bands y1 = 2, 1, 1/2, 1/4 holding 2, 4, 8, 16 unit-ratio squares
        assert_eq!(patch.tiles.len(), 30);
        for ct in &patch.tiles {
            assert_eq!(ct.tile.width(), ct.tile.y2.sub(&ct.tile.y1), "square tiles");
            assert_eq!(ct.tile.y2, ct.tile.y1.add(&ct.tile.y1), "vertical size 2");
        }
        // no tile crosses the separating line
        let zero = rat(0, 1);
        for ct in &patch.tiles {
            assert!(!(ct.tile.x1.lt(&zero) && zero.lt(&ct.tile.x2)));
        }
    }

    #[test]
    fn boundary_cycle_cannot_reach_the_other_side() {
        let ws = doubling();
        let (g, base) = setting(&ws);
        let window = Window::rational(
            big_rational(-1, 1),
            big_rational(1, 1),
            big_rational(1, 1),
            big_rational(2, 1),
        )
        .unwrap();
        let phase = PhaseSpec::fixed(vec![0], 0); // pure leftmost self-loop
        match expand_patch(&ws, &g, &base, &window, &phase) {
            Err(Error::WindowUnreachable(_)) => {}
            other => panic!("expected WindowUnreachable, got {other:?}"),
        }
        // the same phase works when the window stays right of the anchor line
        let right = Window::rational(
            big_rational(0, 1),
            big_rational(1, 1),
            big_rational(1, 1),
            big_rational(2, 1),
        )
        .unwrap();
        let patch = expand_patch(&ws, &g, &base, &right, &phase).unwrap();
        verify_patch(&ws, &g, &base, &patch).unwrap();
    }

    #[test]
    fn expansion_commutes_with_translation_and_dilation() {
        let ws = doubling();
        let (g, base) = setting(&ws);
        let window = Window::rational(
            big_rational(-2, 1),
            big_rational(2, 1),
            big_rational(1, 4),
            big_rational(4, 1),
        )
        .unwrap();
        let phase = PhaseSpec::separating(vec![1], vec![0]);
        let base_patch = expand_patch(&ws, &g, &base, &window, &phase).unwrap();
        for t in [big_rational(1, 3), big_rational(-1, 3), big_rational(2, 1), big_rational(-2, 1)]
        {
            let moved_window = Window {
                x0: window.x0.add(&Scalar::Rat(t.clone())),
                x1: window.x1.add(&Scalar::Rat(t.clone())),
                y0: window.y0.clone(),
                y1: window.y1.clone(),
            };
            let moved = expand_patch(
                &ws,
                &g,
                &base,
                &moved_window,
                &phase.clone().translated(t.clone()),
            )
            .unwrap();
            assert_eq!(moved, translate_patch(&base_patch, &Scalar::Rat(t)));
        }
        let lam = big_rational(2, 1);
        let scaled_window = {
            let c = Scalar::Rat(lam.clone());
            Window {
                x0: window.x0.mul(&c),
                x1: window.x1.mul(&c),
                y0: window.y0.mul(&c),
                y1: window.y1.mul(&c),
            }
        };
        let scaled = expand_patch(
            &ws,
            &g,
            &base,
            &scaled_window,
            &phase.clone().scaled(lam.clone()),
        )
        .unwrap();
        assert_eq!(scaled, scale_patch(&base_patch, &Scalar::Rat(lam)));
    }

    #[test]
    fn fixed_point_expansion_commutes_with_the_actions_too() {
        let ws = thue_morse();
        let (g, base) = setting(&ws);
        let window = Window::rational(
            big_rational(-3, 2),
            big_rational(3, 2),
            big_rational(1, 4),
            big_rational(2, 1),
        )
        .unwrap();
        let phase = PhaseSpec::fixed(vec![0, 1, 3], 0);
        let p0 = expand_patch(&ws, &g, &base, &window, &phase).unwrap();
        verify_patch(&ws, &g, &base, &p0).unwrap();
        let t = big_rational(-1, 3);
        let moved_window = Window {
            x0: window.x0.add(&Scalar::Rat(t.clone())),
            x1: window.x1.add(&Scalar::Rat(t.clone())),
            y0: window.y0.clone(),
            y1: window.y1.clone(),
        };
        let moved =
            expand_patch(&ws, &g, &base, &moved_window, &phase.clone().translated(t.clone()))
                .unwrap();
        assert_eq!(moved, translate_patch(&p0, &Scalar::Rat(t)));
    }

    #[test]
    fn dense_system_patches_verify_without_lattice_checks() {
        let ws = mirror();
        let (g, base) = setting(&ws);
        assert!(matches!(base, Classification::Dense));
        let window = Window::rational(
            big_rational(-3, 1),
            big_rational(3, 1),
            big_rational(1, 2),
            big_rational(10, 1),
        )
        .unwrap();
        let phase = PhaseSpec::fixed(vec![0, 2], 0);
        let patch = expand_patch(&ws, &g, &base, &window, &phase).unwrap();
        verify_patch(&ws, &g, &base, &patch).unwrap();
        assert!(!patch.tiles.is_empty());
        // vertical sizes all come from the rule weights: y2/y1 in {9/4, 9}
        for ct in &patch.tiles {
            let s = ct.tile.y2.div(&ct.tile.y1);
            assert!(s == rat(9, 4) || s == rat(9, 1), "unexpected vertical size");
        }
    }

    #[test]
    fn natural_weight_lattice_satisfies_condition_one_in_floats() {
        let ws = natural_weights(
            vec!["1".into(), "2".into()],
            vec![vec![Color(0), Color(1)], vec![Color(0)]],
        )
        .unwrap();
        let (g, base) = setting(&ws);
        assert!(matches!(base, Classification::Lattice(LatticeBase::Perron(_))));
        let window = Window::floats(-2.0, 2.0, 0.3, 2.0).unwrap();
        let graph = child_graph(&ws);
        let cycle = default_interior_cycle(&graph).unwrap();
        let phase = PhaseSpec::fixed(cycle, 0);
        let patch = expand_patch(&ws, &g, &base, &window, &phase).unwrap();
        verify_patch(&ws, &g, &base, &patch).unwrap();
        assert!(!patch.tiles.is_empty());
    }

    #[test]
    fn verify_rejects_tampered_patches() {
        let ws = doubling();
        let (g, base) = setting(&ws);
        let window = Window::rational(
            big_rational(-1, 1),
            big_rational(1, 1),
            big_rational(1, 2),
            big_rational(2, 1),
        )
        .unwrap();
        let phase = PhaseSpec::separating(vec![1], vec![0]);
        let patch = expand_patch(&ws, &g, &base, &window, &phase).unwrap();
        // dropping a tile breaks coverage
        let mut missing = patch.clone();
        missing.tiles.pop();
        assert!(verify_patch(&ws, &g, &base, &missing).is_err());
        // shifting a tile breaks disjointness
        let mut shifted = patch.clone();
        let t = &mut shifted.tiles[0].tile;
        t.x1 = t.x1.sub(&rat(1, 8));
        t.x2 = t.x2.sub(&rat(1, 8));
        assert!(verify_patch(&ws, &g, &base, &shifted).is_err());
        // moving a tile off the lattice breaks condition (I)
        let mut off = patch;
        let t = &mut off.tiles[0].tile;
        t.y1 = t.y1.mul(&rat(3, 1));
        t.x2 = t.x1.add(&t.y1);
        t.y2 = t.y1.mul(&rat(4, 1));
        assert!(verify_patch(&ws, &g, &base, &off).is_err());
    }

    #[test]
    fn scale_must_stay_in_the_lattice() {
        let ws = doubling();
        let (g, base) = setting(&ws);
        let window = Window::rational(
            big_rational(0, 1),
            big_rational(1, 1),
            big_rational(1, 1),
            big_rational(2, 1),
        )
        .unwrap();
        let phase = PhaseSpec::separating(vec![1], vec![0]).scaled(big_rational(3, 1));
        match expand_patch(&ws, &g, &base, &window, &phase) {
            Err(Error::Validation(m)) => assert!(m.contains("power of the lattice base")),
            other => panic!("expected Validation, got {other:?}"),
        }
    }
}
