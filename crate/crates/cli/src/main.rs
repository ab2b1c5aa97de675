//! Command-line front end. Every subcommand reads a system file (or a
//! solenoid element from the argument list), calls into the library, and
//! prints a text report or JSON document. Output is byte-identical for
//! identical (input, flags, seed).

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::complex::Complex64;
use num::rational::BigRational;
use num::{BigInt, Zero};
use serde_json::{json, Value};

use tilezeta::base_group::{base_group, child_graph, g_function, ChildGraph, Classification};
use tilezeta::io::{parse_system, patch_to_json, system_to_json};
use tilezeta::orbit::{separating_orbits, system_cycles};
use tilezeta::rational::parse_rational;
use tilezeta::render::{render_svg, YScale};
use tilezeta::solenoid::{add, embed_dyadic, negate, scale_pow2, to_tiling, DyadicElement};
use tilezeta::substitution::{natural_weights, Color, Mode, WeightedSubstitution};
use tilezeta::tiling::{default_interior_cycle, expand_patch, PhaseSpec, Window};
use tilezeta::weight::WeightValue;
use tilezeta::zeta::{find_real_poles, zeta_eval, zeta_euler_oracle, zeta_rational};
use tilezeta::{Error, Result};

/// Weighted-substitution numeration systems: validation, natural weights,
/// base-group classification, half-plane tilings, closed-orbit zeta
/// functions, and binary-solenoid arithmetic.
#[derive(Parser)]
#[command(name = "tilezeta", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Report format for analysis commands.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for sampled phases.
    #[arg(long, global = true, default_value_t = 0xC0FFEE)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a system file and report its shape.
    Validate { input: PathBuf },
    /// Derive the natural weights of the letter substitution in a file.
    NaturalWeights { input: PathBuf },
    /// Rewrite a system in canonical form (system JSON out).
    Canonicalize { input: PathBuf },
    /// Table of sigma^n applied to one color, with accumulated weights.
    Iterate {
        input: PathBuf,
        /// Color to iterate from.
        #[arg(long, allow_hyphen_values = true)]
        color: String,
        /// Number of substitution rounds.
        #[arg(long)]
        n: u32,
    },
    /// Child graph, weight-group generators, and lattice/dense closure.
    BaseGroup { input: PathBuf },
    /// The per-color scaling function g used by condition (I).
    GFunction { input: PathBuf },
    /// Expand a window of the tiling and emit SVG or patch JSON.
    Tile(TileArgs),
    /// Count primitive cycles of the child graph by length.
    Orbits {
        input: PathBuf,
        /// Longest cycle length to enumerate.
        #[arg(long, default_value_t = 8)]
        max_len: usize,
    },
    /// Separating-line orbits with side scales and joint scale c.
    Separating { input: PathBuf },
    /// Dynamical zeta function of the closed-orbit structure.
    #[command(subcommand)]
    Zeta(ZetaCmd),
    /// Binary solenoid arithmetic on digit strings.
    #[command(subcommand)]
    Solenoid(SolenoidCmd),
}

#[derive(Args)]
struct TileArgs {
    input: PathBuf,
    /// Window as x0,x1,y0,y1 (integers, fractions p/q, or decimals).
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    /// Anchor kind for the expansion.
    #[arg(long, value_enum, default_value_t = PhaseKind::Fixed)]
    phase: PhaseKind,
    /// Output form.
    #[arg(long, value_enum, default_value_t = TileOut::Svg)]
    out: TileOut,
    /// Vertical axis mapping for SVG output.
    #[arg(long, value_enum, default_value_t = ScaleArg::Linear)]
    scale: ScaleArg,
    /// Fixed phase: anchor cycle as comma-separated child-graph edge ids
    /// (default: shortest interior cycle).
    #[arg(long, value_delimiter = ',')]
    cycle: Option<Vec<usize>>,
    /// Fixed phase: cycle position whose fixed point anchors the patch.
    #[arg(long, default_value_t = 0)]
    descent: usize,
    /// Separating phase: left-column cycle (edge ids; default: the
    /// last-letter cycle of the first wide rule).
    #[arg(long, value_delimiter = ',')]
    left: Option<Vec<usize>>,
    /// Separating phase: right-column cycle (default: first-letter cycle).
    #[arg(long, value_delimiter = ',')]
    right: Option<Vec<usize>>,
    /// Shift the whole tiling right by this rational.
    #[arg(long, allow_hyphen_values = true)]
    translate: Option<String>,
    /// Dilate the whole tiling about the origin by this rational (must be
    /// a power of the base in lattice mode).
    #[arg(long)]
    dilate: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PhaseKind {
    Fixed,
    Separating,
    Sample,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TileOut {
    Svg,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScaleArg {
    Linear,
    Logy,
}

#[derive(Subcommand)]
enum ZetaCmd {
    /// Evaluate the determinant formula at complex alpha.
    Eval {
        input: PathBuf,
        /// Evaluation point as RE or RE,IM.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
    /// Exact rational form in z = base^-alpha (lattice systems only).
    Rational { input: PathBuf },
    /// Real poles inside an open interval, with multiplicities.
    Poles {
        input: PathBuf,
        /// Interval as lo,hi.
        #[arg(long, allow_hyphen_values = true)]
        interval: String,
    },
    /// Brute-force Euler product with a certified tail bound.
    Oracle {
        input: PathBuf,
        /// Evaluation point as RE or RE,IM; needs RE > 1.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Longest primitive cycle entering the product.
        #[arg(long, default_value_t = 14)]
        max_len: usize,
    },
}

#[derive(Subcommand)]
enum SolenoidCmd {
    /// Add two elements.
    Add { x: String, y: String },
    /// Additive inverse of an element.
    Negate { x: String },
    /// Multiply an element by 2^k.
    Scale {
        x: String,
        #[arg(allow_hyphen_values = true)]
        k: i64,
    },
    /// Embed a dyadic rational p/q as an element.
    Embed {
        #[arg(allow_hyphen_values = true)]
        r: String,
    },
    /// Render the axis-column tiling of an element.
    Tile {
        x: String,
        /// Scale octaves on each side of 2^0.
        #[arg(long, default_value_t = 6)]
        depth: u32,
        #[arg(long, value_enum, default_value_t = TileOut::Json)]
        out: TileOut,
        #[arg(long, value_enum, default_value_t = ScaleArg::Logy)]
        scale: ScaleArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => match write_out(cli.output.as_deref(), &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_class(&e))
        }
    }
}

/// 1 = the input is at fault, 2 = the request does not fit the input,
/// 3 = a library self-check failed.
fn exit_class(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Validation(_) => 1,
        Error::Internal(_) => 3,
        _ => 2,
    }
}

fn write_out(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn load(path: &Path) -> Result<WeightedSubstitution> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_system(&text)
}

/// Accepts "p/q", integers, and decimal literals, all exactly.
fn parse_coord(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Some((int, frac)) = t.split_once('.') {
        let digits_ok = !frac.is_empty() && frac.bytes().all(|b| b.is_ascii_digit());
        if !digits_ok {
            return Err(Error::Parse(format!("invalid decimal {t:?}")));
        }
        let neg = int.starts_with('-');
        let int = int.trim_start_matches(['-', '+']);
        let whole: BigInt = if int.is_empty() {
            BigInt::zero()
        } else {
            int.parse()
                .map_err(|_| Error::Parse(format!("invalid decimal {t:?}")))?
        };
        let num: BigInt = frac
            .parse()
            .map_err(|_| Error::Parse(format!("invalid decimal {t:?}")))?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = BigRational::from_integer(whole) + BigRational::new(num, den);
        return Ok(if neg { -mag } else { mag });
    }
    parse_rational(t)
}

fn parse_window(s: &str) -> Result<Window> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::Parse(format!(
            "window must be x0,x1,y0,y1 (got {} fields)",
            parts.len()
        )));
    }
    Window::rational(
        parse_coord(parts[0])?,
        parse_coord(parts[1])?,
        parse_coord(parts[2])?,
        parse_coord(parts[3])?,
    )
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = |_| Error::Parse(format!("invalid number in alpha {s:?}"));
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(
            re.trim().parse().map_err(bad)?,
            im.trim().parse().map_err(bad)?,
        )),
        None => Ok(Complex64::new(s.trim().parse().map_err(bad)?, 0.0)),
    }
}

fn parse_interval(s: &str) -> Result<(f64, f64)> {
    let bad = |_| Error::Parse(format!("invalid number in interval {s:?}"));
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse("interval must be lo,hi".into()))?;
    Ok((lo.trim().parse().map_err(bad)?, hi.trim().parse().map_err(bad)?))
}

fn parse_element(s: &str) -> Result<DyadicElement> {
    s.parse()
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn complex_json(z: Complex64) -> Value {
    if z.re.is_finite() && z.im.is_finite() {
        json!({ "re": z.re, "im": z.im })
    } else {
        Value::Null
    }
}

fn wstr(ws: &WeightedSubstitution, w: &WeightValue) -> String {
    w.describe(ws.alphabet())
}

fn mode_line(ws: &WeightedSubstitution) -> String {
    match ws.mode() {
        Mode::Exact => "exact".into(),
        Mode::Algebraic(p) => format!("natural (lambda {})", p.lambda),
    }
}

fn classification_line(c: &Classification) -> String {
    match c {
        Classification::Dense => "dense (weight-group closure is all of R+)".into(),
        Classification::Lattice(b) => format!("lattice with base {}", b.describe()),
    }
}

fn classification_json(c: &Classification) -> Value {
    match c {
        Classification::Dense => json!({ "kind": "dense" }),
        Classification::Lattice(b) => json!({
            "kind": "lattice",
            "base": b.describe(),
            "base_value": b.to_f64(),
        }),
    }
}

/// The eventual cycle of the first-letter (or last-letter) descent from
/// `start`, as child-graph edge ids.
fn boundary_cycle(
    ws: &WeightedSubstitution,
    graph: &ChildGraph,
    start: Color,
    first: bool,
) -> Vec<usize> {
    let step = |c: Color| if first { ws.sigma_first(c) } else { ws.sigma_last(c) };
    let mut seen = vec![start];
    loop {
        let next = step(*seen.last().unwrap());
        if let Some(at) = seen.iter().position(|&c| c == next) {
            return seen[at..]
                .iter()
                .map(|&c| {
                    let idx = if first { 0 } else { ws.rule_len(c) - 1 };
                    graph
                        .edges
                        .iter()
                        .position(|e| e.from == c && e.index == idx)
                        .expect("child graph lists every rule letter")
                })
                .collect();
        }
        seen.push(next);
    }
}

/// Default separating seed: the first adjacent letter pair of the first
/// rule of length >= 2. The left column descends by last letters, the
/// right column by first letters.
fn default_separating(
    ws: &WeightedSubstitution,
    graph: &ChildGraph,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let a = ws
        .colors()
        .find(|&a| ws.rule_len(a) >= 2)
        .ok_or_else(|| Error::Validation("no rule of length >= 2".into()))?;
    let rule = ws.rule(a);
    let (l, r) = (rule[0].0, rule[1].0);
    Ok((boundary_cycle(ws, graph, l, false), boundary_cycle(ws, graph, r, true)))
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.cmd {
        Cmd::Validate { input } => validate_cmd(cli, input),
        Cmd::NaturalWeights { input } => natural_cmd(cli, input),
        Cmd::Canonicalize { input } => Ok(system_to_json(&load(input)?.canonicalize()?)),
        Cmd::Iterate { input, color, n } => iterate_cmd(cli, input, color, *n),
        Cmd::BaseGroup { input } => base_group_cmd(cli, input),
        Cmd::GFunction { input } => g_function_cmd(cli, input),
        Cmd::Tile(args) => tile_cmd(cli, args),
        Cmd::Orbits { input, max_len } => orbits_cmd(cli, input, *max_len),
        Cmd::Separating { input } => separating_cmd(cli, input),
        Cmd::Zeta(z) => zeta_cmd(cli, z),
        Cmd::Solenoid(s) => solenoid_cmd(cli, s),
    }
}

fn validate_cmd(cli: &Cli, input: &Path) -> Result<String> {
    let ws = load(input)?;
    let rep = ws.validate();
    if !rep.is_valid() {
        return Err(Error::Validation(rep.violations.join("; ")));
    }
    let names: Vec<&str> = ws.colors().map(|a| ws.color_name(a)).collect();
    let power = ws.primitivity();
    match cli.format {
        Format::Text => {
            let mut s = String::new();
            s += &format!("alphabet: {}\n", names.join(", "));
            s += &format!("mode: {}\n", mode_line(&ws));
            for a in ws.colors() {
                let rhs: Vec<String> = ws
                    .rule(a)
                    .iter()
                    .map(|(b, w)| format!("{}({})", ws.color_name(*b), wstr(&ws, w)))
                    .collect();
                s += &format!("rule {} -> {}\n", ws.color_name(a), rhs.join(" "));
            }
            s += &match power {
                Some(p) => format!("primitive: yes (sigma^{p} is positive)\n"),
                None => "primitive: no\n".into(),
            };
            s += "valid: yes\n";
            Ok(s)
        }
        Format::Json => {
            let rules: Vec<Value> = ws
                .colors()
                .map(|a| {
                    json!({
                        "color": ws.color_name(a),
                        "children": ws.rule(a).iter().map(|(b, w)| {
                            json!({ "color": ws.color_name(*b), "weight": wstr(&ws, w) })
                        }).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let doc = json!({
                "alphabet": names,
                "mode": match ws.mode() { Mode::Exact => "exact", _ => "natural" },
                "lambda": ws.perron().map(|p| p.lambda),
                "rules": rules,
                "primitivity_power": power,
                "valid": true,
            });
            Ok(pretty(&doc))
        }
    }
}

fn natural_cmd(cli: &Cli, input: &Path) -> Result<String> {
    let ws = load(input)?;
    let rules: Vec<Vec<Color>> = ws
        .colors()
        .map(|a| ws.rule(a).iter().map(|(c, _)| *c).collect())
        .collect();
    let nat = natural_weights(ws.alphabet().to_vec(), rules)?;
    let p = nat.perron().expect("natural systems carry Perron data");
    match cli.format {
        Format::Text => {
            let mut s = String::new();
            s += &format!("lambda: {}\n", p.lambda);
            s += &format!("characteristic polynomial: {}\n", p.charpoly.display("z"));
            let xi: Vec<String> = p.xi.iter().map(|v| format!("{v}")).collect();
            s += &format!("xi: {}\n", xi.join(", "));
            for a in nat.colors() {
                let rhs: Vec<String> = nat
                    .rule(a)
                    .iter()
                    .map(|(b, w)| format!("{}({})", nat.color_name(*b), wstr(&nat, w)))
                    .collect();
                s += &format!("rule {} -> {}\n", nat.color_name(a), rhs.join(" "));
            }
            Ok(s)
        }
        Format::Json => {
            let rules: Vec<Value> = nat
                .colors()
                .map(|a| {
                    json!({
                        "color": nat.color_name(a),
                        "children": nat.rule(a).iter().map(|(b, w)| {
                            json!({
                                "color": nat.color_name(*b),
                                "weight": w.to_f64(),
                                "form": wstr(&nat, w),
                            })
                        }).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let doc = json!({
                "lambda": p.lambda,
                "charpoly": p.charpoly.display("z"),
                "xi": p.xi,
                "rules": rules,
            });
            Ok(pretty(&doc))
        }
    }
}

fn iterate_cmd(cli: &Cli, input: &Path, color: &str, n: u32) -> Result<String> {
    let ws = load(input)?;
    let a = ws
        .color_index(color)
        .ok_or_else(|| Error::Validation(format!("unknown color {color:?}")))?;
    let word = ws.tau_power(a, n)?;
    match cli.format {
        Format::Text => {
            let mut s = format!("sigma^{n}({color}): {} letters\n", word.letters.len());
            for (k, (b, w)) in word.letters.iter().enumerate() {
                s += &format!("k={}  {}  {}\n", k, ws.color_name(*b), wstr(&ws, w));
            }
            Ok(s)
        }
        Format::Json => {
            let letters: Vec<Value> = word
                .letters
                .iter()
                .enumerate()
                .map(|(k, (b, w))| {
                    json!({
                        "k": k,
                        "color": ws.color_name(*b),
                        "weight": wstr(&ws, w),
                    })
                })
                .collect();
            Ok(pretty(&json!({ "color": color, "n": n, "letters": letters })))
        }
    }
}

fn base_group_cmd(cli: &Cli, input: &Path) -> Result<String> {
    let ws = load(input)?;
    let graph = child_graph(&ws);
    let report = base_group(&ws)?;
    match cli.format {
        Format::Text => {
            let mut s = format!(
                "child graph: {} colors, {} edges\n",
                graph.node_count,
                graph.edges.len()
            );
            for (id, e) in graph.edges.iter().enumerate() {
                s += &format!(
                    "edge {id}: {} -[{}]-> {}  weight {}\n",
                    ws.color_name(e.from),
                    e.index,
                    ws.color_name(e.to),
                    wstr(&ws, &e.weight)
                );
            }
            s += &format!("cycle generators: {}\n", report.generators.len());
            for gen in &report.generators {
                let ids: Vec<String> = gen.edges.iter().map(edge_tag(&graph)).collect();
                s += &format!("  [{}]  weight {}\n", ids.join(","), wstr(&ws, &gen.weight));
            }
            s += &format!("classification: {}\n", classification_line(&report.classification));
            Ok(s)
        }
        Format::Json => {
            let edges: Vec<Value> = graph
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| {
                    json!({
                        "id": id,
                        "from": ws.color_name(e.from),
                        "index": e.index,
                        "to": ws.color_name(e.to),
                        "weight": wstr(&ws, &e.weight),
                    })
                })
                .collect();
            let generators: Vec<Value> = report
                .generators
                .iter()
                .map(|gen| {
                    json!({
                        "edges": gen.edges.iter().map(edge_tag(&graph)).collect::<Vec<_>>(),
                        "weight": wstr(&ws, &gen.weight),
                        "value": gen.weight.to_f64(),
                    })
                })
                .collect();
            let doc = json!({
                "edges": edges,
                "generators": generators,
                "classification": classification_json(&report.classification),
            });
            Ok(pretty(&doc))
        }
    }
}

/// Maps a generator edge back to its id in the child graph listing.
fn edge_tag(graph: &ChildGraph) -> impl Fn(&tilezeta::base_group::ChildEdge) -> String + '_ {
    |e| {
        let id = graph
            .edges
            .iter()
            .position(|o| o.from == e.from && o.index == e.index)
            .expect("generator edges come from the child graph");
        id.to_string()
    }
}

fn g_function_cmd(cli: &Cli, input: &Path) -> Result<String> {
    let ws = load(input)?;
    let report = base_group(&ws)?;
    let g = g_function(&ws, &report)?;
    match cli.format {
        Format::Text => {
            let mut s = String::new();
            for a in ws.colors() {
                s += &format!("g({}) = {}\n", ws.color_name(a), wstr(&ws, &g.values[a.0]));
            }
            Ok(s)
        }
        Format::Json => {
            let values: Vec<Value> = ws
                .colors()
                .map(|a| {
                    json!({
                        "color": ws.color_name(a),
                        "g": wstr(&ws, &g.values[a.0]),
                        "value": g.values[a.0].to_f64(),
                    })
                })
                .collect();
            Ok(pretty(&json!({ "values": values })))
        }
    }
}

fn tile_cmd(cli: &Cli, args: &TileArgs) -> Result<String> {
    let ws = load(&args.input)?;
    let window = parse_window(&args.window)?;
    let graph = child_graph(&ws);
    let mut phase = match args.phase {
        PhaseKind::Fixed => {
            let cycle = match &args.cycle {
                Some(c) => c.clone(),
                None => default_interior_cycle(&graph)?,
            };
            PhaseSpec::fixed(cycle, args.descent)
        }
        PhaseKind::Separating => {
            let (dl, dr) = match (&args.left, &args.right) {
                (Some(l), Some(r)) => (l.clone(), r.clone()),
                (l, r) => {
                    let (dl, dr) = default_separating(&ws, &graph)?;
                    (l.clone().unwrap_or(dl), r.clone().unwrap_or(dr))
                }
            };
            PhaseSpec::separating(dl, dr)
        }
        PhaseKind::Sample => PhaseSpec::random(cli.seed),
    };
    if let Some(t) = &args.translate {
        phase = phase.translated(parse_coord(t)?);
    }
    if let Some(c) = &args.dilate {
        phase = phase.scaled(parse_coord(c)?);
    }
    let report = base_group(&ws)?;
    let g = g_function(&ws, &report)?;
    let patch = expand_patch(&ws, &g, &report.classification, &window, &phase)?;
    match args.out {
        TileOut::Svg => Ok(render_svg(&patch, yscale(args.scale))),
        TileOut::Json => Ok(patch_to_json(&ws, &patch)),
    }
}

fn yscale(s: ScaleArg) -> YScale {
    match s {
        ScaleArg::Linear => YScale::Linear,
        ScaleArg::Logy => YScale::LogY,
    }
}

fn orbits_cmd(cli: &Cli, input: &Path, max_len: usize) -> Result<String> {
    let ws = load(input)?;
    let graph = child_graph(&ws);
    let cycles = system_cycles(&ws, max_len)?;
    let mut counts = vec![0u64; max_len + 1];
    let mut interior = vec![0u64; max_len + 1];
    for c in &cycles {
        counts[c.len()] += 1;
        if !c.pure_left(&graph) && !c.pure_right(&graph) {
            interior[c.len()] += 1;
        }
    }
    match cli.format {
        Format::Text => {
            let mut s = format!("primitive cycles up to length {max_len}\n");
            for n in 1..=max_len {
                s += &format!("length {n}: {} ({} interior)\n", counts[n], interior[n]);
            }
            s += &format!(
                "total: {} ({} interior)\n",
                counts.iter().sum::<u64>(),
                interior.iter().sum::<u64>()
            );
            Ok(s)
        }
        Format::Json => {
            let doc = json!({
                "max_len": max_len,
                "counts": &counts[1..],
                "interior": &interior[1..],
                "total": counts.iter().sum::<u64>(),
            });
            Ok(pretty(&doc))
        }
    }
}

fn separating_cmd(cli: &Cli, input: &Path) -> Result<String> {
    let ws = load(input)?;
    let orbits = separating_orbits(&ws)?;
    let lambda = ws.perron().map(|p| p.lambda).unwrap_or(0.0);
    let pair = |ws: &WeightedSubstitution, (a, b): &(Color, Color)| {
        format!("({},{})", ws.color_name(*a), ws.color_name(*b))
    };
    match cli.format {
        Format::Text => {
            let mut s = String::new();
            for (i, o) in orbits.iter().enumerate() {
                s += &format!("orbit {}:\n", i + 1);
                let seeds: Vec<String> = o
                    .seeds
                    .iter()
                    .map(|(a, i)| format!("{}:{}", ws.color_name(*a), i))
                    .collect();
                s += &format!("  seed pairs: {}\n", seeds.join(" "));
                let cyc: Vec<String> = o.cycle.iter().map(|p| pair(&ws, p)).collect();
                s += &format!("  cycle: {}\n", cyc.join(" "));
                s += &format!(
                    "  lambda-: {}  lambda+: {}  balanced: {}\n",
                    o.lambda_minus.describe(),
                    o.lambda_plus.describe(),
                    if o.balanced { "yes" } else { "no" }
                );
                s += &match &o.joint_scale {
                    Some(c) => format!("  c: {}\n", c.describe()),
                    None => "  c: none (incommensurable side scales)\n".into(),
                };
            }
            let n = orbits.iter().filter(|o| o.commensurable()).count();
            s += &format!("commensurable orbits: {} of {}\n", n, orbits.len());
            Ok(s)
        }
        Format::Json => {
            let list: Vec<Value> = orbits
                .iter()
                .map(|o| {
                    json!({
                        "seeds": o.seeds.iter().map(|(a, i)| {
                            json!({ "color": ws.color_name(*a), "gap": i })
                        }).collect::<Vec<_>>(),
                        "cycle": o.cycle.iter().map(|p| pair(&ws, p)).collect::<Vec<_>>(),
                        "lambda_minus": o.lambda_minus.describe(),
                        "lambda_plus": o.lambda_plus.describe(),
                        "balanced": o.balanced,
                        "c": o.joint_scale.as_ref().map(|c| c.describe()),
                        "c_value": o.c_value(lambda),
                    })
                })
                .collect();
            Ok(pretty(&json!({ "orbits": list })))
        }
    }
}

fn zeta_cmd(cli: &Cli, z: &ZetaCmd) -> Result<String> {
    match z {
        ZetaCmd::Eval { input, alpha } => {
            let ws = load(input)?;
            let alpha = parse_complex(alpha)?;
            let orbits = separating_orbits(&ws)?;
            let ev = zeta_eval(&ws, &orbits, alpha)?;
            match cli.format {
                Format::Text => {
                    if ev.is_pole {
                        Ok(format!("zeta({}) = pole\n", fmt_complex(alpha)))
                    } else {
                        Ok(format!(
                            "zeta({}) = {}\n",
                            fmt_complex(alpha),
                            fmt_complex(ev.value)
                        ))
                    }
                }
                Format::Json => Ok(pretty(&json!({
                    "alpha": complex_json(alpha),
                    "value": if ev.is_pole { Value::Null } else { complex_json(ev.value) },
                    "is_pole": ev.is_pole,
                }))),
            }
        }
        ZetaCmd::Rational { input } => {
            let ws = load(input)?;
            let report = base_group(&ws)?;
            let orbits = separating_orbits(&ws)?;
            let rz = zeta_rational(&ws, &report, &orbits)?;
            match cli.format {
                Format::Text => Ok(format!("zeta(alpha) = {}\n", rz.describe())),
                Format::Json => {
                    let coeffs = |p: &tilezeta::poly::IntPoly| {
                        p.0.iter().map(|c| c.to_string()).collect::<Vec<_>>()
                    };
                    Ok(pretty(&json!({
                        "numerator": coeffs(&rz.numerator),
                        "denominator": coeffs(&rz.denominator),
                        "base": rz.base.describe(),
                        "display": rz.describe(),
                    })))
                }
            }
        }
        ZetaCmd::Poles { input, interval } => {
            let ws = load(input)?;
            let (lo, hi) = parse_interval(interval)?;
            let report = base_group(&ws)?;
            let orbits = separating_orbits(&ws)?;
            let poles = find_real_poles(&ws, &report, &orbits, lo, hi)?;
            match cli.format {
                Format::Text => {
                    let mut s = format!("real poles in ({lo}, {hi}):\n");
                    if poles.is_empty() {
                        s += "  none\n";
                    }
                    for (alpha, mult) in &poles {
                        s += &format!("  alpha = {alpha}  multiplicity {mult}\n");
                    }
                    Ok(s)
                }
                Format::Json => {
                    let list: Vec<Value> = poles
                        .iter()
                        .map(|(a, m)| json!({ "alpha": a, "multiplicity": m }))
                        .collect();
                    Ok(pretty(&json!({ "lo": lo, "hi": hi, "poles": list })))
                }
            }
        }
        ZetaCmd::Oracle { input, alpha, max_len } => {
            let ws = load(input)?;
            let alpha = parse_complex(alpha)?;
            let orbits = separating_orbits(&ws)?;
            let est = zeta_euler_oracle(&ws, &orbits, alpha, *max_len)?;
            let det = zeta_eval(&ws, &orbits, alpha)?;
            let diff = (est.value - det.value).norm();
            match cli.format {
                Format::Text => {
                    let mut s = String::new();
                    s += &format!(
                        "euler product over {} primitive cycles (length <= {}): {}\n",
                        est.cycles_used,
                        est.max_len,
                        fmt_complex(est.value)
                    );
                    s += &format!("tail bound: {}\n", est.tail_bound);
                    s += &format!("determinant value: {}\n", fmt_complex(det.value));
                    s += &format!(
                        "difference: {} (within bound: {})\n",
                        diff,
                        if diff <= est.tail_bound { "yes" } else { "no" }
                    );
                    Ok(s)
                }
                Format::Json => Ok(pretty(&json!({
                    "alpha": complex_json(alpha),
                    "euler": complex_json(est.value),
                    "tail_bound": est.tail_bound,
                    "cycles_used": est.cycles_used,
                    "max_len": est.max_len,
                    "determinant": complex_json(det.value),
                    "difference": diff,
                }))),
            }
        }
    }
}

fn solenoid_cmd(cli: &Cli, s: &SolenoidCmd) -> Result<String> {
    let element_out = |cli: &Cli, x: &DyadicElement| match cli.format {
        Format::Text => format!("{x}\n"),
        Format::Json => pretty(&json!({ "result": x.to_string() })),
    };
    match s {
        SolenoidCmd::Add { x, y } => {
            let sum = add(&parse_element(x)?, &parse_element(y)?);
            Ok(element_out(cli, &sum))
        }
        SolenoidCmd::Negate { x } => Ok(element_out(cli, &negate(&parse_element(x)?))),
        SolenoidCmd::Scale { x, k } => {
            Ok(element_out(cli, &scale_pow2(&parse_element(x)?, *k)))
        }
        SolenoidCmd::Embed { r } => {
            Ok(element_out(cli, &embed_dyadic(&parse_rational(r)?)?))
        }
        SolenoidCmd::Tile { x, depth, out, scale } => {
            let patch = to_tiling(&parse_element(x)?, *depth)?;
            match out {
                TileOut::Svg => Ok(render_svg(&patch, yscale(*scale))),
                // the axis column is colored by a single tile type; borrow
                // the one-letter system for color naming
                TileOut::Json => Ok(patch_to_json(&tilezeta::systems::omega2(), &patch)),
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("a json value always serializes") + "\n"
}
