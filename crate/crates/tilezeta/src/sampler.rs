//! Equilibrium sampling of tiling patches.
//!
//! Conditioned on seeing a tile of color a, the mother tile has color b and
//! holds the child at position j with probability pi(b) tau(b)_j / pi(a),
//! where pi is the stationary distribution of the row-stochastic weight
//! matrix. Running this reversal upward from a root drawn from pi, with the
//! vertical phase log-uniform over one period of the scale group, samples a
//! window of the tiling under the natural invariant measure. All sampled
//! geometry is float; lattice systems keep condition (I) relative to the
//! one random global phase.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::base_group::{base_group, g_function, Classification};
use crate::error::{Error, Result};
use crate::substitution::{Color, WeightedSubstitution};
use crate::tiling::{
    canonical_sort, descend_collect, ColoredTile, Patch, Tile, Window, GROWTH_CAP,
};
use crate::weight::Scalar;

/// Stationary distribution pi of the row-stochastic weight matrix M1,
/// normalized to sum 1. Primitivity makes it unique.
pub fn stationary_distribution(ws: &WeightedSubstitution) -> Vec<f64> {
    let n = ws.color_count();
    let mut m = vec![vec![0.0; n]; n];
    for a in ws.colors() {
        for (b, tau) in ws.rule(a) {
            m[a.0][b.0] += tau.to_f64();
        }
    }
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let mut next = vec![0.0; n];
        for a in 0..n {
            for b in 0..n {
                next[b] += pi[a] * m[a][b];
            }
        }
        let total: f64 = next.iter().sum();
        for x in &mut next {
            *x /= total;
        }
        let delta: f64 = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if delta < 1e-15 {
            break;
        }
    }
    pi
}

/// One move of the reversed chain: the mother's color and which of her
/// children the current tile is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpwardStep {
    pub mother: Color,
    pub index: usize,
}

/// Conditional law of the upward step from a tile of color `a`:
/// P(b, j) = pi(b) tau(b)_j / pi(a) over the pairs with sigma(b)_j = a.
/// Entries come in (color, index) order and sum to 1.
pub fn upward_distribution(
    ws: &WeightedSubstitution,
    pi: &[f64],
    a: Color,
) -> Vec<(UpwardStep, f64)> {
    let mut out = Vec::new();
    for b in ws.colors() {
        for (j, (c, tau)) in ws.rule(b).iter().enumerate() {
            if *c == a {
                out.push((
                    UpwardStep { mother: b, index: j },
                    pi[b.0] * tau.to_f64() / pi[a.0],
                ));
            }
        }
    }
    out
}

/// Draws one upward step from color `a`.
pub fn upward_step<R: Rng>(
    ws: &WeightedSubstitution,
    pi: &[f64],
    a: Color,
    rng: &mut R,
) -> UpwardStep {
    let dist = upward_distribution(ws, pi, a);
    let mut u: f64 = rng.gen();
    for (step, p) in &dist {
        u -= p;
        if u < 0.0 {
            return *step;
        }
    }
    dist.last().expect("a primitive system feeds every color").0
}

fn draw_color<R: Rng>(pi: &[f64], rng: &mut R) -> Color {
    let mut u: f64 = rng.gen();
    for (i, p) in pi.iter().enumerate() {
        u -= p;
        if u < 0.0 {
            return Color(i);
        }
    }
    Color(pi.len() - 1)
}

/// Samples the window of a tiling drawn from the equilibrium measure.
/// The root color follows pi, the vertical phase is log-uniform over one
/// period of the scale group, the horizontal offset is uniform, and the
/// ancestor chain follows the reversed kernel until its subtree covers the
/// window. Identical seeds give identical patches.
pub fn sample_equilibrium(
    ws: &WeightedSubstitution,
    window: &Window,
    seed: u64,
) -> Result<Patch> {
    let window = window.to_mode(false)?;
    let report = base_group(ws)?;
    let g = g_function(ws, &report)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = stationary_distribution(ws);

    let a = draw_color(&pi, &mut rng);
    let u: f64 = rng.gen();
    let y = match &report.classification {
        Classification::Lattice(base) => g.values[a.0].to_f64() * base.to_f64().powf(u),
        Classification::Dense => u.exp(),
    };
    let v: f64 = rng.gen();
    let center = 0.5 * (window.x0.to_f64() + window.x1.to_f64());
    let x1 = center - v * y;
    let mut cur = ColoredTile {
        tile: Tile {
            x1: Scalar::F64(x1),
            x2: Scalar::F64(x1 + y),
            y1: Scalar::F64(y),
            y2: Scalar::F64(2.0 * y),
        },
        color: a,
    };
    for steps in 0.. {
        let covered = cur.tile.x1.le(&window.x0)
            && window.x1.le(&cur.tile.x2)
            && window.y1.le(&cur.tile.y1);
        if covered {
            break;
        }
        if steps >= GROWTH_CAP {
            return Err(Error::Internal(
                "sampled ancestor chain failed to cover the window within the growth cap".into(),
            ));
        }
        let step = upward_step(ws, &pi, cur.color, &mut rng);
        let tau = ws.rule(step.mother)[step.index].1.to_f64();
        let width = cur.tile.width().to_f64() / tau;
        let before: f64 = ws.rule(step.mother)[..step.index]
            .iter()
            .map(|(_, t)| t.to_f64())
            .sum();
        let x1 = cur.tile.x1.to_f64() - width * before;
        cur = ColoredTile {
            tile: Tile {
                x1: Scalar::F64(x1),
                x2: Scalar::F64(x1 + width),
                y1: Scalar::F64(width),
                y2: Scalar::F64(2.0 * width),
            },
            color: step.mother,
        };
    }
    let mut tiles = descend_collect(ws, &cur, &window)?;
    canonical_sort(&mut tiles);
    Ok(Patch { window, tiles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::big_rational;
    use crate::substitution::{natural_weights, Mode};
    use crate::tiling::verify_patch_inner;
    use crate::weight::WeightValue;

    fn exact(n: i64, d: i64) -> WeightValue {
        WeightValue::Exact(big_rational(n, d))
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

    #[test]
    fn stationary_laws_of_the_bundled_systems() {
        let pi = stationary_distribution(&thue_morse());
        assert!((pi[0] - 0.5).abs() < 1e-12 && (pi[1] - 0.5).abs() < 1e-12);
        let pi = stationary_distribution(&doubling());
        assert!((pi[0] - 1.0).abs() < 1e-12);
        let pi = stationary_distribution(&mirror());
        assert!((pi[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn upward_law_splits_evenly_for_symmetric_systems() {
        let ws = thue_morse();
        let pi = stationary_distribution(&ws);
        let dist = upward_distribution(&ws, &pi, Color(0));
        assert_eq!(dist.len(), 2);
        assert_eq!(dist[0].0, UpwardStep { mother: Color(0), index: 0 });
        assert_eq!(dist[1].0, UpwardStep { mother: Color(1), index: 1 });
        assert!((dist[0].1 - 0.5).abs() < 1e-12);
        assert!((dist[1].1 - 0.5).abs() < 1e-12);
        let ws = doubling();
        let pi = stationary_distribution(&ws);
        let dist = upward_distribution(&ws, &pi, Color(0));
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(dist.iter().all(|(_, p)| (p - 0.5).abs() < 1e-12));
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let ws = thue_morse();
        let window = Window::floats(-2.0, 2.0, 0.3, 1.7).unwrap();
        let a = sample_equilibrium(&ws, &window, 7).unwrap();
        let b = sample_equilibrium(&ws, &window, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_equilibrium(&ws, &window, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_patches_verify_up_to_the_global_phase() {
        let window = Window::floats(-1.5, 1.5, 0.4, 2.5).unwrap();
        for (ws, seed) in [(doubling(), 1u64), (thue_morse(), 2), (mirror(), 3)] {
            let report = base_group(&ws).unwrap();
            let g = g_function(&ws, &report).unwrap();
            let patch = sample_equilibrium(&ws, &window, seed).unwrap();
            assert!(!patch.tiles.is_empty());
            verify_patch_inner(&ws, &g, &report.classification, &patch, true).unwrap();
        }
    }

    #[test]
    fn sampler_handles_natural_weights_and_unit_weight_edges() {
        let ws = natural_weights(
            vec!["1".into(), "2".into()],
            vec![vec![Color(0), Color(1)], vec![Color(0)]],
        )
        .unwrap();
        let report = base_group(&ws).unwrap();
        let g = g_function(&ws, &report).unwrap();
        let window = Window::floats(-1.0, 1.0, 0.5, 2.0).unwrap();
        for seed in 0..5 {
            let patch = sample_equilibrium(&ws, &window, seed).unwrap();
            assert!(!patch.tiles.is_empty());
            verify_patch_inner(&ws, &g, &report.classification, &patch, true).unwrap();
        }
    }

    #[test]
    fn long_runs_of_upward_steps_match_the_conditional_law() {
        let ws = thue_morse();
        let pi = stationary_distribution(&ws);
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        let n = 20_000usize;
        let mut same_color = 0usize;
        let mut color = Color(0);
        for _ in 0..n {
            let step = upward_step(&ws, &pi, color, &mut rng);
            if step.mother == color {
                same_color += 1;
            }
            color = step.mother;
        }
        // Bernoulli(1/2) count within 4 sigma
        let sigma = 0.5 * (n as f64).sqrt();
        assert!((same_color as f64 - n as f64 / 2.0).abs() < 4.0 * sigma);
    }
}
