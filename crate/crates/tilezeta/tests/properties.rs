//! Randomized structural laws with shrinking. Everything here holds exactly
//! by construction; the only floats are natural-weight products with an
//! explicit bound. Statistical checks live in the acceptance gates instead.

use num::rational::BigRational;
use num::{One, Zero};
use proptest::prelude::*;

use tilezeta::base_group::{base_group, child_graph, g_function, Classification, LatticeBase};
use tilezeta::io::system_to_json;
use tilezeta::rational::{big_rational, log_exact};
use tilezeta::solenoid::{add, negate, normalize_tilde, scale_pow2, DyadicElement, RawDigits};
use tilezeta::substitution::{natural_weights, Color, Mode, WeightedSubstitution};
use tilezeta::systems;
use tilezeta::tiling::{
    default_interior_cycle, expand_patch, verify_patch, PhaseSpec, Window,
};
use tilezeta::weight::WeightValue;

/// Random exact system whose weights are pure powers of 1/2, built by
/// repeated halving so every rule sums to one exactly. The last letter of
/// each rule steps to the next color and rule 0 keeps a self-loop, which
/// makes the substitution primitive by construction.
fn dyadic_system() -> impl Strategy<Value = WeightedSubstitution> {
    (1usize..=3)
        .prop_flat_map(|n| {
            let one_rule = (
                proptest::collection::vec(0usize..8, 1..=3),
                proptest::collection::vec(0usize..n, 4),
            );
            (Just(n), proptest::collection::vec(one_rule, n))
        })
        .prop_map(|(n, raw)| {
            let names: Vec<String> =
                ["a", "b", "c"][..n].iter().map(|s| s.to_string()).collect();
            let mut rules = Vec::with_capacity(n);
            for (a, (splits, targets)) in raw.into_iter().enumerate() {
                let mut parts = vec![BigRational::one()];
                for c in splits {
                    let i = c % parts.len();
                    let half = &parts[i] / big_rational(2, 1);
                    parts[i] = half.clone();
                    parts.insert(i + 1, half);
                }
                let k = parts.len();
                let mut rule: Vec<(Color, WeightValue)> = parts
                    .into_iter()
                    .enumerate()
                    .map(|(i, w)| {
                        (Color(targets[i % targets.len()]), WeightValue::exact(w))
                    })
                    .collect();
                rule[k - 1].0 = Color((a + 1) % n);
                if a == 0 {
                    rule[0].0 = Color(0);
                }
                rules.push(rule);
            }
            WeightedSubstitution::try_new(names, rules, Mode::Exact).unwrap()
        })
}

fn raw_digits() -> impl Strategy<Value = RawDigits> {
    (
        0u8..=1,
        proptest::collection::vec(0u8..=1, 0..6),
        proptest::collection::vec(0u8..=1, 0..4),
        proptest::collection::vec(0u8..=1, 1..4),
        -4i64..=4,
    )
        .prop_map(|(fill, head, pre, period, exponent)| RawDigits {
            fill,
            head,
            pre,
            period,
            exponent,
        })
}

proptest! {
    #[test]
    fn iterated_weights_partition_unity(ws in dyadic_system(), n in 1u32..=4, pick in 0usize..3) {
        let a = Color(pick % ws.color_count());
        let word = ws.tau_power(a, n).unwrap();
        let total = word
            .letters
            .iter()
            .fold(BigRational::zero(), |acc, (_, w)| acc + w.as_exact().unwrap());
        prop_assert_eq!(total, BigRational::one());
    }

    #[test]
    fn perturbed_weight_sums_are_rejected(ws in dyadic_system()) {
        let names: Vec<String> = ws.alphabet().to_vec();
        let mut rules: Vec<Vec<(Color, WeightValue)>> =
            ws.colors().map(|a| ws.rule(a).to_vec()).collect();
        let bumped = rules[0][0].1.as_exact().unwrap() + big_rational(1, 16);
        rules[0][0].1 = WeightValue::exact(bumped);
        prop_assert!(WeightedSubstitution::try_new(names, rules, Mode::Exact).is_err());
    }

    #[test]
    fn dyadic_weight_groups_are_lattices_with_lattice_heights(ws in dyadic_system()) {
        let report = base_group(&ws).unwrap();
        let base = match &report.classification {
            Classification::Lattice(LatticeBase::Rational(b)) => b.clone(),
            other => panic!("powers of 1/2 must classify as a lattice, got {other:?}"),
        };
        for gen in &report.generators {
            prop_assert!(log_exact(gen.weight.as_exact().unwrap(), &base).is_some());
        }
        let g = g_function(&ws, &report).unwrap();
        for a in ws.colors() {
            for (b, w) in ws.rule(a) {
                let ratio = g.values[a.0].as_exact().unwrap() * w.as_exact().unwrap()
                    / g.values[b.0].as_exact().unwrap();
                prop_assert!(
                    log_exact(&ratio, &base).is_some(),
                    "g(a) tau(a)_i / g(b) must be a power of the base"
                );
            }
        }
    }

    #[test]
    fn canonicalize_strips_padding_and_is_idempotent(ws in dyadic_system()) {
        let mut names: Vec<String> = ws.alphabet().to_vec();
        let mut rules: Vec<Vec<(Color, WeightValue)>> =
            ws.colors().map(|a| ws.rule(a).to_vec()).collect();
        names.push("dup".into());
        rules.push(rules[0].clone());
        names.push("unit".into());
        rules.push(vec![(Color(0), WeightValue::exact(BigRational::one()))]);
        let padded = WeightedSubstitution::try_new(names, rules, Mode::Exact).unwrap();

        let direct = ws.canonicalize().unwrap();
        let via_padding = padded.canonicalize().unwrap();
        prop_assert_eq!(system_to_json(&via_padding), system_to_json(&direct));
        let twice = via_padding.canonicalize().unwrap();
        prop_assert_eq!(system_to_json(&twice), system_to_json(&via_padding));
    }

    #[test]
    fn natural_weight_closed_walks_scale_by_lambda(
        raw in (2usize..=3).prop_flat_map(|n| {
            (Just(n), proptest::collection::vec(proptest::collection::vec(0usize..n, 1..=3), n))
        }),
        steps in proptest::collection::vec(0usize..4, 1..=12),
    ) {
        let (n, mut raw) = raw;
        for (a, rule) in raw.iter_mut().enumerate() {
            let last = rule.len() - 1;
            rule[last] = (a + 1) % n;
        }
        if raw[0].len() == 1 {
            raw[0].push(0);
        } else {
            raw[0][0] = 0;
        }
        let names: Vec<String> = ["a", "b", "c"][..n].iter().map(|s| s.to_string()).collect();
        let rules: Vec<Vec<Color>> =
            raw.iter().map(|r| r.iter().map(|&c| Color(c)).collect()).collect();
        let ws = natural_weights(names, rules).unwrap();
        let lambda = match ws.mode() {
            Mode::Algebraic(p) => p.lambda,
            Mode::Exact => unreachable!("natural weights are algebraic"),
        };

        // a random descent walk that returns to its start telescopes the
        // eigenvector ratios away, leaving exactly lambda^-length
        let mut a = Color(0);
        let mut product = 1.0f64;
        let mut len = 0usize;
        for &s in &steps {
            let rule = ws.rule(a);
            let (b, w) = &rule[s % rule.len()];
            product *= w.to_f64();
            len += 1;
            a = *b;
            if a == Color(0) {
                break;
            }
        }
        prop_assume!(a == Color(0));
        let expect = lambda.powi(-(len as i32));
        prop_assert!(
            (product - expect).abs() <= 1e-9 * expect,
            "walk of length {len} weighs {product:.15}, expected {expect:.15}"
        );
    }

    #[test]
    fn solenoid_laws_and_display_round_trip(
        ra in raw_digits(),
        rb in raw_digits(),
        k in -4i64..=4,
    ) {
        let x = normalize_tilde(&ra);
        let y = normalize_tilde(&rb);
        prop_assert_eq!(x.to_string().parse::<DyadicElement>().unwrap(), x.clone());
        prop_assert_eq!(negate(&negate(&x)), x.clone());
        prop_assert_eq!(scale_pow2(&scale_pow2(&x, k), -k), x.clone());
        prop_assert_eq!(add(&x, &DyadicElement::zero()), x.clone());
        prop_assert_eq!(
            scale_pow2(&add(&x, &y), k),
            add(&scale_pow2(&x, k), &scale_pow2(&y, k))
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn random_windows_expand_to_verified_patches(
        sys_pick in 0usize..2,
        x_num in -16i64..=16,
        x_den in 1i64..=3,
        w_num in 1i64..=4,
        y_num in 1i64..=4,
        ratio in 2i64..=5,
    ) {
        let ws = if sys_pick == 0 { systems::omega2() } else { systems::thue_morse() };
        let report = base_group(&ws).unwrap();
        let g = g_function(&ws, &report).unwrap();
        let phase = if sys_pick == 0 {
            PhaseSpec::separating(vec![1], vec![0])
        } else {
            PhaseSpec::fixed(default_interior_cycle(&child_graph(&ws)).unwrap(), 0)
        };
        let x0 = big_rational(x_num, x_den);
        let x1 = &x0 + big_rational(w_num, 2);
        let y0 = big_rational(y_num, 4);
        let y1 = &y0 * big_rational(ratio, 1);
        let window = Window::rational(x0, x1, y0, y1).unwrap();
        let patch = expand_patch(&ws, &g, &report.classification, &window, &phase).unwrap();
        verify_patch(&ws, &g, &report.classification, &patch).unwrap();
        prop_assert!(!patch.tiles.is_empty());
    }
}
