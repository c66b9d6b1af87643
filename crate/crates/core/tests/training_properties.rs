use boostlab_core::boosting::{
    train, train_with_trace, BoostConfig, Ensemble, GossParams, LossSpec, OrderedParams,
};
use boostlab_core::dataset::{Column, Dataset};
use boostlab_core::growers::{GrowerKind, Node, SplitFinder};
use boostlab_core::stats::{feature_importance, ImportanceMetric};
use proptest::prelude::*;

fn dataset(columns: &[Vec<f64>], y: &[f64]) -> Dataset {
    let mut cols: Vec<Column> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| Column::numeric(format!("x{j}"), c.clone()))
        .collect();
    cols.push(Column::target("y", y.to_vec()));
    Dataset::new(cols).unwrap()
}

fn regression() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (10usize..120, 1usize..4).prop_flat_map(|(n, k)| {
        (
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, n), k),
            prop::collection::vec(-2.0f64..2.0, n),
        )
            .prop_map(|(cols, noise)| {
                let y = (0..cols[0].len())
                    .map(|i| cols[0][i].sin() * 2.0 + cols.last().unwrap()[i] * 0.5 + noise[i])
                    .collect();
                (cols, y)
            })
    })
}

fn sparse() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (20usize..200, 2usize..6).prop_flat_map(|(n, k)| {
        prop::collection::vec(
            prop::collection::vec(prop_oneof![6 => Just(0.0), 1 => (1i32..5).prop_map(f64::from)], n),
            k,
        )
    })
}

fn rows(ds: &Dataset) -> Vec<Vec<f64>> {
    let names: Vec<&str> = ds.features().map(|c| c.name()).collect();
    (0..ds.n_rows())
        .map(|i| names.iter().map(|n| ds.numeric(n).unwrap()[i]).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn squared_error_loss_never_increases(
        (cols, y) in regression(),
        alpha in prop_oneof![Just(0.1), Just(0.5), Just(1.0)],
        grower in prop_oneof![Just(GrowerKind::LevelWise), Just(GrowerKind::LeafWise), Just(GrowerKind::Oblivious)],
    ) {
        let cfg = BoostConfig { n_trees: 20, learning_rate: alpha, grower, ..BoostConfig::default() };
        let (_, trace) = train_with_trace::<f64>(&dataset(&cols, &y), &cfg).unwrap();
        for w in trace.losses.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn goss_keeping_everything_changes_nothing((cols, y) in regression(), seed in 0u64..1000) {
        let ds = dataset(&cols, &y);
        let plain = BoostConfig { n_trees: 8, grower: GrowerKind::LeafWise, seed, ..BoostConfig::default() };
        let goss = BoostConfig { goss: Some(GossParams { a: 1.0, b: 0.0 }), ..plain.clone() };
        let a: Ensemble<f64> = train(&ds, &plain).unwrap();
        let b: Ensemble<f64> = train(&ds, &goss).unwrap();
        prop_assert_eq!(a.trees, b.trees);
    }

    #[test]
    fn conflict_free_bundling_is_lossless(cols in sparse(), grower in prop_oneof![Just(GrowerKind::LevelWise), Just(GrowerKind::LeafWise)]) {
        let y: Vec<f64> = (0..cols[0].len())
            .map(|i| cols.iter().enumerate().map(|(j, c)| c[i] * (j as f64 - 1.5)).sum())
            .collect();
        let ds = dataset(&cols, &y);
        let plain = BoostConfig { n_trees: 10, grower, ..BoostConfig::default() };
        let efb = BoostConfig { efb: Some(0), ..plain.clone() };
        let a: Ensemble<f64> = train(&ds, &plain).unwrap();
        let b: Ensemble<f64> = train(&ds, &efb).unwrap();
        for (p, q) in a.predict(&ds).unwrap().iter().zip(b.predict(&ds).unwrap()) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn recorded_gains_are_recomputable((cols, y) in regression()) {
        let ds = dataset(&cols, &y);
        let cfg = BoostConfig { n_trees: 3, finder: SplitFinder::Presorted, ..BoostConfig::default() };
        let (model, trace) = train_with_trace::<f64>(&ds, &cfg).unwrap();
        let x = rows(&ds);
        let mut total = 0.0;
        for (tree, grads) in model.trees.iter().zip(&trace.gradients) {
            // instances reaching each node, then the gain from their sums
            let mut reach: Vec<Vec<usize>> = vec![Vec::new(); tree.nodes.len()];
            reach[0] = (0..x.len()).collect();
            for (id, node) in tree.nodes.iter().enumerate() {
                if let Node::Split { feature, threshold, default_left, left, right, gain } = node {
                    let here = std::mem::take(&mut reach[id]);
                    let sums = |ids: &[usize]| ids.iter().fold((0.0, 0.0), |a, &i| (a.0 + grads[i].g, a.1 + grads[i].h));
                    let (l, r): (Vec<usize>, Vec<usize>) = here.iter().partition(|&&i| {
                        let v = x[i][*feature];
                        if v.is_nan() { *default_left } else { v <= *threshold }
                    });
                    let s = |(g, h): (f64, f64)| g * g / (h + cfg.lambda);
                    let expect = 0.5 * (s(sums(&l)) + s(sums(&r)) - s(sums(&here)));
                    prop_assert!((expect - gain).abs() < 1e-9 * expect.abs().max(1.0));
                    total += expect;
                    reach[*left] = l;
                    reach[*right] = r;
                }
            }
        }
        let report = feature_importance(&model, ImportanceMetric::Gain, false).unwrap();
        let reported: f64 = report.entries.iter().map(|e| e.gain_importance).sum();
        prop_assert!((reported - total).abs() < 1e-9 * total.max(1.0));
    }
}

#[test]
fn gradients_match_finite_differences() {
    let eps = 1e-5;
    let points = [(-2.3, 0.0), (0.7, 1.0), (1.9, 1.0), (-0.4, 0.0), (3.1, 1.0), (-1.2, 1.0), (0.05, 0.0), (2.4, 0.0), (-3.3, 1.0), (0.9, 0.0)];
    for loss in [LossSpec::SquaredError, LossSpec::Logistic] {
        for &(raw, y) in &points {
            let y = if loss == LossSpec::SquaredError { y * 3.0 - 1.0 } else { y };
            let gp = loss.gradient(y, raw);
            let g_fd = (loss.value(y, raw + eps) - loss.value(y, raw - eps)) / (2.0 * eps);
            let h_fd = (loss.gradient(y, raw + eps).g - loss.gradient(y, raw - eps).g) / (2.0 * eps);
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
            assert!(rel(gp.g, g_fd) < 1e-6, "{loss:?} g at {raw}: {} vs {g_fd}", gp.g);
            assert!(rel(gp.h, h_fd) < 1e-6, "{loss:?} h at {raw}: {} vs {h_fd}", gp.h);
        }
    }
}

#[test]
fn ordered_gradients_do_not_see_later_targets() {
    let x = vec![0.3, 1.7, 2.2, 0.9, 3.5, 2.8, 1.1, 0.1];
    let y = vec![1.0, -2.0, 0.5, 3.0, -1.5, 2.5, 0.0, 1.0];
    let cfg = BoostConfig {
        n_trees: 6,
        grower: GrowerKind::Oblivious,
        max_depth: 2,
        min_child_hessian: 0.0,
        ordered: Some(OrderedParams { n_permutations: 1, n_blocks: 8 }),
        seed: 11,
        ..BoostConfig::default()
    };
    let (_, base) = train_with_trace::<f64>(&dataset(&[x.clone()], &y), &cfg).unwrap();
    let schedule = base.schedule.clone().unwrap();
    let perm = &schedule.permutations[0];
    for changed in 0..8 {
        let mut y2 = y.clone();
        y2[changed] += 10.0;
        let (_, moved) = train_with_trace::<f64>(&dataset(&[x.clone()], &y2), &cfg).unwrap();
        assert_eq!(moved.schedule.as_ref(), Some(&schedule));
        let b = perm.block_of[changed];
        for (t, (g0, g1)) in base.gradients.iter().zip(&moved.gradients).enumerate() {
            for j in 0..8 {
                if perm.block_of[j] > b {
                    continue;
                }
                if j == changed {
                    // only the target itself moved
                    assert!((g1[j].g - (g0[j].g - 10.0)).abs() < 1e-12, "iteration {t}");
                    assert_eq!(g1[j].h, g0[j].h);
                } else {
                    assert_eq!(g1[j], g0[j], "iteration {t}, row {j}, changed {changed}");
                }
            }
        }
    }
}

#[test]
fn determinism_and_round_trip() {
    let x0: Vec<f64> = (0..300).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
    let x1: Vec<f64> = (0..300).map(|i| if i % 7 == 0 { f64::NAN } else { ((i * 13) % 17) as f64 }).collect();
    let y: Vec<f64> = x0.iter().zip(&x1).map(|(a, b)| a.sin() + if b.is_nan() { 1.0 } else { b * 0.1 }).collect();
    let ds = dataset(&[x0, x1], &y);
    let configs = [
        BoostConfig { n_trees: 15, ..BoostConfig::default() },
        BoostConfig { n_trees: 15, grower: GrowerKind::LeafWise, goss: Some(GossParams { a: 0.2, b: 0.3 }), seed: 4, ..BoostConfig::default() },
        BoostConfig { n_trees: 15, grower: GrowerKind::Oblivious, ordered: Some(OrderedParams::default()), seed: 9, ..BoostConfig::default() },
    ];
    for cfg in &configs {
        let a: Ensemble<f64> = train(&ds, cfg).unwrap();
        let b: Ensemble<f64> = train(&ds, cfg).unwrap();
        let text = a.to_json().unwrap();
        assert_eq!(text, b.to_json().unwrap());
        let back = Ensemble::<f64>::from_json(&text).unwrap();
        let (p, q) = (a.predict(&ds).unwrap(), back.predict(&ds).unwrap());
        assert!(p.iter().zip(&q).all(|(u, v)| u.to_bits() == v.to_bits()));
        assert_eq!(back.to_json().unwrap(), text);
    }
}

#[test]
fn single_precision_tracks_double() {
    let x: Vec<f64> = (0..200).map(|i| i as f64 / 20.0).collect();
    let y: Vec<f64> = x.iter().map(|v| (v * 0.8).cos() * 3.0).collect();
    let ds = dataset(&[x], &y);
    let cfg = BoostConfig { n_trees: 30, ..BoostConfig::default() };
    let a: Ensemble<f64> = train(&ds, &cfg).unwrap();
    let b: Ensemble<f32> = train(&ds, &cfg).unwrap();
    for (p, q) in a.predict(&ds).unwrap().iter().zip(b.predict(&ds).unwrap()) {
        assert!((p - f64::from(q)).abs() < 1e-3);
    }
}
