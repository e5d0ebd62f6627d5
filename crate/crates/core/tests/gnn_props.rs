mod common;

use common::arb_graph;
use gnncolor::gnn::{infer_priorities, initial_features, sage_layer, FeatureMatrix, GnnModel};
use gnncolor::CsrGraph;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_model() -> impl Strategy<Value = GnnModel> {
    (2usize..=4, any::<u64>()).prop_map(|(layers, seed)| {
        let mut m = GnnModel::init(layers, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        // Nonzero biases too.
        for (i, l) in m.layers_mut().iter_mut().enumerate() {
            for (j, b) in l.bias_mut().iter_mut().enumerate() {
                *b = ((seed as usize + 7 * i + 3 * j) % 11) as f32 / 20.0 - 0.25;
            }
        }
        m
    })
}

fn naive_forward(g: &CsrGraph, model: &GnnModel) -> FeatureMatrix {
    let mut h = initial_features(g);
    let last = model.num_layers() - 1;
    for (l, layer) in model.layers().iter().enumerate() {
        h = sage_layer(g, &h, layer, l != last);
    }
    h
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-5 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn optimized_matches_naive(g in arb_graph(150), model in arb_model(), workers in 1usize..=4) {
        let expected = naive_forward(&g, &model).row_sums();
        let pm = infer_priorities(&g, &model, workers);
        for (u, &p) in expected.iter().enumerate() {
            prop_assert!(close(pm.get(u as u32), p as f64), "vertex {}: {} vs {}", u, pm.get(u as u32), p);
        }
    }

    #[test]
    fn worker_count_does_not_change_bits(g in arb_graph(150), model in arb_model()) {
        let one = infer_priorities(&g, &model, 1);
        for workers in [2, 3, 8] {
            prop_assert_eq!(&infer_priorities(&g, &model, workers), &one);
        }
    }

    #[test]
    fn negating_last_layer_reverses_order(g in arb_graph(60), model in arb_model()) {
        let mut neg = model.clone();
        let last = neg.num_layers() - 1;
        neg.layers_mut()[last].params_mut().for_each(|p| *p = -*p);
        let a = infer_priorities(&g, &model, 1);
        let b = infer_priorities(&g, &neg, 1);
        for u in g.vertices() {
            prop_assert_eq!(a.get(u), -b.get(u));
            for v in g.vertices() {
                if a.get(u) != a.get(v) {
                    prop_assert_eq!(a.precedes(u, v), b.precedes(v, u));
                }
            }
        }
    }

    #[test]
    fn relu_layers_are_nonnegative(g in arb_graph(60), model in arb_model()) {
        let mut h = initial_features(&g);
        for layer in &model.layers()[..model.num_layers() - 1] {
            h = sage_layer(&g, &h, layer, true);
            prop_assert!(h.data().iter().all(|&x| x >= 0.0));
        }
    }
}
