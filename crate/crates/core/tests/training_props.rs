mod common;

use common::arb_graph;
use gnncolor::generate::{barabasi_albert, gnm};
use gnncolor::train::{make_labels, train_supervised, write_history, LabelSource, TrainConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn labels_are_antisymmetric(g in arb_graph(60)) {
        for source in [LabelSource::Sl, LabelSource::Sd, LabelSource::Lf] {
            let labels = make_labels(&g, source);
            let pm = source.priorities(&g);
            for (u, v) in g.edges() {
                let (a, b) = (labels.label(&g, u, v).unwrap(), labels.label(&g, v, u).unwrap());
                prop_assert!(!(a && b));
                if !a && !b {
                    prop_assert!(source != LabelSource::Lf);
                    prop_assert_eq!(pm.get(u), pm.get(v));
                }
            }
        }
    }
}

#[test]
fn metric_history_is_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let graphs = vec![
        gnm(60, 150, &mut rng),
        barabasi_albert(80, 2, &mut rng),
        gnm(40, 200, &mut rng),
    ];
    let holdout = vec![barabasi_albert(50, 3, &mut rng)];
    let cfg = TrainConfig {
        epochs: 8,
        seed: 99,
        labels: LabelSource::Sd,
        layers: 3,
        ..Default::default()
    };
    let csv = |()| {
        let out = train_supervised(&graphs, &holdout, &cfg).unwrap();
        let mut buf = Vec::new();
        write_history(&out.history, &mut buf).unwrap();
        (buf, out.model)
    };
    let (a, ma) = csv(());
    let (b, mb) = csv(());
    assert_eq!(a, b);
    assert_eq!(ma, mb);
}
