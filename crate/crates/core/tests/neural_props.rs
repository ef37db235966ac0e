use bodyshape::neural::gradcheck::{check_kind, CheckedKind};
use bodyshape::neural::{
    freeze_layers, predict, prediction_from_logits, ratio_input, softmax, train, Architecture, Dataset, FreezeSpec,
    Network, Tensor, TrainConfig,
};
use bodyshape::silhouette::balanced_corpus;
use proptest::prelude::*;

fn logits() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-50.0f64..50.0, 5)
}

fn ratio_dataset(per_class: usize, seed: u64) -> Dataset {
    let corpus = balanced_corpus(per_class, seed);
    let inputs = corpus
        .iter()
        .map(|s| ratio_input(&s.params.measurements()).unwrap())
        .collect();
    let labels: Vec<_> = corpus.iter().map(|s| s.label).collect();
    Dataset::from_labeled(inputs, &labels).unwrap()
}

#[test]
fn gradients_match_finite_differences_for_every_kind() {
    for kind in CheckedKind::ALL {
        for seed in 0..20 {
            let check = check_kind(kind, 1000 + seed, 1e-4, 2e-3).unwrap();
            assert!(check.entries > 0);
            assert!(check.max_rel_error < 1e-4, "{kind:?} seed {seed}: {}", check.max_rel_error);
        }
    }
}

#[test]
fn partially_frozen_mlp_keeps_frozen_layers_bit_identical() {
    let data = ratio_dataset(8, 3);
    let net = Architecture::Mlp13.build(5).unwrap();
    let net = freeze_layers(&net, &FreezeSpec::AllButLast(1)).unwrap();
    let cfg = TrainConfig {
        epochs: 5,
        batch_size: 8,
        learning_rate: 0.05,
        seed: 5,
        ..TrainConfig::default()
    };
    let run = train(&net, &data, &cfg).unwrap();
    let mut moved = false;
    for (before, after) in net.layers().iter().zip(run.network.layers()) {
        if before.is_frozen() {
            assert_eq!(before, after);
        } else if before != after {
            moved = true;
        }
    }
    assert!(moved, "the trainable layer should have changed");
}

#[test]
fn training_is_deterministic_per_seed() {
    let data = ratio_dataset(6, 4);
    let net = Architecture::Mlp13.build(1).unwrap();
    let cfg = TrainConfig {
        epochs: 3,
        seed: 11,
        ..TrainConfig::default()
    };
    let a = train(&net, &data, &cfg).unwrap();
    let b = train(&net, &data, &cfg).unwrap();
    assert_eq!(a.network, b.network);
    assert_eq!(a.curve, b.curve);
}

#[test]
fn image_architectures_map_masks_to_five_logits() {
    let corpus = balanced_corpus(1, 2);
    for arch in [Architecture::ResCnn, Architecture::IncCnn] {
        let net = arch.build(0).unwrap();
        let x = bodyshape::neural::mask_input(&corpus[0].mask).unwrap();
        assert_eq!(net.forward(&x).unwrap().shape(), &[5]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn softmax_is_a_distribution(z in logits()) {
        let p = softmax(&z);
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn argmax_ignores_constant_shift(z in logits(), shift in -1e3f64..1e3) {
        let shifted: Vec<f64> = z.iter().map(|v| v + shift).collect();
        prop_assert_eq!(prediction_from_logits(&z).label, prediction_from_logits(&shifted).label);
    }

    #[test]
    fn checkpoint_round_trip_is_identity(seed in any::<u64>(), arch_pick in 0usize..3, freeze in 0usize..4) {
        let arch = Architecture::ALL[arch_pick];
        let net = arch.build(seed).unwrap();
        let net = freeze_layers(&net, &FreezeSpec::First(freeze.min(net.layers().len()))).unwrap();
        let back = Network::from_checkpoint_json(&net.to_checkpoint_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &net);
        let n: usize = arch.input_shape().iter().product();
        let x = Tensor::new(arch.input_shape(), (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) / 5.0).collect()).unwrap();
        let (a, b) = (predict(&net, &x).unwrap(), predict(&back, &x).unwrap());
        prop_assert_eq!(a.probabilities.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                        b.probabilities.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}
