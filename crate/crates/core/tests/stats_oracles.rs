use bodyshape::anthro::{normalize, ratio_features, DatasetTable, RatioSpec};
use bodyshape::rng::SplitMix64;
use bodyshape::silhouette::balanced_corpus;
use bodyshape::stats::{
    cohen_kappa, fcm_fit, kmeans_fit, lda_fit, pca_fit, select_k, sq_dist, ComponentSelector, DataMatrix, FcmConfig,
    KCriterion, KMeansConfig,
};
use bodyshape::ShapeLabel;
use proptest::prelude::*;

/// Standardized default ratio features of a balanced corpus, with labels.
fn ratio_matrix(per_class: usize, seed: u64) -> (DataMatrix, Vec<usize>) {
    let specs = RatioSpec::defaults();
    let corpus = balanced_corpus(per_class, seed);
    let rows: Vec<Vec<f64>> = corpus
        .iter()
        .map(|s| ratio_features(&s.params.measurements(), &specs).unwrap().values)
        .collect();
    let names = specs.iter().map(|s| s.name().to_string()).collect();
    let table = DatasetTable::new(names, rows, vec![None; corpus.len()]).unwrap();
    let (z, _) = normalize(&table).unwrap();
    let labels = corpus.iter().map(|s| s.label.ordinal()).collect();
    (DataMatrix::from_table(&z).unwrap(), labels)
}

fn latent_factor_matrix(n: usize, seed: u64) -> DataMatrix {
    let mut rng = SplitMix64::new(seed);
    let loadings: Vec<f64> = (0..24).map(|_| rng.uniform(0.5, 1.5)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let z = [rng.normal(), rng.normal(), rng.normal()];
            (0..24).map(|j| loadings[j] * z[j / 8] + 0.01 * rng.normal()).collect()
        })
        .collect();
    DataMatrix::from_rows(&rows).unwrap()
}

#[test]
fn pca_finds_three_latent_factors() {
    let x = latent_factor_matrix(500, 17);
    let model = pca_fit(&x, ComponentSelector::VarianceFraction(0.85)).unwrap();
    assert_eq!(model.k, 3);
}

#[test]
fn select_k_recovers_five_shape_clusters() {
    let (x, _) = ratio_matrix(100, 3);
    let sel = select_k(&x, 2, 5, KCriterion::Bic, 1).unwrap();
    assert_eq!(sel.chosen, 5, "{:?}", sel.scores);
    // The chosen partition is the class partition up to relabelling.
    let (_, labels) = ratio_matrix(100, 3);
    let model = kmeans_fit(&x, &KMeansConfig::new(5, 1)).unwrap();
    let mut majority = [[0usize; 5]; 5];
    for (&c, &y) in model.assignments.iter().zip(&labels) {
        majority[c][y] += 1;
    }
    let mapped: Vec<usize> = model
        .assignments
        .iter()
        .map(|&c| (0..5).max_by_key(|&y| majority[c][y]).unwrap())
        .collect();
    let kappa = cohen_kappa(&mapped, &labels).unwrap();
    assert!(kappa > 0.95, "kappa {kappa}");
}

#[test]
fn lda_nearest_mean_on_held_out_ratio_features() {
    let (train, train_y) = ratio_matrix(200, 1);
    let model = lda_fit(&train, &train_y, 4).unwrap();
    let (test, test_y) = ratio_matrix(200, 2);
    let pred = model.predict(&test);
    let acc = pred.iter().zip(&test_y).filter(|(a, b)| a == b).count() as f64 / test_y.len() as f64;
    println!("lda held-out accuracy {acc:.4}");
    assert!(acc >= 0.90, "{acc}");
}

/// Minimum inertia over every assignment of `n` rows to `k` labels.
fn brute_force_inertia(x: &DataMatrix, k: usize) -> f64 {
    let (n, d) = (x.n(), x.d());
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            for j in 0..d {
                sums[c * d + j] += x.row(i)[j];
            }
        }
        let inertia: f64 = labels
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let centroid: Vec<f64> = (0..d).map(|j| sums[c * d + j] / counts[c] as f64).collect();
                sq_dist(x.row(i), &centroid)
            })
            .sum();
        best = best.min(inertia);
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            labels[pos] += 1;
            if labels[pos] < k {
                break;
            }
            labels[pos] = 0;
            pos += 1;
        }
    }
}

fn small_instance() -> impl Strategy<Value = (DataMatrix, usize)> {
    (2usize..=8, 1usize..=3, 1usize..=3).prop_flat_map(|(n, d, k)| {
        proptest::collection::vec(-5.0f64..5.0, n * d)
            .prop_map(move |v| (DataMatrix::new(n, d, v).unwrap(), k.min(n)))
    })
}

fn blobs(centers: &[f64], per: usize, sigma: f64, seed: u64) -> DataMatrix {
    let mut rng = SplitMix64::new(seed);
    let rows: Vec<Vec<f64>> = centers
        .iter()
        .flat_map(|&c| (0..per).map(|_| vec![c + sigma * rng.normal(), sigma * rng.normal()]).collect::<Vec<_>>())
        .collect();
    DataMatrix::from_rows(&rows).unwrap()
}

// Lloyd can settle in a local optimum even with 8 restarts, so exact
// agreement is checked as a rate over a fixed batch of random instances.
#[test]
fn kmeans_usually_reaches_exhaustive_optimum() {
    let mut rng = SplitMix64::new(99);
    let total = 1000;
    let mut hits = 0;
    for t in 0..total {
        let n = 2 + (rng.next_u64() % 7) as usize;
        let d = 1 + (rng.next_u64() % 3) as usize;
        let k = (1 + (rng.next_u64() % 3) as usize).min(n);
        let v: Vec<f64> = (0..n * d).map(|_| rng.uniform(-5.0, 5.0)).collect();
        let x = DataMatrix::new(n, d, v).unwrap();
        let model = kmeans_fit(&x, &KMeansConfig::new(k, t)).unwrap();
        let best = brute_force_inertia(&x, k);
        if (model.inertia - best).abs() <= 1e-9 * best.max(1.0) {
            hits += 1;
        }
    }
    assert!(hits as f64 / total as f64 >= 0.95, "{hits}/{total}");
}

#[test]
fn kmeans_reaches_optimum_on_separated_points() {
    for seed in 0..50 {
        let x = DataMatrix::from_rows(&[vec![0.0], vec![1.0], vec![9.0], vec![10.0]]).unwrap();
        let model = kmeans_fit(&x, &KMeansConfig::new(2, seed)).unwrap();
        assert!((model.inertia - brute_force_inertia(&x, 2)).abs() < 1e-12);
        assert!((model.inertia - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fcm_invariants_over_seeded_runs() {
    for seed in 0..20 {
        let x = blobs(&[0.0, 3.0, 6.0], 15, 0.8, seed);
        let model = fcm_fit(&x, &FcmConfig::new(3, seed)).unwrap();
        for it in &model.history {
            assert!(it.max_row_sum_error < 1e-9);
        }
        for w in model.history.windows(2) {
            assert!(w[1].objective <= w[0].objective * (1.0 + 1e-12), "seed {seed}");
        }
    }
}

#[test]
fn fcm_near_one_fuzzifier_is_nearly_hard() {
    let x = blobs(&[0.0, 10.0, 20.0], 20, 0.3, 4);
    let cfg = FcmConfig {
        fuzzifier: 1.05,
        ..FcmConfig::new(3, 4)
    };
    let model = fcm_fit(&x, &cfg).unwrap();
    for i in 0..x.n() {
        let max = model.membership_row(i).iter().cloned().fold(0.0, f64::max);
        assert!(max >= 0.99, "row {i}: {max}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn kmeans_never_beats_exhaustive_optimum((x, k) in small_instance(), seed in any::<u64>()) {
        let model = kmeans_fit(&x, &KMeansConfig::new(k, seed)).unwrap();
        let best = brute_force_inertia(&x, k);
        prop_assert!(model.inertia >= best - 1e-9 * best.max(1.0), "{} vs {}", model.inertia, best);
    }

    #[test]
    fn kmeans_history_is_monotone((x, k) in small_instance(), seed in any::<u64>()) {
        let model = kmeans_fit(&x, &KMeansConfig::new(k, seed)).unwrap();
        for w in model.inertia_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
        }
        let again = model.predict(&x);
        let inertia: f64 = (0..x.n()).map(|i| sq_dist(x.row(i), model.centroid(again[i]))).sum();
        prop_assert!((inertia - model.inertia).abs() <= 1e-9 * model.inertia.max(1.0));
    }

    #[test]
    fn pca_full_rank_reconstructs(rows in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 4), 6..20)) {
        let x = DataMatrix::from_rows(&rows).unwrap();
        let model = pca_fit(&x, ComponentSelector::Fixed(4)).unwrap();
        for w in model.eigenvalues.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        prop_assert!(model.eigenvalues.iter().all(|&l| l >= -1e-9));
        for r in x.rows() {
            let z = model.standardize_row(r);
            let back = model.inverse_transform_row(&model.transform_row(r).unwrap());
            for (a, b) in z.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn lda_predictions_ignore_positive_scaling(scales in proptest::collection::vec(0.1f64..10.0, 5)) {
        let corpus = balanced_corpus(12, 8);
        let rows: Vec<Vec<f64>> = corpus.iter().map(|s| s.params.measurements().to_array().to_vec()).collect();
        let x = DataMatrix::from_rows(&rows).unwrap();
        let y: Vec<usize> = corpus.iter().map(|s| s.label.ordinal()).collect();
        let base = lda_fit(&x, &y, 4).unwrap().predict(&x);
        let scaled = x.map(|j, v| v * scales[j]);
        prop_assert_eq!(lda_fit(&scaled, &y, 4).unwrap().predict(&scaled), base);
    }

    #[test]
    fn kappa_is_symmetric(pairs in proptest::collection::vec((0u8..4, 0u8..4), 2..60)) {
        let (a, b): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let ab = cohen_kappa(&a, &b).unwrap();
        prop_assert_eq!(ab, cohen_kappa(&b, &a).unwrap());
        let distinct = a.iter().collect::<std::collections::HashSet<_>>().len();
        if distinct > 1 {
            prop_assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
        }
    }
}

#[test]
fn kappa_identical_shape_labels() {
    let a: Vec<ShapeLabel> = ShapeLabel::ALL.iter().cycle().take(20).copied().collect();
    assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
}
