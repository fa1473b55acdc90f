use gapnet::clustering::signature_clusters;
use gapnet::dataset::{split, GappedDataset};
use gapnet::gapnet::{run_split, Classifier, ModelKind, PipelineOptions, SavedModel, TrainConfig};
use gapnet::numerics::sigmoid;
use gapnet::rng::stream;
use gapnet::synth::{feature_names, gapped_madelon, inject_gaps, GapBlock, GapPattern};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// 60 rows, 6 features, two missingness blocks leaving rows 20..40 complete.
fn small_gapped(seed: u64) -> GappedDataset {
    let mut rng = stream(seed);
    let (n, f) = (60, 6);
    let labels: Vec<u8> = (0..n).map(|r| (r % 2) as u8).collect();
    let values: Vec<f64> = (0..n * f)
        .map(|i| {
            let noise: f64 = StandardNormal.sample(&mut rng);
            noise + if labels[i / f] == 1 { 0.8 } else { -0.8 }
        })
        .collect();
    let ds = GappedDataset::new(feature_names(f), values, vec![true; n * f], labels).unwrap();
    let pattern = GapPattern {
        blocks: vec![
            GapBlock {
                rows: (0, 20),
                features: (0, 4),
            },
            GapBlock {
                rows: (40, 60),
                features: (4, 6),
            },
        ],
    };
    inject_gaps(&ds, &pattern).unwrap()
}

fn quick(epochs: usize, seed: u64) -> PipelineOptions {
    PipelineOptions {
        train: TrainConfig {
            epochs,
            seed,
            ..TrainConfig::default()
        },
        compare_freeze_modes: true,
        ..PipelineOptions::default()
    }
}

#[test]
fn test_rows_never_reach_training() {
    let ds = small_gapped(1);
    let plan = signature_clusters(&ds);
    assert_eq!(plan.clusters.len(), 2);
    let mut rng = stream(99);
    for i in 0..1000u64 {
        let frac = rng.random_range(0.1..0.6);
        let sp = split(&ds, frac, i, i % 2 == 0).unwrap();
        assert!(sp
            .test_rows
            .iter()
            .all(|&r| ds.row_has(r, &(0..6).collect::<Vec<_>>())));
        let out = run_split(&ds, &plan, &sp, &quick(1, i)).unwrap();
        for r in &sp.test_rows {
            assert!(
                out.training_rows_seen.binary_search(r).is_err(),
                "row {r} leaked"
            );
        }
        assert!(out.frozen_bodies_unchanged.iter().all(|&b| b));
    }
}

#[test]
fn gapped_madelon_training_set_sizes() {
    let ds = gapped_madelon(3).unwrap();
    let plan = signature_clusters(&ds);
    let sp = split(&ds, 0.2, 5, true).unwrap();
    assert_eq!((sp.test_rows.len(), sp.train_rows.len()), (20, 980));
    let out = run_split(&ds, &plan, &sp, &quick(1, 0)).unwrap();
    let sizes: Vec<usize> = out.stage1.iter().map(|s| s.result.train_rows).collect();
    assert_eq!(sizes, vec![530, 530]);
    assert_eq!(out.vanilla.as_ref().unwrap().train_rows, 80);
    assert_eq!(out.gapnet.as_ref().unwrap().train_rows, 80);
}

#[test]
fn fused_score_equals_manual_composition() {
    let ds = small_gapped(2);
    let plan = signature_clusters(&ds);
    let sp = split(&ds, 0.3, 1, true).unwrap();
    let out = run_split(&ds, &plan, &sp, &quick(5, 3)).unwrap();
    let saved = &out.gapnet.as_ref().unwrap().model;
    let ModelKind::GapNet(model) = &saved.model else {
        panic!("expected a fused model")
    };
    let stats = saved.normalization.as_ref().unwrap();
    for (k, &row) in sp.test_rows.iter().enumerate() {
        let mut z = model.fusion.biases[0];
        let mut w = 0;
        for body in &model.bodies {
            let mut h: Vec<f64> = body
                .cluster
                .features
                .iter()
                .map(|&c| (ds.get(row, c).unwrap() - stats.mean[c]) / stats.std[c])
                .collect();
            for layer in body.net.layers() {
                h = (0..layer.fan_out())
                    .map(|j| {
                        let s: f64 = h
                            .iter()
                            .enumerate()
                            .map(|(i, v)| v * layer.weights.get(i, j))
                            .sum();
                        layer.activation.apply(s + layer.biases[j])
                    })
                    .collect();
            }
            for v in h {
                z += v * model.fusion.weights.get(w, 0);
                w += 1;
            }
        }
        let expect = sigmoid(z);
        let got = out.gapnet.as_ref().unwrap().scores[k];
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }
}

#[test]
fn saved_models_round_trip_bit_for_bit() {
    let ds = small_gapped(4);
    let plan = signature_clusters(&ds);
    let sp = split(&ds, 0.3, 2, true).unwrap();
    let out = run_split(&ds, &plan, &sp, &quick(10, 6)).unwrap();
    let models = [
        out.vanilla.unwrap(),
        out.gapnet.unwrap(),
        out.gapnet_alt.unwrap(),
    ];
    let dir = tempfile::tempdir().unwrap();
    for m in &models {
        let path = dir.path().join(format!("{}.json", m.name));
        m.model.save(&path).unwrap();
        let back = SavedModel::load(&path).unwrap();
        assert_eq!(&back, &m.model);
        let again = back.predict_dataset(&ds, &sp.test_rows).unwrap();
        assert!(again
            .iter()
            .zip(&m.scores)
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }
    assert_eq!(models[2].name, "gapnet_finetuned");
}

#[test]
fn finetuning_moves_the_bodies_and_freezing_does_not() {
    let ds = small_gapped(5);
    let plan = signature_clusters(&ds);
    let sp = split(&ds, 0.3, 3, true).unwrap();
    let out = run_split(&ds, &plan, &sp, &quick(5, 8)).unwrap();
    let body = |m: &SavedModel| match &m.model {
        ModelKind::GapNet(g) => g.body_params(),
        _ => unreachable!(),
    };
    let frozen = body(&out.gapnet.as_ref().unwrap().model);
    let tuned = body(&out.gapnet_alt.as_ref().unwrap().model);
    let stage1: Vec<f64> = out
        .stage1
        .iter()
        .flat_map(|s| match &s.result.model.model {
            ModelKind::Network(n) => n.net.without_head().unwrap().flat_params(),
            _ => unreachable!(),
        })
        .collect();
    assert_eq!(frozen, stage1);
    assert_ne!(tuned, stage1);
    assert_eq!(out.frozen_bodies_unchanged, vec![true]);
}

#[test]
fn model_rejects_a_dataset_missing_its_features() {
    let ds = small_gapped(6);
    let plan = signature_clusters(&ds);
    let sp = split(&ds, 0.3, 3, true).unwrap();
    let out = run_split(&ds, &plan, &sp, &quick(2, 1)).unwrap();
    let model = out.gapnet.unwrap().model;
    let fewer = ds.select_features(&[0, 1, 2]).unwrap();
    assert!(model.predict_dataset(&fewer, &[25]).is_err());
    let g: &dyn Classifier = model.classifier();
    assert_eq!(g.input_features(), (0..6).collect::<Vec<_>>());
}
