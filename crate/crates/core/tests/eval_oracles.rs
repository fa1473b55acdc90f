use gapnet::eval::stats::normal_cdf;
use gapnet::eval::{
    aggregate_runs, auc, delong_test, permutation_drops_with, permutation_importance, roc_curve,
    structural_components,
};
use gapnet::numerics::Matrix;
use gapnet::rng::stream;
use proptest::prelude::*;
use rand::Rng;

/// Scores on a coarse grid so ties are common.
fn random_instance(rng: &mut impl Rng, max_n: usize) -> (Vec<f64>, Vec<u8>) {
    loop {
        let n = rng.random_range(2..=max_n);
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        if labels.contains(&0) && labels.contains(&1) {
            let scores = (0..n)
                .map(|_| f64::from(rng.random_range(0..6u8)) / 5.0)
                .collect();
            return (scores, labels);
        }
    }
}

fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut twice = 0u64;
    let (mut m, mut n) = (0u64, 0u64);
    for (i, &yi) in labels.iter().enumerate() {
        if yi == 1 {
            m += 1;
        } else {
            n += 1;
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj == 0 {
                twice += if scores[i] > scores[j] {
                    2
                } else if scores[i] == scores[j] {
                    1
                } else {
                    0
                };
            }
        }
    }
    twice as f64 / (2 * m * n) as f64
}

#[test]
fn auc_equals_exhaustive_pair_count() {
    let mut rng = stream(4);
    for _ in 0..1000 {
        let (s, y) = random_instance(&mut rng, 12);
        let a = auc(&s, &y).unwrap();
        assert_eq!(a.to_bits(), pairwise_auc(&s, &y).to_bits(), "{s:?} {y:?}");
        let area = roc_curve(&s, &y).unwrap().area();
        assert!((area - a).abs() <= 1e-12);
    }
}

#[test]
fn worked_auc_example() {
    let a = auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap();
    assert_eq!(a, 0.75);
}

/// Components straight from their definition: pairwise comparisons.
fn brute_components(scores: &[f64], labels: &[u8]) -> (Vec<f64>, Vec<f64>) {
    let psi = |x: f64, y: f64| {
        if x > y {
            1.0
        } else if x == y {
            0.5
        } else {
            0.0
        }
    };
    let pos: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|p| *p.1 == 1)
        .map(|p| *p.0)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|p| *p.1 == 0)
        .map(|p| *p.0)
        .collect();
    let v10 = pos
        .iter()
        .map(|&x| neg.iter().map(|&y| psi(x, y)).sum::<f64>() / neg.len() as f64)
        .collect();
    let v01 = neg
        .iter()
        .map(|&y| pos.iter().map(|&x| psi(x, y)).sum::<f64>() / pos.len() as f64)
        .collect();
    (v10, v01)
}

fn sample_cov(a: &[f64], b: &[f64]) -> f64 {
    if a.len() < 2 {
        return 0.0;
    }
    let ma = a.iter().sum::<f64>() / a.len() as f64;
    let mb = b.iter().sum::<f64>() / b.len() as f64;
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / (a.len() - 1) as f64
}

#[test]
fn delong_matches_brute_force_components() {
    let mut rng = stream(12);
    let mut checked = 0;
    while checked < 200 {
        let (sa, y) = random_instance(&mut rng, 12);
        let sb: Vec<f64> = (0..y.len())
            .map(|_| f64::from(rng.random_range(0..6u8)) / 5.0)
            .collect();
        let (a10, a01) = brute_components(&sa, &y);
        let (b10, b01) = brute_components(&sb, &y);
        let (c10, c01) = structural_components(&sa, &y).unwrap();
        for (u, v) in a10.iter().chain(&a01).zip(c10.iter().chain(&c01)) {
            assert!((u - v).abs() <= 1e-10);
        }
        let (m, n) = (a10.len() as f64, a01.len() as f64);
        let var_a = sample_cov(&a10, &a10) / m + sample_cov(&a01, &a01) / n;
        let var_b = sample_cov(&b10, &b10) / m + sample_cov(&b01, &b01) / n;
        let cov = sample_cov(&a10, &b10) / m + sample_cov(&a01, &b01) / n;
        let Ok(r) = delong_test(&sa, &sb, &y) else {
            assert!((var_a + var_b - 2.0 * cov).abs() <= 1e-10);
            continue;
        };
        assert!((r.var_a - var_a).abs() <= 1e-10);
        assert!((r.var_b - var_b).abs() <= 1e-10);
        assert!((r.covariance - cov).abs() <= 1e-10);
        assert!((r.variance_diff - (var_a + var_b - 2.0 * cov)).abs() <= 1e-10);
        let p = 2.0 * (1.0 - normal_cdf(r.z.abs()));
        assert!((r.p - p).abs() <= 1e-12, "{} vs {p}", r.p);
        checked += 1;
    }
}

#[test]
fn identical_scores_give_zero_z_and_unit_p() {
    let mut rng = stream(5);
    for _ in 0..100 {
        let (s, y) = random_instance(&mut rng, 12);
        let r = delong_test(&s, &s, &y).unwrap();
        assert_eq!(r.z, 0.0);
        assert_eq!(r.p, 1.0);
    }
}

#[test]
fn permutation_drop_matches_exhaustive_average() {
    // one informative column read by a hard threshold, one ignored column
    let rows: Vec<Vec<f64>> = (0..8)
        .map(|r| vec![r as f64, (7 - r) as f64 * 0.3])
        .collect();
    let labels: Vec<u8> = vec![0, 0, 1, 0, 1, 1, 0, 1];
    let x = Matrix::from_rows(&rows).unwrap();
    let score = |m: &Matrix| -> gapnet::Result<Vec<f64>> {
        Ok((0..m.rows())
            .map(|r| f64::from(m.get(r, 0) >= 3.5))
            .collect())
    };
    let baseline = auc(&score(&x).unwrap(), &labels).unwrap();

    let mut perms = Vec::new();
    permutations(&mut (0..8).collect(), 0, &mut perms);
    assert_eq!(perms.len(), 40320);
    let exhaustive: f64 = perms
        .iter()
        .map(|p| {
            let scores: Vec<f64> = (0..8).map(|r| f64::from(rows[p[r]][0] >= 3.5)).collect();
            baseline - auc(&scores, &labels).unwrap()
        })
        .sum::<f64>()
        / perms.len() as f64;

    let mut next = 0;
    let (drops, constant) = permutation_drops_with(&score, &x, &labels, 0, perms.len(), &mut |p| {
        p.copy_from_slice(&perms[next]);
        next += 1;
    })
    .unwrap();
    assert!(!constant);
    let mean = gapnet::eval::stats::mean(&drops);
    assert!((mean - exhaustive).abs() <= 1e-10, "{mean} vs {exhaustive}");

    let dead = permutation_importance(&score, &x, &labels, 1, 50, &mut stream(1)).unwrap();
    assert!(dead.abs() <= 1e-12);
}

fn permutations(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

#[test]
fn aggregate_is_order_independent() {
    let mut rng = stream(2);
    let mut curves = Vec::new();
    let mut aucs = Vec::new();
    for _ in 0..7 {
        let (s, y) = random_instance(&mut rng, 12);
        aucs.push(auc(&s, &y).unwrap());
        curves.push(roc_curve(&s, &y).unwrap());
    }
    let a = aggregate_runs("m", &curves, &aucs, 0.02).unwrap();
    curves.reverse();
    aucs.reverse();
    let b = aggregate_runs("m", &curves, &aucs, 0.02).unwrap();
    assert!((a.auc_mean - b.auc_mean).abs() <= 1e-12);
    assert!((a.auc_std - b.auc_std).abs() <= 1e-12);
    for (u, v) in a.tpr_mean.iter().zip(&b.tpr_mean) {
        assert!((u - v).abs() <= 1e-12);
    }
    assert_eq!(a.histogram, b.histogram);
}

fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    prop::collection::vec((0u8..8, any::<bool>()), 2..30)
        .prop_filter("both classes", |v| {
            v.iter().any(|p| p.1) && v.iter().any(|p| !p.1)
        })
        .prop_map(|v| {
            v.into_iter()
                .map(|(s, y)| (f64::from(s) / 7.0, u8::from(y)))
                .unzip()
        })
}

proptest! {
    #[test]
    fn swapping_labels_mirrors_auc((s, y) in instance()) {
        let flipped: Vec<u8> = y.iter().map(|v| 1 - v).collect();
        let a = auc(&s, &y).unwrap();
        prop_assert!((a + auc(&s, &flipped).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_transform_keeps_auc((s, y) in instance()) {
        let t: Vec<f64> = s.iter().map(|v| (3.0 * v).exp() - 2.0).collect();
        prop_assert_eq!(auc(&s, &y).unwrap(), auc(&t, &y).unwrap());
    }

    #[test]
    fn auc_lies_in_unit_interval((s, y) in instance()) {
        let a = auc(&s, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn roc_curve_is_monotone((s, y) in instance()) {
        let c = roc_curve(&s, &y).unwrap();
        prop_assert_eq!((c.points[0].fpr, c.points[0].tpr), (0.0, 0.0));
        let last = c.points.last().unwrap();
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for w in c.points.windows(2) {
            prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
        }
    }

    #[test]
    fn delong_is_antisymmetric((s, y) in instance(), shift in prop::collection::vec(0u8..8, 30)) {
        let t: Vec<f64> = shift.iter().take(s.len()).map(|v| f64::from(*v) / 7.0).collect();
        if let (Ok(ab), Ok(ba)) = (delong_test(&s, &t, &y), delong_test(&t, &s, &y)) {
            prop_assert!((ab.z + ba.z).abs() < 1e-12);
            prop_assert!((ab.p - ba.p).abs() < 1e-12);
            prop_assert!(ab.variance_diff >= 0.0);
        }
    }
}
