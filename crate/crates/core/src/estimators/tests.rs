use super::*;
use crate::dataset::{generate_planted, Concept, Overlap, PlantedConcept, PlantedSpec};
use crate::linalg::{asymmetry, idempotency_residual, max_abs};
use crate::probing::{accuracy, majority_baseline, project_features, Side};
use nalgebra::{dmatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn dataset(x: Matrix, labels: Vec<u32>, c: usize) -> LabeledDataset {
    LabeledDataset::new(x, vec![Concept::with_numbered_classes("y", labels, c).unwrap()], "test").unwrap()
}

/// Gaussian blobs: class `c` centred at `means.column(c)`, unit noise times `noise`.
fn blobs(means: &Matrix, n: usize, noise: f64, seed: u64) -> LabeledDataset {
    let mut rng = stream_rng(seed, 9);
    let (d, c) = means.shape();
    let labels: Vec<u32> = (0..n).map(|i| (i % c) as u32).collect();
    let x = Matrix::from_fn(n, d, |i, j| means[(j, labels[i] as usize)] + noise * rng.sample::<f64, _>(StandardNormal));
    dataset(x, labels, c)
}

fn norm_of_projection(p: &Matrix, v: &DVector<f64>) -> f64 {
    (p * v).norm() / v.norm()
}

#[test]
fn kind_parsing() {
    assert_eq!("leace".parse::<EstimatorKind>().unwrap(), EstimatorKind::Leace);
    assert_eq!(EstimatorKind::Cpca.to_string(), "CPCA");
    assert!("pca".parse::<EstimatorKind>().is_err());
    assert_eq!(serde_json::to_string(&EstimatorKind::Mlr).unwrap(), "\"MLR\"");
}

#[test]
fn mlr_finds_separating_axis() {
    let means = dmatrix![-2.0, 2.0; 0.0, 0.0; 0.0, 0.0];
    let ds = blobs(&means, 400, 0.3, 1);
    let s = estimate_mlr(&ds, "y", &TrainConfig::default()).unwrap();
    let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    assert!(norm_of_projection(s.projector.onto(), &e1) >= 0.99);
    assert_eq!(s.rank(), 1);
    assert!(!s.projector.is_oblique());
}

#[test]
fn mlr_reports_budget_exhaustion() {
    let means = dmatrix![-1.0, 1.0, 0.0; 0.0, 1.0, -1.0];
    let ds = blobs(&means, 300, 1.0, 2);
    let cfg = TrainConfig { max_iter: 2, ..TrainConfig::default() };
    match estimate_mlr(&ds, "y", &cfg) {
        Err(Error::Fit { grad_norm, .. }) => assert!(grad_norm > 0.0),
        other => panic!("expected fit error, got {other:?}"),
    }
}

#[test]
fn lda_matches_fisher_direction() {
    let mu = [1.0, 0.5, -0.5, 0.0];
    let means = Matrix::from_fn(4, 2, |j, c| if c == 0 { mu[j] } else { -mu[j] });
    let ds = blobs(&means, 10_000, 1.0, 3);
    let s = estimate_lda(&ds, "y").unwrap();
    assert_eq!(s.rank(), 1);

    // Fisher closed form from the sample, via a plain dense inverse.
    let x = ds.features();
    let labels = ds.labels("y").unwrap();
    let mut sums = [DVector::zeros(4), DVector::zeros(4)];
    let mut counts = [0.0; 2];
    for (i, row) in x.row_iter().enumerate() {
        sums[labels[i] as usize] += row.transpose();
        counts[labels[i] as usize] += 1.0;
    }
    let m0 = &sums[0] / counts[0];
    let m1 = &sums[1] / counts[1];
    let mut sw = Matrix::zeros(4, 4);
    for (i, row) in x.row_iter().enumerate() {
        let d = row.transpose() - if labels[i] == 0 { &m0 } else { &m1 };
        sw += &d * d.transpose();
    }
    let fisher = sw.try_inverse().unwrap() * (&m0 - &m1);
    assert!(norm_of_projection(s.projector.onto(), &fisher) >= 0.99);
    let truth = DVector::from_row_slice(&mu);
    assert!(norm_of_projection(s.projector.onto(), &truth) >= 0.99);
}

#[test]
fn lda_without_between_class_spread_is_rank_zero() {
    // Each class consists of symmetric pairs, so all class means are 0.
    let x = dmatrix![1.0, 2.0; -1.0, -2.0; 3.0, -1.0; -3.0, 1.0; 0.5, 0.5; -0.5, -0.5];
    let ds = dataset(x, vec![0, 0, 1, 1, 2, 2], 3);
    assert_eq!(estimate_lda(&ds, "y").unwrap().rank(), 0);
}

#[test]
fn lda_rejects_zero_within_class_covariance() {
    let x = dmatrix![1.0, 0.0; 1.0, 0.0; 0.0, 1.0; 0.0, 1.0];
    let ds = dataset(x, vec![0, 0, 1, 1], 2);
    assert!(matches!(estimate_lda(&ds, "y"), Err(Error::DegenerateCovariance(_))));
}

#[test]
fn cpca_axis_centroids() {
    let x = dmatrix![1.0, 0.0, 0.0; 1.0, 0.0, 0.0; 0.0, 1.0, 0.0; 0.0, 1.0, 0.0];
    let ds = dataset(x, vec![0, 0, 1, 1], 2);
    let s = estimate_cpca(&ds, "y").unwrap();
    assert!(max_abs(&(s.projector.onto() - Matrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0])))) <= 1e-8);
}

#[test]
fn cpca_collinear_centroids() {
    let x = dmatrix![1.0, 2.0, 2.0; 1.0, 2.0, 2.0; 1.0, 2.0, 2.0];
    let ds = dataset(x, vec![0, 1, 2], 3);
    let s = estimate_cpca(&ds, "y").unwrap();
    assert_eq!(s.rank(), 1);
    let c = DVector::from_vec(vec![1.0, 2.0, 2.0]);
    assert!((norm_of_projection(s.projector.onto(), &c) - 1.0).abs() < 1e-12);
}

#[test]
fn cpca_counts_absent_classes() {
    let x = dmatrix![1.0, 0.0; 0.0, 1.0];
    let ds = dataset(x, vec![0, 2], 3);
    let s = estimate_cpca(&ds, "y").unwrap();
    assert_eq!(s.rank(), 2);
    assert_eq!(s.fit_stats["absent_classes"], json!(1));
}

#[test]
fn cov_two_class_direction() {
    let mu = [0.3, -1.0, 0.7];
    let means = Matrix::from_fn(3, 2, |j, c| if c == 0 { mu[j] } else { -mu[j] });
    let ds = blobs(&means, 10_000, 1.0, 4);
    let s = estimate_cov(&ds, "y").unwrap();
    assert_eq!(s.rank(), 1);
    let truth = DVector::from_row_slice(&mu);
    assert!(norm_of_projection(s.projector.onto(), &truth) >= 0.99);
}

#[test]
fn cov_rank_is_at_most_classes_minus_one() {
    let means = Matrix::from_fn(6, 4, |j, c| ((j * 7 + c * 3) % 5) as f64 - 2.0);
    let ds = blobs(&means, 800, 1.0, 5);
    assert_eq!(estimate_cov(&ds, "y").unwrap().rank(), 3);
}

#[test]
fn cov_of_constant_features_is_rank_zero() {
    let x = Matrix::from_fn(40, 3, |_, j| j as f64);
    let ds = dataset(x, (0..40).map(|i| (i % 2) as u32).collect(), 2);
    assert_eq!(estimate_cov(&ds, "y").unwrap().rank(), 0);
}

#[test]
fn leace_without_signal_is_zero() {
    let x = dmatrix![1.0, 2.0; -1.0, -2.0; 3.0, -1.0; -3.0, 1.0; 0.5, 0.25; -0.5, -0.25];
    let ds = dataset(x, vec![0, 0, 1, 1, 2, 2], 3);
    let s = estimate_leace(&ds, "y", None).unwrap();
    assert_eq!(s.rank(), 0);
    assert_eq!(s.projector.onto(), &Matrix::zeros(2, 2));
    assert_eq!(s.projector.complement(), &Matrix::identity(2, 2));
}

#[test]
fn leace_rejects_constant_features() {
    let x = Matrix::from_element(10, 3, 1.5);
    let ds = dataset(x, (0..10).map(|i| (i % 2) as u32).collect(), 2);
    assert!(matches!(estimate_leace(&ds, "y", None), Err(Error::DegenerateCovariance(_))));
}

#[test]
fn leace_is_an_oblique_projector_with_requested_rank() {
    let means = Matrix::from_fn(6, 5, |j, c| ((j * 3 + c * 5) % 7) as f64 - 3.0);
    let ds = blobs(&means, 600, 0.8, 6);
    let full = estimate_leace(&ds, "y", None).unwrap();
    assert_eq!(full.rank(), 4);
    assert!(full.projector.is_oblique());
    assert!(idempotency_residual(full.projector.onto()) <= 1e-10);
    for m in 1..=6 {
        let s = estimate_leace(&ds, "y", Some(m)).unwrap();
        assert_eq!(s.rank(), m);
        assert_eq!(s.requested_dim, Some(m));
    }
    assert_eq!(estimate_leace(&ds, "y", Some(6)).unwrap().projector.onto(), &Matrix::identity(6, 6));
    assert!(matches!(estimate_leace(&ds, "y", Some(0)), Err(Error::Dimension(_))));
    assert!(matches!(estimate_leace(&ds, "y", Some(7)), Err(Error::Dimension(_))));
}

#[test]
fn leace_erasure_defeats_a_probe_on_seen_data() {
    let spec = PlantedSpec {
        dim: 12,
        signal_dim: 4,
        concepts: vec![PlantedConcept::new("y", 5, 11, 2.0, 0.5)],
        overlap: Overlap::Orthogonal,
    };
    let (ds, _) = generate_planted(&spec, 2000, 7).unwrap();
    let s = estimate_leace(&ds, "y", None).unwrap();
    let labels = ds.labels("y").unwrap();
    let erased = project_features(&s, ds.features(), Side::Complement).unwrap();
    let probe = crate::probing::train_probe(&erased, labels, 5, &TrainConfig::default()).unwrap();
    let leak = accuracy(&probe, &erased, labels).unwrap();
    let maj = majority_baseline(labels).unwrap();
    assert!(leak <= maj + 0.005, "leakage {leak} vs majority {maj}");
}

/// Direct dense LEACE from raw rows, sharing no code with the streaming path.
fn naive_leace(x: &Matrix, labels: &[u32], c: usize) -> Matrix {
    let (n, d) = x.shape();
    let nf = n as f64;
    let mean = x.row_mean();
    let mut y = Matrix::zeros(n, c);
    for (i, &l) in labels.iter().enumerate() {
        y[(i, l as usize)] = 1.0;
    }
    let ymean = y.row_mean();
    let xc = Matrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let yc = Matrix::from_fn(n, c, |i, j| y[(i, j)] - ymean[j]);
    let sxx = xc.transpose() * &xc / nf;
    let sxy = xc.transpose() * &yc / nf;
    let eig = SymmetricEigen::new(sxx);
    let lmax = eig.eigenvalues.max();
    let mut w = Matrix::zeros(d, d);
    let mut w_pinv = Matrix::zeros(d, d);
    for k in 0..d {
        let l = eig.eigenvalues[k];
        if l > 1e-6 * lmax {
            let v = eig.eigenvectors.column(k);
            w += v * v.transpose() / l.sqrt();
            w_pinv += v * v.transpose() * l.sqrt();
        }
    }
    // Left singular vectors of W·Σxy are eigenvectors of W·Σxy·Σxyᵀ·W.
    let b = &w * sxy;
    let gram = SymmetricEigen::new(&b * b.transpose());
    let mut uut = Matrix::zeros(d, d);
    for k in 0..d {
        if gram.eigenvalues[k] > (1e-6 * 0.5f64).powi(2) {
            let col = gram.eigenvectors.column(k);
            uut += col * col.transpose();
        }
    }
    w_pinv * uut * w
}

#[test]
fn leace_matches_naive_recomputation() {
    let mut rng = stream_rng(77, 0);
    for trial in 0..20 {
        let d = rng.random_range(2..=8);
        let c = rng.random_range(2..=4);
        let n = rng.random_range(40..=200);
        let means = Matrix::from_fn(d, c, |_, _| 2.0 * rng.sample::<f64, _>(StandardNormal));
        let ds = blobs(&means, n, 1.0, trial);
        let p = estimate_leace(&ds, "y", None).unwrap();
        let q = naive_leace(ds.features(), ds.labels("y").unwrap(), c);
        let diff = max_abs(&(p.projector.onto() - q));
        assert!(diff <= 1e-8, "trial {trial}: max diff {diff:e}");
    }
}

#[test]
fn rand_is_seeded_and_generic() {
    let a = estimate_rand(10, 3, 5, "y").unwrap();
    let b = estimate_rand(10, 3, 5, "y").unwrap();
    let c = estimate_rand(10, 3, 6, "y").unwrap();
    assert_eq!(a.projector, b.projector);
    assert_ne!(a.projector, c.projector);
    assert_eq!(a.rank(), 3);
    assert_eq!(a.seed, Some(5));
    assert!(matches!(estimate_rand(3, 4, 0, "y"), Err(Error::Dimension(_))));
    assert!(matches!(estimate_rand(3, 0, 0, "y"), Err(Error::Dimension(_))));
}

#[test]
fn single_class_is_rejected() {
    let ds = dataset(dmatrix![1.0; 2.0; 3.0], vec![1, 1, 1], 2);
    for kind in [EstimatorKind::Mlr, EstimatorKind::Lda, EstimatorKind::Cov, EstimatorKind::Leace] {
        assert!(estimate(kind, &ds, "y", &EstimatorOptions::default()).is_err(), "{kind}");
    }
}

#[test]
fn mlr_subspace_is_scale_covariant_without_ridge() {
    // With a ridge the optimum is not scale-equivariant, so this uses λ = 0
    // on overlapping classes where the unpenalised optimum is finite.
    let means = dmatrix![1.0, -1.0, 0.0; 0.0, 1.0, -1.0; 0.5, 0.0, 0.0];
    let ds = blobs(&means, 600, 1.5, 8);
    let cfg = TrainConfig { ridge: 0.0, grad_tol: 1e-10, max_iter: 5000, ..TrainConfig::default() };
    let base = estimate_mlr(&ds, "y", &cfg).unwrap();
    assert_eq!(base.rank(), 2);
    for s in [0.1, 3.0, 25.0] {
        let scaled = dataset(ds.features() * s, ds.labels("y").unwrap().to_vec(), 3);
        let other = estimate_mlr(&scaled, "y", &cfg).unwrap();
        let diff = max_abs(&(base.projector.onto() - other.projector.onto()));
        assert!(diff <= 1e-6, "scale {s}: {diff:e}");
    }
}

fn random_fixture(seed: u64, d: usize, c: usize, n: usize) -> LabeledDataset {
    let mut rng = stream_rng(seed, 1);
    let means = Matrix::from_fn(d, c, |_, _| rng.sample::<f64, _>(StandardNormal));
    blobs(&means, n, 1.0, seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn moment_estimators_are_scale_invariant(seed in 0u64..1000, s in 0.01f64..100.0) {
        let ds = random_fixture(seed, 5, 3, 120);
        let scaled = dataset(ds.features() * s, ds.labels("y").unwrap().to_vec(), 3);
        for kind in [EstimatorKind::Lda, EstimatorKind::Cpca, EstimatorKind::Cov, EstimatorKind::Leace] {
            let a = estimate(kind, &ds, "y", &EstimatorOptions::default()).unwrap();
            let b = estimate(kind, &scaled, "y", &EstimatorOptions::default()).unwrap();
            prop_assert_eq!(a.rank(), b.rank());
            let diff = max_abs(&(a.projector.onto() - b.projector.onto()));
            prop_assert!(diff <= 1e-6, "{} at scale {}: {:e}", kind, s, diff);
        }
    }

    #[test]
    fn centroid_estimators_ignore_class_order(seed in 0u64..1000, rot in 1usize..4) {
        let ds = random_fixture(seed, 6, 4, 100);
        let permuted: Vec<u32> = ds.labels("y").unwrap().iter().map(|&l| ((l as usize + rot) % 4) as u32).collect();
        let other = dataset(ds.features().clone(), permuted, 4);
        for kind in [EstimatorKind::Cpca, EstimatorKind::Cov] {
            let a = estimate(kind, &ds, "y", &EstimatorOptions::default()).unwrap();
            let b = estimate(kind, &other, "y", &EstimatorOptions::default()).unwrap();
            let diff = max_abs(&(a.projector.onto() - b.projector.onto()));
            prop_assert!(diff <= 1e-8, "{}: {:e}", kind, diff);
        }
    }

    #[test]
    fn projector_invariants_hold(seed in 0u64..10_000, d in 2usize..12, c in 2usize..6) {
        let ds = random_fixture(seed, d, c, 80);
        for kind in EstimatorKind::ALL {
            if kind == EstimatorKind::Rand && c > d {
                continue;
            }
            let opts = EstimatorOptions { seed: Some(seed), ..EstimatorOptions::default() };
            let s = match estimate(kind, &ds, "y", &opts) {
                Ok(s) => s,
                // MLR may legitimately exhaust its budget on separable draws.
                Err(Error::Fit { .. }) if kind == EstimatorKind::Mlr => continue,
                Err(e) => return Err(TestCaseError::fail(format!("{kind}: {e}"))),
            };
            let p = s.projector.onto();
            prop_assert!(idempotency_residual(p) <= 1e-6);
            prop_assert_eq!(s.projector.is_oblique(), kind == EstimatorKind::Leace);
            if kind != EstimatorKind::Leace {
                prop_assert!(asymmetry(p) <= 1e-6);
            }
            prop_assert!(s.rank() <= c.min(d));
        }
    }
}

#[test]
fn artifact_round_trip() {
    let ds = random_fixture(3, 5, 3, 90);
    for kind in [EstimatorKind::Leace, EstimatorKind::Cpca, EstimatorKind::Rand] {
        let opts = EstimatorOptions { seed: Some(4), dim: None, ..EstimatorOptions::default() };
        let s = estimate(kind, &ds, "y", &opts).unwrap();
        let bytes = subspace_to_bytes(&s, "{\"cmd\":\"test\"}").unwrap();
        assert_eq!(&bytes[..4], SUBSPACE_MAGIC);
        let (back, prov) = subspace_from_bytes(&bytes).unwrap();
        assert_eq!(back, s);
        assert_eq!(prov, "{\"cmd\":\"test\"}");
    }
}

#[test]
fn artifact_corruption_is_reported() {
    let ds = random_fixture(3, 4, 2, 50);
    let s = estimate_cov(&ds, "y").unwrap();
    let bytes = subspace_to_bytes(&s, "").unwrap();

    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(subspace_from_bytes(&bad), Err(Error::Format { offset: 0, .. })));

    assert!(matches!(subspace_from_bytes(&bytes[..bytes.len() - 3]), Err(Error::Format { .. })));

    // Doubling the stored matrix breaks idempotency.
    let header_end = bytes.len() - 8 * 16;
    let mut scaled = bytes[..header_end].to_vec();
    for chunk in bytes[header_end..].chunks_exact(8) {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        scaled.extend_from_slice(&(2.0 * v).to_le_bytes());
    }
    assert!(matches!(subspace_from_bytes(&scaled), Err(Error::NotIdempotent { .. })));
}
