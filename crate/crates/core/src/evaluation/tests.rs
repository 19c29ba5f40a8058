use super::*;
use crate::dataset::{generate_planted, split, Concept, Overlap, PlantedConcept, PlantedSpec};
use crate::linalg::Matrix;
use crate::rng::stream_rng;
use rand::Rng;
use rand_distr::StandardNormal;

fn planted(n: usize, seed: u64) -> LabeledDataset {
    let mut y = PlantedConcept::new("y", 3, 21, 2.0, 0.6);
    y.class_weights = vec![0.5, 0.3, 0.2];
    let mut z = PlantedConcept::new("z", 4, 22, 2.0, 0.6);
    z.class_weights = vec![0.4, 0.3, 0.2, 0.1];
    let spec = PlantedSpec { dim: 8, signal_dim: 2, concepts: vec![y, z], overlap: Overlap::Orthogonal };
    generate_planted(&spec, n, seed).unwrap().0
}

fn three_way(ds: &LabeledDataset) -> (LabeledDataset, LabeledDataset, LabeledDataset) {
    split(ds, &crate::dataset::SplitSpec::stratified(1, [0.4, 0.3, 0.3])).unwrap()
}

fn cfg(estimators: Vec<EstimatorKind>) -> ProtocolConfig {
    ProtocolConfig { estimators, pairs: vec![ConceptPair::new("y", "z")], ..ProtocolConfig::default() }
}

fn ok(entries: &[ReportEntry]) -> Vec<&MetricReport> {
    entries.iter().map(|e| e.report().unwrap_or_else(|| panic!("{:?}", e.error()))).collect()
}

#[test]
fn boundary_projectors_hit_table_bounds() {
    let ds = planted(3000, 1);
    let (_, pt, te) = three_way(&ds);
    let probe = TrainConfig::default();
    let b = compute_bounds(&pt, &te, "y", "z", &probe).unwrap();

    let (full, _) = evaluate_projector(&Projector::identity(8), &pt, &te, "y", "z", &probe).unwrap();
    assert_eq!(full.retention, b.ambient_acc_y);
    assert_eq!(full.leakage, b.majority_y);
    assert_eq!(full.purity, b.ambient_err_yother);
    assert_eq!(full.interference, b.majority_err_yother);

    let (none, _) = evaluate_projector(&Projector::zero(8), &pt, &te, "y", "z", &probe).unwrap();
    assert_eq!(none.retention, b.majority_y);
    assert_eq!(none.leakage, b.ambient_acc_y);
    assert_eq!(none.purity, b.majority_err_yother);
    assert_eq!(none.interference, b.ambient_err_yother);
}

#[test]
fn containment_and_disentanglement_agree_with_joint_evaluation() {
    let ds = planted(1500, 2);
    let (st, pt, te) = three_way(&ds);
    let s = crate::estimators::estimate_leace(&st, "y", None).unwrap();
    let probe = TrainConfig::default();
    let (m, _) = evaluate_projector(s.projector(), &pt, &te, "y", "z", &probe).unwrap();
    assert_eq!(containment(s.projector(), &pt, &te, "y", &probe).unwrap(), (m.retention, m.leakage));
    assert_eq!(disentanglement(s.projector(), &pt, &te, "z", &probe).unwrap(), (m.purity, m.interference));
}

#[test]
fn null_labels_give_majority_level_ambient_accuracy() {
    let mut rng = stream_rng(5, 0);
    let n = 20_000;
    let x = Matrix::from_fn(n, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
    let y: Vec<u32> = (0..n).map(|_| rng.random_range(0..2)).collect();
    let z: Vec<u32> = (0..n).map(|_| rng.random_range(0..3)).collect();
    let ds = LabeledDataset::new(
        x,
        vec![Concept::with_numbered_classes("y", y, 2).unwrap(), Concept::with_numbered_classes("z", z, 3).unwrap()],
        "",
    )
    .unwrap();
    let (st, pt, te) = three_way(&ds);
    let b = compute_bounds(&pt, &te, "y", "z", &TrainConfig::default()).unwrap();
    assert!((b.ambient_acc_y - b.majority_y).abs() <= 2.0, "{b:?}");

    // An MLR subspace fitted on noise retains nothing beyond the majority.
    let splits = Splits::new(&st, &pt, &te).unwrap();
    let r = run_protocol(&splits, &cfg(vec![EstimatorKind::Mlr])).unwrap();
    let r = ok(&r)[0];
    assert!((r.retention() - r.bounds.majority_y).abs() <= 2.0, "{r:?}");
}

#[test]
fn single_estimator_single_pair_gives_one_full_report() {
    let ds = planted(1200, 3);
    let (st, pt, te) = three_way(&ds);
    let splits = Splits::new(&st, &pt, &te).unwrap();
    let entries = run_protocol(&splits, &cfg(vec![EstimatorKind::Cpca])).unwrap();
    assert_eq!(entries.len(), 1);
    let r = ok(&entries)[0];
    assert_eq!(r.estimator, EstimatorKind::Cpca);
    assert_eq!((r.concept.as_str(), r.other_concept.as_str()), ("y", "z"));
    for v in [r.retention(), r.leakage(), r.purity(), r.interference()] {
        assert!((0.0..=100.0).contains(&v));
    }
    assert!(r.bounds.majority_y <= r.bounds.ambient_acc_y);
    assert_eq!(r.split.test, te.n());
}

#[test]
fn output_is_identical_for_any_worker_count() {
    let ds = planted(900, 4);
    let (st, pt, te) = three_way(&ds);
    let splits = Splits::new(&st, &pt, &te).unwrap();
    let mut c = cfg(EstimatorKind::ALL.to_vec());
    c.seeds = vec![1, 2];
    c.pairs.push(ConceptPair::new("z", "y"));
    let a = reports_to_json(&run_protocol(&splits, &c).unwrap()).unwrap();
    c.jobs = 4;
    let b = reports_to_json(&run_protocol(&splits, &c).unwrap()).unwrap();
    assert_eq!(a, b);
    let parsed: Vec<serde_json::Value> = serde_json::from_str(&a).unwrap();
    assert_eq!(parsed.len(), 12);
    assert_eq!(parsed[0]["concept"], "y");
    assert_eq!(parsed[6]["concept"], "z");
}

#[test]
fn rand_is_averaged_over_seeds() {
    let ds = planted(900, 5);
    let (st, pt, te) = three_way(&ds);
    let splits = Splits::new(&st, &pt, &te).unwrap();
    let mut c = cfg(vec![EstimatorKind::Rand]);
    c.seeds = vec![10, 11, 12];
    let entries = run_protocol(&splits, &c).unwrap();
    let r = ok(&entries)[0];
    assert_eq!(r.seeds, vec![10, 11, 12]);
    assert_eq!(r.per_seed.len(), 3);
    let mean = r.per_seed.iter().map(|s| s.metrics.retention).sum::<f64>() / 3.0;
    assert!((mean - r.retention()).abs() < 1e-12);
}

#[test]
fn overfit_leace_has_no_leakage() {
    let ds = planted(2000, 6);
    let splits = Splits::overfit(&ds);
    let entries = run_protocol(&splits, &cfg(vec![EstimatorKind::Leace])).unwrap();
    let r = ok(&entries)[0];
    assert!(r.leakage() <= r.bounds.majority_y + 0.5, "{r:?}");
}

#[test]
fn mismatched_class_sets_fail_their_slot_only() {
    let ds = planted(600, 7);
    let (st, pt, te) = three_way(&ds);
    let relabelled = LabeledDataset::new(
        te.features().clone(),
        vec![
            Concept::new("y", te.labels("y").unwrap().to_vec(), vec!["a".into(), "b".into(), "c".into()]).unwrap(),
            te.concept("z").unwrap().clone(),
        ],
        "",
    )
    .unwrap();
    let splits = Splits::new(&st, &pt, &relabelled).unwrap();
    let mut c = cfg(vec![EstimatorKind::Cov]);
    c.pairs = vec![ConceptPair::new("y", "z"), ConceptPair::new("z", "z")];
    let entries = run_protocol(&splits, &c).unwrap();
    assert_eq!(entries[0].error().unwrap().kind, "protocol");
    assert!(entries[1].report().is_some());
}

#[test]
fn invalid_configuration_is_rejected_up_front() {
    let ds = planted(300, 8);
    let splits = Splits::overfit(&ds);
    let mut c = cfg(vec![EstimatorKind::Leace]);
    c.dims = vec![9];
    assert!(matches!(run_protocol(&splits, &c), Err(Error::Dimension(_))));
    let mut c = cfg(vec![EstimatorKind::Leace]);
    c.pairs = vec![ConceptPair::new("y", "missing")];
    assert!(matches!(run_protocol(&splits, &c), Err(Error::UnknownConcept(_))));
    assert!(matches!(sweep_dimension(&splits, "y", "z", &[4, 2], &TrainConfig::default(), 1), Err(Error::Config(_))));
    assert!(matches!(sweep_dimension(&splits, "y", "z", &[4, 9], &TrainConfig::default(), 1), Err(Error::Dimension(_))));
}

#[test]
fn full_dimension_sweep_point_leaves_nothing_outside() {
    let ds = planted(1500, 9);
    let (st, pt, te) = three_way(&ds);
    let splits = Splits::new(&st, &pt, &te).unwrap();
    let reports = sweep_dimension(&splits, "y", "z", &[1, 2, 8], &TrainConfig::default(), 2).unwrap();
    assert_eq!(reports.iter().map(|r| r.dim).collect::<Vec<_>>(), vec![Some(1), Some(2), Some(8)]);
    let last = &reports[2];
    assert_eq!(last.rank, 8);
    assert_eq!(last.leakage(), last.bounds.majority_y);
    assert_eq!(last.interference(), last.bounds.majority_err_yother);
    assert_eq!(last.retention(), last.bounds.ambient_acc_y);
    assert_eq!(last.purity(), last.bounds.ambient_err_yother);
}

#[test]
fn csv_and_svg_outputs() {
    let ds = planted(600, 10);
    let splits = Splits::overfit(&ds);
    let entries = run_protocol(&splits, &cfg(vec![EstimatorKind::Cpca, EstimatorKind::Cov])).unwrap();
    let mut buf = Vec::new();
    reports_to_csv(&entries, &serde_json::json!({"k": 1}), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# csl ") && lines[0].ends_with("{\"k\":1}"));
    assert!(lines[1].starts_with("estimator,concept,other_concept,dim"));
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("CPCA,y,z,"));

    let svg = reports_to_svg(&entries, "{\"k\":1}");
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<circle").count(), 8);
    assert_eq!(svg.matches("stroke-dasharray").count(), 16);
}

#[test]
fn report_json_rounds_to_one_decimal() {
    let m = Metrics { retention: 12.345, leakage: 0.04, purity: 99.96, interference: 50.0 };
    let v = serde_json::to_value(m).unwrap();
    assert_eq!(v["retention"], 12.3);
    assert_eq!(v["leakage"], 0.0);
    assert_eq!(v["purity"], 100.0);
}
