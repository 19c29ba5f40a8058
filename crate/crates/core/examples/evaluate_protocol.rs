//! The four-metric protocol for all six estimators on a planted fixture,
//! written out as JSON and CSV.
//!
//! `cargo run --release --example evaluate_protocol`

use csl::dataset::{generate_planted, split, Overlap, PlantedConcept, PlantedSpec, SplitSpec};
use csl::evaluation::{reports_to_csv, reports_to_json, run_protocol, ConceptPair, ProtocolConfig, Splits};

fn main() -> csl::Result<()> {
    let spec = PlantedSpec {
        dim: 32,
        signal_dim: 4,
        concepts: vec![PlantedConcept::new("phone", 6, 1, 1.0, 0.6), PlantedConcept::new("speaker", 4, 2, 1.0, 0.6)],
        overlap: Overlap::Shared { dims: 1 },
    };
    let (ds, _) = generate_planted(&spec, 6000, 2)?;
    let (st, pt, te) = split(&ds, &SplitSpec::stratified(2, [0.5, 0.25, 0.25]))?;
    let splits = Splits::new(&st, &pt, &te)?;
    let cfg = ProtocolConfig {
        pairs: vec![ConceptPair::new("phone", "speaker"), ConceptPair::new("speaker", "phone")],
        jobs: 4,
        ..ProtocolConfig::default()
    };
    let entries = run_protocol(&splits, &cfg)?;

    println!("{:<8} {:<6} {:>9} {:>8} {:>7} {:>12}", "concept", "est", "retention", "leakage", "purity", "interference");
    for r in entries.iter().filter_map(|e| e.report()) {
        println!(
            "{:<8} {:<6} {:>9.1} {:>8.1} {:>7.1} {:>12.1}",
            r.concept,
            r.estimator,
            r.retention(),
            r.leakage(),
            r.purity(),
            r.interference()
        );
    }
    let b = &entries[0].report().unwrap().bounds;
    println!("phone bounds: ambient {:.1}, majority {:.1}", b.ambient_acc_y, b.majority_y);

    let json = reports_to_json(&entries)?;
    println!("JSON: {} bytes", json.len());
    let mut csv = Vec::new();
    reports_to_csv(&entries, &serde_json::json!({"example": "evaluate_protocol"}), &mut csv)?;
    println!("{}", String::from_utf8(csv).unwrap().lines().take(3).collect::<Vec<_>>().join("\n"));
    Ok(())
}
