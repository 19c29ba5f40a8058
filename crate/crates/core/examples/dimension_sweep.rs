//! LEACE dimension sweep on a many-class concept whose space-train split
//! only sees some of the classes; the figure goes to `sweep.svg`.
//!
//! `cargo run --release --example dimension_sweep`

use csl::dataset::{generate_planted, split, Overlap, PlantedConcept, PlantedSpec, SplitSpec};
use csl::evaluation::{reports_to_svg, sweep_dimension, ReportEntry, Splits};
use csl::TrainConfig;

fn main() -> csl::Result<()> {
    let spec = PlantedSpec {
        dim: 48,
        signal_dim: 12,
        concepts: vec![PlantedConcept::new("speaker", 40, 1, 1.0, 0.5), PlantedConcept::new("phone", 5, 2, 1.0, 0.5)],
        overlap: Overlap::Orthogonal,
    };
    let (ds, _) = generate_planted(&spec, 8000, 4)?;
    let (st, pt, te) = split(&ds, &SplitSpec::disjoint_label(4, "speaker", [0.3, 0.42, 0.28]))?;
    println!("space-train sees {} of 40 speakers", st.concept("speaker")?.present_classes().len());

    let splits = Splits::new(&st, &pt, &te)?;
    let reports = sweep_dimension(&splits, "speaker", "phone", &[2, 4, 8, 16, 32, 48], &TrainConfig::default(), 4)?;
    for r in &reports {
        println!(
            "M={:<3} rank {:<3} retention {:5.1} leakage {:5.1} purity {:5.1} interference {:5.1}",
            r.dim.unwrap(),
            r.rank,
            r.retention(),
            r.leakage(),
            r.purity(),
            r.interference()
        );
    }
    let entries: Vec<ReportEntry> = reports.into_iter().map(ReportEntry::Ok).collect();
    std::fs::write("sweep.svg", reports_to_svg(&entries, "dimension_sweep example"))?;
    println!("wrote sweep.svg");
    Ok(())
}
