//! Three-way splits: stratified, and label-disjoint (unseen classes).
//!
//! `cargo run --example split_dataset`

use csl::dataset::{generate_planted, split_indices, Overlap, PlantedConcept, PlantedSpec, SplitSpec};

fn main() -> csl::Result<()> {
    let spec = PlantedSpec {
        dim: 16,
        signal_dim: 4,
        concepts: vec![PlantedConcept::new("phone", 5, 1, 1.0, 0.5), PlantedConcept::new("speaker", 12, 2, 1.0, 0.5)],
        overlap: Overlap::Orthogonal,
    };
    let (ds, _) = generate_planted(&spec, 1200, 7)?;

    let strat = split_indices(&ds, &SplitSpec::stratified(7, [0.5, 0.25, 0.25]))?;
    println!(
        "stratified: space-train {} / probe-train {} / test {}",
        strat.space_train.len(),
        strat.probe_train.len(),
        strat.test.len()
    );

    // Speakers seen while fitting the subspace never reach the probes.
    let disjoint = split_indices(&ds, &SplitSpec::disjoint_label(7, "speaker", [0.4, 0.36, 0.24]))?;
    let speakers = |rows: &[usize]| {
        let labels = ds.labels("speaker").unwrap();
        let mut s: Vec<u32> = rows.iter().map(|&i| labels[i]).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    println!("space-train speakers {:?}", speakers(&disjoint.space_train));
    println!("probe-train speakers {:?}", speakers(&disjoint.probe_train));
    println!("test speakers        {:?}", speakers(&disjoint.test));
    Ok(())
}
