//! LEACE erasure: fit on data, erase with I-P, then try to recover the
//! concept with a fresh probe on the same data and on unseen data.
//!
//! `cargo run --release --example leace_erasure`

use csl::dataset::{generate_planted, split, Overlap, PlantedConcept, PlantedSpec, SplitSpec};
use csl::estimators::estimate_leace;
use csl::probing::{accuracy, majority_baseline, project_features, train_probe, Side};
use csl::TrainConfig;

fn main() -> csl::Result<()> {
    let spec = PlantedSpec {
        dim: 24,
        signal_dim: 4,
        concepts: vec![PlantedConcept::new("y", 5, 3, 1.5, 0.8)],
        overlap: Overlap::Orthogonal,
    };
    let (ds, _) = generate_planted(&spec, 6000, 3)?;
    let (fit, _, unseen) = split(&ds, &SplitSpec::stratified(3, [0.5, 0.25, 0.25]))?;
    let s = estimate_leace(&fit, "y", None)?;
    println!("LEACE rank {} (oblique: {})", s.rank(), s.projector().is_oblique());

    let cfg = TrainConfig::default();
    for (name, part) in [("seen", &fit), ("unseen", &unseen)] {
        let y = part.labels("y")?;
        let c = part.concept("y")?.num_classes();
        let before = train_probe(part.features(), y, c, &cfg)?;
        let erased = project_features(&s, part.features(), Side::Complement)?;
        let after = train_probe(&erased, y, c, &cfg)?;
        println!(
            "{name:<6}: probe accuracy {:.3} before, {:.3} after erasure (majority {:.3})",
            accuracy(&before, part.features(), y)?,
            accuracy(&after, &erased, y)?,
            majority_baseline(y)?
        );
    }
    Ok(())
}
