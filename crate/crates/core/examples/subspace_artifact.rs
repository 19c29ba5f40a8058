//! Saving a fitted subspace as a `.csub` artifact and scoring it later
//! without refitting.
//!
//! `cargo run --release --example subspace_artifact`

use csl::dataset::{generate_planted, split, Overlap, PlantedConcept, PlantedSpec, SplitSpec};
use csl::estimators::{estimate_cov, read_subspace, write_subspace};
use csl::evaluation::evaluate_subspace;
use csl::TrainConfig;

fn main() -> csl::Result<()> {
    let spec = PlantedSpec {
        dim: 16,
        signal_dim: 3,
        concepts: vec![PlantedConcept::new("y", 4, 1, 1.5, 0.5), PlantedConcept::new("z", 3, 2, 1.5, 0.5)],
        overlap: Overlap::Random,
    };
    let (ds, _) = generate_planted(&spec, 3000, 6)?;
    let (st, pt, te) = split(&ds, &SplitSpec::stratified(6, [0.5, 0.25, 0.25]))?;

    let path = std::env::temp_dir().join("csl_example_cov.csub");
    write_subspace(&estimate_cov(&st, "y")?, r#"{"example":"subspace_artifact"}"#, &path)?;
    println!("wrote {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());

    let (s, provenance) = read_subspace(&path)?;
    println!("loaded {} subspace for `{}`, rank {}, provenance {provenance}", s.estimator, s.concept, s.rank());
    let r = evaluate_subspace(&s, &pt, &te, "z", &TrainConfig::default())?;
    println!("retention {:.1} leakage {:.1} purity {:.1} interference {:.1}", r.retention(), r.leakage(), r.purity(), r.interference());
    std::fs::remove_file(&path)?;
    Ok(())
}
