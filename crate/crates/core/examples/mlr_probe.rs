//! Training a softmax probe and turning its weights into an MLR subspace.
//!
//! `cargo run --release --example mlr_probe`

use csl::dataset::{generate_planted, Overlap, PlantedConcept, PlantedSpec};
use csl::estimators::estimate_mlr;
use csl::probing::{accuracy, train_probe};
use csl::TrainConfig;

fn main() -> csl::Result<()> {
    let spec = PlantedSpec {
        dim: 20,
        signal_dim: 3,
        concepts: vec![PlantedConcept::new("y", 4, 9, 1.0, 0.7)],
        overlap: Overlap::Orthogonal,
    };
    let (ds, _) = generate_planted(&spec, 4000, 9)?;
    let y = ds.labels("y")?;

    for ridge in [0.0, 1e-4, 1e-1] {
        let cfg = TrainConfig { ridge, ..TrainConfig::default() };
        let probe = train_probe(ds.features(), y, 4, &cfg)?;
        let fit = probe.achieved();
        println!(
            "ridge {ridge:<6} loss {:.4} |grad| {:.1e} after {} iterations, train accuracy {:.3}",
            fit.loss,
            fit.grad_norm,
            fit.iterations,
            accuracy(&probe, ds.features(), y)?
        );
    }

    let s = estimate_mlr(&ds, "y", &TrainConfig::default())?;
    println!("MLR subspace rank {} (C - 1 = 3); fit stats {:?}", s.rank(), s.fit_stats);
    Ok(())
}
