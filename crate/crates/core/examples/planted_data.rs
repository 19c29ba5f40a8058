//! Synthetic data with known concept subspaces, and how close each
//! estimator gets to the planted basis.
//!
//! `cargo run --release --example planted_data`

use csl::dataset::{generate_planted, Overlap, PlantedConcept, PlantedSpec};
use csl::estimators::{estimate, EstimatorKind, EstimatorOptions};
use csl::linalg::principal_angles;

fn main() -> csl::Result<()> {
    let spec = PlantedSpec {
        dim: 32,
        signal_dim: 4,
        // Mean scale² over summed noise power gives SNR 10 per concept.
        concepts: vec![
            PlantedConcept::new("y", 5, 1, 10f64.sqrt(), 0.5f64.sqrt()),
            PlantedConcept::new("z", 3, 2, 10f64.sqrt(), 0.5f64.sqrt()),
        ],
        overlap: Overlap::Orthogonal,
    };
    let (ds, bases) = generate_planted(&spec, 20_000, 1)?;
    println!("{} rows, {} dims; planted y basis is {}x{}", ds.n(), ds.d(), bases[0].nrows(), bases[0].ncols());

    let between = principal_angles(&bases[0], &bases[1])?;
    println!("angles between planted y and z bases: {:.1?} deg", between.iter().map(|a| a.to_degrees()).collect::<Vec<_>>());

    for kind in EstimatorKind::ALL {
        let s = estimate(kind, &ds, "y", &EstimatorOptions { seed: Some(0), ..EstimatorOptions::default() })?;
        let angles = principal_angles(s.projector().onto(), &bases[0])?;
        let worst = angles.iter().cloned().fold(0.0, f64::max).to_degrees();
        println!("{kind:<5} rank {} largest angle to planted y: {worst:5.1} deg", s.rank());
    }
    Ok(())
}
