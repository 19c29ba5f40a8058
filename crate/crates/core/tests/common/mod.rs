#![allow(dead_code)]

use csl::dataset::{generate_planted, Concept, Overlap, PlantedConcept, PlantedSpec, RedundantCopy};
use csl::linalg::Matrix;
use csl::rng::stream_rng;
use csl::LabeledDataset;
use rand::Rng;
use rand_distr::StandardNormal;

/// Two orthogonal concepts `y` and `z` with `K` planted dims each and
/// per-coordinate SNR `snr` (noise variance split evenly between them).
pub fn two_concepts(d: usize, k: usize, cy: usize, cz: usize, snr: f64, n: usize, seed: u64) -> (LabeledDataset, Vec<Matrix>) {
    let noise = 0.5f64.sqrt();
    let mean = snr.sqrt();
    let spec = PlantedSpec {
        dim: d,
        signal_dim: k,
        concepts: vec![
            PlantedConcept::new("y", cy, seed.wrapping_mul(31) + 1, mean, noise),
            PlantedConcept::new("z", cz, seed.wrapping_mul(31) + 2, mean, noise),
        ],
        overlap: Overlap::Orthogonal,
    };
    generate_planted(&spec, n, seed).unwrap()
}

/// `y` is written into two disjoint planted subspaces. The copy carries its
/// own per-row noise, otherwise both copies would collapse into one
/// subspace; each copy alone still decodes `y` almost perfectly.
pub fn redundant(d: usize, k: usize, n: usize, seed: u64) -> LabeledDataset {
    let mut y = PlantedConcept::new("y", 4, seed + 11, 2.0, 0.03);
    y.redundant_copy = Some(RedundantCopy { noise_scale: 0.5 });
    let z = PlantedConcept::new("z", 3, seed + 12, 2.0, 0.03);
    let spec = PlantedSpec { dim: d, signal_dim: k, concepts: vec![y, z], overlap: Overlap::Orthogonal };
    generate_planted(&spec, n, seed).unwrap().0
}

/// Gaussian blobs around random means; every class is present.
pub fn random_blobs(n: usize, d: usize, c: usize, seed: u64) -> LabeledDataset {
    let mut rng = stream_rng(seed, 3);
    let means = Matrix::from_fn(c, d, |_, _| 1.5 * rng.sample::<f64, _>(StandardNormal));
    let labels: Vec<u32> = (0..n).map(|i| (i % c) as u32).collect();
    let x = Matrix::from_fn(n, d, |i, j| means[(labels[i] as usize, j)] + rng.sample::<f64, _>(StandardNormal));
    LabeledDataset::new(x, vec![Concept::with_numbered_classes("y", labels, c).unwrap()], "random blobs").unwrap()
}
