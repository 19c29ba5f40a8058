//! LDA, COV and CPCA subspaces on data with an uninformative
//! high-variance direction: LDA discounts it, the others do not need to.
//!
//! `cargo run --example lda_subspace`

use csl::dataset::Concept;
use csl::estimators::{estimate_cov, estimate_cpca, estimate_lda};
use csl::rng::stream_rng;
use csl::{LabeledDataset, Matrix};
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> csl::Result<()> {
    let mut rng = stream_rng(5, 0);
    let n = 3000;
    let labels: Vec<u32> = (0..n).map(|i| (i % 3) as u32).collect();
    // Class means differ along x0 and x1; x2 is loud noise correlated with x0.
    let x = Matrix::from_fn(n, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = Matrix::from_fn(n, 3, |i, j| {
        let m = [[-1.0, 0.0], [1.0, 0.0], [0.0, 1.5]][labels[i] as usize];
        match j {
            0 => m[0] + 0.5 * x[(i, 0)] + 0.8 * x[(i, 2)],
            1 => m[1] + 0.5 * x[(i, 1)],
            _ => 3.0 * x[(i, 2)],
        }
    });
    let ds = LabeledDataset::new(x, vec![Concept::with_numbered_classes("y", labels, 3)?], "example")?;

    for s in [estimate_lda(&ds, "y")?, estimate_cov(&ds, "y")?, estimate_cpca(&ds, "y")?] {
        println!("{:<4} rank {} P ={}", s.estimator, s.rank(), s.projector().onto());
    }
    Ok(())
}
