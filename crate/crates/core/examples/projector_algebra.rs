//! Orthogonal and oblique projectors, compact SVD and the PSD inverse root.
//!
//! `cargo run --example projector_algebra`

use csl::linalg::{asymmetry, compact_svd, idempotency_residual, inv_sqrt, oblique_projector, orthogonal_projector, Matrix, REL_TOL};
use nalgebra::dmatrix;

fn main() -> csl::Result<()> {
    // Two columns spanning the x-y plane, one of them redundant.
    let y = dmatrix![1.0, 2.0; 1.0, 2.0; 0.0, 0.0];
    let svd = compact_svd(&y, REL_TOL)?;
    println!("singular values {:?} (rank {})", svd.s, svd.rank());

    let p = orthogonal_projector(&y, REL_TOL)?;
    println!("orthogonal P{}rank {}, |P²-P| {:.1e}, |P-Pᵀ| {:.1e}", p.onto(), p.rank(), idempotency_residual(p.onto()), asymmetry(p.onto()));
    println!("complement I-P{}", p.complement());

    // Oblique: projects onto the x axis along (1, 1).
    let q = oblique_projector(&dmatrix![1.0, -1.0; 0.0, 0.0])?;
    println!("oblique P{}rank {}, oblique {}", q.onto(), q.rank(), q.is_oblique());

    let cov: Matrix = dmatrix![4.0, 0.0; 0.0, 0.0];
    println!("pseudo-inverse square root of diag(4, 0){}", inv_sqrt(&cov, REL_TOL)?);
    Ok(())
}
