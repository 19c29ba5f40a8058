//! Dense numerical kernels: compact SVD, symmetric eigendecomposition,
//! pseudo-inverse square roots and projector algebra.
//!
//! Everything here is 64-bit and deterministic. Singular and eigen vectors
//! are sign-normalised so that the largest-magnitude entry of every vector is
//! positive.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative cutoff for rank decisions (w.r.t. the largest singular/eigen value).
pub const REL_TOL: f64 = 1e-6;
/// Maximum admissible `‖P·P − P‖_max` for anything called a projector.
pub const PROJ_TOL: f64 = 1e-6;
/// Relative symmetry / PSD slack.
pub const SYM_TOL: f64 = 1e-8;
/// Relative eigen-residual tolerance.
pub const EIG_TOL: f64 = 1e-8;

// Singular values of an idempotent matrix are either 0 or >= 1.
const PROJECTOR_RANK_CUTOFF: f64 = 0.5;

const SOLVER_EPS: f64 = 1e-15;
const SOLVER_MAX_ITER: usize = 10_000;
const JACOBI_MAX_SWEEPS: usize = 100;

pub fn ensure_finite(a: &Matrix, what: &str) -> Result<()> {
    if let Some((idx, v)) = a.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        let (r, c) = (idx % a.nrows().max(1), idx / a.nrows().max(1));
        return Err(Error::InvalidInput(format!(
            "{what}: non-finite entry {v} at ({r}, {c})"
        )));
    }
    Ok(())
}

pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `‖P·P − P‖_max`.
pub fn idempotency_residual(p: &Matrix) -> f64 {
    max_abs(&(p * p - p))
}

/// `‖A − Aᵀ‖_max`.
pub fn asymmetry(a: &Matrix) -> f64 {
    max_abs(&(a - a.transpose()))
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidInput(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )));
    }
    Ok(())
}

/// Flip the sign of `v` so that its largest-magnitude entry is positive.
/// Returns the sign that was applied.
fn canonical_sign(v: &mut [f64]) -> f64 {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    sign
}

/// Thin factors `A ≈ U·diag(s)·Vᵀ` keeping only singular values above the cutoff.
#[derive(Debug, Clone)]
pub struct CompactSvd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl CompactSvd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, s) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    /// Keep only the leading `k` triplets.
    pub fn truncate(&mut self, k: usize) {
        if k < self.s.len() {
            self.u = self.u.columns(0, k).into_owned();
            self.v = self.v.columns(0, k).into_owned();
            self.s.truncate(k);
        }
    }
}

/// One-sided Jacobi SVD of a tall matrix (`m >= n`): returns `(U·S, V)`
/// with mutually orthogonal columns in `U·S`.
fn jacobi_svd_tall(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let (m, n) = a.shape();
    let mut us = a.clone();
    let mut v = Matrix::identity(n, n);
    let tol = (m as f64) * f64::EPSILON;
    // Columns below this squared norm are numerically zero; rotating them
    // against larger ones only shuffles round-off.
    let negligible = (f64::EPSILON * a.norm()).powi(2);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (x, y) = (us[(i, p)], us[(i, q)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || alpha.min(beta) <= negligible || gamma.abs() <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (us[(i, p)], us[(i, q)]);
                    us[(i, p)] = c * x - s * y;
                    us[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            return Ok((us, v));
        }
    }
    Err(Error::Numerical(format!("Jacobi SVD did not converge for a {m}x{n} matrix")))
}

/// Full (thin) SVD, sorted descending, sign-normalised, with no truncation.
fn full_svd(a: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok((Matrix::zeros(m, 0), Vec::new(), Matrix::zeros(n, 0)));
    }
    // Work on the tall orientation; for wide inputs the roles of U and V swap.
    let (us, v, wide) = if m >= n {
        let (us, v) = jacobi_svd_tall(a)?;
        (us, v, false)
    } else {
        let (vs, u) = jacobi_svd_tall(&a.transpose())?;
        (vs, u, true)
    };
    let norms: Vec<f64> = us.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut uo = Matrix::zeros(m, k);
    let mut vo = Matrix::zeros(n, k);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        let left: Vec<f64> = if sigma > 0.0 { us.column(src).iter().map(|x| x / sigma).collect() } else { vec![0.0; us.nrows()] };
        let right: Vec<f64> = v.column(src).iter().copied().collect();
        let (mut ucol, mut vcol) = if wide { (right, left) } else { (left, right) };
        let sign = canonical_sign(&mut ucol);
        if sign < 0.0 {
            vcol.iter_mut().for_each(|x| *x = -*x);
        }
        uo.column_mut(dst).copy_from_slice(&ucol);
        vo.column_mut(dst).copy_from_slice(&vcol);
        s.push(sigma);
    }
    Ok((uo, s, vo))
}

/// Compact SVD: singular triplets with `s_i > rel_tol · s_max` are retained.
pub fn compact_svd(a: &Matrix, rel_tol: f64) -> Result<CompactSvd> {
    compact_svd_with_floor(a, rel_tol, 0.0)
}

/// Like [`compact_svd`] but the cutoff is `rel_tol · max(s_max, scale)`.
///
/// `scale` lets callers that know the natural magnitude of their input
/// (e.g. a cross-covariance bounded by the feature spread) reject
/// round-off sized singular values even when every singular value is tiny.
pub fn compact_svd_with_floor(a: &Matrix, rel_tol: f64, scale: f64) -> Result<CompactSvd> {
    check_rel_tol(rel_tol)?;
    ensure_finite(a, "compact_svd input")?;
    let (u, s, v) = full_svd(a)?;
    let s_max = s.first().copied().unwrap_or(0.0);
    let cutoff = rel_tol * s_max.max(scale);
    let keep = if s_max <= 0.0 {
        0
    } else {
        s.iter().take_while(|&&x| x > cutoff).count()
    };
    Ok(CompactSvd {
        u: u.columns(0, keep).into_owned(),
        s: s[..keep].to_vec(),
        v: v.columns(0, keep).into_owned(),
    })
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

pub fn sym_eig(a: &Matrix) -> Result<SymEig> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "sym_eig needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(a, "sym_eig input")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(SymEig { values: Vec::new(), vectors: Matrix::zeros(0, 0) });
    }
    let scale = max_abs(a).max(1.0);
    if asymmetry(a) > SYM_TOL * scale {
        return Err(Error::InvalidInput(format!(
            "sym_eig input is not symmetric (asymmetry {:e})",
            asymmetry(a)
        )));
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, SOLVER_EPS, SOLVER_MAX_ITER)
        .ok_or_else(|| Error::Numerical(format!("eigensolver did not converge for a {n}x{n} matrix")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let mut vectors = Matrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<f64> = eig.eigenvectors.column(src).iter().copied().collect();
        canonical_sign(&mut col);
        vectors.column_mut(dst).copy_from_slice(&col);
        values.push(eig.eigenvalues[src]);
    }
    let mut av = a * &vectors;
    for (j, l) in values.iter().enumerate() {
        av.column_mut(j).axpy(-l, &vectors.column(j), 1.0);
    }
    let residual = max_abs(&av);
    if residual > EIG_TOL * max_abs(a).max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!("eigen-decomposition residual {residual:e} too large")));
    }
    Ok(SymEig { values, vectors })
}

/// Pseudo-inverse square root and square root of a PSD matrix.
#[derive(Debug, Clone)]
pub struct PsdRoots {
    /// `A^{-1/2}` on the numerical range of `A`, zero elsewhere.
    pub inv_sqrt: Matrix,
    /// `A^{1/2}` restricted to the same range.
    pub sqrt: Matrix,
    pub rank: usize,
    pub eigenvalues: Vec<f64>,
}

pub fn psd_roots(a: &Matrix, rel_tol: f64) -> Result<PsdRoots> {
    check_rel_tol(rel_tol)?;
    let eig = sym_eig(a)?;
    let n = a.nrows();
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let lambda_min = eig.values.last().copied().unwrap_or(0.0);
    if lambda_min < -SYM_TOL * lambda_max.max(f64::MIN_POSITIVE) && lambda_min < -f64::EPSILON {
        return Err(Error::NotPsd { min_eigenvalue: lambda_min });
    }
    let cutoff = rel_tol * lambda_max;
    let kept: Vec<usize> = (0..n)
        .filter(|&i| lambda_max > 0.0 && eig.values[i] > cutoff)
        .collect();
    let mut scaled_inv = Matrix::zeros(n, kept.len());
    let mut scaled_sqrt = Matrix::zeros(n, kept.len());
    let mut basis = Matrix::zeros(n, kept.len());
    for (j, &i) in kept.iter().enumerate() {
        let v = eig.vectors.column(i);
        let r = eig.values[i].sqrt();
        basis.column_mut(j).copy_from(&v);
        scaled_inv.column_mut(j).copy_from(&(v / r));
        scaled_sqrt.column_mut(j).copy_from(&(v * r));
    }
    let inv_sqrt = symmetrize(&(&scaled_inv * basis.transpose()));
    let sqrt = symmetrize(&(&scaled_sqrt * basis.transpose()));
    Ok(PsdRoots { inv_sqrt, sqrt, rank: kept.len(), eigenvalues: eig.values })
}

/// `A^{-1/2}` in the pseudo-inverse sense.
pub fn inv_sqrt(a: &Matrix, rel_tol: f64) -> Result<Matrix> {
    psd_roots(a, rel_tol).map(|r| r.inv_sqrt)
}

pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

/// A linear projector `P` together with its complement `I − P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    onto: Matrix,
    complement: Matrix,
    rank: usize,
    oblique: bool,
}

impl Projector {
    fn from_parts(onto: Matrix, rank: usize, oblique: bool) -> Self {
        let dim = onto.nrows();
        // The only rank-0 and full-rank idempotents are 0 and I.
        let onto = if rank == 0 {
            Matrix::zeros(dim, dim)
        } else if rank == dim {
            Matrix::identity(dim, dim)
        } else {
            onto
        };
        let complement = Matrix::identity(dim, dim) - &onto;
        Projector { onto, complement, rank, oblique }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_parts(Matrix::zeros(dim, dim), 0, false)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts(Matrix::identity(dim, dim), dim, false)
    }

    pub fn dim(&self) -> usize {
        self.onto.nrows()
    }

    pub fn onto(&self) -> &Matrix {
        &self.onto
    }

    pub fn complement(&self) -> &Matrix {
        &self.complement
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_oblique(&self) -> bool {
        self.oblique
    }

    /// Rank-0 projectors are valid but carry no subspace.
    pub fn is_degenerate(&self) -> bool {
        self.rank == 0
    }

    pub fn into_onto(self) -> Matrix {
        self.onto
    }
}

/// Orthogonal projector `U·Uᵀ` onto the column space of `y` (D×K).
pub fn orthogonal_projector(y: &Matrix, rel_tol: f64) -> Result<Projector> {
    orthogonal_projector_with_floor(y, rel_tol, 0.0)
}

/// [`orthogonal_projector`] with an absolute magnitude floor, see
/// [`compact_svd_with_floor`].
pub fn orthogonal_projector_with_floor(y: &Matrix, rel_tol: f64, scale: f64) -> Result<Projector> {
    let svd = compact_svd_with_floor(y, rel_tol, scale)?;
    Ok(projector_from_orthonormal(&svd.u))
}

/// `U·Uᵀ` for a matrix with orthonormal columns.
pub fn projector_from_orthonormal(u: &Matrix) -> Projector {
    let dim = u.nrows();
    if u.ncols() == 0 {
        return Projector::zero(dim);
    }
    let p = symmetrize(&(u * u.transpose()));
    Projector::from_parts(p, u.ncols(), false)
}

/// Wrap an (in general non-symmetric) idempotent matrix.
pub fn oblique_projector(p: &Matrix) -> Result<Projector> {
    if !p.is_square() {
        return Err(Error::InvalidInput(format!(
            "projector must be square, got {}x{}",
            p.nrows(),
            p.ncols()
        )));
    }
    ensure_finite(p, "projector")?;
    let residual = idempotency_residual(p);
    if residual > PROJ_TOL {
        return Err(Error::NotIdempotent { residual });
    }
    let rank = projector_rank(p)?;
    Ok(Projector::from_parts(p.clone(), rank, true))
}

/// Rebuild a projector from a stored matrix, re-checking its invariants.
pub fn projector_from_matrix(p: &Matrix, oblique: bool) -> Result<Projector> {
    let proj = oblique_projector(p)?;
    if oblique {
        return Ok(proj);
    }
    let asym = asymmetry(p);
    if asym > PROJ_TOL {
        return Err(Error::Numerical(format!("orthogonal projector is not symmetric (asymmetry {asym:e})")));
    }
    let rank = proj.rank();
    Ok(Projector::from_parts(p.clone(), rank, false))
}

/// Number of singular values above 1/2; exact for idempotent matrices.
pub fn projector_rank(p: &Matrix) -> Result<usize> {
    let (_, s, _) = full_svd(p)?;
    Ok(s.iter().filter(|&&x| x > PROJECTOR_RANK_CUTOFF).count())
}

/// Principal angles (radians, ascending) between the column spaces of `a` and `b`.
///
/// Returns `min(rank a, rank b)` angles.
pub fn principal_angles(a: &Matrix, b: &Matrix) -> Result<Vec<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "principal angles need equal ambient dims ({} vs {})",
            a.nrows(),
            b.nrows()
        )));
    }
    let qa = compact_svd(a, REL_TOL)?.u;
    let qb = compact_svd(b, REL_TOL)?.u;
    let k = qa.ncols().min(qb.ncols());
    if k == 0 {
        return Ok(Vec::new());
    }
    let (_, cos, _) = full_svd(&(qa.transpose() * qb))?;
    Ok(cos.iter().take(k).map(|c| c.clamp(-1.0, 1.0).acos()).collect())
}

/// Orthonormal basis (as columns) of the range of a PSD matrix.
pub fn range_basis(a: &Matrix, rel_tol: f64) -> Result<Matrix> {
    Ok(compact_svd(a, rel_tol)?.u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn assert_close(a: &Matrix, b: &Matrix, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        let d = max_abs(&(a - b));
        assert!(d <= tol, "max diff {d:e} > {tol:e}\n{a}\n{b}");
    }

    #[test]
    fn svd_of_diagonal() {
        let svd = compact_svd(&dmatrix![2.0, 0.0; 0.0, 0.0], REL_TOL).unwrap();
        assert_eq!(svd.s, vec![2.0]);
        assert_close(&svd.u, &dmatrix![1.0; 0.0], 1e-15);
        assert_close(&svd.v, &dmatrix![1.0; 0.0], 1e-15);
    }

    #[test]
    fn svd_of_zero_is_empty() {
        let svd = compact_svd(&Matrix::zeros(3, 2), REL_TOL).unwrap();
        assert_eq!(svd.rank(), 0);
        assert_eq!(svd.u.shape(), (3, 0));
        assert_eq!(svd.v.shape(), (2, 0));
    }

    #[test]
    fn svd_planted_rank_two() {
        let mut a = dmatrix![
            0.3, -1.2, 0.0;
            1.7, 0.4, 0.0;
            -0.5, 2.2, 0.0;
            0.9, 0.1, 0.0;
            -1.1, -0.8, 0.0
        ];
        for r in 0..5 {
            a[(r, 2)] = a[(r, 0)] + a[(r, 1)];
        }
        // Gram oracle: det(AᵀA) vanishes, the leading 2x2 minor does not.
        let g: Matrix = a.transpose() * &a;
        assert!(g.determinant().abs() < 1e-9f64);
        assert!(g.fixed_view::<2, 2>(0, 0).determinant().abs() > 1.0f64);
        let svd = compact_svd(&a, REL_TOL).unwrap();
        assert_eq!(svd.rank(), 2);
        assert_close(&svd.reconstruct(), &a, 1e-12);
    }

    #[test]
    fn svd_rejects_bad_input() {
        let mut a = Matrix::zeros(2, 2);
        a[(1, 1)] = f64::NAN;
        assert!(matches!(compact_svd(&a, REL_TOL), Err(Error::InvalidInput(_))));
        assert!(compact_svd(&Matrix::zeros(2, 2), 1.5).is_err());
    }

    #[test]
    fn sign_convention_is_applied() {
        let svd = compact_svd(&dmatrix![0.0, -3.0; -1.0, 0.0], REL_TOL).unwrap();
        for j in 0..svd.rank() {
            let col = svd.u.column(j);
            let idx = col.iamax();
            assert!(col[idx] > 0.0);
        }
        assert_close(&svd.reconstruct(), &dmatrix![0.0, -3.0; -1.0, 0.0], 1e-14);
    }

    #[test]
    fn eig_examples() {
        let e = sym_eig(&Matrix::identity(3, 3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);

        let e = sym_eig(&dmatrix![4.0, 0.0; 0.0, 1.0]).unwrap();
        assert_eq!(e.values, vec![4.0, 1.0]);
        assert_close(&e.vectors, &Matrix::identity(2, 2), 1e-15);

        // char. poly (2-λ)² - 1 = 0 → λ ∈ {3, 1}
        let a = dmatrix![2.0, 1.0; 1.0, 2.0];
        let e = sym_eig(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-12 && (e.values[1] - 1.0).abs() < 1e-12);
        for i in 0..2 {
            let v = e.vectors.column(i);
            assert!((&a * v - v * e.values[i]).amax() < 1e-12);
        }
    }

    #[test]
    fn eig_rejects_non_square() {
        assert!(matches!(sym_eig(&Matrix::zeros(2, 3)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn inv_sqrt_examples() {
        assert_close(&inv_sqrt(&Matrix::identity(3, 3), REL_TOL).unwrap(), &Matrix::identity(3, 3), 1e-14);
        let w = inv_sqrt(&dmatrix![4.0, 0.0; 0.0, 9.0], REL_TOL).unwrap();
        assert_close(&w, &dmatrix![0.5, 0.0; 0.0, 1.0 / 3.0], 1e-14);

        let a = dmatrix![4.0, 0.0; 0.0, 0.0];
        let w = inv_sqrt(&a, REL_TOL).unwrap();
        assert_close(&w, &dmatrix![0.5, 0.0; 0.0, 0.0], 1e-14);
        assert_close(&(&w * &a * &w), &dmatrix![1.0, 0.0; 0.0, 0.0], 1e-14);
    }

    #[test]
    fn inv_sqrt_rejects_indefinite() {
        let err = inv_sqrt(&dmatrix![1.0, 0.0; 0.0, -1.0], REL_TOL).unwrap_err();
        assert!(matches!(err, Error::NotPsd { .. }));
    }

    #[test]
    fn orthogonal_projector_examples() {
        let p = orthogonal_projector(&dmatrix![1.0; 0.0], REL_TOL).unwrap();
        assert_close(p.onto(), &dmatrix![1.0, 0.0; 0.0, 0.0], 1e-15);
        assert!(!p.is_oblique());

        let p2 = orthogonal_projector(&dmatrix![1.0, 2.0; 0.0, 0.0], REL_TOL).unwrap();
        assert_eq!(p2.rank(), 1);
        assert_close(p2.onto(), p.onto(), 1e-15);

        let z = orthogonal_projector(&Matrix::zeros(3, 2), REL_TOL).unwrap();
        assert!(z.is_degenerate());
        assert_eq!(z.onto(), &Matrix::zeros(3, 3));
        assert_eq!(z.complement(), &Matrix::identity(3, 3));
    }

    #[test]
    fn orthogonal_projector_trace_equals_rank() {
        let y = dmatrix![0.5, 0.5; 0.5, -0.5; 0.5, 0.5; 0.5, -0.5];
        let p = orthogonal_projector(&y, REL_TOL).unwrap();
        assert_eq!(p.rank(), 2);
        assert!((p.onto().trace() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn oblique_projector_examples() {
        let p = oblique_projector(&Matrix::identity(3, 3)).unwrap();
        assert_eq!(p.rank(), 3);
        assert_eq!(p.complement(), &Matrix::zeros(3, 3));

        let p = oblique_projector(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(p.rank(), 0);
        assert_eq!(p.complement(), &Matrix::identity(3, 3));

        let m = dmatrix![1.0, 1.0; 0.0, 0.0];
        assert_eq!(&m * &m, m);
        let p = oblique_projector(&m).unwrap();
        assert!(p.is_oblique());
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn oblique_projector_rejects_non_idempotent() {
        let err = oblique_projector(&dmatrix![1.0, 0.0; 0.0, 0.5]).unwrap_err();
        match err {
            Error::NotIdempotent { residual } => assert!((residual - 0.25).abs() < 1e-15),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn principal_angles_of_axes() {
        let a = dmatrix![1.0; 0.0; 0.0];
        let b = dmatrix![0.0; 1.0; 0.0];
        let ang = principal_angles(&a, &b).unwrap();
        assert!((ang[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let ang = principal_angles(&a, &dmatrix![2.0, 0.0; 0.0, 0.0; 0.0, 1.0]).unwrap();
        assert_eq!(ang.len(), 1);
        assert!(ang[0].abs() < 1e-7);
    }
}
