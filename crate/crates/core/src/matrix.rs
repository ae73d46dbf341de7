//! Small dense complex matrices backed by nalgebra, plus the handful of
//! numerical primitives the representation and generic-position layers need:
//! projection defects, rank arithmetic on subspaces, orthonormal range
//! bases, polar factors, and positive square roots.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde_json::json;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Tolerance for rank decisions (singular values below this count as zero).
/// Sits between the relation tolerance and the block-conditioning threshold.
pub const RANK_TOL: f64 = 1e-7;

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn scalar(x: f64) -> CMat {
    CMat::from_element(1, 1, Complex::new(x, 0.0))
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    CMat::from_fn(r, c, |i, j| Complex::new(rows[i][j], 0.0))
}

/// Largest entry modulus; the max-norm all tolerances are stated in.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-norm distance between two matrices of equal shape.
pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    max_abs(&(a - b))
}

/// How far `p` is from being an orthogonal projection: the larger of
/// `‖p² − p‖` and `‖p* − p‖` in max-norm.
pub fn projection_defect(p: &CMat) -> f64 {
    let idem = max_diff(&(p * p), p);
    let herm = max_diff(&p.adjoint(), p);
    idem.max(herm)
}

pub fn is_projection(p: &CMat, tol: f64) -> bool {
    projection_defect(p) <= tol
}

/// Rank with the crate's default singular-value cutoff.
pub fn rank(m: &CMat) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone().svd(false, false).rank(RANK_TOL)
}

/// Dimension of the intersection of the column spaces of `a` and `b` via
/// rank arithmetic: `dim(A ∩ B) = rank(A) + rank(B) − rank([A|B])`.
pub fn intersection_dim(a: &CMat, b: &CMat) -> usize {
    debug_assert_eq!(a.nrows(), b.nrows());
    let mut stacked = zeros(a.nrows(), a.ncols() + b.ncols());
    stacked.columns_mut(0, a.ncols()).copy_from(a);
    stacked.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    rank(a) + rank(b) - rank(&stacked)
}

/// Orthonormal basis of the column space of a projection `p` of the given
/// rank, via column-pivoted QR. Deterministic for a fixed input.
pub fn range_basis(p: &CMat, rank: usize) -> CMat {
    let qr = p.clone().col_piv_qr();
    let q = qr.q();
    q.columns(0, rank).into_owned()
}

/// Unitary polar factor (`svd.u * svd.v_t`), defined for any square matrix.
pub fn polar_unitary(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    u * v_t
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

pub fn min_singular_value(m: &CMat) -> f64 {
    singular_values(m).into_iter().fold(f64::INFINITY, f64::min)
}

/// Positive-semidefinite square root of a hermitian PSD matrix; tiny
/// negative eigenvalues from rounding are clamped to zero.
pub fn sqrt_psd(m: &CMat) -> CMat {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut d = zeros(n, n);
    for i in 0..n {
        d[(i, i)] = Complex::new(eig.eigenvalues[i].max(0.0).sqrt(), 0.0);
    }
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

pub fn smallest_eigenvalue_hermitian(m: &CMat) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Block-diagonal direct sum.
pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let dim: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(dim, dim);
    let mut off = 0;
    for b in blocks {
        out.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(b);
        off += b.nrows();
    }
    out
}

/// Row-major `[re, im]` entry pairs, the JSON form used for all exports.
pub fn to_json(m: &CMat) -> serde_json::Value {
    let entries: Vec<[f64; 2]> = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| [m[(i, j)].re, m[(i, j)].im]))
        .collect();
    json!(entries)
}

/// Nested rows of `[re, im]` pairs, used for the contraction-family blocks.
pub fn to_json_rows(m: &CMat) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!(rows)
}
