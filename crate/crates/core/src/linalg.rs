//! Dense complex linear algebra helpers on top of `nalgebra`.
//!
//! Everything in the crate is computed on complexified data, so the one
//! matrix type used throughout is [`CMat`].

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type C = Complex64;
pub type CMat = DMatrix<C>;
pub type CVec = DVector<C>;

pub const I: C = C::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// Singular value decomposition with singular values sorted descending and
/// a full set of right singular vectors (wide inputs are zero-padded).
pub struct SortedSvd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    /// Rows are right singular vectors (conjugated), `ncols × ncols`.
    pub v_t: CMat,
}

pub fn svd(m: &CMat) -> SortedSvd {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    if padded.nrows() == 0 || padded.ncols() == 0 {
        return SortedSvd {
            u: CMat::zeros(rows, 0),
            singular_values: Vec::new(),
            v_t: CMat::identity(cols, cols),
        };
    }
    let dec = SVD::new(padded, true, true);
    let u = dec.u.expect("u requested");
    let v_t = dec.v_t.expect("v_t requested");
    let sv = dec.singular_values;
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(std::cmp::Ordering::Equal));
    let k = idx.len();
    let mut u_s = CMat::zeros(rows, k);
    let mut v_s = CMat::zeros(k, cols);
    for (dst, &src) in idx.iter().enumerate() {
        u_s.set_column(dst, &u.column(src).rows(0, rows));
        v_s.set_row(dst, &v_t.row(src));
    }
    SortedSvd {
        u: u_s,
        singular_values: idx.iter().map(|&i| sv[i]).collect(),
        v_t: v_s,
    }
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Numerical rank with threshold `rel_tol · σ_max` (absolute `abs_floor`
/// when the matrix is tiny).
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// The `k` right singular vectors belonging to the smallest singular values,
/// as columns. Also returns the largest discarded-side singular value, i.e.
/// the residual `σ_{n-k}` of the computed null space.
pub fn null_space_dim(m: &CMat, k: usize) -> (CMat, f64) {
    let n = m.ncols();
    assert!(k <= n, "null space dimension exceeds column count");
    if k == 0 {
        return (CMat::zeros(n, 0), 0.0);
    }
    if m.nrows() == 0 {
        return (CMat::identity(n, n).columns(0, k).into_owned(), 0.0);
    }
    let s = svd(m);
    let mut out = CMat::zeros(n, k);
    for j in 0..k {
        let row = n - k + j;
        for i in 0..n {
            out[(i, j)] = s.v_t[(row, i)].conj();
        }
    }
    let resid = s.singular_values.get(n - k).copied().unwrap_or(0.0);
    (out, resid)
}

/// Null space by relative threshold.
pub fn null_space(m: &CMat, rel_tol: f64) -> CMat {
    let r = rank(m, rel_tol);
    null_space_dim(m, m.ncols() - r).0
}

/// Orthonormal basis of the column span (rank by relative threshold).
pub fn orth(m: &CMat, rel_tol: f64) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let s = svd(m);
    let top = s.singular_values.first().copied().unwrap_or(0.0);
    let r = s
        .singular_values
        .iter()
        .filter(|&&x| top > 0.0 && x > rel_tol * top)
        .count();
    s.u.columns(0, r).into_owned()
}

/// Orthonormal basis of exactly `k` leading directions.
pub fn orth_dim(m: &CMat, k: usize) -> CMat {
    let s = svd(m);
    s.u.columns(0, k).into_owned()
}

/// Sines of the principal angles between span(a) and span(b), ascending.
/// Computed as singular values of `(I - Q_a Q_a^H) Q_b`, which stays
/// accurate for tiny angles.
pub fn principal_angle_sines(a: &CMat, b: &CMat) -> Vec<f64> {
    let qa = orth(a, 1e-12);
    let qb = orth(b, 1e-12);
    let resid = &qb - &qa * (qa.adjoint() * &qb);
    let mut sv = singular_values(&resid);
    sv.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sv
}

/// Principal angles (radians) between two subspaces, ascending.
pub fn principal_angles(a: &CMat, b: &CMat) -> Vec<f64> {
    principal_angle_sines(a, b)
        .into_iter()
        .map(|s| s.clamp(0.0, 1.0).asin())
        .collect()
}

/// Symmetric subspace distance: the largest principal-angle sine in either
/// direction, or 1 when the dimensions differ.
pub fn subspace_distance(a: &CMat, b: &CMat) -> f64 {
    let qa = orth(a, 1e-12);
    let qb = orth(b, 1e-12);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    let ab = principal_angle_sines(&qa, &qb);
    let ba = principal_angle_sines(&qb, &qa);
    ab.iter()
        .chain(ba.iter())
        .copied()
        .fold(0.0, f64::max)
}

/// Least-squares solution of `a x = b` (minimum norm, SVD-based).
pub fn lstsq(a: &CMat, b: &CMat) -> CMat {
    if a.ncols() == 0 {
        return CMat::zeros(0, b.ncols());
    }
    let s = svd(a);
    let top = s.singular_values.first().copied().unwrap_or(0.0);
    let mut x = CMat::zeros(a.ncols(), b.ncols());
    for (k, &sigma) in s.singular_values.iter().enumerate() {
        if sigma <= 1e-13 * top || sigma == 0.0 {
            continue;
        }
        let uk = s.u.column(k);
        let coeff = uk.adjoint() * b;
        for col in 0..b.ncols() {
            let scale = coeff[(0, col)] / sigma;
            for i in 0..a.ncols() {
                x[(i, col)] += s.v_t[(k, i)].conj() * scale;
            }
        }
    }
    x
}

/// Eigenvalues of the Hermitian part of `h`, ascending.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let herm = (h + h.adjoint()) * re(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Elementwise complex conjugate.
pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

/// Horizontal concatenation.
pub fn hstack(parts: &[&CMat]) -> CMat {
    let rows = parts.first().map(|p| p.nrows()).unwrap_or(0);
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        assert_eq!(p.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, at), (rows, p.ncols())).copy_from(*p);
        at += p.ncols();
    }
    out
}

/// Vertical concatenation.
pub fn vstack(parts: &[&CMat]) -> CMat {
    let cols = parts.first().map(|p| p.ncols()).unwrap_or(0);
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        assert_eq!(p.ncols(), cols, "vstack column mismatch");
        out.view_mut((at, 0), (p.nrows(), cols)).copy_from(*p);
        at += p.nrows();
    }
    out
}

/// Block diagonal matrix.
pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let m = CMat::from_row_slice(1, 3, &[re(1.0), re(1.0), re(0.0)]);
        let (ns, resid) = null_space_dim(&m, 2);
        assert!(resid < 1e-14);
        assert!(max_abs(&(&m * &ns)) < 1e-14);
        assert_eq!(rank(&ns, 1e-12), 2);
    }

    #[test]
    fn tiny_angles_are_resolved() {
        let a = CMat::from_column_slice(2, 1, &[re(1.0), re(0.0)]);
        let b = CMat::from_column_slice(2, 1, &[re(1.0), re(1e-11)]);
        let ang = principal_angles(&a, &b);
        assert!((ang[0] - 1e-11).abs() < 1e-15);
    }

    #[test]
    fn lstsq_recovers_solution() {
        let a = CMat::from_row_slice(3, 2, &[re(1.0), re(0.0), re(0.0), c(0.0, 2.0), re(1.0), re(1.0)]);
        let x = CMat::from_column_slice(2, 1, &[c(1.0, -1.0), re(3.0)]);
        let b = &a * &x;
        assert!(max_abs(&(lstsq(&a, &b) - x)) < 1e-13);
    }
}
