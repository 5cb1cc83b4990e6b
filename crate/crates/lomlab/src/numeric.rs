//! Tolerant dense real linear algebra.
//!
//! Every zero test in the crate goes through singular values: a singular
//! value `s` counts as zero iff `s <= max(abs_eps, rel_eps * s_max)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel_eps: f64,
    pub abs_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel_eps: 1e-9, abs_eps: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(rel_eps: f64, abs_eps: f64) -> Result<Self> {
        let tol = Tolerance { rel_eps, abs_eps };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_eps.is_finite() && self.rel_eps > 0.0) {
            return Err(Error::BadTolerance(format!("rel_eps must be > 0, got {}", self.rel_eps)));
        }
        if !(self.abs_eps.is_finite() && self.abs_eps >= 0.0) {
            return Err(Error::BadTolerance(format!("abs_eps must be >= 0, got {}", self.abs_eps)));
        }
        Ok(())
    }

    /// Singular-value cutoff relative to the largest singular value.
    pub fn cutoff(&self, sigma_max: f64) -> f64 {
        self.abs_eps.max(self.rel_eps * sigma_max)
    }

    /// Bound for residuals of algebraic identities (`U^2 + I`, products
    /// landing in a span, ...) evaluated on data of magnitude `scale`.
    /// Roundoff in such identities grows with the conditioning of the data,
    /// so the bound is the square root of the relative threshold.
    pub fn identity_bound(&self, scale: f64) -> f64 {
        self.abs_eps.max(self.rel_eps.sqrt() * scale.max(1.0))
    }
}

/// Dense real matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct RealMatrix(DMatrix<f64>);

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealMatrix{}x{}{:?}", self.rows(), self.cols(), self.row_major())
    }
}

impl RealMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::ShapeMismatch("matrices must have positive dimensions".into()));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(RealMatrix(m))
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if rows.checked_mul(cols) != Some(entries.len()) {
            return Err(Error::ShapeMismatch(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flat_map(|row| row.iter().copied()).collect();
        Self::from_row_major(r, c, &flat)
    }

    pub fn identity(n: usize) -> Self {
        RealMatrix(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn column(v: &Vector) -> Self {
        RealMatrix(DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
    }

    /// Wraps the result of arithmetic on already-validated matrices.
    pub(crate) fn wrap(m: DMatrix<f64>) -> Self {
        RealMatrix(m)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn transpose(&self) -> Self {
        RealMatrix(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        RealMatrix(&self.0 * s)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn spectral_norm(&self) -> f64 {
        singular_values(self).first().copied().unwrap_or(0.0)
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        &self.0 * v
    }

    /// Trace inner product `tr(A^T B)`.
    pub fn dot(&self, other: &RealMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = DMatrix::identity(self.rows(), self.cols());
        for _ in 0..k {
            out = &out * &self.0;
        }
        RealMatrix(out)
    }

    /// Column-major flattening, the coordinate convention used for vec(X).
    pub fn vec(&self) -> Vector {
        DVector::from_column_slice(self.0.as_slice())
    }

    pub fn unvec(v: &Vector, rows: usize, cols: usize) -> Self {
        RealMatrix(DMatrix::from_column_slice(rows, cols, v.as_slice()))
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols()).map(|j| self.0.column(j).into_owned()).collect()
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        self.0.clone().try_inverse().map(RealMatrix)
    }
}

impl Add for &RealMatrix {
    type Output = RealMatrix;
    fn add(self, rhs: &RealMatrix) -> RealMatrix {
        RealMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &RealMatrix {
    type Output = RealMatrix;
    fn sub(self, rhs: &RealMatrix) -> RealMatrix {
        RealMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &RealMatrix {
    type Output = RealMatrix;
    fn mul(self, rhs: &RealMatrix) -> RealMatrix {
        RealMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &RealMatrix {
    type Output = RealMatrix;
    fn neg(self) -> RealMatrix {
        RealMatrix(-&self.0)
    }
}

/// Ambient space R^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VectorSpaceModel {
    dim: usize,
}

impl VectorSpaceModel {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ShapeMismatch("ambient dimension must be positive".into()));
        }
        Ok(VectorSpaceModel { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

struct SortedSvd {
    u: DMatrix<f64>,
    sigma: Vec<f64>,
    v: DMatrix<f64>,
}

/// SVD with singular values in descending order. Wide inputs are padded
/// with zero rows so that `v` is always a full orthonormal basis of the
/// domain.
/// Thin SVD with singular values in decreasing order: `u` is `r x p`, `v`
/// is `c x p`, `p = min(r, c)`. Wide matrices are decomposed through their
/// transpose.
fn sorted_svd(m: &DMatrix<f64>) -> SortedSvd {
    let wide = m.nrows() < m.ncols();
    let (left, sigma, right) = if wide { jacobi_svd(m.transpose()) } else { jacobi_svd(m.clone()) };
    if wide {
        SortedSvd { u: right, sigma, v: left }
    } else {
        SortedSvd { u: left, sigma, v: right }
    }
}

/// One-sided Jacobi SVD of a tall matrix `a` (`r >= c`): plane rotations on
/// the right orthogonalize the columns of `a V`, whose norms are the
/// singular values. Accurate for clustered and repeated singular values,
/// where the bidiagonal QR iteration in nalgebra can return factors that do
/// not reproduce the input.
fn jacobi_svd(a: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (r, c) = a.shape();
    let mut a = a.as_slice().to_vec();
    let mut v = DMatrix::<f64>::identity(c, c).as_slice().to_vec();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let mut norms2: Vec<f64> = (0..c).map(|k| dot(&a[k * r..(k + 1) * r], &a[k * r..(k + 1) * r])).collect();
    let rotate = |m: &mut [f64], len: usize, i: usize, j: usize, cs: f64, sn: f64| {
        let (lo, hi) = m.split_at_mut(j * len);
        let (x, y) = (&mut lo[i * len..(i + 1) * len], &mut hi[..len]);
        for (p, q) in x.iter_mut().zip(y.iter_mut()) {
            let (u, w) = (*p, *q);
            *p = cs * u - sn * w;
            *q = sn * u + cs * w;
        }
    };
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..c {
            for j in (i + 1)..c {
                let gamma = dot(&a[i * r..(i + 1) * r], &a[j * r..(j + 1) * r]);
                let (alpha, beta) = (norms2[i], norms2[j]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut a, r, i, j, cs, sn);
                rotate(&mut v, c, i, j, cs, sn);
                norms2[i] = dot(&a[i * r..(i + 1) * r], &a[i * r..(i + 1) * r]);
                norms2[j] = dot(&a[j * r..(j + 1) * r], &a[j * r..(j + 1) * r]);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = norms2.iter().map(|x| x.sqrt()).collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let u = DMatrix::from_fn(r, c, |i, k| {
        let s = norms[order[k]];
        if s > 0.0 { a[order[k] * r + i] / s } else { 0.0 }
    });
    let v = DMatrix::from_fn(c, c, |i, k| v[order[k] * c + i]);
    (u, sigma, v)
}

/// Orthonormal completion of orthonormal `basis` (columns) to R^dim,
/// adding at each step the standard vector with the largest remainder.
fn orthogonal_completion(basis: &[Vector], dim: usize) -> Vec<Vector> {
    let mut all: Vec<Vector> = basis.to_vec();
    let mut out = Vec::new();
    while all.len() < dim {
        let best = (0..dim)
            .map(|i| {
                let mut r = DVector::from_fn(dim, |j, _| if i == j { 1.0 } else { 0.0 });
                for _ in 0..2 {
                    for b in &all {
                        let t = b.dot(&r);
                        r.axpy(-t, b, 1.0);
                    }
                }
                r
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("dim > 0");
        let v = &best / best.norm();
        all.push(v.clone());
        out.push(v);
    }
    out
}

pub fn singular_values(m: &RealMatrix) -> Vec<f64> {
    if m.0.is_empty() {
        return Vec::new();
    }
    sorted_svd(&m.0).sigma
}

fn check_finite(m: &RealMatrix) -> Result<()> {
    if m.0.iter().any(|x| !x.is_finite()) {
        Err(Error::NonFinite)
    } else {
        Ok(())
    }
}

fn numerical_rank(sigma: &[f64], tol: &Tolerance) -> usize {
    let cut = tol.cutoff(sigma.first().copied().unwrap_or(0.0));
    sigma.iter().filter(|&&s| s > cut).count()
}

pub fn rank_of(m: &RealMatrix, tol: &Tolerance) -> Result<usize> {
    check_finite(m)?;
    Ok(numerical_rank(&singular_values(m), tol))
}

/// Orthonormal basis of the numerical nullspace, `cols - rank` vectors.
pub fn nullspace_of(m: &RealMatrix, tol: &Tolerance) -> Result<Vec<Vector>> {
    check_finite(m)?;
    Ok(nullspace_raw(&m.0, tol))
}

pub(crate) fn nullspace_raw(m: &DMatrix<f64>, tol: &Tolerance) -> Vec<Vector> {
    let svd = sorted_svd(m);
    let rank = numerical_rank(&svd.sigma, tol);
    if svd.v.ncols() == m.ncols() {
        return (rank..m.ncols()).map(|k| svd.v.column(k).into_owned()).collect();
    }
    let row_space: Vec<Vector> = (0..rank).map(|k| svd.v.column(k).into_owned()).collect();
    orthogonal_completion(&row_space, m.ncols())
}

/// Orthonormal basis of the numerical range (column space).
pub fn range_basis(m: &RealMatrix, tol: &Tolerance) -> Result<Vec<Vector>> {
    check_finite(m)?;
    let svd = sorted_svd(&m.0);
    let rank = numerical_rank(&svd.sigma, tol);
    Ok((0..rank).map(|k| svd.u.column(k).into_owned()).collect())
}

/// Minimum-norm least-squares solution of `A x = b` (b may have several
/// columns) together with the Frobenius residual `||A x - b||`.
pub fn solve_least_squares(
    a: &RealMatrix,
    b: &RealMatrix,
    tol: &Tolerance,
) -> Result<(RealMatrix, f64)> {
    check_finite(a)?;
    check_finite(b)?;
    if a.rows() != b.rows() {
        return Err(Error::ShapeMismatch(format!(
            "least squares: A has {} rows, b has {}",
            a.rows(),
            b.rows()
        )));
    }
    let x = lstsq_raw(&a.0, &b.0, tol);
    let residual = (&a.0 * &x - &b.0).norm();
    Ok((RealMatrix(x), residual))
}

pub(crate) fn lstsq_raw(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: &Tolerance) -> DMatrix<f64> {
    let svd = sorted_svd(a);
    let rank = numerical_rank(&svd.sigma, tol);
    let mut x = DMatrix::zeros(a.ncols(), b.ncols());
    for k in 0..rank {
        let uk = svd.u.column(k);
        let coeffs = b.tr_mul(&uk) / svd.sigma[k];
        x += svd.v.column(k) * coeffs.transpose();
    }
    x
}

pub fn outer(u: &Vector, v: &Vector) -> RealMatrix {
    RealMatrix(u * v.transpose())
}

pub fn block_diag(blocks: &[RealMatrix]) -> RealMatrix {
    let rows: usize = blocks.iter().map(RealMatrix::rows).sum();
    let cols: usize = blocks.iter().map(RealMatrix::cols).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.rows(), b.cols())).copy_from(&b.0);
        r += b.rows();
        c += b.cols();
    }
    RealMatrix(out)
}

pub fn hstack(parts: &[RealMatrix]) -> Result<RealMatrix> {
    let rows = parts.first().map_or(0, RealMatrix::rows);
    if parts.iter().any(|p| p.rows() != rows) {
        return Err(Error::ShapeMismatch("hstack: row counts differ".into()));
    }
    let cols: usize = parts.iter().map(RealMatrix::cols).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        out.view_mut((0, c), (rows, p.cols())).copy_from(&p.0);
        c += p.cols();
    }
    RealMatrix::new(out)
}

pub fn matrix_from_columns(cols: &[Vector]) -> Result<RealMatrix> {
    let n = cols.first().map_or(0, |v| v.len());
    if cols.iter().any(|v| v.len() != n) {
        return Err(Error::ShapeMismatch("columns have different lengths".into()));
    }
    RealMatrix::new(DMatrix::from_columns(cols))
}

pub fn condition_number(m: &RealMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> RealMatrix {
        RealMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn wide_system_with_repeated_singular_values() {
        let tol = Tolerance::default();
        let a = hstack(&[RealMatrix::identity(4), RealMatrix::identity(4).scale(-1.0)]).unwrap();
        let b = RealMatrix::from_row_major(4, 1, &[1.0, -2.0, 0.5, 3.0]).unwrap();
        let (x, residual) = solve_least_squares(&a, &b, &tol).unwrap();
        assert!(residual < 1e-14);
        assert!((x.frobenius_norm() - b.frobenius_norm() / 2f64.sqrt()).abs() < 1e-14);
        let null = nullspace_of(&a, &tol).unwrap();
        assert_eq!(null.len(), 4);
        for v in &null {
            assert!(a.apply(v).norm() < 1e-14);
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_examples() {
        let tol = Tolerance::default();
        assert_eq!(rank_of(&m(&[&[1.0, 0.0], &[0.0, 0.0]]), &tol).unwrap(), 1);
        assert_eq!(rank_of(&m(&[&[0.0, 0.0], &[0.0, 0.0]]), &tol).unwrap(), 0);
        assert_eq!(rank_of(&m(&[&[0.0, -1.0], &[1.0, 0.0]]), &tol).unwrap(), 2);
    }

    #[test]
    fn non_finite_rejected() {
        let bad = DMatrix::from_row_slice(1, 2, &[1.0, f64::NAN]);
        assert_eq!(RealMatrix::new(bad.clone()), Err(Error::NonFinite));
        let smuggled = RealMatrix::wrap(bad);
        assert_eq!(rank_of(&smuggled, &Tolerance::default()), Err(Error::NonFinite));
        assert_eq!(nullspace_of(&smuggled, &Tolerance::default()), Err(Error::NonFinite));
    }

    #[test]
    fn bad_tolerances() {
        assert!(Tolerance::new(0.0, 0.0).is_err());
        assert!(Tolerance::new(1e-9, -1.0).is_err());
        assert!(Tolerance::new(1e-9, 0.0).is_ok());
    }

    #[test]
    fn nullspace_examples() {
        let tol = Tolerance::default();
        let ns = nullspace_of(&m(&[&[1.0, 1.0], &[1.0, 1.0]]), &tol).unwrap();
        assert_eq!(ns.len(), 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // sign of an SVD vector is arbitrary
        let v = &ns[0] * ns[0][0].signum();
        assert!((v[0] - s).abs() < 1e-12 && (v[1] + s).abs() < 1e-12);

        assert!(nullspace_of(&RealMatrix::identity(3), &tol).unwrap().is_empty());

        let ns = nullspace_of(&m(&[&[1.0, 0.0], &[0.0, 0.0]]), &tol).unwrap();
        assert_eq!(ns.len(), 1);
        assert!(ns[0][0].abs() < 1e-12 && (ns[0][1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let tol = Tolerance::default();
        let ns = nullspace_of(&m(&[&[1.0, 2.0, 3.0]]), &tol).unwrap();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((v[0] + 2.0 * v[1] + 3.0 * v[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn least_squares_examples() {
        let tol = Tolerance::default();
        let (x, r) = solve_least_squares(
            &RealMatrix::identity(2),
            &m(&[&[3.0], &[4.0]]),
            &tol,
        )
        .unwrap();
        assert_eq!(x.row_major().len(), 2);
        assert!((x.get(0, 0) - 3.0).abs() < 1e-14 && (x.get(1, 0) - 4.0).abs() < 1e-14);
        assert!(r < 1e-14);

        let (x, r) = solve_least_squares(&m(&[&[1.0], &[1.0]]), &m(&[&[0.0], &[2.0]]), &tol).unwrap();
        assert!((x.get(0, 0) - 1.0).abs() < 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);

        // normal equations: 2x1 + 2x2 = 4 twice, minimum norm on x1 + x2 = 2 is (1, 1)
        let (x, r) = solve_least_squares(
            &m(&[&[1.0, 1.0], &[1.0, 1.0]]),
            &m(&[&[2.0], &[2.0]]),
            &tol,
        )
        .unwrap();
        assert!((x.get(0, 0) - 1.0).abs() < 1e-12 && (x.get(1, 0) - 1.0).abs() < 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn least_squares_shape_mismatch() {
        let err = solve_least_squares(&RealMatrix::identity(2), &RealMatrix::zeros(3, 1), &Tolerance::default());
        assert!(matches!(err, Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn block_helpers() {
        let j = m(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let b = block_diag(&[j.clone(), RealMatrix::identity(1)]);
        assert_eq!(b.rows(), 3);
        assert_eq!(b.get(0, 1), -1.0);
        assert_eq!(b.get(2, 2), 1.0);
        let h = hstack(&[j.clone(), j]).unwrap();
        assert_eq!((h.rows(), h.cols()), (2, 4));
        assert_eq!(h.get(1, 2), 1.0);
    }

    fn small_matrix() -> impl Strategy<Value = RealMatrix> {
        (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| {
            (proptest::collection::vec(-1.0f64..1.0, r * c), 0usize..=r.min(c)).prop_map(
                move |(data, drop)| {
                    // zero some rows so that rank-deficient cases are common
                    let mut mat = DMatrix::from_row_slice(r, c, &data);
                    for i in 0..drop {
                        mat.row_mut(i).fill(0.0);
                    }
                    RealMatrix::new(mat).unwrap()
                },
            )
        })
    }

    fn well_conditioned(n: usize) -> impl Strategy<Value = RealMatrix> {
        proptest::collection::vec(-0.3f64..0.3, n * n).prop_map(move |data| {
            let perturb = DMatrix::from_row_slice(n, n, &data);
            RealMatrix::new(DMatrix::identity(n, n) * 2.0 + perturb).unwrap()
        })
    }

    proptest! {
        #[test]
        fn rank_is_transpose_invariant(a in small_matrix()) {
            let tol = Tolerance::default();
            prop_assert_eq!(rank_of(&a, &tol).unwrap(), rank_of(&a.transpose(), &tol).unwrap());
        }

        #[test]
        fn rank_is_equivalence_invariant(
            a in small_matrix(),
            p in well_conditioned(5),
            q in well_conditioned(5),
        ) {
            let tol = Tolerance::default();
            let p = RealMatrix::new(p.as_matrix().view((0, 0), (a.rows(), a.rows())).into_owned()).unwrap();
            let q = RealMatrix::new(q.as_matrix().view((0, 0), (a.cols(), a.cols())).into_owned()).unwrap();
            let paq = &(&p * &a) * &q;
            prop_assert_eq!(rank_of(&paq, &tol).unwrap(), rank_of(&a, &tol).unwrap());
        }

        #[test]
        fn nullspace_vectors_are_annihilated(a in small_matrix()) {
            let tol = Tolerance::default();
            let ns = nullspace_of(&a, &tol).unwrap();
            prop_assert_eq!(ns.len(), a.cols() - rank_of(&a, &tol).unwrap());
            let cut = tol.cutoff(a.spectral_norm());
            for v in &ns {
                prop_assert!((v.norm() - 1.0).abs() < 1e-10);
                prop_assert!(a.apply(v).norm() <= 10.0 * cut);
            }
        }

        #[test]
        fn least_squares_matches_normal_equations(
            data in proptest::collection::vec(-1.0f64..1.0, 12),
            rhs in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            // full column rank 4x3 systems: normal equations are well posed
            let a = RealMatrix::from_row_major(4, 3, &data).unwrap();
            prop_assume!(singular_values(&a).last().copied().unwrap_or(0.0) > 1e-2);
            let b = RealMatrix::from_row_major(4, 1, &rhs).unwrap();
            let (_, r) = solve_least_squares(&a, &b, &Tolerance::default()).unwrap();
            let ata = a.as_matrix().transpose() * a.as_matrix();
            let atb = a.as_matrix().transpose() * b.as_matrix();
            let x = ata.lu().solve(&atb).unwrap();
            let r_normal = (a.as_matrix() * x - b.as_matrix()).norm();
            prop_assert!((r - r_normal).abs() <= 1e-12);
        }
    }
}
