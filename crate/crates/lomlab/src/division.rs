//! Quaternions, the real block embeddings of complex and quaternion matrix
//! algebras, and recognition of a commutant as R, C or H.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, RealMatrix, Tolerance};

/// `a + b i + c j + d k`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion { a, b, c, d }
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn norm_sq(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn inverse(self) -> Option<Self> {
        let n = self.norm_sq();
        (n > 0.0).then(|| self.conj().scale(1.0 / n))
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn components(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Matrix of `x -> self * x` on R^4 with basis (1, i, j, k).
    pub fn left_matrix(self) -> RealMatrix {
        let Quaternion { a, b, c, d } = self;
        RealMatrix::wrap(DMatrix::from_row_slice(
            4,
            4,
            &[a, -b, -c, -d, b, a, -d, c, c, d, a, -b, d, -c, b, a],
        ))
    }

    /// Matrix of `x -> x * self` on R^4 with basis (1, i, j, k).
    pub fn right_matrix(self) -> RealMatrix {
        let Quaternion { a, b, c, d } = self;
        RealMatrix::wrap(DMatrix::from_row_slice(
            4,
            4,
            &[a, -b, -c, -d, b, a, d, -c, c, -d, a, b, d, c, -b, a],
        ))
    }
}

pub fn quat_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    Quaternion::new(
        p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
        p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
        p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
        p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
    )
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        quat_mul(self, rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

/// Square matrix with quaternion entries, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionMatrix {
    n: usize,
    entries: Vec<Quaternion>,
}

impl QuaternionMatrix {
    pub fn new(n: usize, entries: Vec<Quaternion>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "{} quaternion entries for an {n}x{n} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|q| q.components().iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(QuaternionMatrix { n, entries })
    }

    pub fn scalar(q: Quaternion) -> Self {
        QuaternionMatrix { n: 1, entries: vec![q] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Quaternion {
        self.entries[i * self.n + j]
    }

    pub fn mul(&self, other: &QuaternionMatrix) -> Result<QuaternionMatrix> {
        if self.n != other.n {
            return Err(Error::ShapeMismatch("quaternion matrix sizes differ".into()));
        }
        let n = self.n;
        let mut entries = vec![Quaternion::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = (0..n).fold(Quaternion::ZERO, |acc, k| acc + self.get(i, k) * other.get(k, j));
            }
        }
        Ok(QuaternionMatrix { n, entries })
    }
}

/// The 2n x 2n real matrix `[[T, -R], [R, T]]` representing `T + iR`.
pub fn embed_complex(t: &RealMatrix, r: &RealMatrix) -> Result<RealMatrix> {
    if !t.is_square() || t.rows() != r.rows() || t.cols() != r.cols() {
        return Err(Error::ShapeMismatch(
            "embed_complex needs square real and imaginary parts of equal size".into(),
        ));
    }
    let n = t.rows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(t.as_matrix());
    out.view_mut((0, n), (n, n)).copy_from(&(-r.as_matrix()));
    out.view_mut((n, 0), (n, n)).copy_from(r.as_matrix());
    out.view_mut((n, n), (n, n)).copy_from(t.as_matrix());
    Ok(RealMatrix::wrap(out))
}

/// Left multiplication by `q` on H^n = R^{4n}, coordinates grouped per
/// quaternion entry in the order (1, i, j, k).
pub fn embed_quaternion(q: &QuaternionMatrix) -> RealMatrix {
    let n = q.size();
    let mut out = DMatrix::zeros(4 * n, 4 * n);
    for i in 0..n {
        for j in 0..n {
            out.view_mut((4 * i, 4 * j), (4, 4))
                .copy_from(q.get(i, j).left_matrix().as_matrix());
        }
    }
    RealMatrix::wrap(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgebraType {
    Real,
    Complex,
    Quaternion,
}

impl AlgebraType {
    pub fn commutant_dim(self) -> usize {
        match self {
            AlgebraType::Real => 1,
            AlgebraType::Complex => 2,
            AlgebraType::Quaternion => 4,
        }
    }

    pub fn from_commutant_dim(dim: usize) -> Result<Self> {
        match dim {
            1 => Ok(AlgebraType::Real),
            2 => Ok(AlgebraType::Complex),
            4 => Ok(AlgebraType::Quaternion),
            d => Err(Error::BadDimension(d)),
        }
    }
}

impl fmt::Display for AlgebraType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AlgebraType::Real => "Real",
            AlgebraType::Complex => "Complex",
            AlgebraType::Quaternion => "Quaternion",
        };
        f.write_str(s)
    }
}

/// A recognized commutant: its type and explicit anti-involutive units.
/// `units` is empty for R, `[W]` for C and `[I, J, K]` with `IJK = -1` for H.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisionStructure {
    pub algebra_type: AlgebraType,
    pub units: Vec<RealMatrix>,
}

impl DivisionStructure {
    pub fn commutant_dim(&self) -> usize {
        self.algebra_type.commutant_dim()
    }

    pub fn ambient_dim(&self) -> Option<usize> {
        self.units.first().map(RealMatrix::rows)
    }

    /// `{I} ∪ units`: a real basis of the division algebra.
    pub fn basis(&self, n: usize) -> Vec<RealMatrix> {
        std::iter::once(RealMatrix::identity(n)).chain(self.units.iter().cloned()).collect()
    }

    /// Largest residual among the defining relations.
    pub fn relation_residual(&self) -> f64 {
        let Some(n) = self.ambient_dim() else { return 0.0 };
        let id = RealMatrix::identity(n);
        let mut worst = self
            .units
            .iter()
            .map(|u| (&(u * u) + &id).frobenius_norm())
            .fold(0.0, f64::max);
        if let [i, j, k] = self.units.as_slice() {
            worst = worst.max((&(&(i * j) * k) + &id).frobenius_norm());
        }
        worst
    }
}

/// `-tr(AB)/n`: on pure (trace-zero) elements of a copy of C or H inside
/// M_n(R) this is the Euclidean inner product of the corresponding complex
/// or quaternion imaginary parts, for every embedding.
fn pure_form(a: &RealMatrix, b: &RealMatrix) -> f64 {
    let n = a.rows() as f64;
    -(a.as_matrix().transpose().dot(b.as_matrix())) / n
}

fn pure_part(b: &RealMatrix) -> RealMatrix {
    let n = b.rows();
    b - &RealMatrix::identity(n).scale(b.trace() / n as f64)
}

fn normalize_unit(p: &RealMatrix) -> Result<RealMatrix> {
    let beta = pure_form(p, p);
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::NotAntiInvolutive(f64::INFINITY));
    }
    Ok(p.scale(1.0 / beta.sqrt()))
}

fn check_anti_involution(u: &RealMatrix, tol: &Tolerance) -> Result<()> {
    let n = u.rows();
    let r = (&(u * u) + &RealMatrix::identity(n)).frobenius_norm();
    if r > tol.identity_bound(u.frobenius_norm().powi(2)) {
        return Err(Error::NotAntiInvolutive(r));
    }
    Ok(())
}

/// Identifies `span(commutant_basis)` as R, C or H and extracts units.
pub fn frobenius_recognize(commutant_basis: &[RealMatrix], tol: &Tolerance) -> Result<DivisionStructure> {
    let n = commutant_basis
        .first()
        .map(RealMatrix::rows)
        .ok_or(Error::BadDimension(0))?;
    if commutant_basis.iter().any(|b| !b.is_square() || b.rows() != n) {
        return Err(Error::ShapeMismatch("commutant basis elements must be n x n".into()));
    }
    let vecs: Vec<_> = commutant_basis.iter().map(RealMatrix::vec).collect();
    let stacked = numeric::matrix_from_columns(&vecs)?;
    let dim = numeric::rank_of(&stacked, tol)?;

    let id = RealMatrix::identity(n);
    let (_, id_residual) = numeric::solve_least_squares(&stacked, &RealMatrix::column(&id.vec()), tol)?;
    if id_residual > tol.identity_bound((n as f64).sqrt()) {
        return Err(Error::MissingIdentity);
    }

    let algebra_type = AlgebraType::from_commutant_dim(dim)?;
    // Pure parts, largest first, so that the chosen units are well scaled.
    let mut pure: Vec<RealMatrix> = commutant_basis.iter().map(pure_part).collect();
    pure.sort_by(|a, b| pure_form(b, b).total_cmp(&pure_form(a, a)));

    let units = match algebra_type {
        AlgebraType::Real => Vec::new(),
        AlgebraType::Complex => {
            let w = normalize_unit(&pure[0])?;
            check_anti_involution(&w, tol)?;
            vec![w]
        }
        AlgebraType::Quaternion => {
            let i_op = normalize_unit(&pure[0])?;
            let j_op = pure[1..]
                .iter()
                .map(|p| p - &i_op.scale(pure_form(p, &i_op)))
                .max_by(|a, b| pure_form(a, a).total_cmp(&pure_form(b, b)))
                .expect("three pure candidates remain");
            let j_op = normalize_unit(&j_op)?;
            let k_op = &i_op * &j_op;
            for u in [&i_op, &j_op, &k_op] {
                check_anti_involution(u, tol)?;
            }
            let ijk = (&(&(&i_op * &j_op) * &k_op) + &id).frobenius_norm();
            let scale = i_op.frobenius_norm() * j_op.frobenius_norm() * k_op.frobenius_norm();
            if ijk > tol.identity_bound(scale) {
                return Err(Error::NotAntiInvolutive(ijk));
            }
            let (_, k_residual) = numeric::solve_least_squares(&stacked, &RealMatrix::column(&k_op.vec()), tol)?;
            if k_residual > tol.identity_bound(k_op.frobenius_norm()) {
                return Err(Error::Inconsistent(format!(
                    "I*J leaves the commutant span (residual {k_residual:.3e})"
                )));
            }
            vec![i_op, j_op, k_op]
        }
    };
    Ok(DivisionStructure { algebra_type, units })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &RealMatrix, b: &RealMatrix, eps: f64) -> bool {
        (a - b).frobenius_norm() <= eps
    }

    fn rq(rng: &mut ChaCha8Rng) -> Quaternion {
        Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
    }

    fn rmat(rng: &mut ChaCha8Rng, n: usize) -> RealMatrix {
        RealMatrix::new(DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).unwrap()
    }

    #[test]
    fn hamilton_relations() {
        use Quaternion as Q;
        assert_eq!(Q::I * Q::J, Q::K);
        assert_eq!(Q::J * Q::K, Q::I);
        assert_eq!(Q::K * Q::I, Q::J);
        assert_eq!(Q::J * Q::I, -Q::K);
        for u in [Q::I, Q::J, Q::K] {
            assert_eq!(u * u, -Q::ONE);
        }
        assert_eq!(Q::I * Q::J * Q::K, -Q::ONE);
        let q = Q::new(0.5, -2.0, 3.0, 1.5);
        assert_eq!(q * Q::ONE, q);
        assert_eq!(Q::new(1.0, 1.0, 0.0, 0.0) * Q::new(1.0, -1.0, 0.0, 0.0), Q::new(2.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn conjugate_gives_norm() {
        let q = Quaternion::new(1.0, -2.0, 0.5, 3.0);
        let p = q * q.conj();
        assert!((p.a - q.norm_sq()).abs() < 1e-14);
        assert!(p.b.abs() + p.c.abs() + p.d.abs() < 1e-14);
        let inv = q.inverse().unwrap();
        let one = q * inv;
        assert!((one - Quaternion::ONE).norm_sq() < 1e-28);
        assert!(Quaternion::ZERO.inverse().is_none());
    }

    #[test]
    fn embed_complex_examples() {
        let e = embed_complex(&RealMatrix::from_rows(&[&[0.0]]).unwrap(), &RealMatrix::from_rows(&[&[1.0]]).unwrap())
            .unwrap();
        assert_eq!(e, RealMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap());
        let e = embed_complex(&RealMatrix::identity(3), &RealMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e, RealMatrix::identity(6));
        assert!(embed_complex(&RealMatrix::identity(2), &RealMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn embed_complex_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (t1, r1, t2, r2) = (rmat(&mut rng, 2), rmat(&mut rng, 2), rmat(&mut rng, 2), rmat(&mut rng, 2));
            let lhs = &embed_complex(&t1, &r1).unwrap() * &embed_complex(&t2, &r2).unwrap();
            let rhs = embed_complex(&(&(&t1 * &t2) - &(&r1 * &r2)), &(&(&r1 * &t2) + &(&t1 * &r2))).unwrap();
            assert!(close(&lhs, &rhs, 1e-12));
            let sum = &embed_complex(&t1, &r1).unwrap() + &embed_complex(&t2, &r2).unwrap();
            assert_eq!(sum, embed_complex(&(&t1 + &t2), &(&r1 + &r2)).unwrap());
        }
    }

    #[test]
    fn embed_quaternion_examples() {
        let li = embed_quaternion(&QuaternionMatrix::scalar(Quaternion::I));
        let expected = RealMatrix::from_rows(&[
            &[0.0, -1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(li, expected);
        assert_eq!(embed_quaternion(&QuaternionMatrix::scalar(Quaternion::ONE)), RealMatrix::identity(4));
    }

    #[test]
    fn left_and_right_matrices_match_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (p, x) = (rq(&mut rng), rq(&mut rng));
            let xv = nalgebra::DVector::from_column_slice(&x.components());
            let left = p.left_matrix().apply(&xv);
            let right = p.right_matrix().apply(&xv);
            let (px, xp) = ((p * x).components(), (x * p).components());
            for t in 0..4 {
                assert!((left[t] - px[t]).abs() < 1e-14);
                assert!((right[t] - xp[t]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn embed_quaternion_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p = QuaternionMatrix::new(2, (0..4).map(|_| rq(&mut rng)).collect()).unwrap();
            let q = QuaternionMatrix::new(2, (0..4).map(|_| rq(&mut rng)).collect()).unwrap();
            let lhs = embed_quaternion(&p.mul(&q).unwrap());
            let rhs = &embed_quaternion(&p) * &embed_quaternion(&q);
            assert!(close(&lhs, &rhs, 1e-12));
        }
    }

    #[test]
    fn recognize_real_and_complex() {
        let tol = Tolerance::default();
        let d = frobenius_recognize(&[RealMatrix::identity(2)], &tol).unwrap();
        assert_eq!(d.algebra_type, AlgebraType::Real);
        assert!(d.units.is_empty());

        let j = RealMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let d = frobenius_recognize(&[RealMatrix::identity(2), j.clone()], &tol).unwrap();
        assert_eq!(d.algebra_type, AlgebraType::Complex);
        assert!(close(&d.units[0], &j, 1e-14));
    }

    #[test]
    fn recognize_quaternion() {
        let tol = Tolerance::default();
        let basis: Vec<_> = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K]
            .into_iter()
            .map(|q| embed_quaternion(&QuaternionMatrix::scalar(q)))
            .collect();
        let d = frobenius_recognize(&basis, &tol).unwrap();
        assert_eq!(d.algebra_type, AlgebraType::Quaternion);
        assert_eq!(d.units.len(), 3);
        assert!(d.relation_residual() <= 10.0 * tol.identity_bound(1.0));
        assert!(d.relation_residual() < 1e-12);
    }

    #[test]
    fn recognize_rejects_non_division_algebras() {
        let tol = Tolerance::default();
        // R + R: the non-scalar element squares to +1
        let split = vec![RealMatrix::identity(2), RealMatrix::from_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()];
        assert!(matches!(frobenius_recognize(&split, &tol), Err(Error::NotAntiInvolutive(_))));
        // dual numbers
        let dual = vec![RealMatrix::identity(2), RealMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()];
        assert!(matches!(frobenius_recognize(&dual, &tol), Err(Error::NotAntiInvolutive(_))));
        // dimension 3
        let diag3: Vec<_> = (0..3)
            .map(|i| RealMatrix::wrap(DMatrix::from_fn(3, 3, |r, c| if r == c && r == i { 1.0 } else { 0.0 })))
            .collect();
        assert_eq!(frobenius_recognize(&diag3, &tol), Err(Error::BadDimension(3)));
        // no identity in the span
        let nil = vec![RealMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()];
        assert_eq!(frobenius_recognize(&nil, &tol), Err(Error::MissingIdentity));
        // M_2(R) has dimension 4 but is not a division algebra
        let units: Vec<_> = (0..4)
            .map(|t| RealMatrix::wrap(DMatrix::from_fn(2, 2, |r, c| if r * 2 + c == t { 1.0 } else { 0.0 })))
            .collect();
        assert!(frobenius_recognize(&units, &tol).is_err());
    }

    #[test]
    fn recognition_is_similarity_invariant() {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let quat: Vec<_> = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K]
            .into_iter()
            .map(|q| embed_quaternion(&QuaternionMatrix::new(2, vec![q, Quaternion::ZERO, Quaternion::ZERO, q]).unwrap()))
            .collect();
        let j = RealMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let cplx = [RealMatrix::identity(4), numeric::block_diag(&[j.clone(), j])];
        for _ in 0..10 {
            let p = &RealMatrix::identity(8).scale(2.0) + &rmat(&mut rng, 8);
            assert!(numeric::condition_number(&p) <= 1e3);
            let p_inv = p.inverse().unwrap();
            let conj: Vec<_> = quat.iter().map(|b| &(&p * b) * &p_inv).collect();
            let d = frobenius_recognize(&conj, &tol).unwrap();
            assert_eq!(d.algebra_type, AlgebraType::Quaternion);
            assert!(d.relation_residual() < 1e-8);

            let p4 = RealMatrix::new(p.as_matrix().view((0, 0), (4, 4)).into_owned()).unwrap();
            let p4_inv = p4.inverse().unwrap();
            let conj: Vec<_> = cplx.iter().map(|b| &(&p4 * b) * &p4_inv).collect();
            let d = frobenius_recognize(&conj, &tol).unwrap();
            assert_eq!(d.algebra_type, AlgebraType::Complex);
            assert!(d.relation_residual() < 1e-8);
        }
    }
}
