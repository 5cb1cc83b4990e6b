//! Model objects: partial complex structures and their rank-two commuting
//! operators, generic pairs, representations of the quaternion group,
//! group means and the functional solver behind the averaged tensors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{commutant_of, MatrixAlgebra};
use crate::division::Quaternion;
use crate::error::{Error, Result};
use crate::numeric::{self, RealMatrix, Tolerance, Vector};

/// Operator with `S^2 = -I`, assembled from 2x2 blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Pcs {
    s: RealMatrix,
    block_dims: Vec<usize>,
    schedule: Option<Vec<f64>>,
}

impl Pcs {
    /// Wraps an arbitrary anti-involution.
    pub fn new(s: RealMatrix, tol: &Tolerance) -> Result<Self> {
        if !s.is_square() || !s.rows().is_multiple_of(2) {
            return Err(Error::ShapeMismatch(format!("a complex structure needs even size, got {}x{}", s.rows(), s.cols())));
        }
        let n = s.rows();
        let r = (&(&s * &s) + &RealMatrix::identity(n)).frobenius_norm();
        if r > tol.identity_bound(s.frobenius_norm().powi(2)) {
            return Err(Error::NotAntiInvolutive(r));
        }
        Ok(Pcs { s, block_dims: vec![n], schedule: None })
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.s
    }

    pub fn dim(&self) -> usize {
        self.s.rows()
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn schedule(&self) -> Option<&[f64]> {
        self.schedule.as_deref()
    }

    pub fn anti_involution_residual(&self) -> f64 {
        (&(&self.s * &self.s) + &RealMatrix::identity(self.dim())).frobenius_norm()
    }
}

/// Direct sum of blocks `[[0, -s], [1/s, 0]]`, one per schedule entry.
pub fn build_pcs(schedule: &[f64]) -> Result<Pcs> {
    if schedule.is_empty() {
        return Err(Error::BadSchedule("schedule is empty".into()));
    }
    if let Some(bad) = schedule.iter().find(|s| !s.is_finite() || **s < 1.0) {
        return Err(Error::BadSchedule(format!("entry {bad} is below 1")));
    }
    let blocks: Vec<RealMatrix> = schedule
        .iter()
        .map(|&s| RealMatrix::from_rows(&[&[0.0, -s], &[1.0 / s, 0.0]]).expect("finite block"))
        .collect();
    Ok(Pcs {
        s: numeric::block_diag(&blocks),
        block_dims: vec![2; schedule.len()],
        schedule: Some(schedule.to_vec()),
    })
}

/// `v f - (S v)(f S)`: rank two and commuting with `S`.
pub fn t_vf(v: &Vector, f: &Vector, s: &Pcs) -> Result<RealMatrix> {
    let n = s.dim();
    if v.len() != n || f.len() != n {
        return Err(Error::ShapeMismatch(format!("v and f must have length {n}")));
    }
    let sv = s.s.apply(v);
    let fs = s.s.transpose().apply(f);
    Ok(&numeric::outer(v, f) - &numeric::outer(&sv, &fs))
}

/// `{T : T S = S T}`.
pub fn pcs_commutant_algebra(s: &Pcs, tol: &Tolerance) -> Result<MatrixAlgebra> {
    let basis = commutant_of(std::slice::from_ref(&s.s), s.dim(), tol)?;
    MatrixAlgebra::from_spanning_set(s.dim(), &basis, tol)
}

/// Two complementary subspaces given by column bases.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericPair {
    pub m_basis: RealMatrix,
    pub n_basis: RealMatrix,
}

impl GenericPair {
    pub fn new(m_basis: RealMatrix, n_basis: RealMatrix) -> Result<Self> {
        if m_basis.rows() != n_basis.rows() {
            return Err(Error::ShapeMismatch("subspace bases live in different spaces".into()));
        }
        Ok(GenericPair { m_basis, n_basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.m_basis.rows()
    }

    /// `[M | N]`, checked to be square and invertible.
    fn joined(&self, tol: &Tolerance) -> Result<RealMatrix> {
        let n = self.ambient_dim();
        let (p, q) = (self.m_basis.cols(), self.n_basis.cols());
        if p + q != n {
            return Err(Error::NotComplementary(format!("dimensions {p} + {q} differ from {n}")));
        }
        let joined = numeric::hstack(&[self.m_basis.clone(), self.n_basis.clone()])?;
        let r = numeric::rank_of(&joined, tol)?;
        if r < n {
            return Err(Error::NotComplementary(format!("the sum has dimension {r}, expected {n}")));
        }
        Ok(joined)
    }

    /// Oblique projections onto M along N and onto N along M.
    pub fn projections(&self, tol: &Tolerance) -> Result<(RealMatrix, RealMatrix)> {
        let joined = self.joined(tol)?;
        let inv = joined
            .inverse()
            .ok_or_else(|| Error::NotComplementary("decomposition matrix is singular".into()))?;
        let n = self.ambient_dim();
        let p = self.m_basis.cols();
        let sel = |lo: usize, hi: usize| {
            RealMatrix::wrap(DMatrix::from_fn(n, n, |i, j| if i == j && i >= lo && i < hi { 1.0 } else { 0.0 }))
        };
        let pm = &(&joined * &sel(0, p)) * &inv;
        let pn = &(&joined * &sel(p, n)) * &inv;
        Ok((pm, pn))
    }

    /// Swapped roles of M and N.
    pub fn swapped(&self) -> Self {
        GenericPair { m_basis: self.n_basis.clone(), n_basis: self.m_basis.clone() }
    }
}

/// Residual of `op(range B) ⊆ range B`, relative to `||op||`.
fn subspace_invariance(op: &RealMatrix, basis: &RealMatrix, tol: &Tolerance) -> Result<f64> {
    let q = numeric::range_basis(basis, tol)?;
    let scale = op.spectral_norm().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for c in basis.columns() {
        let img = op.apply(&c);
        let mut r = img.clone();
        for _ in 0..2 {
            for qv in &q {
                let t = qv.dot(&r);
                r.axpy(-t, qv, 1.0);
            }
        }
        worst = worst.max(r.norm() / (scale * c.norm().max(f64::MIN_POSITIVE)));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairPcs {
    pub pcs: Pcs,
    /// Condition number of `[M | N]`.
    pub condition: f64,
}

/// `S(x + y) = U x - U y` for `x` in M and `y` in N.
pub fn generic_pair_pcs(pair: &GenericPair, unit: &RealMatrix, tol: &Tolerance) -> Result<PairPcs> {
    let n = pair.ambient_dim();
    if !unit.is_square() || unit.rows() != n {
        return Err(Error::ShapeMismatch(format!("structure unit must be {n}x{n}")));
    }
    let joined = pair.joined(tol)?;
    for (name, b) in [("M", &pair.m_basis), ("N", &pair.n_basis)] {
        let r = subspace_invariance(unit, b, tol)?;
        if r > tol.identity_bound(1.0) {
            return Err(Error::NotInvariant(format!("{name} is not invariant under the unit (residual {r:.3e})")));
        }
    }
    let image = numeric::hstack(&[unit * &pair.m_basis, -&(unit * &pair.n_basis)])?;
    let inv = joined
        .inverse()
        .ok_or_else(|| Error::NotComplementary("decomposition matrix is singular".into()))?;
    let s = &image * &inv;
    let condition = numeric::condition_number(&joined);
    Ok(PairPcs { pcs: Pcs::new(s, tol)?, condition })
}

/// The eight elements of the quaternion group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupElement {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "-1")]
    MinusOne,
    #[serde(rename = "i")]
    I,
    #[serde(rename = "-i")]
    MinusI,
    #[serde(rename = "j")]
    J,
    #[serde(rename = "-j")]
    MinusJ,
    #[serde(rename = "k")]
    K,
    #[serde(rename = "-k")]
    MinusK,
}

impl GroupElement {
    pub const ALL: [GroupElement; 8] = [
        GroupElement::One,
        GroupElement::MinusOne,
        GroupElement::I,
        GroupElement::MinusI,
        GroupElement::J,
        GroupElement::MinusJ,
        GroupElement::K,
        GroupElement::MinusK,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|g| *g == self).expect("listed")
    }

    pub fn quaternion(self) -> Quaternion {
        match self {
            GroupElement::One => Quaternion::ONE,
            GroupElement::MinusOne => -Quaternion::ONE,
            GroupElement::I => Quaternion::I,
            GroupElement::MinusI => -Quaternion::I,
            GroupElement::J => Quaternion::J,
            GroupElement::MinusJ => -Quaternion::J,
            GroupElement::K => Quaternion::K,
            GroupElement::MinusK => -Quaternion::K,
        }
    }

    pub fn from_quaternion(q: Quaternion) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.quaternion() == q)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: GroupElement) -> GroupElement {
        Self::from_quaternion(self.quaternion() * other.quaternion()).expect("group is closed")
    }

    pub fn inverse(self) -> GroupElement {
        Self::from_quaternion(self.quaternion().conj()).expect("group is closed")
    }

    /// `u g u^-1`.
    pub fn conjugated_by(self, u: GroupElement) -> GroupElement {
        u.mul(self).mul(u.inverse())
    }
}

/// A representation of the quaternion group by real matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRep {
    n: usize,
    mats: Vec<RealMatrix>,
}

impl GroupRep {
    /// Builds from the images of all eight elements (in [`GroupElement::ALL`]
    /// order) and checks the multiplication table.
    pub fn new(mats: Vec<RealMatrix>, tol: &Tolerance) -> Result<Self> {
        if mats.len() != 8 {
            return Err(Error::ShapeMismatch(format!("expected 8 group images, got {}", mats.len())));
        }
        let n = mats[0].rows();
        if n == 0 || mats.iter().any(|m| m.rows() != n || m.cols() != n) {
            return Err(Error::ShapeMismatch("group images must be square of equal size".into()));
        }
        let rep = GroupRep { n, mats };
        let scale = rep.mats.iter().map(|m| m.spectral_norm()).fold(1.0, f64::max);
        let r = rep.homomorphism_residual();
        if r > tol.identity_bound(scale * scale) {
            return Err(Error::Precondition(format!("group relations fail (residual {r:.3e})")));
        }
        Ok(rep)
    }

    /// Extends `pi(i)`, `pi(j)` to the whole group.
    pub fn from_generators(pi_i: RealMatrix, pi_j: RealMatrix, tol: &Tolerance) -> Result<Self> {
        if !pi_i.is_square() || pi_i.rows() != pi_j.rows() || !pi_j.is_square() {
            return Err(Error::ShapeMismatch("generators must be square of equal size".into()));
        }
        let n = pi_i.rows();
        let id = RealMatrix::identity(n);
        let pi_k = &pi_i * &pi_j;
        let mats = vec![id.clone(), -&id, pi_i.clone(), -&pi_i, pi_j.clone(), -&pi_j, pi_k.clone(), -&pi_k];
        Self::new(mats, tol)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, g: GroupElement) -> &RealMatrix {
        &self.mats[g.index()]
    }

    /// Largest `||pi(g) pi(h) - pi(gh)||` over all 64 pairs.
    pub fn homomorphism_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for g in GroupElement::ALL {
            for h in GroupElement::ALL {
                let r = (&(self.get(g) * self.get(h)) - self.get(g.mul(h))).frobenius_norm();
                worst = worst.max(r);
            }
        }
        worst.max((self.get(GroupElement::One) - &RealMatrix::identity(self.n)).frobenius_norm())
    }

    /// `max_g ||pi(g)||`.
    pub fn max_norm(&self) -> f64 {
        self.mats.iter().map(|m| m.spectral_norm()).fold(0.0, f64::max)
    }
}

/// `⊕_m φ_m L_g φ_m^-1` with `L_g` left multiplication on H = R^4.
pub fn build_quaternion_rep(twists: &[RealMatrix], tol: &Tolerance) -> Result<GroupRep> {
    if twists.is_empty() {
        return Err(Error::ShapeMismatch("at least one twist is required".into()));
    }
    let mut inverses = Vec::with_capacity(twists.len());
    for (idx, phi) in twists.iter().enumerate() {
        if phi.rows() != 4 || phi.cols() != 4 {
            return Err(Error::ShapeMismatch(format!("twist {idx} must be 4x4")));
        }
        let cond = numeric::condition_number(phi);
        if !(cond.is_finite() && cond * tol.rel_eps < 1.0) {
            return Err(Error::SingularTwist(idx));
        }
        inverses.push(phi.inverse().ok_or(Error::SingularTwist(idx))?);
    }
    let mats = GroupElement::ALL
        .iter()
        .map(|g| {
            let l = g.quaternion().left_matrix();
            let blocks: Vec<RealMatrix> = twists.iter().zip(&inverses).map(|(phi, inv)| &(phi * &l) * inv).collect();
            numeric::block_diag(&blocks)
        })
        .collect();
    GroupRep::new(mats, tol)
}

/// `pi(g)(x + y) = tau(g) x + tau(alpha(g)) y` for `x` in M, `y` in N, with
/// `alpha` conjugation by `twist_by` (by default `j`, giving `alpha(i) = -i`).
pub fn twisted_rep(pair: &GenericPair, tau: &GroupRep, twist_by: GroupElement, tol: &Tolerance) -> Result<GroupRep> {
    if pair.ambient_dim() != tau.dim() {
        return Err(Error::ShapeMismatch("pair and representation act on different spaces".into()));
    }
    for (name, b) in [("M", &pair.m_basis), ("N", &pair.n_basis)] {
        for g in [GroupElement::I, GroupElement::J] {
            let r = subspace_invariance(tau.get(g), b, tol)?;
            if r > tol.identity_bound(1.0) {
                return Err(Error::NotInvariant(format!("{name} is not invariant under tau (residual {r:.3e})")));
            }
        }
    }
    let (pm, pn) = pair.projections(tol)?;
    let mats = GroupElement::ALL
        .iter()
        .map(|&g| &(tau.get(g) * &pm) + &(tau.get(g.conjugated_by(twist_by)) * &pn))
        .collect();
    GroupRep::new(mats, tol)
}

/// `sum_g pi(g) K pi(g^-1)`.
pub fn group_mean(k: &RealMatrix, rep: &GroupRep) -> Result<RealMatrix> {
    if k.rows() != rep.dim() || k.cols() != rep.dim() {
        return Err(Error::ShapeMismatch(format!("K must be {0}x{0}", rep.dim())));
    }
    let mut out = RealMatrix::zeros(rep.dim(), rep.dim());
    for g in GroupElement::ALL {
        out = &out + &(&(rep.get(g) * k) * rep.get(g.inverse()));
    }
    Ok(out)
}

/// `sum_g pi(g) y ⊗ (f ∘ pi(g^-1))`, equal to the group mean of `y ⊗ f`.
pub fn mean_tensor(y: &Vector, f: &Vector, rep: &GroupRep) -> Result<RealMatrix> {
    let n = rep.dim();
    if y.len() != n || f.len() != n {
        return Err(Error::ShapeMismatch(format!("y and f must have length {n}")));
    }
    let mut out = RealMatrix::zeros(n, n);
    for g in GroupElement::ALL {
        let gy = rep.get(g).apply(y);
        let gf = rep.get(g.inverse()).transpose().apply(f);
        out = &out + &numeric::outer(&gy, &gf);
    }
    Ok(out)
}

/// Minimum-norm `f` with `f(x) = 1/2` and `f(pi(-u) x) = 0` for `u = i, j, k`.
/// The mean tensor then satisfies `T_{y,f} x = y` for every `y`.
pub fn solve_popolam(x: &Vector, rep: &GroupRep, tol: &Tolerance) -> Result<Vector> {
    let n = rep.dim();
    if x.len() != n {
        return Err(Error::ShapeMismatch(format!("x must have length {n}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if x.norm() <= tol.abs_eps {
        return Err(Error::ZeroVector);
    }
    let points = [
        x.clone(),
        rep.get(GroupElement::MinusI).apply(x),
        rep.get(GroupElement::MinusJ).apply(x),
        rep.get(GroupElement::MinusK).apply(x),
    ];
    let sys = DMatrix::from_fn(4, n, |r, c| points[r][c]);
    let rhs = DMatrix::from_column_slice(4, 1, &[0.5, 0.0, 0.0, 0.0]);
    let rank = numeric::rank_of(&RealMatrix::new(sys.clone())?, tol)?;
    if rank < 4 {
        return Err(Error::SingularSystem(format!("constraints have rank {rank}")));
    }
    let f = numeric::lstsq_raw(&sys, &rhs, tol);
    let residual = (&sys * &f - &rhs).norm();
    if residual > tol.identity_bound(1.0) {
        return Err(Error::SingularSystem(format!("residual {residual:.3e}")));
    }
    Ok(f.column(0).into_owned())
}

/// `{T : T pi(g) = pi(g) T for all g}`.
pub fn rep_commutant_algebra(rep: &GroupRep, tol: &Tolerance) -> Result<MatrixAlgebra> {
    let gens = [rep.get(GroupElement::I).clone(), rep.get(GroupElement::J).clone()];
    let basis = commutant_of(&gens, rep.dim(), tol)?;
    MatrixAlgebra::from_spanning_set(rep.dim(), &basis, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify_type;
    use crate::division::{embed_quaternion, AlgebraType, QuaternionMatrix};
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn jmat() -> RealMatrix {
        RealMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap()
    }

    fn e(n: usize, i: usize) -> Vector {
        DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    fn cols(n: usize, idx: &[usize]) -> RealMatrix {
        numeric::matrix_from_columns(&idx.iter().map(|&i| e(n, i)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn pcs_examples() {
        assert_eq!(build_pcs(&[1.0]).unwrap().matrix(), &jmat());
        let s = build_pcs(&[1.0, 2.0]).unwrap();
        assert_eq!(s.matrix().get(2, 3), -2.0);
        assert_eq!(s.matrix().get(3, 2), 0.5);
        assert!(s.anti_involution_residual() < 1e-15);
        let s = build_pcs(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!((s.matrix().spectral_norm() - 5.0).abs() < 1e-12);
        assert!(s.anti_involution_residual() < 1e-10);
        assert!(matches!(build_pcs(&[0.5]), Err(Error::BadSchedule(_))));
    }

    #[test]
    fn t_vf_examples() {
        let s = build_pcs(&[1.0]).unwrap();
        assert_eq!(t_vf(&e(2, 0), &e(2, 0), &s).unwrap(), RealMatrix::identity(2));
        assert_eq!(t_vf(&DVector::zeros(2), &e(2, 0), &s).unwrap(), RealMatrix::zeros(2, 2));
    }

    #[test]
    fn pcs_commutant_examples() {
        let t = tol();
        let a = pcs_commutant_algebra(&build_pcs(&[1.0]).unwrap(), &t).unwrap();
        assert_eq!(a.dim(), 2);
        assert!(a.contains(&jmat(), &t) && a.is_unital());
        let s = build_pcs(&[1.0, 1.0]).unwrap();
        let a = pcs_commutant_algebra(&s, &t).unwrap();
        assert_eq!(a.dim(), 8);
        assert_eq!(classify_type(&a, &t).unwrap(), AlgebraType::Complex);
        let tv = t_vf(&DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]), &DVector::from_vec(vec![0.2, 1.0, -1.0, 0.0]), &s).unwrap();
        assert!(a.contains(&tv, &t));
    }

    #[test]
    fn generic_pair_examples() {
        let t = tol();
        let u = numeric::block_diag(&[jmat(), jmat()]);
        let pair = GenericPair::new(cols(4, &[0, 1]), cols(4, &[2, 3])).unwrap();
        let s = generic_pair_pcs(&pair, &u, &t).unwrap();
        assert!((s.pcs.matrix() - &numeric::block_diag(&[jmat(), -&jmat()])).frobenius_norm() < 1e-14);
        assert!((s.condition - 1.0).abs() < 1e-12);

        let same = GenericPair::new(cols(4, &[0, 1]), cols(4, &[0, 1])).unwrap();
        assert!(matches!(generic_pair_pcs(&same, &u, &t), Err(Error::NotComplementary(_))));
        let bad = GenericPair::new(cols(4, &[0, 2]), cols(4, &[1, 3])).unwrap();
        assert!(matches!(generic_pair_pcs(&bad, &u, &t), Err(Error::NotInvariant(_))));
    }

    fn tilted(theta: f64) -> GenericPair {
        let (c, s) = (theta.cos(), theta.sin());
        let n = RealMatrix::from_rows(&[&[c, 0.0], &[0.0, c], &[s, 0.0], &[0.0, s]]).unwrap();
        GenericPair::new(cols(4, &[0, 1]), n).unwrap()
    }

    #[test]
    fn tilted_pair_norm_grows() {
        let t = tol();
        let u = numeric::block_diag(&[jmat(), jmat()]);
        let mut last = 0.0;
        for theta in [1.2, 0.8, 0.4, 0.2, 0.1, 0.05, 0.01] {
            let s = generic_pair_pcs(&tilted(theta), &u, &t).unwrap();
            let norm = s.pcs.matrix().spectral_norm();
            // closed form: the oblique projection onto N has norm 1/sin(theta)
            assert!(norm > last);
            assert!(norm <= 2.0 / theta.sin() + 1.0);
            assert!(s.pcs.anti_involution_residual() < 1e-8 * norm * norm);
            last = norm;
        }
    }

    #[test]
    fn group_table() {
        use GroupElement::*;
        assert_eq!(I.mul(J), K);
        assert_eq!(J.mul(I), MinusK);
        assert_eq!(I.inverse(), MinusI);
        assert_eq!(I.conjugated_by(J), MinusI);
        assert_eq!(J.conjugated_by(J), J);
        assert_eq!(K.conjugated_by(J), MinusK);
    }

    #[test]
    fn rep_examples() {
        let t = tol();
        let rep = build_quaternion_rep(&[RealMatrix::identity(4)], &t).unwrap();
        assert_eq!(rep.get(GroupElement::I), &embed_quaternion(&QuaternionMatrix::scalar(Quaternion::I)));
        let phi2 = RealMatrix::from_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 2.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]).unwrap();
        let rep = build_quaternion_rep(&[RealMatrix::identity(4), phi2], &t).unwrap();
        assert!(rep.homomorphism_residual() < 1e-12);
        assert!(rep.max_norm() > 1.5);
        assert_eq!(build_quaternion_rep(&[RealMatrix::zeros(4, 4)], &t), Err(Error::SingularTwist(0)));
    }

    fn canonical_pair() -> GenericPair {
        GenericPair::new(cols(8, &[0, 1, 2, 3]), cols(8, &[4, 5, 6, 7])).unwrap()
    }

    #[test]
    fn twisted_examples() {
        let t = tol();
        let tau = build_quaternion_rep(&[RealMatrix::identity(4), RealMatrix::identity(4)], &t).unwrap();
        let pi = twisted_rep(&canonical_pair(), &tau, GroupElement::J, &t).unwrap();
        let li = Quaternion::I.left_matrix();
        let lj = Quaternion::J.left_matrix();
        assert!((pi.get(GroupElement::I) - &numeric::block_diag(&[li.clone(), -&li])).frobenius_norm() < 1e-14);
        assert!((pi.get(GroupElement::J) - &numeric::block_diag(&[lj.clone(), lj])).frobenius_norm() < 1e-14);
        assert!(pi.homomorphism_residual() < 1e-12);
    }

    #[test]
    fn swapped_pair_is_conjugate() {
        let t = tol();
        let tau = build_quaternion_rep(&[RealMatrix::identity(4), RealMatrix::identity(4)], &t).unwrap();
        let pair = canonical_pair();
        let a = twisted_rep(&pair, &tau, GroupElement::J, &t).unwrap();
        let b = twisted_rep(&pair.swapped(), &tau, GroupElement::J, &t).unwrap();
        let v = numeric::hstack(&[cols(8, &[4, 5, 6, 7]), cols(8, &[0, 1, 2, 3])]).unwrap();
        let v_inv = v.inverse().unwrap();
        for g in GroupElement::ALL {
            let lhs = &(&v * a.get(g)) * &v_inv;
            assert!((&lhs - b.get(g)).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn mean_examples() {
        let t = tol();
        let rep = build_quaternion_rep(&[RealMatrix::identity(4)], &t).unwrap();
        assert_eq!(group_mean(&RealMatrix::identity(4), &rep).unwrap(), RealMatrix::identity(4).scale(8.0));
        let k = RealMatrix::from_row_major(4, 4, &(0..16).map(|v| (v as f64 * 0.37).sin()).collect::<Vec<_>>()).unwrap();
        let m = group_mean(&k, &rep).unwrap();
        for g in GroupElement::ALL {
            assert!((&(rep.get(g) * &m) - &(&m * rep.get(g))).frobenius_norm() < 1e-12);
        }
        let m = group_mean(&numeric::outer(&e(4, 0), &e(4, 0)), &rep).unwrap();
        assert!((&m - &mean_tensor(&e(4, 0), &e(4, 0), &rep).unwrap()).frobenius_norm() < 1e-14);
    }

    #[test]
    fn popolam_examples() {
        let t = tol();
        let rep = build_quaternion_rep(&[RealMatrix::identity(4)], &t).unwrap();
        let f = solve_popolam(&e(4, 0), &rep, &t).unwrap();
        assert!((f - DVector::from_vec(vec![0.5, 0.0, 0.0, 0.0])).norm() < 1e-14);
        assert_eq!(solve_popolam(&DVector::zeros(4), &rep, &t), Err(Error::ZeroVector));
        let x = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.7]);
        let y = DVector::from_vec(vec![1.0, 0.0, -0.5, 2.0]);
        let f = solve_popolam(&x, &rep, &t).unwrap();
        let tm = mean_tensor(&y, &f, &rep).unwrap();
        assert!((tm.apply(&x) - y).norm() < 1e-12);
    }

    #[test]
    fn rep_commutant_examples() {
        let t = tol();
        let rep = build_quaternion_rep(&[RealMatrix::identity(4)], &t).unwrap();
        let a = rep_commutant_algebra(&rep, &t).unwrap();
        assert_eq!(a.dim(), 4);
        for q in [Quaternion::I, Quaternion::J, Quaternion::K] {
            assert!(a.contains(&q.right_matrix(), &t));
        }
        let rep = build_quaternion_rep(&[RealMatrix::identity(4), RealMatrix::identity(4)], &t).unwrap();
        let a = rep_commutant_algebra(&rep, &t).unwrap();
        assert_eq!(a.dim(), 16);
        assert_eq!(classify_type(&a, &t).unwrap(), AlgebraType::Quaternion);
        let k = RealMatrix::from_row_major(8, 8, &(0..64).map(|v| (v as f64 * 0.91).cos()).collect::<Vec<_>>()).unwrap();
        assert!(a.contains(&group_mean(&k, &rep).unwrap(), &t));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn t_vf_is_rank_two_and_commutes(
            sched in proptest::collection::vec(1.0f64..6.0, 3),
            v in proptest::collection::vec(-1.0f64..1.0, 6),
            f in proptest::collection::vec(-1.0f64..1.0, 6),
        ) {
            let v = DVector::from_vec(v);
            let f = DVector::from_vec(f);
            prop_assume!(v.norm() > 0.1 && f.norm() > 0.1);
            let s = build_pcs(&sched).unwrap();
            prop_assert!(s.anti_involution_residual() <= 1e-10);
            let tm = t_vf(&v, &f, &s).unwrap();
            let comm = (&(&tm * s.matrix()) - &(s.matrix() * &tm)).frobenius_norm();
            prop_assert!(comm <= 1e-10);
            prop_assert_eq!(numeric::rank_of(&tm, &tol()).unwrap(), 2);
            // range is S-invariant
            let range = numeric::range_basis(&tm, &tol()).unwrap();
            let r = subspace_invariance(s.matrix(), &numeric::matrix_from_columns(&range).unwrap(), &tol()).unwrap();
            prop_assert!(r <= 1e-10);
        }

        #[test]
        fn twisted_reps_are_homomorphisms(diag in proptest::collection::vec(0.5f64..3.0, 4)) {
            let t = tol();
            let phi = RealMatrix::wrap(DMatrix::from_diagonal(&DVector::from_vec(diag)));
            let tau = build_quaternion_rep(&[phi.clone(), phi], &t).unwrap();
            let pi = twisted_rep(&canonical_pair(), &tau, GroupElement::J, &t).unwrap();
            prop_assert!(pi.homomorphism_residual() <= 1e-10);
        }
    }
}
