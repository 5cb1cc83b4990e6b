//! Matrix algebras: generated closure, commutants, transitivity, minimal
//! rank, strict interpolation, real Riesz projections and idempotent
//! lifting.
//!
//! Algebras are stored by a basis that is orthonormal for the trace inner
//! product `tr(A^T B)`, so expansion residuals are plain projections.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::division::{frobenius_recognize, DivisionStructure};
use crate::error::{Error, Result};
use crate::numeric::{self, RealMatrix, Tolerance, Vector};

/// Seed used whenever a caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_PROBES: usize = 8;

const SEARCH_ATTEMPTS: usize = 64;

/// Incrementally grown orthonormal basis of a subspace of R^m.
#[derive(Debug, Clone, Default)]
pub(crate) struct OrthoSpan {
    basis: Vec<Vector>,
}

impl OrthoSpan {
    /// Adds the direction of `v` if its normalized remainder after two
    /// Gram-Schmidt passes exceeds `threshold`. Returns the new unit vector.
    pub(crate) fn try_add(&mut self, v: &Vector, threshold: f64) -> Option<Vector> {
        self.try_add_above(v, threshold, 0.0)
    }

    /// As [`try_add`](Self::try_add), additionally requiring the remainder
    /// of `v` itself (not normalized) to exceed `floor`.
    pub(crate) fn try_add_above(&mut self, v: &Vector, threshold: f64, floor: f64) -> Option<Vector> {
        let norm = v.norm();
        if norm <= floor || !norm.is_finite() {
            return None;
        }
        let mut r = v / norm;
        self.reduce(&mut r);
        let rn = r.norm();
        if rn <= threshold || rn * norm <= floor {
            return None;
        }
        r /= rn;
        self.basis.push(r.clone());
        Some(r)
    }

    fn reduce(&self, r: &mut Vector) {
        for _ in 0..2 {
            for b in &self.basis {
                let c = b.dot(r);
                r.axpy(-c, b, 1.0);
            }
        }
    }

    pub(crate) fn residual(&self, v: &Vector) -> f64 {
        let mut r = v.clone();
        self.reduce(&mut r);
        r.norm()
    }

    pub(crate) fn len(&self) -> usize {
        self.basis.len()
    }

    pub(crate) fn into_basis(self) -> Vec<Vector> {
        self.basis
    }
}

/// Finite-dimensional algebra of n x n real matrices.
#[derive(Debug, Clone)]
pub struct MatrixAlgebra {
    n: usize,
    basis: Vec<RealMatrix>,
    unital: bool,
}

impl MatrixAlgebra {
    /// Algebra spanned by `elements`. The span is not closed under
    /// multiplication here; use [`generate_algebra`] for that.
    pub fn from_spanning_set(n: usize, elements: &[RealMatrix], tol: &Tolerance) -> Result<Self> {
        check_square_family(n, elements)?;
        let cols: Vec<Vector> = elements.iter().map(RealMatrix::vec).collect();
        let mut span = OrthoSpan::default();
        if !cols.is_empty() {
            for v in numeric::range_basis(&numeric::matrix_from_columns(&cols)?, tol)? {
                span.try_add(&v, tol.identity_bound(1.0));
            }
        }
        Ok(Self::from_span(n, span, tol))
    }

    fn from_span(n: usize, span: OrthoSpan, tol: &Tolerance) -> Self {
        let basis: Vec<RealMatrix> = span.into_basis().iter().map(|v| RealMatrix::unvec(v, n, n)).collect();
        let mut alg = MatrixAlgebra { n, basis, unital: false };
        let id = RealMatrix::identity(n);
        alg.unital = alg.expansion_residual(&id) <= tol.identity_bound((n as f64).sqrt());
        alg
    }

    /// The full matrix algebra M_n(R).
    pub fn full(n: usize) -> Self {
        let basis = (0..n * n)
            .map(|t| RealMatrix::wrap(DMatrix::from_fn(n, n, |r, c| if c * n + r == t { 1.0 } else { 0.0 })))
            .collect();
        MatrixAlgebra { n, basis, unital: true }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[RealMatrix] {
        &self.basis
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    /// Frobenius distance from `x` to the span.
    pub fn expansion_residual(&self, x: &RealMatrix) -> f64 {
        let mut r = x.as_matrix().clone();
        for _ in 0..2 {
            for b in &self.basis {
                let c = b.dot(&RealMatrix::wrap(r.clone()));
                r -= b.as_matrix() * c;
            }
        }
        r.norm()
    }

    pub fn contains(&self, x: &RealMatrix, tol: &Tolerance) -> bool {
        self.expansion_residual(x) <= tol.identity_bound(x.frobenius_norm())
    }

    /// Largest expansion residual of a member of `other` (each normalized).
    pub fn containment_residual(&self, other: &MatrixAlgebra) -> f64 {
        other
            .basis
            .iter()
            .map(|b| self.expansion_residual(b) / b.frobenius_norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// Whether both algebras have the same span.
    pub fn same_span(&self, other: &MatrixAlgebra, tol: &Tolerance) -> bool {
        self.n == other.n
            && self.dim() == other.dim()
            && self.containment_residual(other) <= tol.identity_bound(1.0)
            && other.containment_residual(self) <= tol.identity_bound(1.0)
    }

    pub fn element(&self, coeffs: &[f64]) -> RealMatrix {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (b, c) in self.basis.iter().zip(coeffs) {
            out += b.as_matrix() * *c;
        }
        RealMatrix::wrap(out)
    }

    pub fn random_element<R: Rng>(&self, rng: &mut R) -> RealMatrix {
        let coeffs: Vec<f64> = (0..self.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        self.element(&coeffs)
    }

    /// Largest expansion residual of a product of basis elements.
    pub fn closure_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in &self.basis {
            for b in &self.basis {
                worst = worst.max(self.expansion_residual(&(a * b)));
            }
        }
        worst
    }

    /// `{P X P^-1 : X in A}`.
    pub fn conjugate(&self, p: &RealMatrix, tol: &Tolerance) -> Result<Self> {
        if !p.is_square() || p.rows() != self.n {
            return Err(Error::ShapeMismatch("similarity has the wrong size".into()));
        }
        let p_inv = p
            .inverse()
            .ok_or_else(|| Error::Precondition("similarity is singular".into()))?;
        let conj: Vec<RealMatrix> = self.basis.iter().map(|b| &(p * b) * &p_inv).collect();
        Self::from_spanning_set(self.n, &conj, tol)
    }

    pub fn transpose(&self) -> Self {
        MatrixAlgebra {
            n: self.n,
            basis: self.basis.iter().map(RealMatrix::transpose).collect(),
            unital: self.unital,
        }
    }
}

fn check_square_family(n: usize, mats: &[RealMatrix]) -> Result<()> {
    if n == 0 {
        return Err(Error::ShapeMismatch("ambient dimension must be positive".into()));
    }
    if let Some(bad) = mats.iter().find(|m| m.rows() != n || m.cols() != n) {
        return Err(Error::ShapeMismatch(format!(
            "expected {n}x{n} matrices, found {}x{}",
            bad.rows(),
            bad.cols()
        )));
    }
    Ok(())
}

/// Smallest algebra containing `generators` (and the identity when asked),
/// grown breadth-first by right multiplication with the generators. A
/// product is new only if its remainder is above roundoff relative to
/// `||x|| ||g||`, so products that vanish exactly are not mistaken for new
/// directions.
pub fn generate_algebra(generators: &[RealMatrix], include_identity: bool, tol: &Tolerance) -> Result<MatrixAlgebra> {
    let n = generators
        .first()
        .map(RealMatrix::rows)
        .ok_or_else(|| Error::ShapeMismatch("at least one generator is required".into()))?;
    check_square_family(n, generators)?;
    let threshold = tol.identity_bound(1.0);
    let mut span = OrthoSpan::default();
    let mut queue = std::collections::VecDeque::new();
    if include_identity {
        if let Some(v) = span.try_add(&RealMatrix::identity(n).vec(), threshold) {
            queue.push_back(v);
        }
    }
    for g in generators {
        if let Some(v) = span.try_add(&g.vec(), threshold) {
            queue.push_back(v);
        }
    }
    let unit_gens: Vec<RealMatrix> =
        generators.iter().filter(|g| g.frobenius_norm() > 0.0).map(|g| g.scale(1.0 / g.frobenius_norm())).collect();
    let floor = tol.cutoff(1.0);
    let threshold = tol.rel_eps;
    while let Some(v) = queue.pop_front() {
        if span.len() == n * n {
            break;
        }
        let x = RealMatrix::unvec(&v, n, n);
        for g in &unit_gens {
            if let Some(w) = span.try_add_above(&(&x * g).vec(), threshold, floor) {
                queue.push_back(w);
            }
        }
    }
    Ok(MatrixAlgebra::from_span(n, span, tol))
}

/// Matrix of `X -> X B - B X` acting on vec(X) (column-major).
fn commutator_map(b: &RealMatrix) -> DMatrix<f64> {
    let n = b.rows();
    let id = DMatrix::<f64>::identity(n, n);
    b.as_matrix().transpose().kronecker(&id) - id.kronecker(b.as_matrix())
}

/// Trace-orthonormal basis of `{X : X M = M X for all M in mats}`.
pub fn commutant_of(mats: &[RealMatrix], n: usize, tol: &Tolerance) -> Result<Vec<RealMatrix>> {
    check_square_family(n, mats)?;
    if mats.is_empty() {
        return Ok(MatrixAlgebra::full(n).basis().to_vec());
    }
    let blocks: Vec<DMatrix<f64>> = mats.iter().map(|m| commutator_map(&m.scale(1.0 / m.frobenius_norm().max(1e-300)))).collect();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut stacked = DMatrix::zeros(rows, n * n);
    let mut r = 0;
    for b in &blocks {
        stacked.view_mut((r, 0), (b.nrows(), n * n)).copy_from(b);
        r += b.nrows();
    }
    Ok(numeric::nullspace_raw(&stacked, tol)
        .iter()
        .map(|v| RealMatrix::unvec(v, n, n))
        .collect())
}

/// Commutant of an algebra. The commutant of two random elements is
/// computed first and then cut down by every basis element it fails to
/// commute with, so the result is exact while the linear systems stay small.
pub fn commutant(a: &MatrixAlgebra, tol: &Tolerance) -> Vec<RealMatrix> {
    let n = a.ambient_dim();
    if a.dim() <= 2 {
        return commutant_of(a.basis(), n, tol).expect("basis is square");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut gens = vec![a.random_element(&mut rng), a.random_element(&mut rng)];
    loop {
        let candidate = commutant_of(&gens, n, tol).expect("square");
        let bound = tol.identity_bound(1.0);
        let offender = a
            .basis()
            .iter()
            .map(|b| {
                let worst = candidate
                    .iter()
                    .map(|c| (&(c * b) - &(b * c)).frobenius_norm())
                    .fold(0.0, f64::max);
                (b, worst)
            })
            .filter(|(_, w)| *w > bound)
            .max_by(|x, y| x.1.total_cmp(&y.1));
        match offender {
            None => return candidate,
            Some((b, _)) => gens.push(b.clone()),
        }
    }
}

/// Proper nonzero invariant subspace, witnessed by a vector whose orbit
/// closure it is.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSubspace {
    pub vector: Vector,
    /// Orthonormal basis.
    pub basis: Vec<Vector>,
}

/// How the transitivity verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Certificate {
    /// Ambient dimension 1: there are no proper nonzero subspaces.
    Trivial,
    /// A probe vector had a deficient orbit.
    OrbitProbe,
    /// A probe of the transposed algebra had a deficient orbit; the
    /// orthogonal complement is invariant.
    TransposeProbe,
    /// Nonzero nilpotent ideal; its range is invariant.
    Radical,
    /// Semisimple without the identity; the range of its unit is invariant.
    MissingUnit,
    /// The commutant has a zero divisor; its kernel is invariant.
    CommutantZeroDivisor,
    /// Semisimple, unital, with a division-algebra commutant: irreducible.
    DivisionCommutant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitivityReport {
    pub transitive: bool,
    pub witness: Option<InvariantSubspace>,
    pub seed: u64,
    pub probes: usize,
    pub certificate: Certificate,
}

fn orbit_basis(a: &MatrixAlgebra, x: &Vector, tol: &Tolerance) -> Vec<Vector> {
    let cols: Vec<Vector> = a.basis().iter().map(|b| b.apply(x)).collect();
    let mut span = OrthoSpan::default();
    let scale = cols.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale <= tol.abs_eps {
        return Vec::new();
    }
    let m = numeric::matrix_from_columns(&cols).expect("orbit columns");
    for v in numeric::range_basis(&m, tol).expect("finite") {
        span.try_add(&v, tol.identity_bound(1.0));
    }
    span.into_basis()
}

/// Residual of `B W ⊆ W` over the basis, relative to `||B||`.
pub fn invariance_residual(a: &MatrixAlgebra, subspace: &[Vector]) -> f64 {
    let mut span = OrthoSpan::default();
    for v in subspace {
        span.try_add(v, 1e-12);
    }
    let mut worst = 0.0f64;
    for b in a.basis() {
        let scale = b.spectral_norm().max(f64::MIN_POSITIVE);
        for v in subspace {
            worst = worst.max(span.residual(&b.apply(v)) / scale);
        }
    }
    worst
}

fn witness_in(a: &MatrixAlgebra, subspace: &[Vector], tol: &Tolerance) -> Result<InvariantSubspace> {
    let n = a.ambient_dim();
    let x = subspace
        .first()
        .cloned()
        .ok_or_else(|| Error::Inconsistent("empty invariant subspace".into()))?;
    let orbit = orbit_basis(a, &x, tol);
    let basis = if orbit.is_empty() { vec![x.normalize()] } else { orbit };
    if basis.len() >= n {
        return Err(Error::Inconsistent("witness subspace is not proper".into()));
    }
    let r = invariance_residual(a, &basis);
    if r > tol.identity_bound(1.0) {
        return Err(Error::Inconsistent(format!("witness subspace fails invariance (residual {r:.3e})")));
    }
    Ok(InvariantSubspace { vector: x, basis })
}

fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vector {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        if v.norm() > 1e-3 {
            return v.normalize();
        }
    }
}

fn orthogonal_complement(vs: &[Vector], n: usize, tol: &Tolerance) -> Vec<Vector> {
    let rows = DMatrix::from_fn(vs.len(), n, |i, j| vs[i][j]);
    numeric::nullspace_raw(&rows, tol)
}

/// Radical of `span(basis)` via the trace form: `{x : tr(xy) = 0 for all y}`
/// is the largest nilpotent ideal of a real matrix algebra.
fn trace_radical(basis: &[RealMatrix], tol: &Tolerance) -> Vec<RealMatrix> {
    let d = basis.len();
    if d == 0 {
        return Vec::new();
    }
    let gram = DMatrix::from_fn(d, d, |i, j| basis[i].transpose().dot(&basis[j]));
    numeric::nullspace_raw(&gram, tol)
        .iter()
        .map(|c| {
            let mut out = DMatrix::zeros(basis[0].rows(), basis[0].cols());
            for (b, ci) in basis.iter().zip(c.iter()) {
                out += b.as_matrix() * *ci;
            }
            RealMatrix::wrap(out)
        })
        .collect()
}

/// Decides transitivity. Orbits of probe vectors (standard basis, `trials`
/// seeded random vectors, kernels of basis elements, for the algebra and
/// its transpose) are tried first; if all are full, the algebraic
/// certificate (trivial radical, identity present, division commutant) is
/// checked, and any failure there also yields an explicit invariant
/// subspace.
pub fn is_transitive(a: &MatrixAlgebra, tol: &Tolerance, trials: usize, seed: u64) -> Result<TransitivityReport> {
    let n = a.ambient_dim();
    let report = |transitive, witness, probes, certificate| TransitivityReport {
        transitive,
        witness,
        seed,
        probes,
        certificate,
    };
    if n == 1 {
        return Ok(report(true, None, 0, Certificate::Trivial));
    }
    if a.dim() == 0 {
        let e1 = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let w = InvariantSubspace { vector: e1.clone(), basis: vec![e1] };
        return Ok(report(false, Some(w), 1, Certificate::OrbitProbe));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes: Vec<Vector> = (0..n)
        .map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 }))
        .collect();
    probes.extend((0..trials).map(|_| random_unit(&mut rng, n)));
    for b in a.basis() {
        probes.extend(numeric::nullspace_raw(b.as_matrix(), tol));
    }
    let at = a.transpose();
    let mut count = 0;
    for x in &probes {
        count += 1;
        let orbit = orbit_basis(a, x, tol);
        if orbit.len() < n {
            let basis = if orbit.is_empty() { vec![x.normalize()] } else { orbit };
            let r = invariance_residual(a, &basis);
            if r > tol.identity_bound(1.0) {
                return Err(Error::Inconsistent(format!("orbit closure fails invariance (residual {r:.3e})")));
            }
            let w = InvariantSubspace { vector: x.clone(), basis };
            return Ok(report(false, Some(w), count, Certificate::OrbitProbe));
        }
        count += 1;
        let orbit_t = orbit_basis(&at, x, tol);
        if orbit_t.len() < n {
            let u = if orbit_t.is_empty() { vec![x.normalize()] } else { orbit_t };
            let w = witness_in(a, &orthogonal_complement(&u, n, tol), tol)?;
            return Ok(report(false, Some(w), count, Certificate::TransposeProbe));
        }
    }

    let radical = trace_radical(a.basis(), tol);
    if !radical.is_empty() {
        let range = numeric::range_basis(&numeric::hstack(&radical)?, tol)?;
        let w = witness_in(a, &range, tol)?;
        return Ok(report(false, Some(w), count, Certificate::Radical));
    }

    if !a.is_unital() {
        let unit = semisimple_unit(a, tol)?;
        let range = numeric::range_basis(&unit, tol)?;
        let w = witness_in(a, &range, tol)?;
        return Ok(report(false, Some(w), count, Certificate::MissingUnit));
    }

    let d = commutant(a, tol);
    if frobenius_recognize(&d, tol).is_ok() {
        return Ok(report(true, None, count, Certificate::DivisionCommutant));
    }
    let kernel = commutant_zero_divisor_kernel(&d, n, tol, &mut rng)?;
    let w = witness_in(a, &kernel, tol)?;
    Ok(report(false, Some(w), count, Certificate::CommutantZeroDivisor))
}

/// Unit element of a semisimple algebra: `e` with `e B = B` for every basis
/// element `B`.
fn semisimple_unit(a: &MatrixAlgebra, tol: &Tolerance) -> Result<RealMatrix> {
    let n = a.ambient_dim();
    let d = a.dim();
    let nn = n * n;
    let mut sys = DMatrix::zeros(d * nn, d);
    let mut rhs = DMatrix::zeros(d * nn, 1);
    for (j, bj) in a.basis().iter().enumerate() {
        for (k, bk) in a.basis().iter().enumerate() {
            sys.view_mut((j * nn, k), (nn, 1)).copy_from(&(bk * bj).vec());
        }
        rhs.view_mut((j * nn, 0), (nn, 1)).copy_from(&bj.vec());
    }
    let coeffs = numeric::lstsq_raw(&sys, &rhs, tol);
    let residual = (&sys * &coeffs - &rhs).norm();
    if residual > tol.identity_bound(1.0) {
        return Err(Error::Inconsistent(format!(
            "semisimple algebra has no left unit (residual {residual:.3e})"
        )));
    }
    Ok(a.element(coeffs.as_slice()))
}

/// Kernel of a singular nonzero element of a commutant that is not a
/// division algebra. Such a kernel is invariant under the algebra.
fn commutant_zero_divisor_kernel<R: Rng>(
    d: &[RealMatrix],
    n: usize,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<Vec<Vector>> {
    let radical = trace_radical(d, tol);
    if let Some(nil) = radical.first() {
        let ker = numeric::nullspace_of(nil, tol)?;
        if !ker.is_empty() && ker.len() < n {
            return Ok(ker);
        }
    }
    let dalg = MatrixAlgebra::from_spanning_set(n, d, tol)?;
    let loose = Tolerance { rel_eps: tol.rel_eps.sqrt(), abs_eps: tol.abs_eps };
    let id = RealMatrix::identity(n);
    for _ in 0..SEARCH_ATTEMPTS {
        let c = dalg.random_element(rng);
        for lambda in c.as_matrix().complex_eigenvalues().iter() {
            let m = if lambda.im.abs() <= loose.cutoff(lambda.norm().max(1.0)) {
                &c - &id.scale(lambda.re)
            } else {
                let c2 = &c * &c;
                &(&c2 - &c.scale(2.0 * lambda.re)) + &id.scale(lambda.norm_sqr())
            };
            if m.frobenius_norm() <= tol.identity_bound(c.frobenius_norm()) {
                continue;
            }
            let ker = numeric::nullspace_of(&m, &loose)?;
            if !ker.is_empty() && ker.len() < n {
                return Ok(ker);
            }
        }
    }
    Err(Error::SearchExhausted(SEARCH_ATTEMPTS))
}

/// Real span of `{v} ∪ {U v : U a unit}` over all given vectors.
pub fn division_span(d: &DivisionStructure, vectors: &[Vector]) -> Vec<Vector> {
    let mut out = Vec::with_capacity(vectors.len() * d.commutant_dim());
    for v in vectors {
        out.push(v.clone());
        out.extend(d.units.iter().map(|u| u.apply(v)));
    }
    out
}

fn real_rank(vectors: &[Vector], tol: &Tolerance) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    numeric::rank_of(&numeric::matrix_from_columns(vectors).expect("same length"), tol).expect("finite")
}

/// Indices of a maximal D-independent subfamily, chosen greedily in input
/// order: a vector is kept when the D-span of the kept vectors grows.
pub fn greedy_division_independent(d: &DivisionStructure, vectors: &[Vector], tol: &Tolerance) -> Vec<usize> {
    let mut kept = Vec::new();
    let mut span: Vec<Vector> = Vec::new();
    let k = d.commutant_dim();
    for (i, v) in vectors.iter().enumerate() {
        let mut trial = span.clone();
        trial.extend(division_span(d, std::slice::from_ref(v)));
        if real_rank(&trial, tol) == (kept.len() + 1) * k {
            kept.push(i);
            span = trial;
        }
    }
    kept
}

/// Minimal rank of a nonzero element of a transitive algebra, computed by
/// building an element of D-rank one: `T0 K T0` where `K` maps the first
/// D-basis vector of `range(T0)` back onto a preimage and kills the rest.
pub fn min_rank(a: &MatrixAlgebra, d: &DivisionStructure, tol: &Tolerance) -> Result<usize> {
    let n = a.ambient_dim();
    if let Some(m) = d.ambient_dim() {
        if m != n {
            return Err(Error::ShapeMismatch("division structure acts on a different space".into()));
        }
    }
    let t0 = a
        .basis()
        .first()
        .ok_or_else(|| Error::NotTransitive("zero algebra".into()))?;
    let cols = t0.columns();
    let j = (0..n)
        .max_by(|&p, &q| cols[p].norm().total_cmp(&cols[q].norm()))
        .expect("n >= 1");
    let mut ordered = vec![cols[j].clone()];
    ordered.extend(cols.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, c)| c.clone()));
    let chosen = greedy_division_independent(d, &ordered, tol);
    if chosen.first() != Some(&0) {
        return Err(Error::Inconsistent("leading column of T0 vanished".into()));
    }
    let e_j = DVector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
    let pairs: Vec<(Vector, Vector)> = chosen
        .iter()
        .map(|&i| {
            let target = if i == 0 { e_j.clone() } else { DVector::zeros(n) };
            (ordered[i].clone(), target)
        })
        .collect();
    let k = match strict_interpolate(a, &pairs, tol) {
        Ok(sol) => sol.operator,
        Err(Error::NoSolution { residual, .. }) => {
            return Err(Error::NotTransitive(format!(
                "rank-one interpolation is infeasible (residual {residual:.3e})"
            )))
        }
        Err(e) => return Err(e),
    };
    let reduced = &(t0 * &k) * t0;
    let r = numeric::rank_of(&reduced, tol)?;
    if r != d.commutant_dim() {
        return Err(Error::Inconsistent(format!(
            "constructed element has rank {r}, commutant dimension is {}",
            d.commutant_dim()
        )));
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interpolation {
    pub operator: RealMatrix,
    pub coefficients: Vec<f64>,
    pub residual: f64,
}

fn interpolation_system(a: &MatrixAlgebra, pairs: &[(Vector, Vector)]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.ambient_dim();
    if pairs.iter().any(|(x, y)| x.len() != n || y.len() != n) {
        return Err(Error::ShapeMismatch(format!("interpolation vectors must have length {n}")));
    }
    let p = pairs.len();
    let mut sys = DMatrix::zeros(n * p, a.dim());
    let mut rhs = DMatrix::zeros(n * p, 1);
    for (i, (x, y)) in pairs.iter().enumerate() {
        for (k, b) in a.basis().iter().enumerate() {
            sys.view_mut((i * n, k), (n, 1)).copy_from(&b.apply(x));
        }
        rhs.view_mut((i * n, 0), (n, 1)).copy_from(y);
    }
    Ok((sys, rhs))
}

/// Element `T` of the algebra with `T x_i = y_i`, minimum coefficient norm.
pub fn strict_interpolate(a: &MatrixAlgebra, pairs: &[(Vector, Vector)], tol: &Tolerance) -> Result<Interpolation> {
    let (sys, rhs) = interpolation_system(a, pairs)?;
    if sys.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let coeffs = if a.dim() == 0 { DMatrix::zeros(0, 1) } else { numeric::lstsq_raw(&sys, &rhs, tol) };
    let residual = if a.dim() == 0 { rhs.norm() } else { (&sys * &coeffs - &rhs).norm() };
    let ymax = pairs.iter().map(|(_, y)| y.norm()).fold(0.0, f64::max);
    let bound = tol.identity_bound(ymax);
    if residual > bound {
        return Err(Error::NoSolution { residual, bound });
    }
    let coefficients: Vec<f64> = coeffs.iter().copied().collect();
    Ok(Interpolation { operator: a.element(&coefficients), coefficients, residual })
}

/// Smallest residual of `T x_i = y_i` over the algebra, where target
/// `free` ranges over unit vectors and every other target is zero.
pub(crate) fn min_residual_over_unit_targets(a: &MatrixAlgebra, sources: &[Vector], free: usize, tol: &Tolerance) -> Result<f64> {
    let n = a.ambient_dim();
    let pairs: Vec<(Vector, Vector)> = sources.iter().map(|x| (x.clone(), DVector::zeros(n))).collect();
    let (sys, _) = interpolation_system(a, &pairs)?;
    // orthonormal basis of the column space of the system
    let q = if sys.ncols() == 0 {
        Vec::new()
    } else {
        numeric::range_basis(&RealMatrix::new(sys)?, tol)?
    };
    // residual^2 = y^T E^T (I - QQ^T) E y, E embedding the free block
    let mut gram = DMatrix::<f64>::identity(n, n);
    for qv in &q {
        let block = qv.rows(free * n, n).into_owned();
        gram -= &block * block.transpose();
    }
    let eig = nalgebra::SymmetricEigen::new(gram);
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(lo.max(0.0).sqrt())
}

/// `K` in the algebra with `{K v_i}` linearly independent.
pub fn independent_image(a: &MatrixAlgebra, vectors: &[Vector], tol: &Tolerance, seed: u64) -> Result<RealMatrix> {
    let n = a.ambient_dim();
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::ShapeMismatch(format!("vectors must have length {n}")));
    }
    let m = vectors.len();
    let works = |k: &RealMatrix| {
        let imgs: Vec<Vector> = vectors.iter().map(|v| k.apply(v)).collect();
        real_rank(&imgs, tol) == m
    };
    if a.is_unital() {
        let id = RealMatrix::identity(n);
        if works(&id) {
            return Ok(id);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SEARCH_ATTEMPTS {
        let k = a.random_element(&mut rng);
        if works(&k) {
            return Ok(k);
        }
    }
    Err(Error::SearchExhausted(SEARCH_ATTEMPTS))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RieszProjection {
    pub projection: RealMatrix,
    /// Distance from the projection to `span{T, T^2, ..., T^n}`.
    pub in_algebra_residual: f64,
    /// Eigenvalues of `T` captured by the cluster.
    pub selected: Vec<Complex64>,
    /// Distance between captured and remaining eigenvalues.
    pub gap: f64,
}

/// Swaps the diagonal entries `k, k+1` of an upper-triangular complex Schur
/// factor with a unitary rotation, updating the Schur vectors.
fn swap_adjacent(t: &mut DMatrix<Complex64>, q: &mut DMatrix<Complex64>, k: usize) {
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let c = t[(k, k + 1)];
    // eigenvector of the 2x2 block for eigenvalue b
    let z1 = c;
    let z2 = b - a;
    let norm = (z1.norm_sqr() + z2.norm_sqr()).sqrt();
    if norm == 0.0 {
        return;
    }
    let (z1, z2) = (z1 / norm, z2 / norm);
    // Z = [[z1, -conj(z2)], [z2, conj(z1)]]
    let zmat = nalgebra::Matrix2::new(z1, -z2.conj(), z2, z1.conj());
    let zh = zmat.adjoint();
    let ncols = t.ncols();
    let rows = t.view((k, 0), (2, ncols)).into_owned();
    t.view_mut((k, 0), (2, ncols)).copy_from(&(zh * rows));
    let nrows = t.nrows();
    let cols = t.view((0, k), (nrows, 2)).into_owned();
    t.view_mut((0, k), (nrows, 2)).copy_from(&(cols * zmat));
    t[(k + 1, k)] = Complex64::new(0.0, 0.0);
    let qn = q.nrows();
    let qcols = q.view((0, k), (qn, 2)).into_owned();
    q.view_mut((0, k), (qn, 2)).copy_from(&(qcols * zmat));
}

/// Real spectral projection of `T` onto the invariant subspace of the
/// eigenvalues near `cluster` (the cluster is closed under conjugation
/// implicitly). Computed in the complexification: the complex Schur form
/// is reordered so the cluster comes first, the off-diagonal block is
/// removed with a triangular Sylvester solve, and the real part is taken.
pub fn riesz_projection(t: &RealMatrix, cluster: &[Complex64], tol: &Tolerance) -> Result<RieszProjection> {
    if !t.is_square() {
        return Err(Error::ShapeMismatch("riesz_projection needs a square matrix".into()));
    }
    if t.as_matrix().iter().any(|v| !v.is_finite()) || cluster.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if cluster.is_empty() {
        return Err(Error::Precondition("empty eigenvalue cluster".into()));
    }
    let n = t.rows();
    let sep = 10.0 * tol.cutoff(t.spectral_norm());
    if cluster.iter().any(|c| c.norm() <= sep) {
        return Err(Error::ClusterContainsZero);
    }
    let tc: DMatrix<Complex64> = t.as_matrix().map(|v| Complex64::new(v, 0.0));
    let (mut q, mut u) = nalgebra::Schur::new(tc).unpack();

    let eig: Vec<Complex64> = (0..n).map(|i| u[(i, i)]).collect();
    let dist = |mu: Complex64| {
        cluster
            .iter()
            .flat_map(|c| [(mu - c).norm(), (mu - c.conj()).norm()])
            .fold(f64::INFINITY, f64::min)
    };
    // eigenvalues within `radius` of a cluster point belong to it; anything
    // else closer than ten radii makes the split ill-posed
    let radius = tol.identity_bound(t.spectral_norm());
    if cluster.iter().any(|c| eig.iter().all(|mu| (mu - c).norm() > radius)) {
        return Err(Error::Precondition("a cluster point is not an eigenvalue".into()));
    }
    let inside: Vec<bool> = eig.iter().map(|mu| dist(*mu) <= radius).collect();
    let selected: Vec<Complex64> = eig.iter().zip(&inside).filter(|(_, s)| **s).map(|(m, _)| *m).collect();
    if selected.iter().any(|mu| mu.norm() <= radius) {
        return Err(Error::ClusterContainsZero);
    }
    let mut gap = f64::INFINITY;
    for (mu, si) in eig.iter().zip(&inside) {
        for (nu, sj) in eig.iter().zip(&inside) {
            if *si && !*sj {
                gap = gap.min((mu - nu).norm());
            }
        }
    }
    if gap < 10.0 * radius {
        return Err(Error::ClusterNotSeparated(gap));
    }

    // bubble selected eigenvalues to the leading block
    let mut flags = inside.clone();
    for _ in 0..n {
        let mut moved = false;
        for k in 0..n.saturating_sub(1) {
            if !flags[k] && flags[k + 1] {
                swap_adjacent(&mut u, &mut q, k);
                flags.swap(k, k + 1);
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    let s = selected.len();
    let projection = if s == n {
        RealMatrix::identity(n)
    } else {
        // U11 Y - Y U22 = U12, column by column
        let u11 = u.view((0, 0), (s, s)).into_owned();
        let u12 = u.view((0, s), (s, n - s)).into_owned();
        let u22 = u.view((s, s), (n - s, n - s)).into_owned();
        let mut y = DMatrix::<Complex64>::zeros(s, n - s);
        for j in 0..(n - s) {
            let mut rhs = u12.column(j).into_owned();
            for l in 0..j {
                rhs += y.column(l) * u22[(l, j)];
            }
            let shifted = &u11 - DMatrix::<Complex64>::identity(s, s) * u22[(j, j)];
            let col = shifted
                .solve_upper_triangular(&rhs)
                .ok_or(Error::ClusterNotSeparated(gap))?;
            y.set_column(j, &col);
        }
        let mut pu = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..s {
            pu[(i, i)] = Complex64::new(1.0, 0.0);
        }
        pu.view_mut((0, s), (s, n - s)).copy_from(&y);
        let p = &q * pu * q.adjoint();
        RealMatrix::new(p.map(|z| z.re))?
    };

    let krylov = generate_algebra(std::slice::from_ref(t), false, &Tolerance { rel_eps: 1e-14, abs_eps: 0.0 })?;
    let in_algebra_residual = krylov.expansion_residual(&projection);
    Ok(RieszProjection { projection, in_algebra_residual, selected, gap })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedIdempotent {
    pub projection: RealMatrix,
    pub iterations: usize,
}

/// Newton iteration `P <- 3P^2 - 2P^3` from `W`, lifting an idempotent
/// modulo a nilpotent ideal of a commutative algebra.
pub fn lift_idempotent(c: &MatrixAlgebra, ideal: &[RealMatrix], w: &RealMatrix, tol: &Tolerance) -> Result<LiftedIdempotent> {
    let n = c.ambient_dim();
    check_square_family(n, ideal)?;
    check_square_family(n, std::slice::from_ref(w))?;
    let bound = tol.identity_bound(1.0);
    for a in c.basis() {
        for b in c.basis() {
            if (&(a * b) - &(b * a)).frobenius_norm() > bound {
                return Err(Error::NotCommutative);
            }
        }
    }
    if !c.contains(w, tol) {
        return Err(Error::Precondition("W is not in the algebra".into()));
    }
    let ideal_span = MatrixAlgebra::from_spanning_set(n, ideal, tol)?;
    let defect = &(w * w) - w;
    if !ideal_span.contains(&defect, tol) {
        return Err(Error::Precondition("W^2 - W is not in the ideal".into()));
    }

    let max_steps = (n as f64).log2().ceil() as usize + 2;
    let mut p = w.clone();
    let converged = |p: &RealMatrix| {
        let p2 = p * p;
        (&p2 - p).frobenius_norm() <= tol.cutoff(p2.frobenius_norm().max(1.0))
    };
    let mut iterations = 0;
    while !converged(&p) {
        if iterations == max_steps {
            return Err(Error::NoConvergence(max_steps));
        }
        let p2 = &p * &p;
        let p3 = &p2 * &p;
        p = &p2.scale(3.0) - &p3.scale(2.0);
        iterations += 1;
    }
    let drift = &p - w;
    if !ideal_span.contains(&drift, tol) {
        return Err(Error::Inconsistent("lifted idempotent left the coset W + J".into()));
    }
    Ok(LiftedIdempotent { projection: p, iterations })
}
